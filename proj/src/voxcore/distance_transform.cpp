#include "voxrefine/distance_transform.hpp"

#include <algorithm>

#include "voxrefine/voxel_grid.hpp"

namespace voxrefine {
namespace {

// 1D lower envelope of parabolas (Felzenszwalb & Huttenlocher), skipping
// infinite samples. `f` and `out` are strided views into the same volume.
void envelope_1d(const std::int64_t* f, std::int64_t* out, int n, std::size_t stride,
                 std::vector<int>& v, std::vector<double>& z, std::vector<std::int64_t>& tmp) {
    int k = -1;
    for (int q = 0; q < n; ++q) {
        const std::int64_t fq = f[q * stride];
        if (fq >= kNoSite) continue;
        if (k < 0) {
            k = 0;
            v[0] = q;
            z[0] = -1e300;
            z[1] = 1e300;
            continue;
        }
        double s;
        for (;;) {
            const int p = v[k];
            const double fp = static_cast<double>(f[p * stride]);
            s = ((static_cast<double>(fq) + double(q) * q) - (fp + double(p) * p)) / (2.0 * (q - p));
            if (s <= z[k] && k > 0) {
                --k;
                continue;
            }
            break;
        }
        if (s <= z[k]) {
            // k == 0 and the new parabola dominates everywhere.
            v[0] = q;
            z[0] = -1e300;
            z[1] = 1e300;
            continue;
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = 1e300;
    }
    if (k < 0) {
        for (int q = 0; q < n; ++q) tmp[q] = kNoSite;
    } else {
        int j = 0;
        for (int q = 0; q < n; ++q) {
            while (z[j + 1] < q) ++j;
            const std::int64_t d = q - v[j];
            tmp[q] = d * d + f[v[j] * stride];
        }
    }
    for (int q = 0; q < n; ++q) out[q * stride] = tmp[q];
}

}  // namespace

std::vector<std::int64_t> squared_distance_to(const VoxelGrid& grid, bool site_value) {
    const int r = grid.resolution();
    const std::size_t ru = static_cast<std::size_t>(r);
    std::vector<std::int64_t> d(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) d[i] = grid.get(i) == site_value ? 0 : kNoSite;

    std::vector<int> v(ru);
    std::vector<double> z(ru + 1);
    std::vector<std::int64_t> tmp(ru);
    // x, then y, then z.
    for (std::size_t zz = 0; zz < ru; ++zz)
        for (std::size_t y = 0; y < ru; ++y) {
            std::int64_t* line = d.data() + ru * (y + ru * zz);
            envelope_1d(line, line, r, 1, v, z, tmp);
        }
    for (std::size_t zz = 0; zz < ru; ++zz)
        for (std::size_t x = 0; x < ru; ++x) {
            std::int64_t* line = d.data() + x + ru * ru * zz;
            envelope_1d(line, line, r, ru, v, z, tmp);
        }
    for (std::size_t y = 0; y < ru; ++y)
        for (std::size_t x = 0; x < ru; ++x) {
            std::int64_t* line = d.data() + x + ru * y;
            envelope_1d(line, line, r, ru * ru, v, z, tmp);
        }
    return d;
}

}  // namespace voxrefine
