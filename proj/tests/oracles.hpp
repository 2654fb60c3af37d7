#pragma once

// Independent brute-force references used by the unit and acceptance suites.
// Nothing here calls into the code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "voxrefine/rng.hpp"
#include "voxrefine/voxel_grid.hpp"

namespace oracle {

using voxrefine::Coord3;
using voxrefine::Vec3;
using voxrefine::VoxelGrid;

inline VoxelGrid random_grid(int r, double fill, voxrefine::Rng& rng) {
    VoxelGrid g(r);
    for (std::size_t i = 0; i < g.size(); ++i) g.set(i, rng.uniform() < fill);
    return g;
}

/// O(R^6) signed distance: nearest opposite-occupancy voxel center, in
/// normalized units; +-1e9 for uniform grids.
inline std::vector<float> brute_sdf(const VoxelGrid& g) {
    const int r = g.resolution();
    std::vector<float> out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const int xi = static_cast<int>(i % r), yi = static_cast<int>((i / r) % r), zi = static_cast<int>(i / (r * r));
        const bool occ = g.get(i);
        long best = -1;
        for (std::size_t j = 0; j < g.size(); ++j) {
            if (g.get(j) == occ) continue;
            const int xj = static_cast<int>(j % r), yj = static_cast<int>((j / r) % r), zj = static_cast<int>(j / (r * r));
            const long d = long(xi - xj) * (xi - xj) + long(yi - yj) * (yi - yj) + long(zi - zj) * (zi - zj);
            if (best < 0 || d < best) best = d;
        }
        if (best < 0)
            out[i] = occ ? -1e9f : 1e9f;
        else
            out[i] = static_cast<float>((occ ? -1.0 : 1.0) * std::sqrt(double(best)) / r);
    }
    return out;
}

/// Direct evaluation of the two-term chamfer sum over voxel-center clouds.
inline double brute_chamfer(const VoxelGrid& a, const VoxelGrid& b) {
    const auto pts = [](const VoxelGrid& g) {
        std::vector<Vec3> p;
        const int r = g.resolution();
        for (int z = 0; z < r; ++z)
            for (int y = 0; y < r; ++y)
                for (int x = 0; x < r; ++x)
                    if (g.get(x, y, z)) p.push_back({(x + 0.5) / r - 0.5, (y + 0.5) / r - 0.5, (z + 0.5) / r - 0.5});
        return p;
    };
    const auto pa = pts(a), pb = pts(b);
    const auto term = [](const std::vector<Vec3>& from, const std::vector<Vec3>& to) {
        double sum = 0;
        for (const auto& p : from) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& q : to) {
                const double d = (p[0] - q[0]) * (p[0] - q[0]) + (p[1] - q[1]) * (p[1] - q[1]) + (p[2] - q[2]) * (p[2] - q[2]);
                best = std::min(best, d);
            }
            sum += best;
        }
        return sum / from.size();
    };
    return term(pa, pb) + term(pb, pa);
}

/// Occupied-to-(empty or outside) face adjacencies.
inline std::size_t exposed_faces(const VoxelGrid& g) {
    const int r = g.resolution();
    std::size_t n = 0;
    for (int z = 0; z < r; ++z)
        for (int y = 0; y < r; ++y)
            for (int x = 0; x < r; ++x) {
                if (!g.get(x, y, z)) continue;
                const int nb[6][3] = {{x - 1, y, z}, {x + 1, y, z}, {x, y - 1, z}, {x, y + 1, z}, {x, y, z - 1}, {x, y, z + 1}};
                for (const auto& q : nb) {
                    const bool inside = q[0] >= 0 && q[1] >= 0 && q[2] >= 0 && q[0] < r && q[1] < r && q[2] < r;
                    if (!inside || !g.get(q[0], q[1], q[2])) ++n;
                }
            }
    return n;
}

/// Slab test: ray parameter of the first hit with an axis-aligned box, or
/// +inf on a miss.
inline double ray_box(const Vec3& o, const Vec3& d, const Vec3& lo, const Vec3& hi) {
    double t0 = -std::numeric_limits<double>::infinity(), t1 = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) {
        if (d[a] == 0.0) {
            if (o[a] < lo[a] || o[a] > hi[a]) return std::numeric_limits<double>::infinity();
            continue;
        }
        double ta = (lo[a] - o[a]) / d[a], tb = (hi[a] - o[a]) / d[a];
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
    }
    if (t0 > t1 || t1 < 0) return std::numeric_limits<double>::infinity();
    return std::max(t0, 0.0);
}

struct RayHit {
    bool hit = false;
    Coord3 voxel{};
    double t = 0;
    /// Second-best hit distance among other voxels (for ambiguity checks).
    double runner_up = std::numeric_limits<double>::infinity();
};

/// Nearest occupied voxel along a ray by testing every voxel box.
inline RayHit cast(const VoxelGrid& g, const Vec3& o, const Vec3& d) {
    RayHit best;
    best.t = std::numeric_limits<double>::infinity();
    const int r = g.resolution();
    for (int z = 0; z < r; ++z)
        for (int y = 0; y < r; ++y)
            for (int x = 0; x < r; ++x) {
                if (!g.get(x, y, z)) continue;
                const Vec3 lo{double(x) / r - 0.5, double(y) / r - 0.5, double(z) / r - 0.5};
                const Vec3 hi{double(x + 1) / r - 0.5, double(y + 1) / r - 0.5, double(z + 1) / r - 0.5};
                const double t = ray_box(o, d, lo, hi);
                if (t < best.t) {
                    best.runner_up = best.t;
                    best.t = t;
                    best.voxel = {x, y, z};
                    best.hit = true;
                } else if (t < best.runner_up) {
                    best.runner_up = t;
                }
            }
    return best;
}

}  // namespace oracle
