#include "voxrefine/corrupt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "voxrefine/distance_transform.hpp"
#include "voxrefine/error.hpp"

namespace voxrefine::corrupt {

namespace table {
const std::vector<double> list_a{0.01, 0.02, 0.03, 0.04, 0.05, 0.07, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40};
const std::vector<double> list_b{0.005, 0.01, 0.02, 0.03, 0.04, 0.05, 0.08, 0.12, 0.15, 0.20};
const std::vector<double> list_c{1e-4, 2.5e-4, 5e-4, 1e-3, 2e-3};
const std::vector<double> list_d{1e-5, 2e-5, 5e-5, 1e-4};
const std::vector<double> list_e{8e-4, 2e-3, 5e-3, 8e-3};
const std::vector<int> list_f{8, 10, 12, 14, 16, 18, 20, 25, 30};
const std::vector<int> mask_res{16, 8, 8, 4};
}  // namespace table

std::string to_string(Family f) {
    switch (f) {
        case Family::pseudo_vfm: return "pseudo_vfm";
        case Family::synthetic: return "synthetic";
        case Family::halfspace: return "halfspace";
    }
    return "?";
}

Family family_from_string(const std::string& name) {
    if (name == "pseudo_vfm") return Family::pseudo_vfm;
    if (name == "synthetic") return Family::synthetic;
    if (name == "halfspace") return Family::halfspace;
    throw ValidationError("unknown corruption family '" + name + "' (expected pseudo_vfm|synthetic|halfspace)");
}

SdfGrid compute_sdf(const VoxelGrid& grid) {
    SdfGrid sdf;
    sdf.resolution = grid.resolution();
    sdf.values.resize(grid.size());
    const std::size_t occupied = grid.count();
    if (occupied == 0) {
        std::fill(sdf.values.begin(), sdf.values.end(), kSdfFar);
        return sdf;
    }
    if (occupied == grid.size()) {
        std::fill(sdf.values.begin(), sdf.values.end(), -kSdfFar);
        return sdf;
    }
    const auto to_occupied = squared_distance_to(grid, true);
    const auto to_empty = squared_distance_to(grid, false);
    const double r = grid.resolution();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid.get(i))
            sdf.values[i] = static_cast<float>(-std::sqrt(static_cast<double>(to_empty[i])) / r);
        else
            sdf.values[i] = static_cast<float>(std::sqrt(static_cast<double>(to_occupied[i])) / r);
    }
    return sdf;
}

namespace {

void validate(const ShellNoise& cfg) {
    if (!(cfg.probability >= 0.0 && cfg.probability <= 1.0))
        throw ValidationError("shell noise probability must lie in [0,1], got " + std::to_string(cfg.probability));
    if (!(cfg.range_lo < cfg.range_hi)) throw ValidationError("shell noise range must satisfy lo < hi");
    if (cfg.sign != 1 && cfg.sign != -1) throw ValidationError("shell noise sign must be +1 or -1");
    for (int k : cfg.cluster_sizes)
        if (k < 1) throw ValidationError("cluster sizes must be >= 1");
}

}  // namespace

std::vector<std::size_t> grow_cluster(const VoxelGrid& grid, std::size_t seed, int k, Rng& rng) {
    const bool cls = grid.get(seed);
    std::vector<std::size_t> cluster;
    std::vector<std::uint8_t> seen(grid.size(), 0);
    std::vector<std::size_t> frontier{seed};
    seen[seed] = 1;
    constexpr int kNbr[6][3] = {{-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}};
    while (!frontier.empty() && static_cast<int>(cluster.size()) < k) {
        const std::size_t pick = rng.below(frontier.size());
        const std::size_t cur = frontier[pick];
        frontier[pick] = frontier.back();
        frontier.pop_back();
        cluster.push_back(cur);
        const Coord3 c = grid.coord(cur);
        for (const auto& d : kNbr) {
            const int x = c[0] + d[0], y = c[1] + d[1], z = c[2] + d[2];
            if (!grid.in_bounds(x, y, z)) continue;
            const std::size_t n = grid.index(x, y, z);
            if (seen[n] || grid.get(n) != cls) continue;
            seen[n] = 1;
            frontier.push_back(n);
        }
    }
    return cluster;
}

NoiseScore shell_noise(const VoxelGrid& grid, const SdfGrid& sdf, const ShellNoise& cfg, Rng& rng, ShellTrace* trace) {
    validate(cfg);
    if (sdf.resolution != grid.resolution()) throw ValidationError("shell_noise: sdf/grid resolution mismatch");
    NoiseScore out{grid.resolution(), std::vector<float>(grid.size(), 0.0f)};
    const bool want_occupied = cfg.sign < 0;
    const float score = static_cast<float>(cfg.sign);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid.get(i) != want_occupied) continue;
        const double mag = want_occupied ? -static_cast<double>(sdf.values[i]) : static_cast<double>(sdf.values[i]);
        if (!(mag > cfg.range_lo && mag <= cfg.range_hi)) continue;
        if (trace) trace->candidates.push_back(i);
        if (!rng.bernoulli(cfg.probability)) continue;
        if (trace) trace->seeds.push_back(i);
        if (cfg.cluster_sizes.empty()) {
            out.scores[i] = score;
            continue;
        }
        const int k = cfg.cluster_sizes[rng.below(cfg.cluster_sizes.size())];
        auto cluster = grow_cluster(grid, i, k, rng);
        for (std::size_t v : cluster) out.scores[v] = score;
        if (trace) {
            trace->drawn_k.push_back(k);
            trace->clusters.push_back(std::move(cluster));
        }
    }
    return out;
}

NoiseScore coarse_mask_noise(const VoxelGrid& grid, const CoarseMask& cfg, Rng& rng) {
    const int r = grid.resolution();
    if (cfg.mask_res < 1 || r % cfg.mask_res != 0)
        throw ValidationError("coarse mask resolution " + std::to_string(cfg.mask_res) + " does not divide " + std::to_string(r));
    if (!(cfg.fg_prob >= 0.0 && cfg.fg_prob <= 1.0)) throw ValidationError("coarse mask fg_prob must lie in [0,1]");
    const int m = cfg.mask_res;
    const int block = r / m;
    std::vector<std::uint8_t> background(static_cast<std::size_t>(m) * m * m, 0);
    for (int z = 0; z < m; ++z)
        for (int y = 0; y < m; ++y)
            for (int x = 0; x < m; ++x) {
                const bool fg = rng.bernoulli(cfg.fg_prob);
                const double cz = (z + 0.5) / m - 0.5;
                background[static_cast<std::size_t>(x + m * (y + m * z))] = (!fg && cz <= cfg.region_z_max) ? 1 : 0;
            }
    NoiseScore out{r, std::vector<float>(grid.size(), 0.0f)};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Coord3 c = grid.coord(i);
        const std::size_t cell = static_cast<std::size_t>(c[0] / block + m * (c[1] / block + m * (c[2] / block)));
        if (background[cell]) out.scores[i] = -1.0f;
    }
    return out;
}

VoxelGrid half_space_removal(const VoxelGrid& grid, const Vec3& normal, double offset) {
    const double norm = std::sqrt(normal[0] * normal[0] + normal[1] * normal[1] + normal[2] * normal[2]);
    if (!(norm > 0.0)) throw ValidationError("half-space normal must be nonzero");
    if (std::abs(norm - 1.0) > 1e-9) throw ValidationError("half-space normal must be unit length");
    VoxelGrid out(grid.resolution());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!grid.get(i)) continue;
        const Coord3 c = grid.coord(i);
        const Vec3 p = grid.center(c[0], c[1], c[2]);
        if (p[0] * normal[0] + p[1] * normal[1] + p[2] * normal[2] <= offset) out.set(i, true);
    }
    return out;
}

VoxelGrid compose(const VoxelGrid& grid, const std::vector<NoiseScore>& scores) {
    for (const auto& s : scores)
        if (s.resolution != grid.resolution() || s.scores.size() != grid.size())
            throw ValidationError("compose: score map resolution mismatch");
    VoxelGrid out(grid.resolution());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double v = grid.get(i) ? 1.0 : 0.0;
        for (const auto& s : scores) v += s.scores[i];
        out.set(i, std::clamp(v, 0.0, 1.0) > 0.5);
    }
    return out;
}

namespace {

template <typename T>
T pick(const std::vector<T>& list, Rng& rng) {
    return list[rng.below(list.size())];
}

// Table mask resolutions are for R = 64; keep them only where they tile R.
int fit_mask_res(int listed, int resolution) {
    int m = std::min(listed, resolution);
    if (resolution % m != 0) m = std::gcd(m, resolution);
    return m;
}

ShellNoise shell(std::string label, int sign, double lo, double hi, double p, std::vector<int> clusters = {}) {
    ShellNoise s;
    s.label = std::move(label);
    s.sign = sign;
    s.range_lo = lo;
    s.range_hi = hi;
    s.probability = p;
    s.cluster_sizes = std::move(clusters);
    return s;
}

}  // namespace

CorruptionSpec sample_corruption_spec(Family family, Rng& rng, int resolution) {
    CorruptionSpec spec;
    spec.family = family;
    spec.seed = rng.next_u64();
    switch (family) {
        case Family::synthetic: {
            using namespace table;
            spec.modules.emplace_back(shell("surface_noise", +1, 0.0, 0.04, pick(list_a, rng)));
            spec.modules.emplace_back(shell("surface_noise_outer", +1, 0.04, 0.08, pick(list_b, rng)));
            spec.modules.emplace_back(shell("far_field_noise", +1, 0.15, 2.0, pick(list_c, rng)));
            spec.modules.emplace_back(shell("clustered_floaters", +1, 0.15, 2.0, pick(list_d, rng), list_f));
            spec.modules.emplace_back(shell("surface_erosion", -1, 0.0, 0.04, pick(list_a, rng)));
            spec.modules.emplace_back(shell("surface_erosion_inner", -1, 0.04, 0.08, pick(list_b, rng)));
            spec.modules.emplace_back(shell("clustered_erosion", -1, 0.0, 0.04, pick(list_e, rng), list_f));
            CoarseMask mask;
            mask.mask_res = fit_mask_res(pick(table::mask_res, rng), resolution);
            mask.fg_prob = rng.uniform(0.5, 1.0);
            spec.modules.emplace_back(mask);
            break;
        }
        case Family::pseudo_vfm: {
            // Rough surface plus a missing underside.
            spec.modules.emplace_back(shell("surface_erosion", -1, 0.0, 0.08, pick(table::list_a, rng)));
            spec.modules.emplace_back(shell("surface_noise", +1, 0.0, 0.08, pick(table::list_a, rng)));
            CoarseMask mask;
            mask.mask_res = fit_mask_res(rng.bernoulli(0.5) ? 8 : 4, resolution);
            mask.fg_prob = rng.uniform(0.2, 0.6);
            mask.region_z_max = rng.uniform(-0.3, -0.1);
            spec.modules.emplace_back(mask);
            break;
        }
        case Family::halfspace: {
            Vec3 n{};
            double len = 0.0;
            while (len < 1e-6) {
                n = {rng.normal(), rng.normal(), rng.normal()};
                len = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
            }
            HalfSpace h;
            h.normal = {n[0] / len, n[1] / len, n[2] / len};
            h.offset = 0.0;
            spec.modules.emplace_back(h);
            break;
        }
    }
    return spec;
}

VoxelGrid apply_corruption(const VoxelGrid& grid, const CorruptionSpec& spec) {
    Rng rng(spec.seed);
    std::vector<NoiseScore> scores;
    std::vector<HalfSpace> planes;
    std::optional<SdfGrid> sdf;
    for (const auto& module : spec.modules) {
        Rng module_rng = rng.fork();
        if (const auto* s = std::get_if<ShellNoise>(&module)) {
            if (!sdf) sdf = compute_sdf(grid);
            scores.push_back(shell_noise(grid, *sdf, *s, module_rng));
        } else if (const auto* m = std::get_if<CoarseMask>(&module)) {
            scores.push_back(coarse_mask_noise(grid, *m, module_rng));
        } else {
            planes.push_back(std::get<HalfSpace>(module));
        }
    }
    VoxelGrid out = compose(grid, scores);
    for (const auto& h : planes) out = half_space_removal(out, h.normal, h.offset);
    return out;
}

}  // namespace voxrefine::corrupt
