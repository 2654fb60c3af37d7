#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "voxrefine/rng.hpp"
#include "voxrefine/voxel_grid.hpp"

namespace voxrefine::corrupt {

inline constexpr float kSdfFar = 1e9f;

/// Signed distance in normalized units (voxel pitch 1/R): <= 0 on occupied
/// voxels, > 0 on empty ones. Magnitude is the center-to-center distance to
/// the nearest voxel of opposite occupancy.
struct SdfGrid {
    int resolution = 0;
    std::vector<float> values;

    float at(std::size_t i) const { return values[i]; }
};

/// Additive score map; composed with the clean grid by clamp + binarize.
struct NoiseScore {
    int resolution = 0;
    std::vector<float> scores;
};

struct ShellNoise {
    double range_lo = 0.0;
    double range_hi = 0.04;
    double probability = 0.0;
    int sign = +1;
    /// Present for clustered noise: k is drawn uniformly from this list.
    std::vector<int> cluster_sizes;
    std::string label;
};

struct CoarseMask {
    int mask_res = 8;
    double fg_prob = 1.0;
    /// Only mask cells whose center z (normalized) is <= this are eligible.
    double region_z_max = 0.5;
};

struct HalfSpace {
    Vec3 normal{1.0, 0.0, 0.0};
    double offset = 0.0;
};

using CorruptionModule = std::variant<ShellNoise, CoarseMask, HalfSpace>;

enum class Family { pseudo_vfm, synthetic, halfspace };

std::string to_string(Family f);
/// Throws ValidationError for unknown names.
Family family_from_string(const std::string& name);

struct CorruptionSpec {
    Family family = Family::synthetic;
    std::vector<CorruptionModule> modules;
    std::uint64_t seed = 0;
};

/// Parameter lists of the synthetic corruption table (base resolution 64).
namespace table {
extern const std::vector<double> list_a;
extern const std::vector<double> list_b;
extern const std::vector<double> list_c;
extern const std::vector<double> list_d;
extern const std::vector<double> list_e;
extern const std::vector<int> list_f;
extern const std::vector<int> mask_res;
}  // namespace table

SdfGrid compute_sdf(const VoxelGrid& grid);

/// Optional record of what shell_noise picked.
struct ShellTrace {
    std::vector<std::size_t> candidates;
    std::vector<std::size_t> seeds;
    std::vector<std::vector<std::size_t>> clusters;
    std::vector<int> drawn_k;
};

/// Throws ValidationError for an invalid probability/range/sign/cluster list.
NoiseScore shell_noise(const VoxelGrid& grid, const SdfGrid& sdf, const ShellNoise& cfg, Rng& rng,
                       ShellTrace* trace = nullptr);

/// Grow up to `k` voxels from `seed` over 6-neighbours sharing the seed's
/// occupancy, popping a uniformly random frontier entry each step.
std::vector<std::size_t> grow_cluster(const VoxelGrid& grid, std::size_t seed, int k, Rng& rng);

NoiseScore coarse_mask_noise(const VoxelGrid& grid, const CoarseMask& cfg, Rng& rng);

/// Keep a voxel iff dot(center, normal) <= offset.
VoxelGrid half_space_removal(const VoxelGrid& grid, const Vec3& normal, double offset);

/// clamp(v + sum(n), 0, 1) binarized at 0.5.
VoxelGrid compose(const VoxelGrid& grid, const std::vector<NoiseScore>& scores);

CorruptionSpec sample_corruption_spec(Family family, Rng& rng, int resolution = 64);

/// Runs every module of `spec` with an RNG seeded from spec.seed. Score
/// modules see the SDF of the clean input; half-spaces apply after compose.
VoxelGrid apply_corruption(const VoxelGrid& grid, const CorruptionSpec& spec);

/// "SDF1" file format.
void write_sdf(const std::filesystem::path& path, const SdfGrid& sdf);
SdfGrid read_sdf(const std::filesystem::path& path);

/// JSON text form of a spec (schema documented in README).
std::string spec_to_json(const CorruptionSpec& spec);
CorruptionSpec spec_from_json(const std::string& text);

}  // namespace voxrefine::corrupt
