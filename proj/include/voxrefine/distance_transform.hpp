#pragma once

#include <cstdint>
#include <vector>

namespace voxrefine {

class VoxelGrid;

/// Sentinel for "no site anywhere" in squared voxel units.
inline constexpr std::int64_t kNoSite = INT64_MAX / 4;

/// Exact squared Euclidean distance (in voxel units) from every voxel center
/// to the nearest voxel whose occupancy equals `site_value`. Separable
/// lower-envelope transform, O(R^3). Entries are kNoSite when no site exists.
std::vector<std::int64_t> squared_distance_to(const VoxelGrid& grid, bool site_value);

}  // namespace voxrefine
