#pragma once

#include <cstdint>
#include <numbers>
#include <vector>

#include "voxrefine/rng.hpp"
#include "voxrefine/voxel_grid.hpp"

namespace voxrefine::views {

/// Azimuth atan2(y, x) and pitch atan2(z, hypot(x, y)) of a camera position.
struct AngularFeature {
    double lng = 0.0;
    double lat = 0.0;
};

struct ViewSelectionConfig {
    int views = 4;
    double theta_min = -10.0 * std::numbers::pi / 180.0;
    double theta_max = 30.0 * std::numbers::pi / 180.0;
};

/// Throws ValidationError on a zero-length position.
std::vector<AngularFeature> angular_features(const std::vector<Vec3>& positions);

struct KMeansResult {
    std::vector<int> assignments;
    std::vector<AngularFeature> centroids;
    /// Inertia after the initial assignment and after each Lloyd update.
    std::vector<double> inertia_history;
};

/// k-means++ seeding followed by Lloyd iterations (assignment fixpoint or 100
/// rounds). Ties go to the lowest index; an empty cluster is reseeded at the
/// point farthest from its current centroid.
KMeansResult kmeans_2d(const std::vector<AngularFeature>& features, int k, Rng& rng);

/// Pitch filter (with fallback to all views), random azimuth phase, k-means,
/// then the member nearest each centroid. Returns `views` distinct indices.
std::vector<int> select_views(const std::vector<Vec3>& positions, const ViewSelectionConfig& config, Rng& rng);

}  // namespace voxrefine::views
