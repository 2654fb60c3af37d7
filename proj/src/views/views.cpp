#include "voxrefine/views.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "voxrefine/error.hpp"

namespace voxrefine::views {

namespace {

double dist2(const AngularFeature& a, const AngularFeature& b) {
    const double dl = a.lng - b.lng, dp = a.lat - b.lat;
    return dl * dl + dp * dp;
}

int nearest(const AngularFeature& f, const std::vector<AngularFeature>& centroids) {
    int best = 0;
    double bd = dist2(f, centroids[0]);
    for (int c = 1; c < static_cast<int>(centroids.size()); ++c) {
        const double d = dist2(f, centroids[static_cast<std::size_t>(c)]);
        if (d < bd) {
            bd = d;
            best = c;
        }
    }
    return best;
}

double inertia(const std::vector<AngularFeature>& f, const std::vector<int>& assign, const std::vector<AngularFeature>& centroids) {
    double s = 0;
    for (std::size_t i = 0; i < f.size(); ++i) s += dist2(f[i], centroids[static_cast<std::size_t>(assign[i])]);
    return s;
}

}  // namespace

std::vector<AngularFeature> angular_features(const std::vector<Vec3>& positions) {
    std::vector<AngularFeature> out;
    out.reserve(positions.size());
    for (const auto& p : positions) {
        if (p[0] == 0.0 && p[1] == 0.0 && p[2] == 0.0) throw ValidationError("angular_features: zero-length position");
        out.push_back({std::atan2(p[1], p[0]), std::atan2(p[2], std::sqrt(p[0] * p[0] + p[1] * p[1]))});
    }
    return out;
}

KMeansResult kmeans_2d(const std::vector<AngularFeature>& features, int k, Rng& rng) {
    const int n = static_cast<int>(features.size());
    if (k < 1) throw ValidationError("kmeans_2d: k must be >= 1");
    if (k > n) throw ValidationError("kmeans_2d: k=" + std::to_string(k) + " exceeds point count " + std::to_string(n));

    // k-means++ seeding.
    std::vector<AngularFeature> centroids;
    centroids.push_back(features[rng.below(static_cast<std::uint64_t>(n))]);
    std::vector<double> d2(static_cast<std::size_t>(n));
    while (static_cast<int>(centroids.size()) < k) {
        double total = 0;
        for (int i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& c : centroids) best = std::min(best, dist2(features[static_cast<std::size_t>(i)], c));
            d2[static_cast<std::size_t>(i)] = best;
            total += best;
        }
        int chosen = 0;
        if (total > 0) {
            const double target = rng.uniform() * total;
            double acc = 0;
            chosen = n - 1;
            for (int i = 0; i < n; ++i) {
                acc += d2[static_cast<std::size_t>(i)];
                if (acc > target && d2[static_cast<std::size_t>(i)] > 0) {
                    chosen = i;
                    break;
                }
            }
        } else {
            chosen = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
        }
        centroids.push_back(features[static_cast<std::size_t>(chosen)]);
    }

    KMeansResult res;
    res.assignments.assign(static_cast<std::size_t>(n), -1);
    for (int i = 0; i < n; ++i) res.assignments[static_cast<std::size_t>(i)] = nearest(features[static_cast<std::size_t>(i)], centroids);
    res.inertia_history.push_back(inertia(features, res.assignments, centroids));

    for (int iter = 0; iter < 100; ++iter) {
        // Update step.
        std::vector<double> sl(static_cast<std::size_t>(k), 0.0), sp(static_cast<std::size_t>(k), 0.0);
        std::vector<int> cnt(static_cast<std::size_t>(k), 0);
        for (int i = 0; i < n; ++i) {
            const auto c = static_cast<std::size_t>(res.assignments[static_cast<std::size_t>(i)]);
            sl[c] += features[static_cast<std::size_t>(i)].lng;
            sp[c] += features[static_cast<std::size_t>(i)].lat;
            ++cnt[c];
        }
        for (int c = 0; c < k; ++c) {
            const auto cu = static_cast<std::size_t>(c);
            if (cnt[cu] > 0) {
                centroids[cu] = {sl[cu] / cnt[cu], sp[cu] / cnt[cu]};
                continue;
            }
            // Empty cluster: move it onto the point farthest from its own centroid.
            int far = 0;
            double fd = -1;
            for (int i = 0; i < n; ++i) {
                const auto iu = static_cast<std::size_t>(i);
                const double d = dist2(features[iu], centroids[static_cast<std::size_t>(res.assignments[iu])]);
                if (d > fd) {
                    fd = d;
                    far = i;
                }
            }
            centroids[cu] = features[static_cast<std::size_t>(far)];
            --cnt[static_cast<std::size_t>(res.assignments[static_cast<std::size_t>(far)])];
            res.assignments[static_cast<std::size_t>(far)] = c;
            cnt[cu] = 1;
        }
        res.inertia_history.push_back(inertia(features, res.assignments, centroids));

        // Assignment step.
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            const int a = nearest(features[static_cast<std::size_t>(i)], centroids);
            if (a != res.assignments[static_cast<std::size_t>(i)]) {
                res.assignments[static_cast<std::size_t>(i)] = a;
                changed = true;
            }
        }
        res.inertia_history.push_back(inertia(features, res.assignments, centroids));
        if (!changed) break;
    }
    res.centroids = std::move(centroids);
    return res;
}

std::vector<int> select_views(const std::vector<Vec3>& positions, const ViewSelectionConfig& config, Rng& rng) {
    const int n = static_cast<int>(positions.size());
    if (n == 0) throw ValidationError("select_views: no candidate positions");
    if (config.views < 1) throw ValidationError("select_views: view count must be >= 1");
    if (config.views > n)
        throw ValidationError("select_views: requested " + std::to_string(config.views) + " views from " + std::to_string(n));
    if (!(config.theta_min < config.theta_max)) throw ValidationError("select_views: theta_min must be < theta_max");

    const auto all = angular_features(positions);
    std::vector<int> cand;
    for (int i = 0; i < n; ++i) {
        const double lat = all[static_cast<std::size_t>(i)].lat;
        if (lat >= config.theta_min && lat <= config.theta_max) cand.push_back(i);
    }
    if (static_cast<int>(cand.size()) < config.views) {
        cand.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) cand[static_cast<std::size_t>(i)] = i;
    }

    const double two_pi = 2.0 * std::numbers::pi;
    const double phase = rng.uniform() * two_pi;
    std::vector<AngularFeature> feats;
    feats.reserve(cand.size());
    for (int i : cand) {
        auto f = all[static_cast<std::size_t>(i)];
        f.lng = std::fmod(f.lng + phase, two_pi);
        if (f.lng < 0) f.lng += two_pi;
        feats.push_back(f);
    }

    const auto km = kmeans_2d(feats, config.views, rng);
    std::vector<int> selected;
    std::vector<std::uint8_t> taken(feats.size(), 0);
    for (int c = 0; c < config.views; ++c) {
        int best = -1;
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < feats.size(); ++j) {
            if (km.assignments[j] != c || taken[j]) continue;
            const double d = dist2(feats[j], km.centroids[static_cast<std::size_t>(c)]);
            if (d < bd) {
                bd = d;
                best = static_cast<int>(j);
            }
        }
        if (best < 0) {
            // Only reachable with coincident features; take the closest unused one.
            for (std::size_t j = 0; j < feats.size(); ++j) {
                if (taken[j]) continue;
                const double d = dist2(feats[j], km.centroids[static_cast<std::size_t>(c)]);
                if (d < bd) {
                    bd = d;
                    best = static_cast<int>(j);
                }
            }
        }
        taken[static_cast<std::size_t>(best)] = 1;
        selected.push_back(cand[static_cast<std::size_t>(best)]);
    }
    return selected;
}

}  // namespace voxrefine::views
