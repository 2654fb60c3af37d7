#include <cmath>
#include <numbers>
#include <set>

#include "doctest.h"
#include "voxrefine/error.hpp"
#include "voxrefine/views.hpp"

using namespace voxrefine;
using namespace voxrefine::views;

namespace {

constexpr double kPi = std::numbers::pi;

Vec3 on_sphere(double lng, double lat, double r = 2.0) {
    return {r * std::cos(lat) * std::cos(lng), r * std::cos(lat) * std::sin(lng), r * std::sin(lat)};
}

// Four tight azimuth groups at lat 0; returns positions and group ids.
std::vector<Vec3> four_groups(std::vector<int>& group, Rng& rng) {
    std::vector<Vec3> pos;
    for (int g = 0; g < 4; ++g)
        for (int m = 0; m < 6; ++m) {
            pos.push_back(on_sphere(g * kPi / 2 + rng.uniform(-1e-3, 1e-3), rng.uniform(-1e-3, 1e-3)));
            group.push_back(g);
        }
    return pos;
}

}  // namespace

TEST_CASE("angular features") {
    auto f = angular_features({{1, 0, 0}, {0, 0, 1}, {1, 1, std::sqrt(2.0)}});
    CHECK(f[0].lng == 0.0);
    CHECK(f[0].lat == 0.0);
    CHECK(f[1].lat == doctest::Approx(kPi / 2));
    CHECK(f[2].lng == doctest::Approx(kPi / 4));
    CHECK(f[2].lat == doctest::Approx(kPi / 4));
    CHECK_THROWS_AS(angular_features({{0, 0, 0}}), ValidationError);
}

TEST_CASE("kmeans with k == n puts every point in its own cluster") {
    std::vector<AngularFeature> pts{{0, 0}, {1, 0}, {0, 1}, {3, 3}, {-2, 1}};
    Rng rng(1);
    const auto km = kmeans_2d(pts, 5, rng);
    std::set<int> used(km.assignments.begin(), km.assignments.end());
    CHECK(used.size() == 5);
    CHECK(km.inertia_history.back() == 0.0);
    CHECK_THROWS_AS(kmeans_2d(pts, 6, rng), ValidationError);
}

TEST_CASE("kmeans recovers the optimal 2-partition") {
    std::vector<AngularFeature> pts{{0.0, 0.0}, {0.2, 0.1}, {5.0, 5.0}, {5.3, 4.9}};
    // Exhaustive search over all 2-partitions for the minimum-inertia split.
    double best = 1e300;
    int best_mask = 0;
    for (int mask = 1; mask < 15; ++mask) {
        double s = 0;
        for (int side = 0; side < 2; ++side) {
            double ml = 0, mp = 0;
            int n = 0;
            for (int i = 0; i < 4; ++i)
                if (((mask >> i) & 1) == side) {
                    ml += pts[i].lng;
                    mp += pts[i].lat;
                    ++n;
                }
            ml /= n;
            mp /= n;
            for (int i = 0; i < 4; ++i)
                if (((mask >> i) & 1) == side) s += std::pow(pts[i].lng - ml, 2) + std::pow(pts[i].lat - mp, 2);
        }
        if (s < best) {
            best = s;
            best_mask = mask;
        }
    }
    CHECK((best_mask == 0b1100 || best_mask == 0b0011));
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed);
        const auto km = kmeans_2d(pts, 2, rng);
        CHECK(km.assignments[0] == km.assignments[1]);
        CHECK(km.assignments[2] == km.assignments[3]);
        CHECK(km.assignments[0] != km.assignments[2]);
        CHECK(km.inertia_history.back() == doctest::Approx(best));
        const auto& c = km.centroids[static_cast<std::size_t>(km.assignments[0])];
        CHECK(c.lng == doctest::Approx(0.1));
        CHECK(c.lat == doctest::Approx(0.05));
    }
}

TEST_CASE("kmeans is deterministic and inertia never increases") {
    Rng data(9);
    std::vector<AngularFeature> pts;
    for (int i = 0; i < 150; ++i) pts.push_back({data.uniform(0, 2 * kPi), data.uniform(-0.3, 0.6)});
    for (int k : {2, 4, 7}) {
        Rng a(k), b(k);
        const auto ka = kmeans_2d(pts, k, a), kb = kmeans_2d(pts, k, b);
        CHECK(ka.assignments == kb.assignments);
        for (std::size_t i = 1; i < ka.inertia_history.size(); ++i)
            CHECK(ka.inertia_history[i] <= ka.inertia_history[i - 1] + 1e-12);
    }
}

TEST_CASE("kmeans handles duplicate points") {
    std::vector<AngularFeature> pts(6, AngularFeature{1.0, 0.5});
    Rng rng(3);
    const auto km = kmeans_2d(pts, 3, rng);
    CHECK(km.assignments.size() == 6);
}

TEST_CASE("select_views picks one view per separated cluster") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng data(100 + seed);
        std::vector<int> group;
        const auto pos = four_groups(group, data);
        Rng rng(seed);
        const auto sel = select_views(pos, {}, rng);
        REQUIRE(sel.size() == 4);
        std::set<int> groups;
        for (int i : sel) groups.insert(group[static_cast<std::size_t>(i)]);
        CHECK(groups.size() == 4);
    }
}

TEST_CASE("select_views respects pitch bounds and falls back when needed") {
    Rng data(5);
    std::vector<Vec3> pos;
    for (int i = 0; i < 150; ++i) pos.push_back(on_sphere(data.uniform(-kPi, kPi), data.uniform(-15, 60) * kPi / 180));
    ViewSelectionConfig cfg;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed);
        const auto sel = select_views(pos, cfg, rng);
        std::set<int> uniq(sel.begin(), sel.end());
        CHECK(uniq.size() == 4);
        for (int i : sel) {
            const auto f = angular_features({pos[static_cast<std::size_t>(i)]})[0];
            CHECK(f.lat >= cfg.theta_min);
            CHECK(f.lat <= cfg.theta_max);
        }
    }

    std::vector<Vec3> high;
    for (int i = 0; i < 12; ++i) high.push_back(on_sphere(i * kPi / 6, 1.2));
    Rng rng(2);
    const auto sel = select_views(high, cfg, rng);
    CHECK(std::set<int>(sel.begin(), sel.end()).size() == 4);

    // S equal to the candidate count selects all of them.
    Rng rng2(4);
    const auto every = select_views(high, {12, -kPi / 2, kPi / 2}, rng2);
    CHECK(std::set<int>(every.begin(), every.end()).size() == 12);

    CHECK_THROWS_AS(select_views({}, cfg, rng), ValidationError);
    CHECK_THROWS_AS(select_views({{1, 0, 0}}, cfg, rng), ValidationError);
}
