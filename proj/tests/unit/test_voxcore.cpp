#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "oracles.hpp"
#include "voxrefine/distance_transform.hpp"
#include "voxrefine/error.hpp"
#include "voxrefine/voxel_grid.hpp"

using namespace voxrefine;

namespace {

std::filesystem::path temp_path(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "voxrefine_test_voxcore";
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("grid construction rejects tiny resolutions") {
    CHECK_THROWS_AS(VoxelGrid(1), ValidationError);
    VoxelGrid g(3);
    CHECK(g.size() == 27);
    CHECK(g.count() == 0);
    CHECK(g.index(1, 2, 0) == 1 + 3 * 2);
}

TEST_CASE("voxelize_points") {
    SUBCASE("empty input gives empty grid") {
        CHECK(voxelize_points({}, 8).count() == 0);
    }
    SUBCASE("origin lands in cell (4,4,4)") {
        auto g = voxelize_points(PointSet{{{0.0, 0.0, 0.0}}}, 8);
        CHECK(g.count() == 1);
        CHECK(g.get(4, 4, 4));
    }
    SUBCASE("two points in one cell") {
        auto g = voxelize_points(PointSet{{{0.01, 0.01, 0.01}, {0.02, 0.03, 0.01}}}, 8);
        CHECK(g.count() == 1);
    }
    SUBCASE("upper boundary clamps inside") {
        auto g = voxelize_points(PointSet{{{0.5, 0.5, 0.5}, {-0.5, -0.5, -0.5}}}, 4);
        CHECK(g.get(3, 3, 3));
        CHECK(g.get(0, 0, 0));
    }
    SUBCASE("non-finite rejected") {
        CHECK_THROWS_AS(voxelize_points(PointSet{{{NAN, 0.0, 0.0}}}, 4), ValidationError);
    }
}

TEST_CASE("triangulate") {
    VoxelGrid g(4);
    CHECK(triangulate(g).triangles.empty());
    g.set(1, 1, 1, true);
    auto m = triangulate(g);
    CHECK(m.triangles.size() == 12);
    CHECK(m.vertices.size() == 8);
    g.set(2, 1, 1, true);
    m = triangulate(g);
    CHECK(m.triangles.size() == 2 * oracle::exposed_faces(g));
    CHECK(m.triangles.size() == 20);
}

TEST_CASE("triangulate emits only boundary faces (randomized)") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const auto g = oracle::random_grid(2 + trial % 6, 0.45, rng);
        const auto m = triangulate(g);
        REQUIRE(m.triangles.size() == 2 * oracle::exposed_faces(g));
        REQUIRE(m.face_coord.size() == m.triangles.size());
        for (std::size_t t = 0; t < m.triangles.size(); ++t) {
            const auto& c = m.face_coord[t];
            REQUIRE(g.get(c[0], c[1], c[2]));
            for (auto v : m.triangles[t].v) REQUIRE(v < m.vertices.size());
        }
    }
}

TEST_CASE("occupied_centers") {
    VoxelGrid g(2);
    CHECK(occupied_centers(g).points.empty());
    g.set(0, 0, 0, true);
    const auto p = occupied_centers(g);
    REQUIRE(p.points.size() == 1);
    CHECK(p.points[0][0] == doctest::Approx(-0.25));
    CHECK(p.points[0][1] == doctest::Approx(-0.25));
    CHECK(p.points[0][2] == doctest::Approx(-0.25));
    for (std::size_t i = 0; i < g.size(); ++i) g.set(i, true);
    const auto full = occupied_centers(g);
    CHECK(full.points.size() == 8);
    Vec3 sum{0, 0, 0};
    for (const auto& q : full.points)
        for (int a = 0; a < 3; ++a) sum[a] += q[a];
    CHECK(sum[0] == doctest::Approx(0.0));
    CHECK(sum[1] == doctest::Approx(0.0));
    CHECK(sum[2] == doctest::Approx(0.0));
}

TEST_CASE("center round trip through voxelize") {
    Rng rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        const auto g = oracle::random_grid(2 + trial % 9, 0.3, rng);
        CHECK(voxelize_points(occupied_centers(g), g.resolution()) == g);
    }
}

TEST_CASE("iou") {
    VoxelGrid a(4), b(4);
    CHECK(iou(a, b) == 1.0);
    a.set(0, 0, 0, true);
    CHECK(iou(a, a) == 1.0);
    b.set(3, 3, 3, true);
    CHECK(iou(a, b) == 0.0);
    a.set(1, 0, 0, true);
    a.set(2, 0, 0, true);
    b = VoxelGrid(4);
    b.set(2, 0, 0, true);
    b.set(3, 0, 0, true);
    CHECK(iou(a, b) == doctest::Approx(0.25));
    CHECK(iou(a, b) == iou(b, a));
    CHECK_THROWS_AS(iou(VoxelGrid(4), VoxelGrid(5)), ValidationError);
}

TEST_CASE("chamfer") {
    VoxelGrid a(8), b(8);
    CHECK_THROWS_AS(chamfer(a, b), ValidationError);
    a.set(0, 0, 0, true);
    CHECK_THROWS_AS(chamfer(a, b), ValidationError);
    b.set(1, 0, 0, true);
    CHECK(chamfer(a, b) == doctest::Approx(0.03125).epsilon(1e-12));
    CHECK(chamfer(a, a) == 0.0);

    Rng rng(5);
    for (int trial = 0; trial < 40; ++trial) {
        const int r = 2 + trial % 7;
        auto x = oracle::random_grid(r, 0.2, rng), y = oracle::random_grid(r, 0.2, rng);
        x.set(0, 0, 0, true);
        y.set(r - 1, r - 1, 0, true);
        const double c = chamfer(x, y);
        CHECK(c >= 0.0);
        CHECK(c == doctest::Approx(chamfer(y, x)).epsilon(1e-12));
        CHECK(c == doctest::Approx(oracle::brute_chamfer(x, y)).epsilon(1e-12));
    }
}

TEST_CASE("squared distance transform matches brute force") {
    Rng rng(17);
    for (int trial = 0; trial < 40; ++trial) {
        const int r = 2 + trial % 7;
        const auto g = oracle::random_grid(r, trial % 2 ? 0.1 : 0.6, rng);
        const auto d = squared_distance_to(g, true);
        for (std::size_t i = 0; i < g.size(); ++i) {
            long best = -1;
            const auto ci = g.coord(i);
            for (std::size_t j = 0; j < g.size(); ++j) {
                if (!g.get(j)) continue;
                const auto cj = g.coord(j);
                long s = 0;
                for (int a = 0; a < 3; ++a) s += long(ci[a] - cj[a]) * (ci[a] - cj[a]);
                if (best < 0 || s < best) best = s;
            }
            REQUIRE(d[i] == (best < 0 ? kNoSite : best));
        }
    }
}

TEST_CASE("VXG1 file round trip and format errors") {
    Rng rng(9);
    for (int r : {2, 3, 5, 8}) {
        const auto g = oracle::random_grid(r, 0.4, rng);
        const auto path = temp_path("g" + std::to_string(r) + ".vxg");
        write_voxel_grid(path, g);
        CHECK(std::filesystem::file_size(path) == 8 + (std::size_t(r) * r * r + 7) / 8);
        CHECK(read_voxel_grid(path) == g);
    }
    const auto path = temp_path("trunc.vxg");
    write_voxel_grid(path, oracle::random_grid(8, 0.5, rng));
    std::filesystem::resize_file(path, 20);
    try {
        read_voxel_grid(path);
        FAIL("expected a format error");
    } catch (const FormatError& e) {
        CHECK(e.file() == path.string());
    }
    {
        std::ofstream out(temp_path("bad.vxg"), std::ios::binary);
        out << "XXXX";
    }
    CHECK_THROWS_AS(read_voxel_grid(temp_path("bad.vxg")), FormatError);
    CHECK_THROWS_AS(read_voxel_grid(temp_path("missing.vxg")), IoError);
}

TEST_CASE("VXG1 bit layout is LSB-first, x fastest") {
    VoxelGrid g(2);
    g.set(1, 0, 0, true);  // linear index 1
    g.set(0, 0, 1, true);  // linear index 4
    const auto path = temp_path("layout.vxg");
    write_voxel_grid(path, g);
    std::ifstream in(path, std::ios::binary);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), {});
    REQUIRE(bytes.size() == 9);
    CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "VXG1");
    CHECK(bytes[4] == 2);
    CHECK(bytes[5] == 0);
    CHECK(bytes[8] == 0x12);
}
