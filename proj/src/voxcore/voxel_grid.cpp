#include "voxrefine/voxel_grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_map>

#include "voxrefine/binio.hpp"
#include "voxrefine/distance_transform.hpp"
#include "voxrefine/error.hpp"

namespace voxrefine {

VoxelGrid::VoxelGrid(int resolution) : res_(resolution) {
    if (resolution < 2) throw ValidationError("voxel grid resolution must be >= 2, got " + std::to_string(resolution));
    if (resolution > 1024) throw ValidationError("voxel grid resolution too large: " + std::to_string(resolution));
    bits_.assign(static_cast<std::size_t>(resolution) * resolution * resolution, 0);
}

std::size_t VoxelGrid::count() const noexcept {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

VoxelGrid voxelize_points(const PointSet& points, int resolution) {
    VoxelGrid grid(resolution);
    const auto cell = [resolution](double p) {
        const double c = std::floor((p + 0.5) * resolution);
        return static_cast<int>(std::clamp(c, 0.0, static_cast<double>(resolution - 1)));
    };
    for (const auto& p : points.points) {
        if (!std::isfinite(p[0]) || !std::isfinite(p[1]) || !std::isfinite(p[2]))
            throw ValidationError("voxelize_points: non-finite coordinate");
        grid.set(cell(p[0]), cell(p[1]), cell(p[2]), true);
    }
    return grid;
}

namespace {

// Corner offsets for each face direction, ordered counter-clockwise when
// seen from outside.
struct FaceDef {
    Coord3 dir;
    std::array<Coord3, 4> corners;
};

constexpr std::array<FaceDef, 6> kFaces{{
    {{-1, 0, 0}, {{{0, 0, 0}, {0, 0, 1}, {0, 1, 1}, {0, 1, 0}}}},
    {{1, 0, 0}, {{{1, 0, 0}, {1, 1, 0}, {1, 1, 1}, {1, 0, 1}}}},
    {{0, -1, 0}, {{{0, 0, 0}, {1, 0, 0}, {1, 0, 1}, {0, 0, 1}}}},
    {{0, 1, 0}, {{{0, 1, 0}, {0, 1, 1}, {1, 1, 1}, {1, 1, 0}}}},
    {{0, 0, -1}, {{{0, 0, 0}, {0, 1, 0}, {1, 1, 0}, {1, 0, 0}}}},
    {{0, 0, 1}, {{{0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}}}},
}};

}  // namespace

CoordMesh triangulate(const VoxelGrid& grid) {
    CoordMesh mesh;
    const int r = grid.resolution();
    const auto r1 = static_cast<std::size_t>(r + 1);
    std::unordered_map<std::size_t, std::uint32_t> corner_ids;
    const auto vertex = [&](int x, int y, int z) {
        const std::size_t key = static_cast<std::size_t>(x) + r1 * (static_cast<std::size_t>(y) + r1 * static_cast<std::size_t>(z));
        auto [it, inserted] = corner_ids.try_emplace(key, static_cast<std::uint32_t>(mesh.vertices.size()));
        if (inserted) mesh.vertices.push_back({double(x) / r - 0.5, double(y) / r - 0.5, double(z) / r - 0.5});
        return it->second;
    };

    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!grid.get(i)) continue;
        const Coord3 c = grid.coord(i);
        for (const auto& face : kFaces) {
            if (grid.occupied(c[0] + face.dir[0], c[1] + face.dir[1], c[2] + face.dir[2])) continue;
            std::array<std::uint32_t, 4> ids{};
            for (int k = 0; k < 4; ++k)
                ids[k] = vertex(c[0] + face.corners[k][0], c[1] + face.corners[k][1], c[2] + face.corners[k][2]);
            const Vec3 n{double(face.dir[0]), double(face.dir[1]), double(face.dir[2])};
            mesh.triangles.push_back({{ids[0], ids[1], ids[2]}});
            mesh.triangles.push_back({{ids[0], ids[2], ids[3]}});
            mesh.face_coord.push_back(c);
            mesh.face_coord.push_back(c);
            mesh.face_normal.push_back(n);
            mesh.face_normal.push_back(n);
        }
    }
    return mesh;
}

PointSet occupied_centers(const VoxelGrid& grid) {
    PointSet out;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!grid.get(i)) continue;
        const Coord3 c = grid.coord(i);
        out.points.push_back(grid.center(c[0], c[1], c[2]));
    }
    return out;
}

namespace {

void require_same_resolution(const VoxelGrid& a, const VoxelGrid& b, const char* op) {
    if (a.resolution() != b.resolution())
        throw ValidationError(std::string(op) + ": resolution mismatch (" + std::to_string(a.resolution()) + " vs " +
                              std::to_string(b.resolution()) + ")");
}

// Mean over occupied voxels of `from` of the squared distance to the nearest
// occupied voxel of `to`, in normalized units.
double mean_nearest_squared(const VoxelGrid& from, const VoxelGrid& to) {
    const auto d2 = squared_distance_to(to, true);
    long double sum = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < from.size(); ++i) {
        if (!from.get(i)) continue;
        sum += static_cast<long double>(d2[i]);
        ++n;
    }
    const double r = from.resolution();
    return static_cast<double>(sum / n) / (r * r);
}

}  // namespace

double iou(const VoxelGrid& a, const VoxelGrid& b) {
    require_same_resolution(a, b, "iou");
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const bool x = a.get(i), y = b.get(i);
        inter += (x && y) ? 1 : 0;
        uni += (x || y) ? 1 : 0;
    }
    if (uni == 0) return 1.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

double chamfer(const VoxelGrid& a, const VoxelGrid& b) {
    require_same_resolution(a, b, "chamfer");
    if (a.count() == 0 || b.count() == 0) throw ValidationError("chamfer: undefined for an empty grid");
    // Both point sets live on the same voxel lattice, so the nearest-center
    // distance is exactly the lattice distance transform.
    return mean_nearest_squared(a, b) + mean_nearest_squared(b, a);
}

void write_voxel_grid(const std::filesystem::path& path, const VoxelGrid& grid) {
    binio::Writer w;
    w.magic("VXG1");
    w.u32(static_cast<std::uint32_t>(grid.resolution()));
    std::vector<std::uint8_t> packed((grid.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (grid.get(i)) packed[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
    w.raw(packed.data(), packed.size());
    w.save(path);
}

VoxelGrid read_voxel_grid(const std::filesystem::path& path) {
    auto r = binio::Reader::open(path);
    r.expect_magic("VXG1");
    const std::uint32_t res = r.u32();
    if (res < 2 || res > 1024) r.fail("invalid resolution " + std::to_string(res));
    VoxelGrid grid(static_cast<int>(res));
    std::vector<std::uint8_t> packed((grid.size() + 7) / 8);
    r.raw(packed.data(), packed.size());
    r.expect_end();
    for (std::size_t i = 0; i < grid.size(); ++i) grid.set(i, (packed[i / 8] >> (i % 8)) & 1u);
    return grid;
}

}  // namespace voxrefine
