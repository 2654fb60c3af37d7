#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace voxrefine {

using Vec3 = std::array<double, 3>;
using Coord3 = std::array<int, 3>;

/// Dense R^3 occupancy grid. Linear index is x + R*(y + R*z).
class VoxelGrid {
public:
    /// Empty grid. Throws ValidationError for resolution < 2.
    explicit VoxelGrid(int resolution);

    int resolution() const noexcept { return res_; }
    std::size_t size() const noexcept { return bits_.size(); }

    std::size_t index(int x, int y, int z) const noexcept {
        return static_cast<std::size_t>(x) + static_cast<std::size_t>(res_) * (static_cast<std::size_t>(y) + static_cast<std::size_t>(res_) * z);
    }
    Coord3 coord(std::size_t i) const noexcept {
        const auto r = static_cast<std::size_t>(res_);
        return {static_cast<int>(i % r), static_cast<int>((i / r) % r), static_cast<int>(i / (r * r))};
    }
    bool in_bounds(int x, int y, int z) const noexcept {
        return x >= 0 && y >= 0 && z >= 0 && x < res_ && y < res_ && z < res_;
    }

    bool get(std::size_t i) const noexcept { return bits_[i] != 0; }
    bool get(int x, int y, int z) const noexcept { return bits_[index(x, y, z)] != 0; }
    /// Out-of-range coordinates read as empty.
    bool occupied(int x, int y, int z) const noexcept { return in_bounds(x, y, z) && get(x, y, z); }

    void set(std::size_t i, bool v) noexcept { bits_[i] = v ? 1 : 0; }
    void set(int x, int y, int z, bool v) noexcept { set(index(x, y, z), v); }

    std::size_t count() const noexcept;

    /// Normalized-space center of voxel (x,y,z): (x+0.5)/R - 0.5 per axis.
    Vec3 center(int x, int y, int z) const noexcept {
        const double r = res_;
        return {(x + 0.5) / r - 0.5, (y + 0.5) / r - 0.5, (z + 0.5) / r - 0.5};
    }

    friend bool operator==(const VoxelGrid&, const VoxelGrid&) = default;

private:
    int res_;
    std::vector<std::uint8_t> bits_;
};

/// Points in normalized space [-0.5, 0.5]^3.
struct PointSet {
    std::vector<Vec3> points;
};

struct Triangle {
    std::array<std::uint32_t, 3> v;
};

/// Boundary-face triangulation; each triangle remembers its source voxel.
struct CoordMesh {
    std::vector<Vec3> vertices;
    std::vector<Triangle> triangles;
    std::vector<Coord3> face_coord;
    /// Outward unit normal per triangle (axis aligned).
    std::vector<Vec3> face_normal;
};

/// Occupy the cell floor((p+0.5)*R) (clamped) of every point.
/// Throws ValidationError on non-finite coordinates.
VoxelGrid voxelize_points(const PointSet& points, int resolution);

/// Two triangles per exposed voxel face.
CoordMesh triangulate(const VoxelGrid& grid);

/// Occupied voxel centers in row-major order.
PointSet occupied_centers(const VoxelGrid& grid);

/// |a n b| / |a u b|, 1.0 when both are empty.
double iou(const VoxelGrid& a, const VoxelGrid& b);

/// Symmetric mean squared nearest-neighbour distance between occupied
/// voxel centers. Throws ValidationError when either grid is empty.
double chamfer(const VoxelGrid& a, const VoxelGrid& b);

/// "VXG1" file format.
void write_voxel_grid(const std::filesystem::path& path, const VoxelGrid& grid);
VoxelGrid read_voxel_grid(const std::filesystem::path& path);

}  // namespace voxrefine
