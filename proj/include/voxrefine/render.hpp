#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "voxrefine/voxel_grid.hpp"

namespace voxrefine::render {

/// Pinhole camera. Camera frame: +x right, +y down, +z forward.
struct CameraPose {
    /// Row-major world-to-camera transform.
    std::array<double, 16> extrinsic{};
    double fx = 0, fy = 0, cx = 0, cy = 0;
    int width = 0;
    int height = 0;

    /// Camera center in world coordinates (-R^T t).
    Vec3 position() const;
    /// Throws ValidationError if the rotation block is not orthonormal or
    /// the image size is not positive.
    void validate() const;
};

/// Look-at-origin camera with square pixels and centered principal point.
CameraPose make_lookat_camera(const Vec3& position, double fov_y, int width, int height);

/// Per-pixel voxel id from the nearest surface, plus depth.
struct IndexMap {
    int width = 0;
    int height = 0;
    std::vector<std::optional<Coord3>> cells;
    /// Camera-space z of the visible surface; +inf for background.
    std::vector<double> depth;

    const std::optional<Coord3>& at(int x, int y) const { return cells[static_cast<std::size_t>(y) * width + x]; }
};

/// Normal-shaded image, (n + 1) / 2 per channel, background 0. HWC layout.
struct RenderImage {
    int width = 0;
    int height = 0;
    std::vector<float> pixels;

    float at(int x, int y, int c) const { return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
};

struct PatchCoord {
    std::array<float, 3> coord{0.0f, 0.0f, 0.0f};
    bool null = true;

    friend bool operator==(const PatchCoord&, const PatchCoord&) = default;
};

/// One 3D coordinate (voxel units) per image patch.
struct ImageIndex {
    int rows = 0;
    int cols = 0;
    std::vector<PatchCoord> patches;

    const PatchCoord& at(int r, int c) const { return patches[static_cast<std::size_t>(r) * cols + c]; }
    friend bool operator==(const ImageIndex&, const ImageIndex&) = default;
};

IndexMap render_index_map(const CoordMesh& mesh, const CameraPose& camera);
RenderImage render_normal_image(const CoordMesh& mesh, const CameraPose& camera);

/// Both products from a single rasterization pass.
void render_both(const CoordMesh& mesh, const CameraPose& camera, IndexMap* index, RenderImage* image);

/// Mean of the non-null pixel coordinates of each patch. Throws
/// ValidationError when patch_size does not divide the image.
ImageIndex pool_image_index(const IndexMap& map, int patch_size = 14);

/// Camera as JSON text: extrinsic (16, row-major), fx, fy, cx, cy, width, height.
std::string camera_to_json(const CameraPose& camera);
CameraPose camera_from_json(const std::string& text);
void write_camera(const std::filesystem::path& path, const CameraPose& camera);
CameraPose read_camera(const std::filesystem::path& path);

/// "IIX1" file format.
void write_image_index(const std::filesystem::path& path, const ImageIndex& index);
ImageIndex read_image_index(const std::filesystem::path& path);

/// "IMG1" file format.
void write_image(const std::filesystem::path& path, const RenderImage& image);
RenderImage read_image(const std::filesystem::path& path);

/// Debug dump: `<prefix>.pgm` (255 = covered) and `<prefix>.csv`
/// (px,py,x,y,z,depth for every covered pixel).
void write_index_map_debug(const std::filesystem::path& prefix, const IndexMap& map);

}  // namespace voxrefine::render
