#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "voxrefine/corrupt.hpp"
#include "voxrefine/model.hpp"
#include "voxrefine/render.hpp"
#include "voxrefine/rng.hpp"

namespace voxrefine::data {

enum class ShapeKind { box, sphere, torus, composite, l_shape };

std::string to_string(ShapeKind k);
/// Throws ValidationError for unknown names.
ShapeKind shape_kind_from_string(const std::string& name);

/// One analytic solid in normalized space. `rotation` maps world offsets
/// into the local frame (row-major 3x3).
struct Primitive {
    enum class Type { box, sphere, torus } type = Type::sphere;
    Vec3 center{0, 0, 0};
    std::array<double, 9> rotation{1, 0, 0, 0, 1, 0, 0, 0, 1};
    /// box: half extents; sphere: radius in [0]; torus: major [0], minor [1].
    Vec3 size{0.4, 0.0, 0.0};

    bool contains(const Vec3& p) const;
};

/// Union of primitives.
struct Solid {
    std::vector<Primitive> parts;

    bool contains(const Vec3& p) const;
};

/// Random solid of the given kind; composite unions 2-4 random primitives.
Solid sample_solid(ShapeKind kind, Rng& rng);
/// Occupies every voxel whose center lies inside the solid.
VoxelGrid voxelize_solid(const Solid& solid, int resolution);
/// Throws ValidationError for resolution < 8.
VoxelGrid generate_shape(ShapeKind kind, int resolution, Rng& rng);

struct DataConfig {
    int resolution = 64;
    int views = 4;
    int candidates = 150;
    int image_size = 224;
    int image_patch = 14;
    double fov_deg = 35.0;
    double camera_radius = 2.0;
    double pitch_min_deg = -15.0;
    double pitch_max_deg = 60.0;
    /// Bounds of the view-selection pitch filter.
    double select_min_deg = -10.0;
    double select_max_deg = 30.0;
    std::map<std::string, double> family_mix{{"pseudo_vfm", 0.5}, {"synthetic", 0.5}, {"halfspace", 0.0}};
    std::vector<ShapeKind> shapes{ShapeKind::box, ShapeKind::sphere, ShapeKind::torus, ShapeKind::composite, ShapeKind::l_shape};

    void validate() const;
};

std::string data_config_to_json(const DataConfig& cfg);
/// Missing keys keep defaults; unknown keys are rejected.
DataConfig data_config_from_json(const std::string& text);

/// Draws a family with probability proportional to the configured weights.
corrupt::Family draw_family(const std::map<std::string, double>& mix, Rng& rng);

struct SamplePair {
    explicit SamplePair(int resolution) : clean(resolution), corrupted(resolution) {}

    std::uint64_t id = 0;
    std::uint64_t seed = 0;
    ShapeKind shape = ShapeKind::sphere;
    corrupt::CorruptionSpec spec;
    VoxelGrid clean;
    VoxelGrid corrupted;
    std::vector<int> view_ids;
    std::vector<render::CameraPose> cameras;
    std::vector<render::RenderImage> images;
    std::vector<render::ImageIndex> indices;

    corrupt::Family family() const { return spec.family; }
};

/// Candidate camera positions on a sphere around the origin.
std::vector<Vec3> candidate_positions(const DataConfig& cfg, Rng& rng);

/// Fully determined by (dataset_seed, id, cfg).
SamplePair generate_sample(std::uint64_t dataset_seed, std::uint64_t id, const DataConfig& cfg);

/// Files: clean.vxg, corrupt.vxg, cam_k.json, img_k.bin, idx_k.iix, meta.json.
void write_sample(const std::filesystem::path& dir, const SamplePair& sample);
/// Throws IoError for missing files and FormatError for malformed ones.
SamplePair read_sample(const std::filesystem::path& dir);
std::vector<std::string> sample_files(int views);

bool operator==(const SamplePair& a, const SamplePair& b);

model::TrainSample to_train_sample(const SamplePair& sample);

struct ManifestEntry {
    std::uint64_t id = 0;
    std::uint64_t seed = 0;
    std::string dir;
    std::string family;
    std::string shape;
    std::vector<int> view_ids;
};

struct DatasetManifest {
    int version = 1;
    std::uint64_t seed = 0;
    DataConfig config;
    std::vector<ManifestEntry> samples;
};

void write_manifest(const std::filesystem::path& root, const DatasetManifest& manifest);
/// Throws ValidationError listing every referenced file that is missing.
DatasetManifest read_manifest(const std::filesystem::path& root);

std::string sample_dir_name(std::uint64_t id);

/// Generates `count` samples under root using `threads` workers, then writes
/// manifest.json. Output bytes do not depend on the thread count.
DatasetManifest generate_dataset(const std::filesystem::path& root, std::uint64_t seed, std::uint64_t count,
                                 const DataConfig& cfg, int threads);

}  // namespace voxrefine::data
