#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "voxrefine/data.hpp"
#include "voxrefine/error.hpp"
#include "voxrefine/views.hpp"

namespace voxrefine::data {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << text;
    if (!out) throw IoError("short write: " + path.string());
}

json parse_file(const fs::path& path) {
    const std::string text = read_text(path);
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(path.string(), e.what());
    }
}

std::string k_name(const char* stem, int k, const char* ext) { return std::string(stem) + "_" + std::to_string(k) + ext; }

json config_json(const DataConfig& c) {
    json shapes = json::array();
    for (auto s : c.shapes) shapes.push_back(to_string(s));
    return {{"resolution", c.resolution},
            {"views", c.views},
            {"candidates", c.candidates},
            {"image_size", c.image_size},
            {"image_patch", c.image_patch},
            {"fov_deg", c.fov_deg},
            {"camera_radius", c.camera_radius},
            {"pitch_min_deg", c.pitch_min_deg},
            {"pitch_max_deg", c.pitch_max_deg},
            {"select_min_deg", c.select_min_deg},
            {"select_max_deg", c.select_max_deg},
            {"family_mix", c.family_mix},
            {"shapes", shapes}};
}

DataConfig config_from(const json& j) {
    if (!j.is_object()) throw ValidationError("data config: expected an object");
    DataConfig c;
    try {
        for (auto it = j.begin(); it != j.end(); ++it) {
            const std::string& k = it.key();
            const json& v = it.value();
            if (k == "resolution") c.resolution = v.get<int>();
            else if (k == "views") c.views = v.get<int>();
            else if (k == "candidates") c.candidates = v.get<int>();
            else if (k == "image_size") c.image_size = v.get<int>();
            else if (k == "image_patch") c.image_patch = v.get<int>();
            else if (k == "fov_deg") c.fov_deg = v.get<double>();
            else if (k == "camera_radius") c.camera_radius = v.get<double>();
            else if (k == "pitch_min_deg") c.pitch_min_deg = v.get<double>();
            else if (k == "pitch_max_deg") c.pitch_max_deg = v.get<double>();
            else if (k == "select_min_deg") c.select_min_deg = v.get<double>();
            else if (k == "select_max_deg") c.select_max_deg = v.get<double>();
            else if (k == "family_mix") c.family_mix = v.get<std::map<std::string, double>>();
            else if (k == "shapes") {
                c.shapes.clear();
                for (const auto& s : v) c.shapes.push_back(shape_kind_from_string(s.get<std::string>()));
            } else {
                throw ValidationError("data config: unknown key '" + k + "'");
            }
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("data config: ") + e.what());
    }
    c.validate();
    return c;
}

}  // namespace

void DataConfig::validate() const {
    auto fail = [](const std::string& m) { throw ValidationError("data config: " + m); };
    if (resolution < 8 || resolution > 512) fail("resolution must be in [8, 512]");
    if (views < 1) fail("views must be positive");
    if (candidates < views) fail("candidates must be >= views");
    if (image_patch < 1 || image_size < image_patch || image_size % image_patch != 0)
        fail("image_patch " + std::to_string(image_patch) + " must divide image_size " + std::to_string(image_size));
    if (!(fov_deg > 0.0 && fov_deg < 180.0)) fail("fov_deg must lie in (0, 180)");
    if (!(camera_radius > std::sqrt(3.0) / 2.0)) fail("camera_radius must place cameras outside the unit cube");
    if (!(pitch_min_deg >= -90.0 && pitch_min_deg <= pitch_max_deg && pitch_max_deg <= 90.0))
        fail("pitch range must satisfy -90 <= min <= max <= 90");
    if (!(select_min_deg <= select_max_deg)) fail("select_min_deg must not exceed select_max_deg");
    double total = 0.0;
    for (const auto& [name, w] : family_mix) {
        corrupt::family_from_string(name);
        if (!(w >= 0.0) || !std::isfinite(w)) fail("family weight for " + name + " must be finite and >= 0");
        total += w;
    }
    if (!(total > 0.0)) fail("family_mix weights must sum to a positive value");
    if (shapes.empty()) fail("shapes must not be empty");
}

std::string data_config_to_json(const DataConfig& cfg) { return config_json(cfg).dump(2); }

DataConfig data_config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("data config: ") + e.what());
    }
    return config_from(j);
}

corrupt::Family draw_family(const std::map<std::string, double>& mix, Rng& rng) {
    double total = 0.0;
    for (const auto& [name, w] : mix) total += w;
    if (!(total > 0.0)) throw ValidationError("draw_family: weights must sum to a positive value");
    const double u = rng.uniform() * total;
    double acc = 0.0;
    std::string last;
    for (const auto& [name, w] : mix) {
        if (w <= 0.0) continue;
        acc += w;
        last = name;
        if (u < acc) return corrupt::family_from_string(name);
    }
    return corrupt::family_from_string(last);
}

std::vector<Vec3> candidate_positions(const DataConfig& cfg, Rng& rng) {
    std::vector<Vec3> out;
    out.reserve(static_cast<std::size_t>(cfg.candidates));
    for (int i = 0; i < cfg.candidates; ++i) {
        const double az = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double pitch = rng.uniform(cfg.pitch_min_deg, cfg.pitch_max_deg) * kDeg;
        out.push_back({cfg.camera_radius * std::cos(pitch) * std::cos(az), cfg.camera_radius * std::cos(pitch) * std::sin(az),
                       cfg.camera_radius * std::sin(pitch)});
    }
    return out;
}

SamplePair generate_sample(std::uint64_t dataset_seed, std::uint64_t id, const DataConfig& cfg) {
    cfg.validate();
    SamplePair s(cfg.resolution);
    s.id = id;
    s.seed = hash_seed(dataset_seed, id);
    Rng root(s.seed);
    Rng shape_rng = root.fork();
    Rng family_rng = root.fork();
    Rng corrupt_rng = root.fork();
    Rng camera_rng = root.fork();
    Rng select_rng = root.fork();

    s.shape = cfg.shapes[shape_rng.below(cfg.shapes.size())];
    s.clean = generate_shape(s.shape, cfg.resolution, shape_rng);
    s.spec = corrupt::sample_corruption_spec(draw_family(cfg.family_mix, family_rng), corrupt_rng, cfg.resolution);
    s.corrupted = corrupt::apply_corruption(s.clean, s.spec);

    const auto positions = candidate_positions(cfg, camera_rng);
    s.view_ids = views::select_views(positions, {cfg.views, cfg.select_min_deg * kDeg, cfg.select_max_deg * kDeg}, select_rng);

    // The condition images show the clean target; the index maps locate the
    // voxels that actually exist in the corrupted input.
    const CoordMesh clean_mesh = triangulate(s.clean);
    const CoordMesh corrupt_mesh = triangulate(s.corrupted);
    for (int v : s.view_ids) {
        const auto cam = render::make_lookat_camera(positions[static_cast<std::size_t>(v)], cfg.fov_deg * kDeg, cfg.image_size,
                                                    cfg.image_size);
        s.cameras.push_back(cam);
        s.images.push_back(render::render_normal_image(clean_mesh, cam));
        s.indices.push_back(render::pool_image_index(render::render_index_map(corrupt_mesh, cam), cfg.image_patch));
    }
    return s;
}

std::vector<std::string> sample_files(int views) {
    std::vector<std::string> files{"meta.json", "clean.vxg", "corrupt.vxg"};
    for (int k = 0; k < views; ++k) {
        files.push_back(k_name("cam", k, ".json"));
        files.push_back(k_name("img", k, ".bin"));
        files.push_back(k_name("idx", k, ".iix"));
    }
    return files;
}

void write_sample(const fs::path& dir, const SamplePair& s) {
    const std::size_t n = s.view_ids.size();
    if (s.cameras.size() != n || s.images.size() != n || s.indices.size() != n)
        throw ValidationError("write_sample: cameras, images and indices must match the view count");
    if (s.clean.resolution() != s.corrupted.resolution()) throw ValidationError("write_sample: grid resolutions differ");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());

    json meta = {{"id", s.id},
                 {"seed", s.seed},
                 {"resolution", s.clean.resolution()},
                 {"shape", to_string(s.shape)},
                 {"family", corrupt::to_string(s.family())},
                 {"corruption", json::parse(corrupt::spec_to_json(s.spec))},
                 {"view_ids", s.view_ids}};
    write_text(dir / "meta.json", meta.dump(2) + "\n");
    write_voxel_grid(dir / "clean.vxg", s.clean);
    write_voxel_grid(dir / "corrupt.vxg", s.corrupted);
    for (std::size_t k = 0; k < n; ++k) {
        const int ki = static_cast<int>(k);
        render::write_camera(dir / k_name("cam", ki, ".json"), s.cameras[k]);
        render::write_image(dir / k_name("img", ki, ".bin"), s.images[k]);
        render::write_image_index(dir / k_name("idx", ki, ".iix"), s.indices[k]);
    }
}

SamplePair read_sample(const fs::path& dir) {
    const fs::path meta_path = dir / "meta.json";
    const json meta = parse_file(meta_path);
    try {
        SamplePair s(meta.at("resolution").get<int>());
        s.id = meta.at("id").get<std::uint64_t>();
        s.seed = meta.at("seed").get<std::uint64_t>();
        s.shape = shape_kind_from_string(meta.at("shape").get<std::string>());
        s.spec = corrupt::spec_from_json(meta.at("corruption").dump());
        s.view_ids = meta.at("view_ids").get<std::vector<int>>();
        s.clean = read_voxel_grid(dir / "clean.vxg");
        s.corrupted = read_voxel_grid(dir / "corrupt.vxg");
        for (std::size_t k = 0; k < s.view_ids.size(); ++k) {
            const int ki = static_cast<int>(k);
            s.cameras.push_back(render::read_camera(dir / k_name("cam", ki, ".json")));
            s.images.push_back(render::read_image(dir / k_name("img", ki, ".bin")));
            s.indices.push_back(render::read_image_index(dir / k_name("idx", ki, ".iix")));
        }
        if (s.clean.resolution() != s.corrupted.resolution())
            throw FormatError(dir.string(), "clean and corrupted grids have different resolutions");
        return s;
    } catch (const json::exception& e) {
        throw FormatError(meta_path.string(), e.what());
    } catch (const ValidationError& e) {
        throw FormatError(meta_path.string(), e.what());
    }
}

bool operator==(const SamplePair& a, const SamplePair& b) {
    if (a.id != b.id || a.seed != b.seed || a.shape != b.shape || a.view_ids != b.view_ids || !(a.clean == b.clean) ||
        !(a.corrupted == b.corrupted) || a.indices != b.indices)
        return false;
    if (corrupt::spec_to_json(a.spec) != corrupt::spec_to_json(b.spec)) return false;
    if (a.cameras.size() != b.cameras.size() || a.images.size() != b.images.size()) return false;
    for (std::size_t k = 0; k < a.cameras.size(); ++k) {
        const auto &ca = a.cameras[k], &cb = b.cameras[k];
        if (ca.extrinsic != cb.extrinsic || ca.fx != cb.fx || ca.fy != cb.fy || ca.cx != cb.cx || ca.cy != cb.cy ||
            ca.width != cb.width || ca.height != cb.height)
            return false;
    }
    for (std::size_t k = 0; k < a.images.size(); ++k) {
        const auto &ia = a.images[k], &ib = b.images[k];
        if (ia.width != ib.width || ia.height != ib.height || ia.pixels != ib.pixels) return false;
    }
    return true;
}

model::TrainSample to_train_sample(const SamplePair& s) { return {s.clean, s.corrupted, s.images, s.indices}; }

std::string sample_dir_name(std::uint64_t id) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "sample_%06llu", static_cast<unsigned long long>(id));
    return buf;
}

void write_manifest(const fs::path& root, const DatasetManifest& m) {
    json samples = json::array();
    for (const auto& e : m.samples)
        samples.push_back(
            {{"id", e.id}, {"seed", e.seed}, {"dir", e.dir}, {"family", e.family}, {"shape", e.shape}, {"view_ids", e.view_ids}});
    const json j = {{"version", m.version},
                    {"seed", m.seed},
                    {"resolution", m.config.resolution},
                    {"views", m.config.views},
                    {"family_mix", m.config.family_mix},
                    {"config", config_json(m.config)},
                    {"samples", samples}};
    write_text(root / "manifest.json", j.dump(2) + "\n");
}

DatasetManifest read_manifest(const fs::path& root) {
    const fs::path path = root / "manifest.json";
    const json j = parse_file(path);
    DatasetManifest m;
    try {
        m.version = j.at("version").get<int>();
        if (m.version != 1) throw FormatError(path.string(), "unsupported manifest version " + std::to_string(m.version));
        m.seed = j.at("seed").get<std::uint64_t>();
        m.config = config_from(j.at("config"));
        for (const auto& e : j.at("samples")) {
            ManifestEntry me;
            me.id = e.at("id").get<std::uint64_t>();
            me.seed = e.at("seed").get<std::uint64_t>();
            me.dir = e.at("dir").get<std::string>();
            me.family = e.at("family").get<std::string>();
            me.shape = e.at("shape").get<std::string>();
            me.view_ids = e.at("view_ids").get<std::vector<int>>();
            m.samples.push_back(std::move(me));
        }
    } catch (const json::exception& e) {
        throw FormatError(path.string(), e.what());
    }
    std::vector<std::string> missing;
    for (const auto& e : m.samples)
        for (const auto& f : sample_files(static_cast<int>(e.view_ids.size()))) {
            const fs::path p = root / e.dir / f;
            if (!fs::exists(p)) missing.push_back(p.string());
        }
    if (!missing.empty()) {
        std::string msg = "manifest references " + std::to_string(missing.size()) + " missing file(s):";
        for (const auto& p : missing) msg += "\n  " + p;
        throw ValidationError(msg);
    }
    return m;
}

DatasetManifest generate_dataset(const fs::path& root, std::uint64_t seed, std::uint64_t count, const DataConfig& cfg,
                                 int threads) {
    cfg.validate();
    if (threads < 1) throw ValidationError("generate_dataset: threads must be >= 1");
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) throw IoError("cannot create directory " + root.string() + ": " + ec.message());

    std::vector<ManifestEntry> entries(count);
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto worker = [&] {
        for (;;) {
            const std::uint64_t id = next.fetch_add(1);
            if (id >= count) return;
            {
                std::lock_guard lock(failure_mu);
                if (failure) return;
            }
            try {
                const SamplePair s = generate_sample(seed, id, cfg);
                const std::string dir = sample_dir_name(id);
                write_sample(root / dir, s);
                entries[id] = {id, s.seed, dir, corrupt::to_string(s.family()), to_string(s.shape), s.view_ids};
            } catch (...) {
                std::lock_guard lock(failure_mu);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const int n = static_cast<int>(std::min<std::uint64_t>(static_cast<std::uint64_t>(threads), std::max<std::uint64_t>(count, 1)));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < n; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    DatasetManifest m;
    m.seed = seed;
    m.config = cfg;
    m.samples = std::move(entries);
    write_manifest(root, m);
    return m;
}

}  // namespace voxrefine::data
