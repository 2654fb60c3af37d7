#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "voxrefine/corrupt.hpp"
#include "voxrefine/data.hpp"
#include "voxrefine/error.hpp"
#include "voxrefine/flow.hpp"
#include "voxrefine/views.hpp"

using namespace voxrefine;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

const std::map<std::string, corrupt::Family> kFamilies{
    {"pseudo_vfm", corrupt::Family::pseudo_vfm}, {"synthetic", corrupt::Family::synthetic}, {"halfspace", corrupt::Family::halfspace}};
const std::map<std::string, flow::OdeMethod> kOde{{"euler", flow::OdeMethod::euler}, {"midpoint", flow::OdeMethod::midpoint}};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << text;
    if (!out) throw IoError("short write: " + path.string());
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void make_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

/// Logs the resolved option set and, when given, echoes it into an output directory.
void echo_config(const CLI::App& sub, const std::optional<fs::path>& dir = std::nullopt) {
    std::string text = "# voxrefine " + sub.get_name() + "\n";
    std::istringstream lines(sub.config_to_str(true, false));
    for (std::string line; std::getline(lines, line);)
        if (!line.ends_with("=\"\"")) text += line + "\n";
    std::cerr << text;
    if (dir) write_text(*dir / "resolved_config.toml", text);
}

/// Applies a TOML file to every option not given on the command line.
void apply_config_file(CLI::App& sub) {
    const auto* opt = sub.get_option("--config");
    if (opt->count() == 0) return;
    const auto path = opt->as<std::string>();
    std::vector<CLI::ConfigItem> items;
    try {
        items = CLI::ConfigTOML().from_file(path);
    } catch (const CLI::FileError& e) {
        throw IoError(e.what());
    }
    for (const auto& item : items) {
        if (item.name == "++" || item.name == "--") continue;
        CLI::Option* op = item.parents.empty() ? sub.get_option_no_throw("--" + item.name) : nullptr;
        if (op == nullptr || !op->get_configurable() || op == opt)
            throw ValidationError(path + ": unknown config key '" + item.fullname() + "' for " + sub.get_name());
        if (op->count() > 0) continue;
        op->add_result(item.inputs);
        op->run_callback();
    }
}

void add_config_option(CLI::App* s) {
    s->add_option("--config", "TOML file with option values; command-line flags take precedence")->type_name("FILE")->configurable(false);
}

// ---------------------------------------------------------------------------

struct GenDataArgs {
    std::string out;
    std::uint64_t count = 8;
    std::uint64_t seed = 0;
    int threads = 1;
    std::optional<std::string> family;
    std::vector<std::string> shapes;
    data::DataConfig cfg;
};

void add_gen_data(CLI::App& app, GenDataArgs& a) {
    auto* s = app.add_subcommand("gen-data", "Synthesize a dataset of corrupted/clean pairs with renders and image indices");
    s->add_option("--out", a.out, "Output dataset directory")->required();
    s->add_option("--count", a.count, "Number of samples")->capture_default_str();
    s->add_option("--seed", a.seed, "Dataset seed")->capture_default_str();
    s->add_option("--threads", a.threads, "Worker threads (output does not depend on it)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber)
        ->configurable(false);
    s->add_option("--resolution", a.cfg.resolution, "Voxel grid resolution R")->capture_default_str();
    s->add_option("--views", a.cfg.views, "Selected views per sample S")->capture_default_str();
    s->add_option("--candidates", a.cfg.candidates, "Candidate cameras per sample")->capture_default_str();
    s->add_option("--image-size", a.cfg.image_size, "Rendered image width and height in pixels")->capture_default_str();
    s->add_option("--image-patch", a.cfg.image_patch, "Image patch size in pixels")->capture_default_str();
    s->add_option("--fov", a.cfg.fov_deg, "Vertical field of view in degrees")->capture_default_str();
    s->add_option("--radius", a.cfg.camera_radius, "Camera distance from the origin")->capture_default_str();
    s->add_option("--camera-pitch-min", a.cfg.pitch_min_deg, "Lowest candidate camera pitch in degrees")->capture_default_str();
    s->add_option("--camera-pitch-max", a.cfg.pitch_max_deg, "Highest candidate camera pitch in degrees")->capture_default_str();
    s->add_option("--pitch-min", a.cfg.select_min_deg, "View-selection pitch filter lower bound in degrees")->capture_default_str();
    s->add_option("--pitch-max", a.cfg.select_max_deg, "View-selection pitch filter upper bound in degrees")->capture_default_str();
    s->add_option("--family", a.family, "Use a single corruption family instead of the default 1:1 pseudo_vfm/synthetic mix")
        ->check(CLI::IsMember({"pseudo_vfm", "synthetic", "halfspace"}));
    s->add_option("--shapes", a.shapes, "Shape kinds to draw from (box sphere torus composite l_shape)")
        ->check(CLI::IsMember({"box", "sphere", "torus", "composite", "l_shape"}));
    add_config_option(s);
    s->callback([&a, s] {
        apply_config_file(*s);
        if (a.family) a.cfg.family_mix = {{*a.family, 1.0}};
        if (!a.shapes.empty()) {
            a.cfg.shapes.clear();
            for (const auto& name : a.shapes) a.cfg.shapes.push_back(data::shape_kind_from_string(name));
        }
        a.cfg.validate();
        const fs::path root(a.out);
        make_dir(root);
        echo_config(*s, root);
        const auto t0 = std::chrono::steady_clock::now();
        const auto m = data::generate_dataset(root, a.seed, a.count, a.cfg, a.threads);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::map<std::string, int> by_family;
        for (const auto& e : m.samples) ++by_family[e.family];
        std::cout << "wrote " << m.samples.size() << " samples to " << root.string() << " in " << secs << " s\n";
        for (const auto& [f, n] : by_family) std::cout << "  " << f << ": " << n << "\n";
    });
}

// ---------------------------------------------------------------------------

struct CorruptArgs {
    std::string in, out, family = "synthetic";
    std::optional<std::string> spec_out;
    std::uint64_t seed = 0;
};

void add_corrupt(CLI::App& app, CorruptArgs& a) {
    auto* s = app.add_subcommand("corrupt", "Corrupt a voxel grid with a randomly drawn preset of one family");
    s->add_option("--in", a.in, "Input voxel grid (.vxg)")->required();
    s->add_option("--out", a.out, "Output voxel grid (.vxg)")->required();
    s->add_option("--family", a.family, "Corruption family")
        ->capture_default_str()
        ->check(CLI::IsMember({"pseudo_vfm", "synthetic", "halfspace"}));
    s->add_option("--seed", a.seed, "Random seed")->capture_default_str();
    s->add_option("--spec-out", a.spec_out, "Also write the drawn corruption spec as JSON");
    add_config_option(s);
    s->callback([&a, s] {
        apply_config_file(*s);
        echo_config(*s);
        const auto grid = read_voxel_grid(a.in);
        Rng rng(a.seed);
        const auto spec = corrupt::sample_corruption_spec(kFamilies.at(a.family), rng, grid.resolution());
        const auto out = corrupt::apply_corruption(grid, spec);
        write_voxel_grid(a.out, out);
        if (a.spec_out) write_text(*a.spec_out, corrupt::spec_to_json(spec) + "\n");
        std::cout << "occupied " << grid.count() << " -> " << out.count() << ", IoU " << iou(grid, out) << "\n";
    });
}

// ---------------------------------------------------------------------------

struct SdfArgs {
    std::string in, out;
};

void add_sdf(CLI::App& app, SdfArgs& a) {
    auto* s = app.add_subcommand("sdf", "Compute the exact signed distance field of a voxel grid");
    s->add_option("--in", a.in, "Input voxel grid (.vxg)")->required();
    s->add_option("--out", a.out, "Output SDF file")->required();
    add_config_option(s);
    s->callback([&a, s] {
        apply_config_file(*s);
        echo_config(*s);
        const auto sdf = corrupt::compute_sdf(read_voxel_grid(a.in));
        corrupt::write_sdf(a.out, sdf);
        float lo = 0, hi = 0;
        for (float v : sdf.values) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        std::cout << "sdf range [" << lo << ", " << hi << "]\n";
    });
}

// ---------------------------------------------------------------------------

struct SelectArgs {
    std::vector<std::string> cameras;
    std::optional<std::string> out;
    int views = 4;
    double pitch_min = -10.0, pitch_max = 30.0;
    std::uint64_t seed = 0;
};

void add_select_views(CLI::App& app, SelectArgs& a) {
    auto* s = app.add_subcommand("select-views", "Pick well-spread views from candidate camera files by k-means clustering");
    s->add_option("--cameras", a.cameras, "Candidate camera JSON files")->required();
    s->add_option("--views", a.views, "Number of views S to select")->capture_default_str();
    s->add_option("--pitch-min", a.pitch_min, "Pitch filter lower bound in degrees")->capture_default_str();
    s->add_option("--pitch-max", a.pitch_max, "Pitch filter upper bound in degrees")->capture_default_str();
    s->add_option("--seed", a.seed, "Random seed")->capture_default_str();
    s->add_option("--out", a.out, "Write the selected indices as JSON");
    add_config_option(s);
    s->callback([&a, s] {
        apply_config_file(*s);
        echo_config(*s);
        std::vector<Vec3> positions;
        for (const auto& path : a.cameras) positions.push_back(render::read_camera(path).position());
        Rng rng(a.seed);
        const auto ids = views::select_views(positions, {a.views, a.pitch_min * kDeg, a.pitch_max * kDeg}, rng);
        const json j = ids;
        if (a.out) write_text(*a.out, j.dump() + "\n");
        std::cout << j.dump() << "\n";
    });
}

// ---------------------------------------------------------------------------

struct RenderArgs {
    std::string in, camera, out;
    int patch = 14;
    bool image = false;
};

void add_render_index(CLI::App& app, RenderArgs& a) {
    auto* s = app.add_subcommand("render-index", "Render the index map of a voxel grid and pool it into an image index");
    s->add_option("--in", a.in, "Voxel grid (.vxg)")->required();
    s->add_option("--camera", a.camera, "Camera JSON file")->required();
    s->add_option("--out", a.out, "Output prefix: writes <out>.iix, <out>.pgm and <out>.csv")->required();
    s->add_option("--patch", a.patch, "Image patch size in pixels")->capture_default_str();
    s->add_flag("--image", a.image, "Also write the normal-shaded render to <out>_img.bin");
    add_config_option(s);
    s->callback([&a, s] {
        apply_config_file(*s);
        echo_config(*s);
        const auto grid = read_voxel_grid(a.in);
        const auto cam = render::read_camera(a.camera);
        cam.validate();
        const auto mesh = triangulate(grid);
        render::IndexMap map;
        render::RenderImage img;
        render::render_both(mesh, cam, &map, a.image ? &img : nullptr);
        const auto idx = render::pool_image_index(map, a.patch);
        render::write_image_index(a.out + ".iix", idx);
        render::write_index_map_debug(a.out, map);
        if (a.image) render::write_image(a.out + "_img.bin", img);
        std::size_t covered = 0, live = 0;
        for (const auto& c : map.cells) covered += c.has_value();
        for (const auto& p : idx.patches) live += !p.null;
        std::cout << "covered pixels " << covered << ", non-null patches " << live << "/" << idx.patches.size() << "\n";
    });
}

// ---------------------------------------------------------------------------

struct ModelArgs {
    model::ModelConfig cfg;
    bool no_image_rope = false;
};

void add_model_options(CLI::App* s, ModelArgs& m) {
    s->add_option("--voxel-patch", m.cfg.voxel_patch, "Voxel patch edge p")->capture_default_str();
    s->add_option("--latent-channels", m.cfg.latent_channels, "Latent channels per voxel token")->capture_default_str();
    s->add_option("--width", m.cfg.width, "Transformer width C")->capture_default_str();
    s->add_option("--heads", m.cfg.heads, "Attention heads H")->capture_default_str();
    s->add_option("--dual-blocks", m.cfg.n_dual, "Dual-stream blocks")->capture_default_str();
    s->add_option("--single-blocks", m.cfg.n_single, "Single-stream blocks")->capture_default_str();
    s->add_option("--mlp-ratio", m.cfg.mlp_ratio, "MLP hidden width multiplier")->capture_default_str();
    s->add_option("--time-dim", m.cfg.time_embed_dim, "Sinusoidal time embedding size")->capture_default_str();
    s->add_option("--rope-base", m.cfg.rope_base, "RoPE frequency base")->capture_default_str();
    s->add_option("--lr", m.cfg.lr, "AdamW learning rate")->capture_default_str();
    s->add_option("--weight-decay", m.cfg.weight_decay, "AdamW decoupled weight decay")->capture_default_str();
    s->add_flag("--no-image-rope", m.no_image_rope, "Ablation: zero the rotary phases of image tokens");
}

struct TrainArgs {
    std::string data, out;
    int steps = 1000;
    std::uint64_t seed = 0;
    std::uint64_t samples = 0;
    int log_every = 1;
    ModelArgs model;
};

struct Run {
    model::ModelConfig cfg;
    num::ParamStore params;
};

Run load_run(const fs::path& dir) {
    Run r;
    r.cfg = model::config_from_json(read_text(dir / "model.json"));
    r.params = model::init_params(r.cfg, 0);
    num::load_checkpoint(dir / "model.viap", r.params);
    return r;
}

void add_train(CLI::App& app, TrainArgs& a) {
    auto* s = app.add_subcommand("train", "Train the refinement model with the correctional flow objective");
    s->add_option("--data", a.data, "Dataset directory (from gen-data)")->required();
    s->add_option("--out", a.out, "Run directory for model.json, model.viap and train_log.jsonl")->required();
    s->add_option("--steps", a.steps, "Optimizer steps")->capture_default_str()->check(CLI::PositiveNumber);
    s->add_option("--seed", a.seed, "Seed for initialization, sample order and time draws")->capture_default_str();
    s->add_option("--samples", a.samples, "Use only the first N samples (0 = all)")->capture_default_str();
    s->add_option("--log-every", a.log_every, "Progress line interval on stderr")->capture_default_str()->check(CLI::PositiveNumber);
    add_model_options(s, a.model);
    add_config_option(s);
    s->callback([&a, s] {
        apply_config_file(*s);
        const fs::path root(a.data), out(a.out);
        const auto manifest = data::read_manifest(root);
        if (manifest.samples.empty()) throw ValidationError("dataset has no samples");
        auto cfg = a.model.cfg;
        cfg.resolution = manifest.config.resolution;
        cfg.image_patch = manifest.config.image_patch;
        cfg.image_rope = !a.model.no_image_rope;
        cfg.validate();
        make_dir(out);
        echo_config(*s, out);
        write_text(out / "model.json", model::config_to_json(cfg) + "\n");

        const std::size_t n = a.samples == 0 ? manifest.samples.size()
                                             : static_cast<std::size_t>(std::min<std::uint64_t>(a.samples, manifest.samples.size()));
        const model::VoxelCodec codec(cfg);
        std::vector<model::PreparedSample> prepared;
        for (std::size_t i = 0; i < n; ++i)
            prepared.push_back(
                model::prepare_sample(data::to_train_sample(data::read_sample(root / manifest.samples[i].dir)), codec, cfg));

        auto params = model::init_params(cfg, a.seed);
        const num::AdamW opt{cfg.lr, 0.9, 0.999, 1e-8, cfg.weight_decay};
        Rng rng(hash_seed(a.seed, 0x7121));
        std::ofstream log(out / "train_log.jsonl", std::ios::trunc);
        if (!log) throw IoError("cannot open for writing: " + (out / "train_log.jsonl").string());
        std::cerr << "training on " << n << " sample(s), " << params.numel() << " parameters\n";
        const auto t0 = std::chrono::steady_clock::now();
        double last = 0.0;
        for (int step = 1; step <= a.steps; ++step) {
            const std::size_t pick = n > 1 ? static_cast<std::size_t>(rng.below(n)) : 0;
            double t = 0.0;
            last = model::train_step(prepared[pick], params, cfg, opt, rng, &t);
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            log << json{{"step", step}, {"loss", last}, {"t", t}, {"sample", pick}, {"elapsed_s", secs}}.dump() << "\n";
            if (step % a.log_every == 0 || step == a.steps)
                std::fprintf(stderr, "step %d/%d loss %.6g (%.1f s)\n", step, a.steps, last, secs);
        }
        num::save_checkpoint(out / "model.viap", params);
        std::cout << "final loss " << last << ", checkpoint " << (out / "model.viap").string() << "\n";
    });
}

// ---------------------------------------------------------------------------

struct RefineArgs {
    std::string run, out;
    std::optional<std::string> sample, in;
    int steps = 8;
    std::string ode = "euler";
};

void add_refine(CLI::App& app, RefineArgs& a) {
    auto* s = app.add_subcommand("refine", "Refine a corrupted voxel grid with a trained model");
    s->add_option("--run", a.run, "Run directory written by train")->required();
    auto* sample = s->add_option("--sample", a.sample, "Sample directory: refines corrupt.vxg using its views");
    auto* in = s->add_option("--in", a.in, "Voxel grid to refine without image conditioning");
    sample->excludes(in);
    s->add_option("--out", a.out, "Output voxel grid (.vxg)")->required();
    s->add_option("--steps", a.steps, "ODE steps")->capture_default_str()->check(CLI::PositiveNumber);
    s->add_option("--ode", a.ode, "ODE integrator")->capture_default_str()->check(CLI::IsMember({"euler", "midpoint"}));
    add_config_option(s);
    s->callback([&a, s] {
        apply_config_file(*s);
        if (!a.sample && !a.in) throw ValidationError("refine: one of --sample or --in is required");
        echo_config(*s);
        auto run = load_run(a.run);
        const flow::RefineOptions opts{a.steps, kOde.at(a.ode)};
        if (a.sample) {
            const auto smp = data::read_sample(*a.sample);
            if (smp.corrupted.resolution() != run.cfg.resolution)
                throw ValidationError("sample resolution " + std::to_string(smp.corrupted.resolution()) + " differs from model resolution " +
                                      std::to_string(run.cfg.resolution));
            const auto out = flow::refine(smp.corrupted, smp.images, smp.indices, run.cfg, run.params, opts);
            write_voxel_grid(a.out, out);
            std::cout << "input  IoU " << iou(smp.corrupted, smp.clean) << "\n";
            std::cout << "output IoU " << iou(out, smp.clean) << "\n";
        } else {
            const auto grid = read_voxel_grid(*a.in);
            if (grid.resolution() != run.cfg.resolution) throw ValidationError("grid resolution differs from model resolution");
            const auto out = flow::refine(grid, {}, {}, run.cfg, run.params, opts);
            write_voxel_grid(a.out, out);
            std::cout << "occupied " << grid.count() << " -> " << out.count() << "\n";
        }
    });
}

// ---------------------------------------------------------------------------

struct EvalArgs {
    std::string pred, gt;
};

void add_eval(CLI::App& app, EvalArgs& a) {
    auto* s = app.add_subcommand("eval", "Compare a predicted voxel grid with ground truth (IoU and Chamfer distance)");
    s->add_option("--pred", a.pred, "Predicted voxel grid (.vxg)")->required();
    s->add_option("--gt", a.gt, "Ground-truth voxel grid (.vxg)")->required();
    add_config_option(s);
    s->callback([&a, s] {
        apply_config_file(*s);
        echo_config(*s);
        const auto pred = read_voxel_grid(a.pred), gt = read_voxel_grid(a.gt);
        if (pred.resolution() != gt.resolution()) throw ValidationError("eval: grid resolutions differ");
        const double i = iou(pred, gt), cd = chamfer(pred, gt);
        std::printf("IoU %.6f\nCD %.6f\n", i, cd);
    });
}

// ---------------------------------------------------------------------------

struct AttnArgs {
    std::string run, sample, out;
    double t = 0.5;
};

void write_heatmap(const fs::path& stem, const num::Tensor& m) {
    const std::size_t rows = m.dim(0), cols = m.dim(1);
    std::ofstream csv(stem.string() + ".csv", std::ios::trunc);
    if (!csv) throw IoError("cannot open for writing: " + stem.string() + ".csv");
    csv.precision(9);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) csv << (c ? "," : "") << m.at(r, c);
        csv << "\n";
    }
    double hi = 0.0;
    for (double v : m.values()) hi = std::max(hi, v);
    std::ofstream pgm(stem.string() + ".pgm", std::ios::binary | std::ios::trunc);
    if (!pgm) throw IoError("cannot open for writing: " + stem.string() + ".pgm");
    pgm << "P5\n" << cols << ' ' << rows << "\n255\n";
    for (double v : m.values()) pgm.put(static_cast<char>(hi > 0 ? static_cast<int>(std::lround(255.0 * v / hi)) : 0));
}

void add_attn_dump(CLI::App& app, AttnArgs& a) {
    auto* s = app.add_subcommand("attn-dump", "Write every attention map of one forward pass as CSV and PGM heatmaps");
    s->add_option("--run", a.run, "Run directory written by train")->required();
    s->add_option("--sample", a.sample, "Sample directory providing the input grid and views")->required();
    s->add_option("--out", a.out, "Output directory")->required();
    s->add_option("--t", a.t, "Flow time of the traced forward pass")->capture_default_str()->check(CLI::Range(0.0, 1.0));
    add_config_option(s);
    s->callback([&a, s] {
        apply_config_file(*s);
        auto run = load_run(a.run);
        const auto smp = data::read_sample(a.sample);
        const fs::path out(a.out);
        make_dir(out);
        echo_config(*s, out);
        const model::VoxelCodec codec(run.cfg);
        const auto prepared = model::prepare_sample(data::to_train_sample(smp), codec, run.cfg);
        num::Tensor z_t(prepared.z_v.shape());
        for (std::size_t i = 0; i < z_t.numel(); ++i) z_t[i] = (1.0 - a.t) * prepared.z_v[i] + a.t * prepared.z_gt[i];
        model::ForwardTrace trace;
        trace.enabled = true;
        model::predict_velocity(run.params, run.cfg, z_t, a.t, prepared.views, &trace);
        json index = json::array();
        int k = 0;
        for (const auto& site : model::extract_attention_maps(trace)) {
            const auto mean = model::mean_over_heads(site.map);
            char stem[96];
            std::snprintf(stem, sizeof stem, "%03d_%s%d_%s", k++, site.stage.c_str(), site.block, site.stream.c_str());
            write_heatmap(out / stem, mean);
            index.push_back({{"file", stem},
                             {"stage", site.stage},
                             {"block", site.block},
                             {"stream", site.stream},
                             {"rows", mean.dim(0)},
                             {"cols", mean.dim(1)},
                             {"collapse_score", model::collapse_score(mean)}});
        }
        write_text(out / "sites.json", index.dump(2) + "\n");
        std::cout << "wrote " << k << " attention sites to " << out.string() << "\n";
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"voxrefine: image-conditioned voxel refinement toolkit"};
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1, 1);

    GenDataArgs gen;
    CorruptArgs cor;
    SdfArgs sdf;
    SelectArgs sel;
    RenderArgs ren;
    TrainArgs tr;
    RefineArgs ref;
    EvalArgs ev;
    AttnArgs attn;
    add_gen_data(app, gen);
    add_corrupt(app, cor);
    add_sdf(app, sdf);
    add_select_views(app, sel);
    add_render_index(app, ren);
    add_train(app, tr);
    add_refine(app, ref);
    add_eval(app, ev);
    add_attn_dump(app, attn);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        const auto subs = app.get_subcommands();
        std::cerr << (subs.empty() ? app.help() : subs.front()->help());
        return 1;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
