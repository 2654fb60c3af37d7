#include <algorithm>
#include <cmath>
#include <string>

#include "voxrefine/error.hpp"
#include "voxrefine/model.hpp"

namespace voxrefine::model {

namespace {

using num::Shape;

void add_linear(ParamStore& ps, const std::string& name, std::size_t in, std::size_t out, double std, Rng& rng) {
    ps.add(name + ".w", num::randn({in, out}, std, rng));
    ps.add(name + ".b", Tensor({out}));
}

void add_norm(ParamStore& ps, const std::string& name, std::size_t c) {
    ps.add(name + ".g", Tensor({c}, 1.0));
    ps.add(name + ".b", Tensor({c}));
}

void add_stream(ParamStore& ps, const std::string& pre, const ModelConfig& cfg, double res_scale, Rng& rng) {
    const auto C = static_cast<std::size_t>(cfg.width);
    const auto M = C * static_cast<std::size_t>(cfg.mlp_ratio);
    const double s = 1.0 / std::sqrt(static_cast<double>(C));
    add_norm(ps, pre + ".ln1", C);
    add_linear(ps, pre + ".q", C, C, s, rng);
    add_linear(ps, pre + ".k", C, C, s, rng);
    add_linear(ps, pre + ".v", C, C, s, rng);
    add_linear(ps, pre + ".o", C, C, s * res_scale, rng);
    add_norm(ps, pre + ".ln2", C);
    add_linear(ps, pre + ".fc1", C, M, s, rng);
    add_linear(ps, pre + ".fc2", M, C, res_scale / std::sqrt(static_cast<double>(M)), rng);
}

Var lin(Tape& t, ParamStore& ps, const std::string& name, Var x) {
    return num::linear(x, t.param(ps.get(name + ".w")), t.param(ps.get(name + ".b")));
}

Var norm(Tape& t, ParamStore& ps, const std::string& name, Var x) {
    return num::layernorm(x, t.param(ps.get(name + ".g")), t.param(ps.get(name + ".b")));
}

Tensor concat_phase_rows(const std::vector<const Tensor*>& parts) {
    std::size_t rows = 0;
    const std::size_t cols = parts.front()->dim(1);
    for (const Tensor* p : parts) rows += p->dim(0);
    Tensor out({rows, cols});
    std::size_t off = 0;
    for (const Tensor* p : parts) {
        std::copy(p->data(), p->data() + p->numel(), out.data() + off);
        off += p->numel();
    }
    return out;
}

struct Projected {
    Var q, k, v;
};

Projected project(Tape& t, ParamStore& ps, const std::string& pre, Var x, const Tensor& phases) {
    Var h = norm(t, ps, pre + ".ln1", x);
    return {num::rope_rotate(lin(t, ps, pre + ".q", h), phases), num::rope_rotate(lin(t, ps, pre + ".k", h), phases),
            lin(t, ps, pre + ".v", h)};
}

Var attend(Var q, Var k, Var v, std::size_t heads, Tensor* map) {
    return num::merge_heads(num::attention(num::split_heads(q, heads), num::split_heads(k, heads), num::split_heads(v, heads), map));
}

Var mlp_residual(Tape& t, ParamStore& ps, const std::string& pre, Var x) {
    Var h = norm(t, ps, pre + ".ln2", x);
    return num::add(x, lin(t, ps, pre + ".fc2", num::gelu(lin(t, ps, pre + ".fc1", h))));
}

void check_width(const TokenStream& s, const ModelConfig& cfg, const char* what) {
    const auto& v = s.tokens.value();
    if (v.rank() != 2 || v.dim(1) != static_cast<std::size_t>(cfg.width))
        throw ValidationError(std::string(what) + ": stream width " + num::shape_str(v.shape()) + " does not match model width " +
                              std::to_string(cfg.width));
    if (s.phases.rank() != 2 || s.phases.dim(0) != v.dim(0)) throw ValidationError(std::string(what) + ": phase rows do not match tokens");
}

bool tracing(const ForwardTrace* trace) { return trace && trace->enabled; }

}  // namespace

ParamStore init_params(const ModelConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Rng rng(seed);
    ParamStore ps;
    const auto C = static_cast<std::size_t>(cfg.width);
    const auto P = static_cast<std::size_t>(cfg.image_patch);
    const auto D = static_cast<std::size_t>(cfg.time_embed_dim);
    const auto Z = static_cast<std::size_t>(cfg.latent_channels);
    const double res_scale = 1.0 / std::sqrt(2.0 * std::max(1, cfg.n_dual + cfg.n_single));

    add_linear(ps, "vox_in", Z, C, 1.0 / std::sqrt(static_cast<double>(Z)), rng);
    add_linear(ps, "img_in", P * P * 3, C, 1.0 / std::sqrt(static_cast<double>(P * P * 3)), rng);
    add_linear(ps, "time.fc1", D, C, 1.0 / std::sqrt(static_cast<double>(D)), rng);
    add_linear(ps, "time.fc2", C, C, 1.0 / std::sqrt(static_cast<double>(C)), rng);
    for (int i = 0; i < cfg.n_dual; ++i) {
        add_stream(ps, "dual" + std::to_string(i) + ".vox", cfg, res_scale, rng);
        add_stream(ps, "dual" + std::to_string(i) + ".img", cfg, res_scale, rng);
    }
    for (int i = 0; i < cfg.n_single; ++i) add_stream(ps, "single" + std::to_string(i), cfg, res_scale, rng);
    add_norm(ps, "out.ln", C);
    add_linear(ps, "out", C, Z, 0.1 / std::sqrt(static_cast<double>(C)), rng);
    return ps;
}

TokenStream embed_voxel_tokens(Tape& tape, ParamStore& params, Var z, const ModelConfig& cfg) {
    const auto& zv = z.value();
    if (zv.rank() != 2 || zv.dim(0) != static_cast<std::size_t>(cfg.voxel_tokens()) ||
        zv.dim(1) != static_cast<std::size_t>(cfg.latent_channels))
        throw ValidationError("voxel latent " + num::shape_str(zv.shape()) + " does not match config [" +
                              std::to_string(cfg.voxel_tokens()) + "," + std::to_string(cfg.latent_channels) + "]");
    TokenStream s;
    s.tokens = lin(tape, params, "vox_in", z);
    s.coords = voxel_token_coords(cfg);
    s.null.assign(s.coords.size(), 0);
    s.phases = tiled_rope_phases(s.coords, s.null, cfg);
    return s;
}

TokenStream embed_image_tokens(Tape& tape, ParamStore& params, const ImagePatches& patches, const ModelConfig& cfg) {
    const std::size_t D = static_cast<std::size_t>(cfg.image_patch * cfg.image_patch * 3);
    if (patches.pixels.rank() != 2 || patches.pixels.dim(1) != D)
        throw ValidationError("image patches " + num::shape_str(patches.pixels.shape()) + " do not match image_patch " +
                              std::to_string(cfg.image_patch));
    if (patches.coords.size() != patches.pixels.dim(0) || patches.null.size() != patches.coords.size())
        throw ValidationError("image patches: metadata count mismatch");
    TokenStream s;
    s.tokens = lin(tape, params, "img_in", tape.constant(patches.pixels));
    s.coords = patches.coords;
    s.null = patches.null;
    s.phases = cfg.image_rope ? tiled_rope_phases(s.coords, s.null, cfg)
                              : Tensor({s.coords.size(), static_cast<std::size_t>(cfg.width / 2)});
    return s;
}

Var time_embedding(Tape& tape, ParamStore& params, double t, const ModelConfig& cfg) {
    const auto D = static_cast<std::size_t>(cfg.time_embed_dim);
    Var e = tape.constant(num::sinusoidal_embedding(t * 1000.0, D).reshaped({1, D}));
    return lin(tape, params, "time.fc2", num::silu(lin(tape, params, "time.fc1", e)));
}

void dual_block(Tape& tape, ParamStore& params, const ModelConfig& cfg, int index, TokenStream& voxel,
                std::vector<TokenStream>& images, ForwardTrace* trace) {
    const std::string pre = "dual" + std::to_string(index);
    const auto H = static_cast<std::size_t>(cfg.heads);
    check_width(voxel, cfg, "dual_block");
    for (const auto& im : images) check_width(im, cfg, "dual_block");

    const Projected pv = project(tape, params, pre + ".vox", voxel.tokens, voxel.phases);
    Var k_union = pv.k, v_union = pv.v;
    Var x_img;
    Projected pi;
    if (!images.empty()) {
        std::vector<Var> toks;
        std::vector<const Tensor*> phs;
        for (const auto& im : images) {
            toks.push_back(im.tokens);
            phs.push_back(&im.phases);
        }
        x_img = num::concat_rows(toks);
        pi = project(tape, params, pre + ".img", x_img, concat_phase_rows(phs));
        k_union = num::concat_rows({pv.k, pi.k});
        v_union = num::concat_rows({pv.v, pi.v});
    }

    Tensor map;
    Tensor* map_ptr = tracing(trace) ? &map : nullptr;
    Var vox = num::add(voxel.tokens, lin(tape, params, pre + ".vox.o", attend(pv.q, k_union, v_union, H, map_ptr)));
    if (map_ptr) trace->sites.push_back({"dual", index, "voxel", std::move(map)});
    voxel.tokens = mlp_residual(tape, params, pre + ".vox", vox);

    if (images.empty()) return;
    Tensor imap;
    Tensor* imap_ptr = tracing(trace) ? &imap : nullptr;
    Var img = num::add(x_img, lin(tape, params, pre + ".img.o", attend(pi.q, k_union, v_union, H, imap_ptr)));
    img = mlp_residual(tape, params, pre + ".img", img);
    std::size_t off = 0;
    for (std::size_t i = 0; i < images.size(); ++i) {
        const std::size_t L = images[i].size();
        images[i].tokens = num::slice_rows(img, off, off + L);
        if (imap_ptr) {
            const std::size_t Lq = imap.dim(1), Lkv = imap.dim(2);
            Tensor part({H, L, Lkv});
            for (std::size_t h = 0; h < H; ++h)
                std::copy(imap.data() + (h * Lq + off) * Lkv, imap.data() + (h * Lq + off + L) * Lkv, part.data() + h * L * Lkv);
            trace->sites.push_back({"dual", index, "image" + std::to_string(i), std::move(part)});
        }
        off += L;
    }
}

void single_block(Tape& tape, ParamStore& params, const ModelConfig& cfg, int index, TokenStream& unified, ForwardTrace* trace) {
    const std::string pre = "single" + std::to_string(index);
    check_width(unified, cfg, "single_block");
    const Projected p = project(tape, params, pre, unified.tokens, unified.phases);
    Tensor map;
    Tensor* map_ptr = tracing(trace) ? &map : nullptr;
    Var x = num::add(unified.tokens, lin(tape, params, pre + ".o", attend(p.q, p.k, p.v, static_cast<std::size_t>(cfg.heads), map_ptr)));
    if (map_ptr) trace->sites.push_back({"single", index, "unified", std::move(map)});
    unified.tokens = mlp_residual(tape, params, pre, x);
}

Var forward_velocity(Tape& tape, ParamStore& params, const ModelConfig& cfg, Var z_t, double t,
                     const std::vector<ImagePatches>& views, ForwardTrace* trace) {
    if (!(t >= 0.0 && t <= 1.0)) throw ValidationError("forward_velocity: t must be in [0, 1]");
    if (trace) {
        trace->sites.clear();
        trace->unified_layout.clear();
    }
    TokenStream voxel = embed_voxel_tokens(tape, params, z_t, cfg);
    const Var temb = time_embedding(tape, params, t, cfg);
    voxel.tokens = num::add_row(voxel.tokens, temb);
    std::vector<TokenStream> images;
    for (const auto& v : views) {
        images.push_back(embed_image_tokens(tape, params, v, cfg));
        images.back().tokens = num::add_row(images.back().tokens, temb);
    }

    for (int i = 0; i < cfg.n_dual; ++i) dual_block(tape, params, cfg, i, voxel, images, trace);

    const std::size_t L_v = voxel.size();
    TokenStream unified;
    std::vector<Var> toks{voxel.tokens};
    std::vector<const Tensor*> phs{&voxel.phases};
    unified.coords = voxel.coords;
    unified.null = voxel.null;
    if (trace) trace->unified_layout.push_back(L_v);
    for (const auto& im : images) {
        toks.push_back(im.tokens);
        phs.push_back(&im.phases);
        unified.coords.insert(unified.coords.end(), im.coords.begin(), im.coords.end());
        unified.null.insert(unified.null.end(), im.null.begin(), im.null.end());
        if (trace) trace->unified_layout.push_back(im.size());
    }
    unified.tokens = images.empty() ? voxel.tokens : num::concat_rows(toks);
    unified.phases = concat_phase_rows(phs);

    for (int i = 0; i < cfg.n_single; ++i) single_block(tape, params, cfg, i, unified, trace);

    Var out = num::slice_rows(unified.tokens, 0, L_v);
    return lin(tape, params, "out", norm(tape, params, "out.ln", out));
}

Tensor predict_velocity(ParamStore& params, const ModelConfig& cfg, const Tensor& z_t, double t,
                        const std::vector<ImagePatches>& views, ForwardTrace* trace) {
    Tape tape(false);
    return forward_velocity(tape, params, cfg, tape.constant(z_t), t, views, trace).value();
}

Var fm_loss(Tape& tape, ParamStore& params, const ModelConfig& cfg, const Tensor& z_v, const Tensor& z_gt, double t,
            const std::vector<ImagePatches>& views) {
    if (!z_v.same_shape(z_gt))
        throw ValidationError("fm_loss: latent shapes differ " + num::shape_str(z_v.shape()) + " vs " + num::shape_str(z_gt.shape()));
    if (!(t >= 0.0 && t <= 1.0)) throw ValidationError("fm_loss: t must be in [0, 1]");
    Tensor z_t(z_v.shape()), target(z_v.shape());
    for (std::size_t i = 0; i < z_v.numel(); ++i) {
        z_t[i] = (1.0 - t) * z_v[i] + t * z_gt[i];
        target[i] = z_gt[i] - z_v[i];
    }
    Var pred = forward_velocity(tape, params, cfg, tape.constant(std::move(z_t)), t, views);
    return num::mse(pred, tape.constant(std::move(target)));
}

PreparedSample prepare_sample(const TrainSample& sample, const VoxelCodec& codec, const ModelConfig& cfg) {
    if (sample.images.size() != sample.indices.size())
        throw ValidationError("prepare_sample: " + std::to_string(sample.images.size()) + " images but " +
                              std::to_string(sample.indices.size()) + " index maps");
    PreparedSample p;
    p.z_v = codec.encode(sample.corrupted).tokens;
    p.z_gt = codec.encode(sample.clean).tokens;
    for (std::size_t i = 0; i < sample.images.size(); ++i)
        p.views.push_back(extract_image_patches(sample.images[i], sample.indices[i], cfg.image_patch));
    return p;
}

double train_step(const PreparedSample& sample, ParamStore& params, const ModelConfig& cfg, const num::AdamW& opt, Rng& rng,
                  double* t_out) {
    const double t = rng.uniform();
    if (t_out) *t_out = t;
    params.zero_grad();
    double loss = 0;
    try {
        Tape tape;
        const Var l = fm_loss(tape, params, cfg, sample.z_v, sample.z_gt, t, sample.views);
        loss = l.value().item();
        tape.backward(l);
        opt.step(params);
    } catch (const NumericError& e) {
        throw NumericError("train_step " + std::to_string(params.step + 1) + ": " + e.what());
    }
    return loss;
}

const std::vector<AttentionSite>& extract_attention_maps(const ForwardTrace& trace) {
    if (!trace.enabled) throw ValidationError("extract_attention_maps: tracing was not enabled for this forward pass");
    return trace.sites;
}

Tensor mean_over_heads(const Tensor& map) {
    if (map.rank() != 3) throw ValidationError("mean_over_heads: expected [H, Lq, Lkv], got " + num::shape_str(map.shape()));
    const std::size_t H = map.dim(0), n = map.dim(1) * map.dim(2);
    Tensor out({map.dim(1), map.dim(2)});
    for (std::size_t h = 0; h < H; ++h)
        for (std::size_t i = 0; i < n; ++i) out[i] += map[h * n + i];
    for (auto& v : out.values()) v /= static_cast<double>(H);
    return out;
}

double collapse_score(const Tensor& map) {
    if (map.rank() != 2 || map.dim(0) == 0 || map.dim(1) == 0)
        throw ValidationError("collapse_score: expected a non-empty [Lq, Lkv] map, got " + num::shape_str(map.shape()));
    const std::size_t rows = map.dim(0), cols = map.dim(1);
    double total = 0;
    for (std::size_t r = 0; r < rows; ++r) {
        double s = 0, h = 0;
        bool flat = true;
        for (std::size_t c = 0; c < cols; ++c) {
            const double p = map.at(r, c);
            if (!(p >= 0.0) || !std::isfinite(p)) throw ValidationError("collapse_score: row " + std::to_string(r) + " has an invalid entry");
            s += p;
            flat &= p == map.at(r, 0);
            if (p > 0) h -= p * std::log(p);
        }
        if (std::abs(s - 1.0) > 1e-6) throw ValidationError("collapse_score: row " + std::to_string(r) + " sums to " + std::to_string(s));
        // equal entries are exactly uniform; the log ratio would round below 1
        total += cols == 1 || flat ? 1.0 : std::clamp(h / std::log(static_cast<double>(cols)), 0.0, 1.0);
    }
    return total / static_cast<double>(rows);
}

}  // namespace voxrefine::model
