#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "voxrefine/params.hpp"
#include "voxrefine/render.hpp"
#include "voxrefine/voxel_grid.hpp"

namespace voxrefine::model {

using num::ParamStore;
using num::Tape;
using num::Tensor;
using num::Var;

struct ModelConfig {
    int resolution = 16;
    int voxel_patch = 4;
    /// Latent width per voxel token; at most voxel_patch^3.
    int latent_channels = 64;
    int width = 64;
    int heads = 4;
    int n_dual = 2;
    int n_single = 4;
    int image_patch = 14;
    int mlp_ratio = 4;
    int time_embed_dim = 128;
    double rope_base = 1e4;
    double lr = 3e-4;
    double weight_decay = 0.01;
    /// false zeroes every image-token phase (ViT-style ablation).
    bool image_rope = true;
    std::uint64_t codec_seed = 0x5EED0C0DEC;

    int head_dim() const { return width / heads; }
    int tokens_per_axis() const { return resolution / voxel_patch; }
    int voxel_tokens() const { return tokens_per_axis() * tokens_per_axis() * tokens_per_axis(); }
    int patch_voxels() const { return voxel_patch * voxel_patch * voxel_patch; }

    /// Throws ValidationError on any violated invariant.
    void validate() const;
};

std::string config_to_json(const ModelConfig& cfg);
/// Missing keys keep their defaults; unknown keys are rejected.
ModelConfig config_from_json(const std::string& text);

/// Voxel-space latent: one row per voxel patch.
struct LatentGrid {
    int resolution = 0;
    int patch = 0;
    Tensor tokens;
    std::vector<Vec3> coords;
};

/// Fixed orthonormal patch codec used in place of a pretrained VAE. Encoding
/// projects (block - 0.5) onto `latent_channels` orthonormal directions; with
/// latent_channels == patch^3 decoding is exact.
class VoxelCodec {
public:
    explicit VoxelCodec(const ModelConfig& cfg);

    LatentGrid encode(const VoxelGrid& grid) const;
    VoxelGrid decode(const LatentGrid& latent) const;
    /// Per-token patch^3 logits (before the sigmoid).
    Tensor decode_logits(const Tensor& tokens) const;
    const Tensor& basis() const { return basis_; }

private:
    int resolution_;
    int patch_;
    Tensor basis_;  // [patch^3, latent_channels]
};

LatentGrid patchify_encode(const VoxelGrid& grid, const ModelConfig& cfg);
VoxelGrid unpatchify_decode(const LatentGrid& latent, const ModelConfig& cfg);

/// Patch-center coordinates (voxel units) in token order.
std::vector<Vec3> voxel_token_coords(const ModelConfig& cfg);

/// Pixel blocks and Image Index metadata of one view.
struct ImagePatches {
    Tensor pixels;  // [L, P*P*3], scaled to [-1, 1]
    std::vector<Vec3> coords;
    std::vector<std::uint8_t> null;
};

/// Throws ValidationError if P does not divide the image or the index grid
/// does not match it.
ImagePatches extract_image_patches(const render::RenderImage& img, const render::ImageIndex& idx, int patch);

struct TokenStream {
    Var tokens;  // [L, C]
    std::vector<Vec3> coords;
    std::vector<std::uint8_t> null;
    /// RoPE phases tiled over heads, [L, C/2].
    Tensor phases;

    std::size_t size() const { return coords.size(); }
};

/// Per-head phases [L, head_dim/2]. Pairs split evenly over x, y, z
/// (floor(head_dim/6) each); leftover pairs and null tokens get phase 0.
Tensor rope_phases(const std::vector<Vec3>& coords, const std::vector<std::uint8_t>& null, const ModelConfig& cfg);
/// rope_phases repeated for every head: [L, width/2].
Tensor tiled_rope_phases(const std::vector<Vec3>& coords, const std::vector<std::uint8_t>& null, const ModelConfig& cfg);

/// Fresh parameters for cfg with a seeded Gaussian init.
ParamStore init_params(const ModelConfig& cfg, std::uint64_t seed);

struct AttentionSite {
    std::string stage;   // "dual" or "single"
    int block = 0;
    std::string stream;  // "voxel", "image<i>" or "unified"
    Tensor map;          // [H, Lq, Lkv]
};

struct ForwardTrace {
    bool enabled = false;
    std::vector<AttentionSite> sites;
    /// Sequence lengths of the single-stream input (voxel first, then views).
    std::vector<std::size_t> unified_layout;
};

TokenStream embed_voxel_tokens(Tape& tape, ParamStore& params, Var z, const ModelConfig& cfg);
TokenStream embed_image_tokens(Tape& tape, ParamStore& params, const ImagePatches& patches, const ModelConfig& cfg);
Var time_embedding(Tape& tape, ParamStore& params, double t, const ModelConfig& cfg);

/// Separate voxel/image projections, keys and values concatenated into one
/// union, residual attention + MLP per stream. Image views share weights.
void dual_block(Tape& tape, ParamStore& params, const ModelConfig& cfg, int index, TokenStream& voxel,
                std::vector<TokenStream>& images, ForwardTrace* trace = nullptr);
/// Pre-norm self-attention + MLP over the unified sequence.
void single_block(Tape& tape, ParamStore& params, const ModelConfig& cfg, int index, TokenStream& unified,
                  ForwardTrace* trace = nullptr);

/// Velocity [L_V, latent_channels] for voxel latent tokens z_t at time t.
Var forward_velocity(Tape& tape, ParamStore& params, const ModelConfig& cfg, Var z_t, double t,
                     const std::vector<ImagePatches>& views, ForwardTrace* trace = nullptr);
/// Convenience wrapper on a non-recording tape.
Tensor predict_velocity(ParamStore& params, const ModelConfig& cfg, const Tensor& z_t, double t,
                        const std::vector<ImagePatches>& views, ForwardTrace* trace = nullptr);

/// mean((f(z_t, t) - (z_gt - z_v))^2) on the linear path z_t = (1-t) z_v + t z_gt.
Var fm_loss(Tape& tape, ParamStore& params, const ModelConfig& cfg, const Tensor& z_v, const Tensor& z_gt, double t,
            const std::vector<ImagePatches>& views);

struct TrainSample {
    VoxelGrid clean;
    VoxelGrid corrupted;
    std::vector<render::RenderImage> images;
    std::vector<render::ImageIndex> indices;
};

/// Encoded latents and image patches, ready for repeated training steps.
struct PreparedSample {
    Tensor z_v;
    Tensor z_gt;
    std::vector<ImagePatches> views;
};

PreparedSample prepare_sample(const TrainSample& sample, const VoxelCodec& codec, const ModelConfig& cfg);

/// Draws t ~ U[0, 1], backpropagates fm_loss and applies one AdamW update.
/// Returns the loss; `t_out` receives the drawn time.
double train_step(const PreparedSample& sample, ParamStore& params, const ModelConfig& cfg, const num::AdamW& opt,
                  Rng& rng, double* t_out = nullptr);

/// Every recorded map; throws ValidationError if tracing was off.
const std::vector<AttentionSite>& extract_attention_maps(const ForwardTrace& trace);
/// [H, Lq, Lkv] -> [Lq, Lkv]
Tensor mean_over_heads(const Tensor& map);
/// Mean normalized row entropy of a [Lq, Lkv] row-stochastic map.
double collapse_score(const Tensor& map);

}  // namespace voxrefine::model
