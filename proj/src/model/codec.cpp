#include <Eigen/QR>
#include <cmath>

#include "voxrefine/error.hpp"
#include "voxrefine/model.hpp"

namespace voxrefine::model {

VoxelCodec::VoxelCodec(const ModelConfig& cfg) : resolution_(cfg.resolution), patch_(cfg.voxel_patch) {
    cfg.validate();
    const int n = cfg.patch_voxels();
    const int c = cfg.latent_channels;
    Rng rng(cfg.codec_seed);
    Eigen::MatrixXd g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = rng.normal();
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
    basis_ = Tensor({static_cast<std::size_t>(n), static_cast<std::size_t>(c)});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < c; ++j) basis_.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = q(i, j);
}

LatentGrid VoxelCodec::encode(const VoxelGrid& grid) const {
    if (grid.resolution() != resolution_)
        throw ValidationError("encode: grid resolution " + std::to_string(grid.resolution()) + " differs from codec resolution " +
                              std::to_string(resolution_));
    const int T = resolution_ / patch_, p = patch_;
    const std::size_t n = basis_.dim(0), c = basis_.dim(1);
    LatentGrid out;
    out.resolution = resolution_;
    out.patch = p;
    out.tokens = Tensor({static_cast<std::size_t>(T * T * T), c});
    std::vector<double> block(n);
    for (int tz = 0; tz < T; ++tz)
        for (int ty = 0; ty < T; ++ty)
            for (int tx = 0; tx < T; ++tx) {
                const std::size_t tok = static_cast<std::size_t>(tx + T * (ty + T * tz));
                for (int dz = 0; dz < p; ++dz)
                    for (int dy = 0; dy < p; ++dy)
                        for (int dx = 0; dx < p; ++dx)
                            block[static_cast<std::size_t>(dx + p * (dy + p * dz))] =
                                grid.get(tx * p + dx, ty * p + dy, tz * p + dz) ? 0.5 : -0.5;
                for (std::size_t j = 0; j < c; ++j) {
                    double s = 0;
                    for (std::size_t i = 0; i < n; ++i) s += block[i] * basis_.at(i, j);
                    out.tokens.at(tok, j) = s;
                }
                out.coords.push_back({tx * p + (p - 1) / 2.0, ty * p + (p - 1) / 2.0, tz * p + (p - 1) / 2.0});
            }
    return out;
}

Tensor VoxelCodec::decode_logits(const Tensor& tokens) const {
    const std::size_t n = basis_.dim(0), c = basis_.dim(1);
    if (tokens.rank() != 2 || tokens.dim(1) != c) throw ValidationError("decode: token width mismatch " + num::shape_str(tokens.shape()));
    Tensor out({tokens.dim(0), n});
    for (std::size_t t = 0; t < tokens.dim(0); ++t)
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0;
            for (std::size_t j = 0; j < c; ++j) s += tokens.at(t, j) * basis_.at(i, j);
            out.at(t, i) = s;
        }
    return out;
}

VoxelGrid VoxelCodec::decode(const LatentGrid& latent) const {
    const int T = resolution_ / patch_, p = patch_;
    if (latent.tokens.rank() != 2 || latent.tokens.dim(0) != static_cast<std::size_t>(T * T * T))
        throw ValidationError("decode: expected " + std::to_string(T * T * T) + " tokens, got " + num::shape_str(latent.tokens.shape()));
    const Tensor logits = decode_logits(latent.tokens);
    VoxelGrid g(resolution_);
    for (int tz = 0; tz < T; ++tz)
        for (int ty = 0; ty < T; ++ty)
            for (int tx = 0; tx < T; ++tx) {
                const std::size_t tok = static_cast<std::size_t>(tx + T * (ty + T * tz));
                for (int dz = 0; dz < p; ++dz)
                    for (int dy = 0; dy < p; ++dy)
                        for (int dx = 0; dx < p; ++dx) {
                            const double l = logits.at(tok, static_cast<std::size_t>(dx + p * (dy + p * dz)));
                            // sigmoid(l) > 0.5 exactly when l > 0
                            g.set(tx * p + dx, ty * p + dy, tz * p + dz, 1.0 / (1.0 + std::exp(-l)) > 0.5);
                        }
            }
    return g;
}

LatentGrid patchify_encode(const VoxelGrid& grid, const ModelConfig& cfg) { return VoxelCodec(cfg).encode(grid); }

VoxelGrid unpatchify_decode(const LatentGrid& latent, const ModelConfig& cfg) { return VoxelCodec(cfg).decode(latent); }

std::vector<Vec3> voxel_token_coords(const ModelConfig& cfg) {
    const int T = cfg.tokens_per_axis(), p = cfg.voxel_patch;
    std::vector<Vec3> out;
    out.reserve(static_cast<std::size_t>(T * T * T));
    for (int tz = 0; tz < T; ++tz)
        for (int ty = 0; ty < T; ++ty)
            for (int tx = 0; tx < T; ++tx) out.push_back({tx * p + (p - 1) / 2.0, ty * p + (p - 1) / 2.0, tz * p + (p - 1) / 2.0});
    return out;
}

ImagePatches extract_image_patches(const render::RenderImage& img, const render::ImageIndex& idx, int patch) {
    if (patch < 1 || img.width % patch != 0 || img.height % patch != 0)
        throw ValidationError("image patch " + std::to_string(patch) + " does not divide image " + std::to_string(img.width) + "x" +
                              std::to_string(img.height));
    const int rows = img.height / patch, cols = img.width / patch;
    if (idx.rows != rows || idx.cols != cols || idx.patches.size() != static_cast<std::size_t>(rows * cols))
        throw ValidationError("image index grid " + std::to_string(idx.rows) + "x" + std::to_string(idx.cols) +
                              " does not match patch grid " + std::to_string(rows) + "x" + std::to_string(cols));
    const std::size_t L = static_cast<std::size_t>(rows * cols), D = static_cast<std::size_t>(patch * patch * 3);
    ImagePatches out;
    out.pixels = Tensor({L, D});
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const std::size_t tok = static_cast<std::size_t>(r * cols + c);
            std::size_t k = 0;
            for (int y = r * patch; y < (r + 1) * patch; ++y)
                for (int x = c * patch; x < (c + 1) * patch; ++x)
                    for (int ch = 0; ch < 3; ++ch) out.pixels.at(tok, k++) = 2.0 * img.at(x, y, ch) - 1.0;
            const auto& pc = idx.patches[tok];
            out.coords.push_back({pc.coord[0], pc.coord[1], pc.coord[2]});
            out.null.push_back(pc.null ? 1 : 0);
        }
    return out;
}

Tensor rope_phases(const std::vector<Vec3>& coords, const std::vector<std::uint8_t>& null, const ModelConfig& cfg) {
    const int dh = cfg.head_dim();
    if (dh % 2 != 0 || dh / 2 < 3) throw ValidationError("rope_phases: head dim " + std::to_string(dh) + " too small for 3 axes");
    if (!null.empty() && null.size() != coords.size()) throw ValidationError("rope_phases: null flag count mismatch");
    const std::size_t pairs = static_cast<std::size_t>(dh / 2);
    const std::size_t ppa = pairs / 3;
    Tensor out({coords.size(), pairs});
    for (std::size_t l = 0; l < coords.size(); ++l) {
        if (!null.empty() && null[l]) continue;
        for (int a = 0; a < 3; ++a) {
            if (!std::isfinite(coords[l][static_cast<std::size_t>(a)])) throw ValidationError("rope_phases: non-finite coordinate");
            for (std::size_t j = 0; j < ppa; ++j) {
                const double freq = std::pow(cfg.rope_base, -static_cast<double>(2 * j) / static_cast<double>(2 * ppa));
                out.at(l, static_cast<std::size_t>(a) * ppa + j) = coords[l][static_cast<std::size_t>(a)] * freq;
            }
        }
    }
    return out;
}

Tensor tiled_rope_phases(const std::vector<Vec3>& coords, const std::vector<std::uint8_t>& null, const ModelConfig& cfg) {
    const Tensor ph = rope_phases(coords, null, cfg);
    const std::size_t pairs = ph.dim(1), H = static_cast<std::size_t>(cfg.heads);
    Tensor out({coords.size(), pairs * H});
    for (std::size_t l = 0; l < coords.size(); ++l)
        for (std::size_t h = 0; h < H; ++h)
            for (std::size_t j = 0; j < pairs; ++j) out.at(l, h * pairs + j) = ph.at(l, j);
    return out;
}

}  // namespace voxrefine::model
