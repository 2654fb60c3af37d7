#include <string>

#include "json.hpp"
#include "voxrefine/error.hpp"
#include "voxrefine/model.hpp"

namespace voxrefine::model {

using nlohmann::json;

void ModelConfig::validate() const {
    auto fail = [](const std::string& m) { throw ValidationError("model config: " + m); };
    if (resolution < 2 || resolution > 1024) fail("resolution must be in [2, 1024]");
    if (voxel_patch < 1 || resolution % voxel_patch != 0)
        fail("voxel_patch " + std::to_string(voxel_patch) + " does not divide resolution " + std::to_string(resolution));
    if (latent_channels < 1 || latent_channels > patch_voxels())
        fail("latent_channels must be in [1, voxel_patch^3 = " + std::to_string(patch_voxels()) + "]");
    if (width < 1 || heads < 1 || width % heads != 0)
        fail("width " + std::to_string(width) + " not divisible by heads " + std::to_string(heads));
    if (head_dim() % 2 != 0 || head_dim() < 6) fail("head dim " + std::to_string(head_dim()) + " must be even and >= 6");
    if (n_dual < 0 || n_single < 0) fail("block counts must be non-negative");
    if (image_patch < 1) fail("image_patch must be positive");
    if (mlp_ratio < 1) fail("mlp_ratio must be positive");
    if (time_embed_dim < 2 || time_embed_dim % 2 != 0) fail("time_embed_dim must be even and positive");
    if (!(rope_base > 1.0)) fail("rope_base must exceed 1");
    if (!(lr >= 0.0)) fail("lr must be non-negative");
    if (!(weight_decay >= 0.0)) fail("weight_decay must be non-negative");
}

std::string config_to_json(const ModelConfig& c) {
    json j = {{"resolution", c.resolution},
              {"voxel_patch", c.voxel_patch},
              {"latent_channels", c.latent_channels},
              {"width", c.width},
              {"heads", c.heads},
              {"n_dual", c.n_dual},
              {"n_single", c.n_single},
              {"image_patch", c.image_patch},
              {"mlp_ratio", c.mlp_ratio},
              {"time_embed_dim", c.time_embed_dim},
              {"rope_base", c.rope_base},
              {"lr", c.lr},
              {"weight_decay", c.weight_decay},
              {"image_rope", c.image_rope},
              {"codec_seed", c.codec_seed}};
    return j.dump(2);
}

ModelConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("model config: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError("model config: expected an object");
    ModelConfig c;
    try {
        for (auto it = j.begin(); it != j.end(); ++it) {
            const std::string& k = it.key();
            const json& v = it.value();
            if (k == "resolution") c.resolution = v.get<int>();
            else if (k == "voxel_patch") c.voxel_patch = v.get<int>();
            else if (k == "latent_channels") c.latent_channels = v.get<int>();
            else if (k == "width") c.width = v.get<int>();
            else if (k == "heads") c.heads = v.get<int>();
            else if (k == "n_dual") c.n_dual = v.get<int>();
            else if (k == "n_single") c.n_single = v.get<int>();
            else if (k == "image_patch") c.image_patch = v.get<int>();
            else if (k == "mlp_ratio") c.mlp_ratio = v.get<int>();
            else if (k == "time_embed_dim") c.time_embed_dim = v.get<int>();
            else if (k == "rope_base") c.rope_base = v.get<double>();
            else if (k == "lr") c.lr = v.get<double>();
            else if (k == "weight_decay") c.weight_decay = v.get<double>();
            else if (k == "image_rope") c.image_rope = v.get<bool>();
            else if (k == "codec_seed") c.codec_seed = v.get<std::uint64_t>();
            else throw ValidationError("model config: unknown key '" + k + "'");
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("model config: ") + e.what());
    }
    c.validate();
    return c;
}

}  // namespace voxrefine::model
