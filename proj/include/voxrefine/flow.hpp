#pragma once

#include <functional>
#include <string>
#include <vector>

#include "voxrefine/model.hpp"

namespace voxrefine::flow {

using num::Tensor;

struct FlowSample {
    Tensor z_source;
    Tensor z_target;
    double t = 0.0;
    Tensor z_t;
    Tensor velocity_target;
};

/// z_t = (1 - t) z_source + t z_target, velocity z_target - z_source.
FlowSample linear_path(const Tensor& z_source, const Tensor& z_target, double t);

enum class OdeMethod { euler, midpoint };

std::string to_string(OdeMethod m);
/// Throws ValidationError for anything but "euler" / "midpoint".
OdeMethod ode_method_from_string(const std::string& s);

using VelocityFn = std::function<Tensor(const Tensor& z, double t)>;

/// Fixed-step integration of dz/dt = v(z, t) over t in [0, 1].
Tensor integrate(const VelocityFn& velocity, const Tensor& z_source, int steps, OdeMethod method);

struct RefineOptions {
    int steps = 8;
    OdeMethod method = OdeMethod::euler;
};

/// Latent-space refinement with a trained model.
Tensor refine_latent(const Tensor& z_source, const std::vector<model::ImagePatches>& views, const model::ModelConfig& cfg,
                     num::ParamStore& params, const RefineOptions& opts = {});

/// encode -> integrate -> decode.
VoxelGrid refine(const VoxelGrid& grid, const std::vector<render::RenderImage>& images,
                 const std::vector<render::ImageIndex>& indices, const model::ModelConfig& cfg, num::ParamStore& params,
                 const RefineOptions& opts = {});

}  // namespace voxrefine::flow
