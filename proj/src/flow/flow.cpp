#include "voxrefine/flow.hpp"

#include "voxrefine/error.hpp"

namespace voxrefine::flow {

FlowSample linear_path(const Tensor& z_source, const Tensor& z_target, double t) {
    if (!z_source.same_shape(z_target))
        throw ValidationError("linear_path: shapes differ " + num::shape_str(z_source.shape()) + " vs " + num::shape_str(z_target.shape()));
    if (!(t >= 0.0 && t <= 1.0)) throw ValidationError("linear_path: t must be in [0, 1]");
    FlowSample s{z_source, z_target, t, Tensor(z_source.shape()), Tensor(z_source.shape())};
    for (std::size_t i = 0; i < z_source.numel(); ++i) {
        s.z_t[i] = (1.0 - t) * z_source[i] + t * z_target[i];
        s.velocity_target[i] = z_target[i] - z_source[i];
    }
    return s;
}

std::string to_string(OdeMethod m) { return m == OdeMethod::euler ? "euler" : "midpoint"; }

OdeMethod ode_method_from_string(const std::string& s) {
    if (s == "euler") return OdeMethod::euler;
    if (s == "midpoint") return OdeMethod::midpoint;
    throw ValidationError("unknown ODE method '" + s + "' (expected euler or midpoint)");
}

namespace {

Tensor eval(const VelocityFn& f, const Tensor& z, double t, int step) {
    Tensor v = f(z, t);
    if (!v.same_shape(z))
        throw ValidationError("integrate: velocity shape " + num::shape_str(v.shape()) + " differs from state " + num::shape_str(z.shape()));
    if (!v.all_finite()) throw NumericError("integrate: non-finite velocity at step " + std::to_string(step));
    return v;
}

void axpy(Tensor& z, double a, const Tensor& v) {
    for (std::size_t i = 0; i < z.numel(); ++i) z[i] += a * v[i];
}

}  // namespace

Tensor integrate(const VelocityFn& velocity, const Tensor& z_source, int steps, OdeMethod method) {
    if (steps < 1) throw ValidationError("integrate: steps must be >= 1");
    const double dt = 1.0 / steps;
    Tensor z = z_source;
    for (int i = 0; i < steps; ++i) {
        const double t = static_cast<double>(i) / steps;
        if (method == OdeMethod::euler) {
            axpy(z, dt, eval(velocity, z, t, i));
        } else {
            Tensor mid = z;
            axpy(mid, 0.5 * dt, eval(velocity, z, t, i));
            axpy(z, dt, eval(velocity, mid, t + 0.5 * dt, i));
        }
        if (!z.all_finite()) throw NumericError("integrate: non-finite state after step " + std::to_string(i));
    }
    return z;
}

Tensor refine_latent(const Tensor& z_source, const std::vector<model::ImagePatches>& views, const model::ModelConfig& cfg,
                     num::ParamStore& params, const RefineOptions& opts) {
    return integrate([&](const Tensor& z, double t) { return model::predict_velocity(params, cfg, z, t, views); }, z_source,
                     opts.steps, opts.method);
}

VoxelGrid refine(const VoxelGrid& grid, const std::vector<render::RenderImage>& images,
                 const std::vector<render::ImageIndex>& indices, const model::ModelConfig& cfg, num::ParamStore& params,
                 const RefineOptions& opts) {
    if (images.size() != indices.size())
        throw ValidationError("refine: " + std::to_string(images.size()) + " images but " + std::to_string(indices.size()) + " index maps");
    const model::VoxelCodec codec(cfg);
    auto latent = codec.encode(grid);
    std::vector<model::ImagePatches> views;
    for (std::size_t i = 0; i < images.size(); ++i) views.push_back(model::extract_image_patches(images[i], indices[i], cfg.image_patch));
    latent.tokens = refine_latent(latent.tokens, views, cfg, params, opts);
    return codec.decode(latent);
}

}  // namespace voxrefine::flow
