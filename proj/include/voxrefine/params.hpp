#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>

#include "voxrefine/rng.hpp"
#include "voxrefine/tape.hpp"

namespace voxrefine::num {

struct Parameter {
    Tensor value;
    Tensor grad;
    Tensor m;
    Tensor v;
};

/// Named parameters in a stable (lexicographic) order.
class ParamStore {
public:
    /// Throws ValidationError on a duplicate name.
    Parameter& add(const std::string& name, Tensor init);
    Parameter& get(const std::string& name);
    const Parameter& get(const std::string& name) const;
    bool contains(const std::string& name) const { return params_.count(name) != 0; }

    void zero_grad();
    std::size_t size() const noexcept { return params_.size(); }
    std::size_t numel() const;

    auto begin() { return params_.begin(); }
    auto end() { return params_.end(); }
    auto begin() const { return params_.begin(); }
    auto end() const { return params_.end(); }

    std::int64_t step = 0;

private:
    std::map<std::string, Parameter> params_;
};

/// Gaussian init N(0, std^2).
Tensor randn(Shape shape, double std, Rng& rng);

struct AdamW {
    double lr = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;

    /// One bias-corrected update with decoupled weight decay; increments
    /// params.step. Throws NumericError on a non-finite gradient.
    void step(ParamStore& params) const;
};

/// Writes every parameter value ("VIAP" layout).
void save_checkpoint(const std::filesystem::path& path, const ParamStore& params);
/// Reads a checkpoint into a fresh store (values only).
ParamStore read_checkpoint(const std::filesystem::path& path);
/// Copies checkpoint values into an existing store. Names and shapes must
/// match exactly; throws FormatError otherwise.
void load_checkpoint(const std::filesystem::path& path, ParamStore& params);

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::string worst_param;
    std::size_t worst_index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
};

using ScalarFn = std::function<Var(Tape&, ParamStore&)>;

/// Central-difference check of every parameter element. `f` builds a scalar
/// loss on the given tape from params (via Tape::param).
GradCheckResult grad_check_report(const ScalarFn& f, ParamStore& params, double h = 1e-5);
double grad_check(const ScalarFn& f, ParamStore& params, double h = 1e-5);

}  // namespace voxrefine::num
