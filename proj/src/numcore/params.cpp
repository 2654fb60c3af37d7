#include "voxrefine/params.hpp"

#include <algorithm>
#include <cmath>

#include "voxrefine/binio.hpp"
#include "voxrefine/error.hpp"

namespace voxrefine::num {

Parameter& ParamStore::add(const std::string& name, Tensor init) {
    if (name.empty()) throw ValidationError("ParamStore: empty parameter name");
    if (params_.count(name)) throw ValidationError("ParamStore: duplicate parameter '" + name + "'");
    if (!init.all_finite()) throw ValidationError("ParamStore: non-finite init for '" + name + "'");
    Parameter p;
    p.grad = Tensor(init.shape());
    p.m = Tensor(init.shape());
    p.v = Tensor(init.shape());
    p.value = std::move(init);
    return params_.emplace(name, std::move(p)).first->second;
}

Parameter& ParamStore::get(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end()) throw ValidationError("ParamStore: unknown parameter '" + name + "'");
    return it->second;
}

const Parameter& ParamStore::get(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw ValidationError("ParamStore: unknown parameter '" + name + "'");
    return it->second;
}

void ParamStore::zero_grad() {
    for (auto& [_, p] : params_) {
        if (!p.grad.same_shape(p.value)) p.grad = Tensor(p.value.shape());
        p.grad.fill(0.0);
    }
}

std::size_t ParamStore::numel() const {
    std::size_t n = 0;
    for (const auto& [_, p] : params_) n += p.value.numel();
    return n;
}

Tensor randn(Shape shape, double std, Rng& rng) {
    Tensor t(std::move(shape));
    for (auto& v : t.values()) v = rng.normal() * std;
    return t;
}

void AdamW::step(ParamStore& params) const {
    if (!(lr >= 0) || !(eps > 0) || beta1 < 0 || beta1 >= 1 || beta2 < 0 || beta2 >= 1 || weight_decay < 0)
        throw ValidationError("AdamW: invalid hyperparameters");
    for (const auto& [name, p] : params)
        if (!p.grad.all_finite()) throw NumericError("AdamW: non-finite gradient in '" + name + "'");
    const auto t = static_cast<double>(++params.step);
    const double c1 = 1.0 - std::pow(beta1, t), c2 = 1.0 - std::pow(beta2, t);
    for (auto& [name, p] : params) {
        if (!p.m.same_shape(p.value)) p.m = Tensor(p.value.shape());
        if (!p.v.same_shape(p.value)) p.v = Tensor(p.value.shape());
        for (std::size_t i = 0; i < p.value.numel(); ++i) {
            const double g = p.grad[i];
            p.m[i] = beta1 * p.m[i] + (1 - beta1) * g;
            p.v[i] = beta2 * p.v[i] + (1 - beta2) * g * g;
            const double mh = p.m[i] / c1, vh = p.v[i] / c2;
            p.value[i] -= lr * (mh / (std::sqrt(vh) + eps) + weight_decay * p.value[i]);
        }
    }
}

void save_checkpoint(const std::filesystem::path& path, const ParamStore& params) {
    binio::Writer w;
    w.magic("VIAP");
    for (const auto& [name, p] : params) {
        w.u32(static_cast<std::uint32_t>(name.size()));
        w.raw(reinterpret_cast<const std::uint8_t*>(name.data()), name.size());
        w.u32(static_cast<std::uint32_t>(p.value.rank()));
        for (auto d : p.value.shape()) w.u32(static_cast<std::uint32_t>(d));
        for (double v : p.value.values()) w.f64(v);
    }
    w.save(path);
}

ParamStore read_checkpoint(const std::filesystem::path& path) {
    auto r = binio::Reader::open(path);
    r.expect_magic("VIAP");
    ParamStore out;
    while (!r.at_end()) {
        const std::uint32_t len = r.u32();
        if (len == 0 || len > 4096) r.fail("bad parameter name length " + std::to_string(len));
        std::string name(len, '\0');
        r.raw(reinterpret_cast<std::uint8_t*>(name.data()), len);
        const std::uint32_t rank = r.u32();
        if (rank > 8) r.fail("parameter '" + name + "' has rank " + std::to_string(rank));
        Shape shape(rank);
        std::size_t n = 1;
        for (auto& d : shape) {
            d = r.u32();
            n *= d;
        }
        if (n * 8 > r.remaining()) r.fail("truncated values for '" + name + "'");
        std::vector<double> values(n);
        for (auto& v : values) v = r.f64();
        if (out.contains(name)) r.fail("duplicate parameter '" + name + "'");
        Tensor t(std::move(shape), std::move(values));
        if (!t.all_finite()) r.fail("non-finite values in '" + name + "'");
        out.add(name, std::move(t));
    }
    return out;
}

void load_checkpoint(const std::filesystem::path& path, ParamStore& params) {
    ParamStore ck = read_checkpoint(path);
    const std::string file = path.string();
    if (ck.size() != params.size())
        throw FormatError(file, "checkpoint holds " + std::to_string(ck.size()) + " parameters, model expects " + std::to_string(params.size()));
    for (auto& [name, p] : params) {
        if (!ck.contains(name)) throw FormatError(file, "missing parameter '" + name + "'");
        const Tensor& v = ck.get(name).value;
        if (!v.same_shape(p.value))
            throw FormatError(file, "parameter '" + name + "' has shape " + shape_str(v.shape()) + ", expected " + shape_str(p.value.shape()));
    }
    for (auto& [name, p] : params) p.value = ck.get(name).value;
}

namespace {

double eval_loss(const ScalarFn& f, ParamStore& params) {
    Tape tape(false);
    const Var loss = f(tape, params);
    if (loss.value().numel() != 1) throw ValidationError("grad_check: loss must be a single element");
    const double v = loss.value().item();
    if (!std::isfinite(v)) throw NumericError("grad_check: non-finite loss");
    return v;
}

}  // namespace

GradCheckResult grad_check_report(const ScalarFn& f, ParamStore& params, double h) {
    if (!(h > 0)) throw ValidationError("grad_check: step must be positive");
    params.zero_grad();
    {
        Tape tape;
        const Var loss = f(tape, params);
        if (!std::isfinite(loss.value().item())) throw NumericError("grad_check: non-finite loss");
        tape.backward(loss);
    }
    GradCheckResult res;
    for (auto& [name, p] : params) {
        for (std::size_t i = 0; i < p.value.numel(); ++i) {
            const double orig = p.value[i];
            p.value[i] = orig + h;
            const double up = eval_loss(f, params);
            p.value[i] = orig - h;
            const double down = eval_loss(f, params);
            p.value[i] = orig;
            const double numeric = (up - down) / (2 * h);
            const double analytic = p.grad[i];
            const double err = std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-8});
            if (err > res.max_rel_error || res.worst_param.empty()) {
                res.max_rel_error = std::max(err, res.max_rel_error);
                res.worst_param = name;
                res.worst_index = i;
                res.analytic = analytic;
                res.numeric = numeric;
            }
        }
    }
    return res;
}

double grad_check(const ScalarFn& f, ParamStore& params, double h) { return grad_check_report(f, params, h).max_rel_error; }

}  // namespace voxrefine::num
