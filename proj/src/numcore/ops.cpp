#include <Eigen/Core>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>

#include "voxrefine/error.hpp"
#include "voxrefine/tape.hpp"

namespace voxrefine::num {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapC = Eigen::Map<const RowMat>;
using MapM = Eigen::Map<RowMat>;

MapC mat(const Tensor& t, std::size_t rows, std::size_t cols, std::size_t offset = 0) {
    return MapC(t.data() + offset, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}
MapM mat(Tensor& t, std::size_t rows, std::size_t cols, std::size_t offset = 0) {
    return MapM(t.data() + offset, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

Tape* tape_of(const char* op, Var a) {
    if (!a.valid()) throw ValidationError(std::string(op) + ": empty input");
    return a.tape();
}

void require_rank(const char* op, const Tensor& t, std::size_t rank) {
    if (t.rank() != rank)
        throw ValidationError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " + shape_str(t.shape()));
}

void require_same(const char* op, const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b))
        throw ValidationError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
}

// Adds `g` into the gradient of `v` if v takes part in differentiation.
template <typename F>
void accumulate(Tape& t, Var v, F&& f) {
    if (v.valid() && t.requires_grad(v.id())) f(t.grad(v.id()));
}

void add_into(Tensor& dst, const Tensor& g, double s = 1.0) {
    for (std::size_t i = 0; i < g.numel(); ++i) dst[i] += s * g[i];
}

template <typename Fwd, typename Deriv>
Var unary(const char* op, Var x, Fwd fwd, Deriv deriv) {
    Tape* t = tape_of(op, x);
    const Tensor& xv = x.value();
    Tensor out(xv.shape());
    for (std::size_t i = 0; i < xv.numel(); ++i) out[i] = fwd(xv[i]);
    return t->push(op, std::move(out), {x}, [x, deriv](Tape& tp, const Tensor& g) {
        const Tensor& xv = tp.value(x.id());
        accumulate(tp, x, [&](Tensor& dx) {
            for (std::size_t i = 0; i < g.numel(); ++i) dx[i] += g[i] * deriv(xv[i]);
        });
    });
}

}  // namespace

Var matmul(Var a, Var b) {
    Tape* t = tape_of("matmul", a);
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    require_rank("matmul", av, 2);
    require_rank("matmul", bv, 2);
    const std::size_t m = av.dim(0), k = av.dim(1), n = bv.dim(1);
    if (bv.dim(0) != k)
        throw ValidationError("matmul: inner dimensions differ " + shape_str(av.shape()) + " x " + shape_str(bv.shape()));
    Tensor out({m, n});
    mat(out, m, n).noalias() = mat(av, m, k) * mat(bv, k, n);
    return t->push("matmul", std::move(out), {a, b}, [a, b, m, k, n](Tape& tp, const Tensor& g) {
        accumulate(tp, a, [&](Tensor& da) { mat(da, m, k).noalias() += mat(g, m, n) * mat(tp.value(b.id()), k, n).transpose(); });
        accumulate(tp, b, [&](Tensor& db) { mat(db, k, n).noalias() += mat(tp.value(a.id()), m, k).transpose() * mat(g, m, n); });
    });
}

Var linear(Var x, Var w, Var b) {
    Var y = matmul(x, w);
    return b.valid() ? add_row(y, b) : y;
}

Var add(Var a, Var b) {
    Tape* t = tape_of("add", a);
    require_same("add", a.value(), b.value());
    Tensor out = a.value();
    add_into(out, b.value());
    return t->push("add", std::move(out), {a, b}, [a, b](Tape& tp, const Tensor& g) {
        accumulate(tp, a, [&](Tensor& d) { add_into(d, g); });
        accumulate(tp, b, [&](Tensor& d) { add_into(d, g); });
    });
}

Var sub(Var a, Var b) {
    Tape* t = tape_of("sub", a);
    require_same("sub", a.value(), b.value());
    Tensor out = a.value();
    add_into(out, b.value(), -1.0);
    return t->push("sub", std::move(out), {a, b}, [a, b](Tape& tp, const Tensor& g) {
        accumulate(tp, a, [&](Tensor& d) { add_into(d, g); });
        accumulate(tp, b, [&](Tensor& d) { add_into(d, g, -1.0); });
    });
}

Var mul(Var a, Var b) {
    Tape* t = tape_of("mul", a);
    require_same("mul", a.value(), b.value());
    Tensor out = a.value();
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= b.value()[i];
    return t->push("mul", std::move(out), {a, b}, [a, b](Tape& tp, const Tensor& g) {
        const Tensor& av = tp.value(a.id());
        const Tensor& bv = tp.value(b.id());
        accumulate(tp, a, [&](Tensor& d) {
            for (std::size_t i = 0; i < g.numel(); ++i) d[i] += g[i] * bv[i];
        });
        accumulate(tp, b, [&](Tensor& d) {
            for (std::size_t i = 0; i < g.numel(); ++i) d[i] += g[i] * av[i];
        });
    });
}

Var scale(Var a, double s) {
    Tape* t = tape_of("scale", a);
    Tensor out = a.value();
    for (auto& v : out.values()) v *= s;
    return t->push("scale", std::move(out), {a}, [a, s](Tape& tp, const Tensor& g) {
        accumulate(tp, a, [&](Tensor& d) { add_into(d, g, s); });
    });
}

Var add_row(Var x, Var r) {
    Tape* t = tape_of("add_row", x);
    const Tensor& xv = x.value();
    require_rank("add_row", xv, 2);
    const std::size_t L = xv.dim(0), C = xv.dim(1);
    if (r.value().numel() != C)
        throw ValidationError("add_row: row " + shape_str(r.value().shape()) + " does not match " + shape_str(xv.shape()));
    Tensor out = xv;
    const Tensor& rv = r.value();
    for (std::size_t l = 0; l < L; ++l)
        for (std::size_t c = 0; c < C; ++c) out[l * C + c] += rv[c];
    return t->push("add_row", std::move(out), {x, r}, [x, r, L, C](Tape& tp, const Tensor& g) {
        accumulate(tp, x, [&](Tensor& d) { add_into(d, g); });
        accumulate(tp, r, [&](Tensor& d) {
            for (std::size_t l = 0; l < L; ++l)
                for (std::size_t c = 0; c < C; ++c) d[c] += g[l * C + c];
        });
    });
}

Var gelu(Var x) {
    constexpr double c = 0.7978845608028654;  // sqrt(2/pi)
    constexpr double a = 0.044715;
    return unary(
        "gelu", x,
        [](double v) { return 0.5 * v * (1.0 + std::tanh(c * (v + a * v * v * v))); },
        [](double v) {
            const double th = std::tanh(c * (v + a * v * v * v));
            return 0.5 * (1.0 + th) + 0.5 * v * (1.0 - th * th) * c * (1.0 + 3.0 * a * v * v);
        });
}

Var silu(Var x) {
    return unary(
        "silu", x, [](double v) { return v / (1.0 + std::exp(-v)); },
        [](double v) {
            const double s = 1.0 / (1.0 + std::exp(-v));
            return s * (1.0 + v * (1.0 - s));
        });
}

Var sigmoid(Var x) {
    return unary(
        "sigmoid", x, [](double v) { return 1.0 / (1.0 + std::exp(-v)); },
        [](double v) {
            const double s = 1.0 / (1.0 + std::exp(-v));
            return s * (1.0 - s);
        });
}

Var softmax(Var x, std::size_t axis) {
    Tape* t = tape_of("softmax", x);
    const Tensor& xv = x.value();
    if (axis >= xv.rank()) throw ValidationError("softmax: axis " + std::to_string(axis) + " out of range for " + shape_str(xv.shape()));
    const std::size_t n = xv.dim(axis);
    if (n == 0) throw ValidationError("softmax: empty axis");
    std::size_t inner = 1;
    for (std::size_t i = axis + 1; i < xv.rank(); ++i) inner *= xv.dim(i);
    const std::size_t outer = xv.numel() / (n * inner);

    auto probs = std::make_shared<Tensor>(xv.shape());
    Tensor& out = *probs;
    for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t in = 0; in < inner; ++in) {
            const std::size_t base = o * n * inner + in;
            double mx = xv[base];
            for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, xv[base + j * inner]);
            double s = 0;
            for (std::size_t j = 0; j < n; ++j) s += out[base + j * inner] = std::exp(xv[base + j * inner] - mx);
            for (std::size_t j = 0; j < n; ++j) out[base + j * inner] /= s;
        }
    return t->push("softmax", Tensor(out), {x}, [x, probs, n, inner, outer](Tape& tp, const Tensor& g) {
        const Tensor& p = *probs;
        accumulate(tp, x, [&](Tensor& d) {
            for (std::size_t o = 0; o < outer; ++o)
                for (std::size_t in = 0; in < inner; ++in) {
                    const std::size_t base = o * n * inner + in;
                    double dot = 0;
                    for (std::size_t j = 0; j < n; ++j) dot += g[base + j * inner] * p[base + j * inner];
                    for (std::size_t j = 0; j < n; ++j) d[base + j * inner] += p[base + j * inner] * (g[base + j * inner] - dot);
                }
        });
    });
}

Var layernorm(Var x, Var gain, Var bias, double eps) {
    Tape* t = tape_of("layernorm", x);
    const Tensor& xv = x.value();
    if (xv.rank() == 0) throw ValidationError("layernorm: rank-0 input");
    const std::size_t C = xv.shape().back();
    const std::size_t rows = xv.numel() / C;
    if (gain.valid() && gain.value().numel() != C) throw ValidationError("layernorm: gain shape mismatch");
    if (bias.valid() && bias.value().numel() != C) throw ValidationError("layernorm: bias shape mismatch");

    auto yhat = std::make_shared<Tensor>(xv.shape());
    auto inv_sigma = std::make_shared<std::vector<double>>(rows);
    Tensor out(xv.shape());
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = xv.data() + r * C;
        double mu = 0;
        for (std::size_t c = 0; c < C; ++c) mu += row[c];
        mu /= static_cast<double>(C);
        double var = 0;
        for (std::size_t c = 0; c < C; ++c) var += (row[c] - mu) * (row[c] - mu);
        var /= static_cast<double>(C);
        const double is = 1.0 / std::sqrt(var + eps);
        (*inv_sigma)[r] = is;
        for (std::size_t c = 0; c < C; ++c) {
            const double y = (row[c] - mu) * is;
            (*yhat)[r * C + c] = y;
            double o = y;
            if (gain.valid()) o *= gain.value()[c];
            if (bias.valid()) o += bias.value()[c];
            out[r * C + c] = o;
        }
    }
    return t->push("layernorm", std::move(out), {x, gain, bias}, [x, gain, bias, yhat, inv_sigma, rows, C](Tape& tp, const Tensor& g) {
        accumulate(tp, gain, [&](Tensor& d) {
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t c = 0; c < C; ++c) d[c] += g[r * C + c] * (*yhat)[r * C + c];
        });
        accumulate(tp, bias, [&](Tensor& d) {
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t c = 0; c < C; ++c) d[c] += g[r * C + c];
        });
        accumulate(tp, x, [&](Tensor& d) {
            std::vector<double> dy(C);
            for (std::size_t r = 0; r < rows; ++r) {
                double m1 = 0, m2 = 0;
                for (std::size_t c = 0; c < C; ++c) {
                    dy[c] = g[r * C + c] * (gain.valid() ? tp.value(gain.id())[c] : 1.0);
                    m1 += dy[c];
                    m2 += dy[c] * (*yhat)[r * C + c];
                }
                m1 /= static_cast<double>(C);
                m2 /= static_cast<double>(C);
                for (std::size_t c = 0; c < C; ++c)
                    d[r * C + c] += (*inv_sigma)[r] * (dy[c] - m1 - (*yhat)[r * C + c] * m2);
            }
        });
    });
}

Var attention(Var q, Var k, Var v, Tensor* map_out) {
    Tape* t = tape_of("attention", q);
    const Tensor& qv = q.value();
    const Tensor& kv = k.value();
    const Tensor& vv = v.value();
    require_rank("attention", qv, 3);
    require_rank("attention", kv, 3);
    require_rank("attention", vv, 3);
    const std::size_t H = qv.dim(0), Lq = qv.dim(1), dk = qv.dim(2);
    const std::size_t Lkv = kv.dim(1), dv = vv.dim(2);
    if (kv.dim(0) != H || vv.dim(0) != H) throw ValidationError("attention: head count mismatch");
    if (kv.dim(2) != dk) throw ValidationError("attention: d_k mismatch between Q " + shape_str(qv.shape()) + " and K " + shape_str(kv.shape()));
    if (vv.dim(1) != Lkv) throw ValidationError("attention: L_kv mismatch between K " + shape_str(kv.shape()) + " and V " + shape_str(vv.shape()));
    if (Lkv == 0 || dk == 0) throw ValidationError("attention: empty keys");

    const double scl = 1.0 / std::sqrt(static_cast<double>(dk));
    auto probs = std::make_shared<Tensor>(Shape{H, Lq, Lkv});
    Tensor out({H, Lq, dv});
    for (std::size_t h = 0; h < H; ++h) {
        auto P = mat(*probs, Lq, Lkv, h * Lq * Lkv);
        P.noalias() = scl * (mat(qv, Lq, dk, h * Lq * dk) * mat(kv, Lkv, dk, h * Lkv * dk).transpose());
        for (Eigen::Index i = 0; i < P.rows(); ++i) {
            const double mx = P.row(i).maxCoeff();
            P.row(i) = (P.row(i).array() - mx).exp();
            P.row(i) /= P.row(i).sum();
        }
        mat(out, Lq, dv, h * Lq * dv).noalias() = P * mat(vv, Lkv, dv, h * Lkv * dv);
    }
    if (map_out) *map_out = *probs;
    return t->push("attention", std::move(out), {q, k, v}, [q, k, v, probs, H, Lq, Lkv, dk, dv, scl](Tape& tp, const Tensor& g) {
        const Tensor& qv = tp.value(q.id());
        const Tensor& kv = tp.value(k.id());
        const Tensor& vv = tp.value(v.id());
        const bool need_qk = tp.requires_grad(q.id()) || tp.requires_grad(k.id());
        RowMat dP, dS;
        for (std::size_t h = 0; h < H; ++h) {
            const auto P = mat(*probs, Lq, Lkv, h * Lq * Lkv);
            const auto G = mat(g, Lq, dv, h * Lq * dv);
            accumulate(tp, v, [&](Tensor& d) { mat(d, Lkv, dv, h * Lkv * dv).noalias() += P.transpose() * G; });
            if (!need_qk) continue;
            dP.noalias() = G * mat(vv, Lkv, dv, h * Lkv * dv).transpose();
            const Eigen::VectorXd rowdot = (dP.array() * P.array()).rowwise().sum();
            dS = (P.array() * (dP.array().colwise() - rowdot.array())).matrix() * scl;
            accumulate(tp, q, [&](Tensor& d) { mat(d, Lq, dk, h * Lq * dk).noalias() += dS * mat(kv, Lkv, dk, h * Lkv * dk); });
            accumulate(tp, k, [&](Tensor& d) { mat(d, Lkv, dk, h * Lkv * dk).noalias() += dS.transpose() * mat(qv, Lq, dk, h * Lq * dk); });
        }
    });
}

Var split_heads(Var x, std::size_t heads) {
    Tape* t = tape_of("split_heads", x);
    const Tensor& xv = x.value();
    require_rank("split_heads", xv, 2);
    const std::size_t L = xv.dim(0), C = xv.dim(1);
    if (heads == 0 || C % heads != 0)
        throw ValidationError("split_heads: width " + std::to_string(C) + " not divisible by " + std::to_string(heads) + " heads");
    const std::size_t d = C / heads;
    Tensor out({heads, L, d});
    for (std::size_t h = 0; h < heads; ++h)
        for (std::size_t l = 0; l < L; ++l)
            for (std::size_t j = 0; j < d; ++j) out[(h * L + l) * d + j] = xv[l * C + h * d + j];
    return t->push("split_heads", std::move(out), {x}, [x, heads, L, C, d](Tape& tp, const Tensor& g) {
        accumulate(tp, x, [&](Tensor& dx) {
            for (std::size_t h = 0; h < heads; ++h)
                for (std::size_t l = 0; l < L; ++l)
                    for (std::size_t j = 0; j < d; ++j) dx[l * C + h * d + j] += g[(h * L + l) * d + j];
        });
    });
}

Var merge_heads(Var x) {
    Tape* t = tape_of("merge_heads", x);
    const Tensor& xv = x.value();
    require_rank("merge_heads", xv, 3);
    const std::size_t H = xv.dim(0), L = xv.dim(1), d = xv.dim(2), C = H * d;
    Tensor out({L, C});
    for (std::size_t h = 0; h < H; ++h)
        for (std::size_t l = 0; l < L; ++l)
            for (std::size_t j = 0; j < d; ++j) out[l * C + h * d + j] = xv[(h * L + l) * d + j];
    return t->push("merge_heads", std::move(out), {x}, [x, H, L, C, d](Tape& tp, const Tensor& g) {
        accumulate(tp, x, [&](Tensor& dx) {
            for (std::size_t h = 0; h < H; ++h)
                for (std::size_t l = 0; l < L; ++l)
                    for (std::size_t j = 0; j < d; ++j) dx[(h * L + l) * d + j] += g[l * C + h * d + j];
        });
    });
}

Var rope_rotate(Var x, const Tensor& phases) {
    Tape* t = tape_of("rope_rotate", x);
    const Tensor& xv = x.value();
    require_rank("rope_rotate", xv, 2);
    const std::size_t L = xv.dim(0), C = xv.dim(1);
    if (C % 2 != 0) throw ValidationError("rope_rotate: odd channel count " + std::to_string(C));
    if (phases.rank() != 2 || phases.dim(0) != L || phases.dim(1) != C / 2)
        throw ValidationError("rope_rotate: phases " + shape_str(phases.shape()) + " do not match " + shape_str(xv.shape()));
    if (!phases.all_finite()) throw ValidationError("rope_rotate: non-finite phases");
    const std::size_t P = C / 2;
    auto cs = std::make_shared<std::vector<double>>(L * P);
    auto sn = std::make_shared<std::vector<double>>(L * P);
    Tensor out({L, C});
    for (std::size_t l = 0; l < L; ++l)
        for (std::size_t i = 0; i < P; ++i) {
            const double c = std::cos(phases[l * P + i]), s = std::sin(phases[l * P + i]);
            (*cs)[l * P + i] = c;
            (*sn)[l * P + i] = s;
            const double a = xv[l * C + 2 * i], b = xv[l * C + 2 * i + 1];
            out[l * C + 2 * i] = a * c - b * s;
            out[l * C + 2 * i + 1] = a * s + b * c;
        }
    return t->push("rope_rotate", std::move(out), {x}, [x, cs, sn, L, C, P](Tape& tp, const Tensor& g) {
        accumulate(tp, x, [&](Tensor& d) {
            for (std::size_t l = 0; l < L; ++l)
                for (std::size_t i = 0; i < P; ++i) {
                    const double c = (*cs)[l * P + i], s = (*sn)[l * P + i];
                    const double ga = g[l * C + 2 * i], gb = g[l * C + 2 * i + 1];
                    d[l * C + 2 * i] += ga * c + gb * s;
                    d[l * C + 2 * i + 1] += -ga * s + gb * c;
                }
        });
    });
}

Var concat_rows(const std::vector<Var>& parts) {
    if (parts.empty()) throw ValidationError("concat_rows: no inputs");
    Tape* t = tape_of("concat_rows", parts[0]);
    const std::size_t C = parts[0].value().rank() == 2 ? parts[0].value().dim(1) : 0;
    std::size_t L = 0;
    for (const Var& p : parts) {
        require_rank("concat_rows", p.value(), 2);
        if (p.value().dim(1) != C)
            throw ValidationError("concat_rows: width mismatch " + shape_str(parts[0].value().shape()) + " vs " + shape_str(p.value().shape()));
        L += p.value().dim(0);
    }
    Tensor out({L, C});
    std::size_t off = 0;
    for (const Var& p : parts) {
        std::copy(p.value().data(), p.value().data() + p.value().numel(), out.data() + off);
        off += p.value().numel();
    }
    return t->push("concat_rows", std::move(out), parts, [parts](Tape& tp, const Tensor& g) {
        std::size_t off = 0;
        for (const Var& p : parts) {
            const std::size_t n = tp.value(p.id()).numel();
            accumulate(tp, p, [&](Tensor& d) {
                for (std::size_t i = 0; i < n; ++i) d[i] += g[off + i];
            });
            off += n;
        }
    });
}

Var slice_rows(Var x, std::size_t begin, std::size_t end) {
    Tape* t = tape_of("slice_rows", x);
    const Tensor& xv = x.value();
    require_rank("slice_rows", xv, 2);
    if (begin > end || end > xv.dim(0))
        throw ValidationError("slice_rows: [" + std::to_string(begin) + "," + std::to_string(end) + ") out of " + shape_str(xv.shape()));
    const std::size_t C = xv.dim(1);
    Tensor out({end - begin, C}, Storage(xv.data() + begin * C, xv.data() + end * C));
    return t->push("slice_rows", std::move(out), {x}, [x, begin, C](Tape& tp, const Tensor& g) {
        accumulate(tp, x, [&](Tensor& d) {
            for (std::size_t i = 0; i < g.numel(); ++i) d[begin * C + i] += g[i];
        });
    });
}

Var sum(Var x) {
    Tape* t = tape_of("sum", x);
    double s = 0;
    for (double v : x.value().values()) s += v;
    return t->push("sum", Tensor::scalar(s), {x}, [x](Tape& tp, const Tensor& g) {
        accumulate(tp, x, [&](Tensor& d) {
            for (auto& v : d.values()) v += g[0];
        });
    });
}

Var mean(Var x) {
    const std::size_t n = x.value().numel();
    if (n == 0) throw ValidationError("mean: empty tensor");
    return scale(sum(x), 1.0 / static_cast<double>(n));
}

Var mse(Var a, Var target) {
    Tape* t = tape_of("mse", a);
    require_same("mse", a.value(), target.value());
    const std::size_t n = a.value().numel();
    if (n == 0) throw ValidationError("mse: empty tensor");
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a.value()[i] - target.value()[i];
        s += d * d;
    }
    return t->push("mse", Tensor::scalar(s / static_cast<double>(n)), {a, target}, [a, target, n](Tape& tp, const Tensor& g) {
        const Tensor& av = tp.value(a.id());
        const Tensor& tv = tp.value(target.id());
        const double f = 2.0 * g[0] / static_cast<double>(n);
        accumulate(tp, a, [&](Tensor& d) {
            for (std::size_t i = 0; i < n; ++i) d[i] += f * (av[i] - tv[i]);
        });
        accumulate(tp, target, [&](Tensor& d) {
            for (std::size_t i = 0; i < n; ++i) d[i] -= f * (av[i] - tv[i]);
        });
    });
}

Var weighted_sum(Var x, const Tensor& w) {
    Tape* t = tape_of("weighted_sum", x);
    require_same("weighted_sum", x.value(), w);
    double s = 0;
    for (std::size_t i = 0; i < w.numel(); ++i) s += x.value()[i] * w[i];
    return t->push("weighted_sum", Tensor::scalar(s), {x}, [x, w](Tape& tp, const Tensor& g) {
        accumulate(tp, x, [&](Tensor& d) { add_into(d, w, g[0]); });
    });
}

Tensor sinusoidal_embedding(double value, std::size_t dim, double max_period) {
    if (dim == 0 || dim % 2 != 0) throw ValidationError("sinusoidal_embedding: dim must be even and positive");
    if (!std::isfinite(value)) throw ValidationError("sinusoidal_embedding: non-finite input");
    const std::size_t half = dim / 2;
    Tensor out({dim});
    for (std::size_t i = 0; i < half; ++i) {
        const double f = std::exp(-std::log(max_period) * static_cast<double>(i) / static_cast<double>(half));
        out[i] = std::cos(value * f);
        out[half + i] = std::sin(value * f);
    }
    return out;
}

}  // namespace voxrefine::num
