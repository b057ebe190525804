#include "tapeopt/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tapeopt {

namespace {

bool shapes_compatible(const Tensor& a, const Tensor& b) {
    return a.same_shape(b) || a.is_scalar() || b.is_scalar();
}

std::vector<std::size_t> broadcast_shape(const Tensor& a, const Tensor& b) {
    if (a.same_shape(b)) return a.shape();
    if (!a.is_scalar()) return a.shape();
    if (!b.is_scalar()) return b.shape();
    // Both single-element; keep the higher-rank shape (a 1x1 matrix stays one).
    return a.rank() >= b.rank() ? a.shape() : b.shape();
}

DType promote(const Tensor& a, const Tensor& b) {
    return (a.is_complex() || b.is_complex()) ? DType::Complex : DType::Real;
}

double stable_sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Tensor scaled(const Tensor& t, cdouble f, DType dtype) {
    Tensor out = Tensor::zeros(t.shape(), dtype);
    for (std::size_t i = 0; i < t.size(); ++i) out[i] = t[i] * f;
    return out;
}

// Row-major strides of `shape`.
std::vector<std::size_t> strides_of(const std::vector<std::size_t>& shape) {
    std::vector<std::size_t> s(shape.size(), 1);
    for (std::size_t i = shape.size(); i-- > 1;) s[i - 1] = s[i] * shape[i];
    return s;
}

}  // namespace

bool Gradients::contains(NodeId id) const {
    return std::find(leaves_.begin(), leaves_.end(), id) != leaves_.end();
}

const Tensor& Gradients::at(NodeId id) const {
    for (std::size_t i = 0; i < leaves_.size(); ++i)
        if (leaves_[i] == id) return grads_[i];
    throw std::out_of_range("Gradients::at: node is not a trainable leaf of this tape");
}

const GraphNode& Tape::node(NodeId id) const {
    if (!id.valid() || id.index >= nodes_.size())
        throw std::out_of_range("Tape: invalid node id");
    return nodes_[id.index];
}

GraphNode& Tape::node(NodeId id) {
    if (!id.valid() || id.index >= nodes_.size())
        throw std::out_of_range("Tape: invalid node id");
    return nodes_[id.index];
}

NodeId Tape::push(GraphNode n) {
    nodes_.push_back(std::move(n));
    return NodeId{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

NodeId Tape::unary(OpKind op, NodeId a, Tensor value) {
    GraphNode n;
    n.op = op;
    n.a = a;
    n.needs_grad = node(a).needs_grad;
    n.value = std::move(value);
    return push(std::move(n));
}

NodeId Tape::binary(OpKind op, NodeId a, NodeId b, Tensor value) {
    GraphNode n;
    n.op = op;
    n.a = a;
    n.b = b;
    n.needs_grad = node(a).needs_grad || node(b).needs_grad;
    n.value = std::move(value);
    return push(std::move(n));
}

NodeId Tape::leaf(Tensor value, bool trainable) {
    if (trainable && !value.is_real())
        throw std::invalid_argument("Tape::leaf: trainable leaves must be real");
    GraphNode n;
    n.op = OpKind::Leaf;
    n.trainable = trainable;
    n.needs_grad = trainable;
    n.value = std::move(value);
    NodeId id = push(std::move(n));
    if (trainable) trainable_.push_back(id);
    return id;
}

NodeId Tape::add(NodeId a, NodeId b) {
    const Tensor& va = node(a).value;
    const Tensor& vb = node(b).value;
    if (!shapes_compatible(va, vb))
        throw std::invalid_argument("Tape::add: shape mismatch " + Tensor::shape_str(va.shape()) +
                                    " vs " + Tensor::shape_str(vb.shape()));
    Tensor out = Tensor::zeros(broadcast_shape(va, vb), promote(va, vb));
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = va[va.is_scalar() ? 0 : i] + vb[vb.is_scalar() ? 0 : i];
    return binary(OpKind::Add, a, b, std::move(out));
}

NodeId Tape::sub(NodeId a, NodeId b) {
    const Tensor& va = node(a).value;
    const Tensor& vb = node(b).value;
    if (!shapes_compatible(va, vb))
        throw std::invalid_argument("Tape::sub: shape mismatch " + Tensor::shape_str(va.shape()) +
                                    " vs " + Tensor::shape_str(vb.shape()));
    Tensor out = Tensor::zeros(broadcast_shape(va, vb), promote(va, vb));
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = va[va.is_scalar() ? 0 : i] - vb[vb.is_scalar() ? 0 : i];
    return binary(OpKind::Sub, a, b, std::move(out));
}

NodeId Tape::mul(NodeId a, NodeId b) {
    const Tensor& va = node(a).value;
    const Tensor& vb = node(b).value;
    if (!shapes_compatible(va, vb))
        throw std::invalid_argument("Tape::mul: shape mismatch " + Tensor::shape_str(va.shape()) +
                                    " vs " + Tensor::shape_str(vb.shape()));
    Tensor out = Tensor::zeros(broadcast_shape(va, vb), promote(va, vb));
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = va[va.is_scalar() ? 0 : i] * vb[vb.is_scalar() ? 0 : i];
    return binary(OpKind::Mul, a, b, std::move(out));
}

NodeId Tape::div(NodeId a, NodeId b) {
    const Tensor& va = node(a).value;
    const Tensor& vb = node(b).value;
    if (!shapes_compatible(va, vb))
        throw std::invalid_argument("Tape::div: shape mismatch " + Tensor::shape_str(va.shape()) +
                                    " vs " + Tensor::shape_str(vb.shape()));
    Tensor out = Tensor::zeros(broadcast_shape(va, vb), promote(va, vb));
    for (std::size_t i = 0; i < out.size(); ++i) {
        const cdouble den = vb[vb.is_scalar() ? 0 : i];
        if (den == cdouble{0.0, 0.0}) throw std::domain_error("Tape::div: division by zero");
        out[i] = va[va.is_scalar() ? 0 : i] / den;
    }
    return binary(OpKind::Div, a, b, std::move(out));
}

NodeId Tape::exp(NodeId a) {
    const Tensor& v = node(a).value;
    if (!v.is_real()) throw std::invalid_argument("Tape::exp: real input required");
    Tensor out = Tensor::zeros(v.shape(), DType::Real);
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = cdouble{std::exp(v[i].real()), 0.0};
    return unary(OpKind::Exp, a, std::move(out));
}

NodeId Tape::log1p(NodeId a) {
    const Tensor& v = node(a).value;
    if (!v.is_real()) throw std::invalid_argument("Tape::log1p: real input required");
    Tensor out = Tensor::zeros(v.shape(), DType::Real);
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = cdouble{std::log1p(v[i].real()), 0.0};
    return unary(OpKind::Log1p, a, std::move(out));
}

NodeId Tape::sigmoid(NodeId a) {
    const Tensor& v = node(a).value;
    if (!v.is_real()) throw std::invalid_argument("Tape::sigmoid: real input required");
    Tensor out = Tensor::zeros(v.shape(), DType::Real);
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = cdouble{stable_sigmoid(v[i].real()), 0.0};
    return unary(OpKind::Sigmoid, a, std::move(out));
}

NodeId Tape::sqrt(NodeId a) {
    const Tensor& v = node(a).value;
    if (!v.is_real()) throw std::invalid_argument("Tape::sqrt: real input required");
    Tensor out = Tensor::zeros(v.shape(), DType::Real);
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = cdouble{std::sqrt(v[i].real()), 0.0};
    return unary(OpKind::Sqrt, a, std::move(out));
}

NodeId Tape::real_part(NodeId a) {
    const Tensor& v = node(a).value;
    Tensor out = Tensor::zeros(v.shape(), DType::Real);
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = cdouble{v[i].real(), 0.0};
    return unary(OpKind::Real, a, std::move(out));
}

NodeId Tape::imag_part(NodeId a) {
    const Tensor& v = node(a).value;
    Tensor out = Tensor::zeros(v.shape(), DType::Real);
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = cdouble{v[i].imag(), 0.0};
    return unary(OpKind::Imag, a, std::move(out));
}

NodeId Tape::conj(NodeId a) {
    const Tensor& v = node(a).value;
    Tensor out = Tensor::zeros(v.shape(), v.dtype());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::conj(v[i]);
    return unary(OpKind::Conj, a, std::move(out));
}

NodeId Tape::scale(NodeId a, cdouble factor) {
    const Tensor& v = node(a).value;
    const DType dtype = (v.is_complex() || factor.imag() != 0.0) ? DType::Complex : DType::Real;
    NodeId id = unary(OpKind::Scale, a, scaled(v, factor, dtype));
    node(id).scale_factor = factor;
    return id;
}

NodeId Tape::cis(NodeId phi) {
    const Tensor& v = node(phi).value;
    if (!v.is_real()) throw std::invalid_argument("Tape::cis: real input required");
    Tensor out = Tensor::zeros(v.shape(), DType::Complex);
    for (std::size_t i = 0; i < v.size(); ++i)
        out[i] = cdouble{std::cos(v[i].real()), std::sin(v[i].real())};
    return unary(OpKind::Cis, phi, std::move(out));
}

NodeId Tape::abs2(NodeId z) {
    const Tensor& v = node(z).value;
    Tensor out = Tensor::zeros(v.shape(), DType::Real);
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = cdouble{std::norm(v[i]), 0.0};
    return unary(OpKind::Abs2, z, std::move(out));
}

NodeId Tape::complex_pair(NodeId xr, NodeId xi) {
    const Tensor& vr = node(xr).value;
    const Tensor& vi = node(xi).value;
    if (!vr.is_real() || !vi.is_real())
        throw std::invalid_argument("Tape::complex_pair: real inputs required");
    if (!vr.same_shape(vi))
        throw std::invalid_argument("Tape::complex_pair: shape mismatch " +
                                    Tensor::shape_str(vr.shape()) + " vs " +
                                    Tensor::shape_str(vi.shape()));
    Tensor out = Tensor::zeros(vr.shape(), DType::Complex);
    for (std::size_t i = 0; i < vr.size(); ++i) out[i] = cdouble{vr[i].real(), vi[i].real()};
    return binary(OpKind::ComplexPair, xr, xi, std::move(out));
}

NodeId Tape::matmul(NodeId a, NodeId b) {
    const Tensor& va = node(a).value;
    const Tensor& vb = node(b).value;
    if (va.rank() != 2 || (vb.rank() != 2 && vb.rank() != 1))
        throw std::invalid_argument("Tape::matmul: needs 2-D lhs and 1-D or 2-D rhs");
    const std::size_t r = va.rows(), s = va.cols();
    const std::size_t sb = vb.rank() == 2 ? vb.rows() : vb.dim(0);
    const std::size_t t = vb.rank() == 2 ? vb.cols() : 1;
    if (s != sb)
        throw std::invalid_argument("Tape::matmul: inner dimensions disagree " +
                                    Tensor::shape_str(va.shape()) + " vs " +
                                    Tensor::shape_str(vb.shape()));
    std::vector<std::size_t> out_shape =
        vb.rank() == 2 ? std::vector<std::size_t>{r, t} : std::vector<std::size_t>{r};
    Tensor out = Tensor::zeros(out_shape, promote(va, vb));
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < t; ++j) {
            cdouble acc{0.0, 0.0};
            for (std::size_t m = 0; m < s; ++m) acc += va[i * s + m] * vb[m * t + j];
            out[i * t + j] = acc;
        }
    return binary(OpKind::MatMul, a, b, std::move(out));
}

NodeId Tape::reduce_sum(NodeId a, std::optional<std::vector<std::size_t>> axes) {
    const Tensor& v = node(a).value;
    std::vector<std::size_t> ax = axes.value_or(std::vector<std::size_t>{});
    std::sort(ax.begin(), ax.end());
    if (std::adjacent_find(ax.begin(), ax.end()) != ax.end())
        throw std::invalid_argument("Tape::reduce_sum: duplicate axis");
    for (std::size_t axis : ax)
        if (axis >= v.rank()) throw std::invalid_argument("Tape::reduce_sum: axis out of range");

    Tensor out;
    if (ax.empty() || ax.size() == v.rank()) {
        ax.clear();  // canonical form for "sum everything"
        cdouble acc{0.0, 0.0};
        for (std::size_t i = 0; i < v.size(); ++i) acc += v[i];
        out = v.is_complex() ? Tensor::scalar(acc) : Tensor::scalar(acc.real());
    } else {
        std::vector<std::size_t> out_shape;
        for (std::size_t d = 0; d < v.rank(); ++d)
            if (!std::binary_search(ax.begin(), ax.end(), d)) out_shape.push_back(v.dim(d));
        out = Tensor::zeros(out_shape, v.dtype());
        const auto in_strides = strides_of(v.shape());
        const auto out_strides = strides_of(out_shape);
        for (std::size_t i = 0; i < v.size(); ++i) {
            std::size_t rem = i, oi = 0, od = 0;
            for (std::size_t d = 0; d < v.rank(); ++d) {
                const std::size_t coord = rem / in_strides[d];
                rem %= in_strides[d];
                if (!std::binary_search(ax.begin(), ax.end(), d)) oi += coord * out_strides[od++];
            }
            out[oi] += v[i];
        }
    }
    NodeId id = unary(OpKind::ReduceSum, a, std::move(out));
    node(id).axes = std::move(ax);
    return id;
}

NodeId Tape::diag(NodeId v) {
    const Tensor& x = node(v).value;
    if (x.rank() != 1) throw std::invalid_argument("Tape::diag: 1-D input required");
    const std::size_t n = x.dim(0);
    Tensor out = Tensor::zeros({n, n}, x.dtype());
    for (std::size_t i = 0; i < n; ++i) out[i * n + i] = x[i];
    return unary(OpKind::Diag, v, std::move(out));
}

NodeId Tape::diag_part(NodeId m) {
    const Tensor& x = node(m).value;
    if (x.rank() != 2 || x.rows() != x.cols())
        throw std::invalid_argument("Tape::diag_part: square matrix required");
    const std::size_t n = x.rows();
    Tensor out = Tensor::zeros({n}, x.dtype());
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i * n + i];
    return unary(OpKind::DiagPart, m, std::move(out));
}

// Adds `contribution` into the adjoint slot of `target`. The contribution is
// either shaped like the target or gets sum-reduced onto a scalar target
// (reverse of scalar broadcast). Real targets take the real channel only.
void Tape::accumulate(NodeId target, const Tensor& contribution) {
    GraphNode& t = node(target);
    if (!t.needs_grad) return;
    if (!t.adjoint_live) {
        t.adjoint = Tensor::zeros(t.value.shape(), t.value.dtype());
        t.adjoint_live = true;
    }
    const bool reduce = t.value.is_scalar() && contribution.size() != 1;
    const bool real_target = t.value.is_real();
    for (std::size_t i = 0; i < contribution.size(); ++i) {
        const cdouble c = real_target ? cdouble{contribution[i].real(), 0.0} : contribution[i];
        t.adjoint[reduce ? 0 : i] += c;
    }
}

void Tape::propagate(GraphNode& n) {
    const Tensor& adj = n.adjoint;
    switch (n.op) {
        case OpKind::Leaf:
            break;
        case OpKind::Add: {
            accumulate(n.a, adj);
            accumulate(n.b, adj);
            break;
        }
        case OpKind::Sub: {
            accumulate(n.a, adj);
            accumulate(n.b, scaled(adj, cdouble{-1.0, 0.0}, DType::Complex));
            break;
        }
        case OpKind::Mul: {
            const Tensor& va = node(n.a).value;
            const Tensor& vb = node(n.b).value;
            Tensor ca = Tensor::zeros(adj.shape(), DType::Complex);
            Tensor cb = Tensor::zeros(adj.shape(), DType::Complex);
            for (std::size_t i = 0; i < adj.size(); ++i) {
                ca[i] = adj[i] * std::conj(vb[vb.is_scalar() ? 0 : i]);
                cb[i] = adj[i] * std::conj(va[va.is_scalar() ? 0 : i]);
            }
            accumulate(n.a, ca);
            accumulate(n.b, cb);
            break;
        }
        case OpKind::Div: {
            const Tensor& vb = node(n.b).value;
            Tensor ca = Tensor::zeros(adj.shape(), DType::Complex);
            Tensor cb = Tensor::zeros(adj.shape(), DType::Complex);
            for (std::size_t i = 0; i < adj.size(); ++i) {
                const cdouble den = vb[vb.is_scalar() ? 0 : i];
                ca[i] = adj[i] * std::conj(1.0 / den);
                cb[i] = -adj[i] * std::conj(n.value[i] / den);
            }
            accumulate(n.a, ca);
            accumulate(n.b, cb);
            break;
        }
        case OpKind::Exp: {
            Tensor c = Tensor::zeros(adj.shape(), DType::Real);
            for (std::size_t i = 0; i < adj.size(); ++i) c[i] = adj[i].real() * n.value[i].real();
            accumulate(n.a, c);
            break;
        }
        case OpKind::Log1p: {
            const Tensor& va = node(n.a).value;
            Tensor c = Tensor::zeros(adj.shape(), DType::Real);
            for (std::size_t i = 0; i < adj.size(); ++i)
                c[i] = adj[i].real() / (1.0 + va[i].real());
            accumulate(n.a, c);
            break;
        }
        case OpKind::Sigmoid: {
            Tensor c = Tensor::zeros(adj.shape(), DType::Real);
            for (std::size_t i = 0; i < adj.size(); ++i) {
                const double s = n.value[i].real();
                c[i] = adj[i].real() * s * (1.0 - s);
            }
            accumulate(n.a, c);
            break;
        }
        case OpKind::Sqrt: {
            Tensor c = Tensor::zeros(adj.shape(), DType::Real);
            for (std::size_t i = 0; i < adj.size(); ++i)
                c[i] = adj[i].real() / (2.0 * n.value[i].real());
            accumulate(n.a, c);
            break;
        }
        case OpKind::Real: {
            accumulate(n.a, adj);
            break;
        }
        case OpKind::Imag: {
            accumulate(n.a, scaled(adj, cdouble{0.0, 1.0}, DType::Complex));
            break;
        }
        case OpKind::Conj: {
            Tensor c = Tensor::zeros(adj.shape(), DType::Complex);
            for (std::size_t i = 0; i < adj.size(); ++i) c[i] = std::conj(adj[i]);
            accumulate(n.a, c);
            break;
        }
        case OpKind::Scale: {
            accumulate(n.a, scaled(adj, std::conj(n.scale_factor), DType::Complex));
            break;
        }
        case OpKind::Cis: {
            // d e^{j phi} / d phi = j e^{j phi}; real input projects onto Re.
            Tensor c = Tensor::zeros(adj.shape(), DType::Complex);
            for (std::size_t i = 0; i < adj.size(); ++i)
                c[i] = adj[i] * std::conj(cdouble{0.0, 1.0} * n.value[i]);
            accumulate(n.a, c);
            break;
        }
        case OpKind::Abs2: {
            const Tensor& va = node(n.a).value;
            Tensor c = Tensor::zeros(adj.shape(), DType::Complex);
            for (std::size_t i = 0; i < adj.size(); ++i) c[i] = 2.0 * adj[i].real() * va[i];
            accumulate(n.a, c);
            break;
        }
        case OpKind::ComplexPair: {
            Tensor cr = Tensor::zeros(adj.shape(), DType::Real);
            Tensor ci = Tensor::zeros(adj.shape(), DType::Real);
            for (std::size_t i = 0; i < adj.size(); ++i) {
                cr[i] = adj[i].real();
                ci[i] = adj[i].imag();
            }
            accumulate(n.a, cr);
            accumulate(n.b, ci);
            break;
        }
        case OpKind::MatMul: {
            const Tensor& va = node(n.a).value;
            const Tensor& vb = node(n.b).value;
            const std::size_t r = va.rows(), s = va.cols();
            const std::size_t t = vb.rank() == 2 ? vb.cols() : 1;
            // adjoint(A) += adj * B^H
            Tensor ca = Tensor::zeros(va.shape(), DType::Complex);
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t m = 0; m < s; ++m) {
                    cdouble acc{0.0, 0.0};
                    for (std::size_t j = 0; j < t; ++j)
                        acc += adj[i * t + j] * std::conj(vb[m * t + j]);
                    ca[i * s + m] = acc;
                }
            accumulate(n.a, ca);
            // adjoint(B) += A^H * adj
            Tensor cb = Tensor::zeros(vb.shape(), DType::Complex);
            for (std::size_t m = 0; m < s; ++m)
                for (std::size_t j = 0; j < t; ++j) {
                    cdouble acc{0.0, 0.0};
                    for (std::size_t i = 0; i < r; ++i)
                        acc += std::conj(va[i * s + m]) * adj[i * t + j];
                    cb[m * t + j] = acc;
                }
            accumulate(n.b, cb);
            break;
        }
        case OpKind::ReduceSum: {
            const Tensor& va = node(n.a).value;
            Tensor c = Tensor::zeros(va.shape(), DType::Complex);
            if (n.axes.empty()) {
                for (std::size_t i = 0; i < c.size(); ++i) c[i] = adj[0];
            } else {
                const auto in_strides = strides_of(va.shape());
                const auto out_strides = strides_of(n.value.shape());
                for (std::size_t i = 0; i < c.size(); ++i) {
                    std::size_t rem = i, oi = 0, od = 0;
                    for (std::size_t d = 0; d < va.rank(); ++d) {
                        const std::size_t coord = rem / in_strides[d];
                        rem %= in_strides[d];
                        if (!std::binary_search(n.axes.begin(), n.axes.end(), d))
                            oi += coord * out_strides[od++];
                    }
                    c[i] = adj[oi];
                }
            }
            accumulate(n.a, c);
            break;
        }
        case OpKind::Diag: {
            const std::size_t k = node(n.a).value.dim(0);
            Tensor c = Tensor::zeros({k}, DType::Complex);
            for (std::size_t i = 0; i < k; ++i) c[i] = adj[i * k + i];
            accumulate(n.a, c);
            break;
        }
        case OpKind::DiagPart: {
            const std::size_t k = n.value.dim(0);
            Tensor c = Tensor::zeros({k, k}, DType::Complex);
            for (std::size_t i = 0; i < k; ++i) c[i * k + i] = adj[i];
            accumulate(n.a, c);
            break;
        }
    }
}

Gradients Tape::backward(NodeId loss) {
    if (consumed_)
        throw std::logic_error("Tape::backward: tape already consumed, reset() before reuse");
    GraphNode& l = node(loss);
    if (!l.value.is_scalar() || !l.value.is_real())
        throw std::invalid_argument("Tape::backward: loss must be a real scalar");

    l.adjoint = Tensor::zeros(l.value.shape(), DType::Real);
    l.adjoint[0] = cdouble{1.0, 0.0};
    l.adjoint_live = true;

    for (std::size_t i = loss.index + 1; i-- > 0;) {
        GraphNode& n = nodes_[i];
        if (n.adjoint_live && n.needs_grad && n.op != OpKind::Leaf) propagate(n);
    }

    std::vector<Tensor> grads;
    grads.reserve(trainable_.size());
    for (NodeId id : trainable_) {
        const GraphNode& n = node(id);
        if (n.adjoint_live) {
            Tensor g = Tensor::zeros(n.value.shape(), DType::Real);
            for (std::size_t i = 0; i < g.size(); ++i) g[i] = cdouble{n.adjoint[i].real(), 0.0};
            grads.push_back(std::move(g));
        } else {
            grads.push_back(Tensor::zeros(n.value.shape(), DType::Real));
        }
    }
    consumed_ = true;
    return Gradients{trainable_, std::move(grads)};
}

void Tape::reset() {
    nodes_.clear();
    trainable_.clear();
    consumed_ = false;
}

}  // namespace tapeopt
