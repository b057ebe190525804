#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "tapeopt/tensor.hpp"

namespace tapeopt {

struct NodeId {
    std::uint32_t index = std::numeric_limits<std::uint32_t>::max();
    bool valid() const { return index != std::numeric_limits<std::uint32_t>::max(); }
    friend bool operator==(NodeId a, NodeId b) { return a.index == b.index; }
};

enum class OpKind {
    Leaf,
    Add,
    Sub,
    Mul,
    Div,
    Exp,
    Log1p,
    Sigmoid,
    Sqrt,
    Real,
    Imag,
    Conj,
    Scale,
    Cis,
    Abs2,
    ComplexPair,
    MatMul,
    ReduceSum,
    Diag,
    DiagPart,
};

// One recorded operation: inputs, cached forward value, adjoint slot.
struct GraphNode {
    OpKind op = OpKind::Leaf;
    NodeId a;
    NodeId b;
    Tensor value;
    Tensor adjoint;           // accumulated during backward; complex for complex nodes
    bool trainable = false;   // leaves only
    bool needs_grad = false;  // reaches a trainable leaf
    bool adjoint_live = false;
    cdouble scale_factor{};              // Scale
    std::vector<std::size_t> axes;       // ReduceSum (empty = all axes)
};

// Gradients of a real scalar loss with respect to the trainable leaves,
// in leaf registration order. Non-trainable leaves are absent.
class Gradients {
public:
    Gradients() = default;
    Gradients(std::vector<NodeId> leaves, std::vector<Tensor> grads)
        : leaves_(std::move(leaves)), grads_(std::move(grads)) {}

    std::size_t size() const { return leaves_.size(); }
    const std::vector<NodeId>& leaves() const { return leaves_; }
    const Tensor& operator[](std::size_t i) const { return grads_[i]; }

    bool contains(NodeId id) const;
    const Tensor& at(NodeId id) const;

private:
    std::vector<NodeId> leaves_;
    std::vector<Tensor> grads_;
};

// Append-only reverse-mode tape over whole-tensor nodes. Eager forward
// evaluation; backward() walks the record once in reverse. A tape serves one
// forward+backward pass before reset().
//
// Complex values are differentiated as pairs of real channels: the adjoint of
// a complex node z holds dL/dRe(z) + j*dL/dIm(z) for the real scalar loss L.
// Trainable leaves must be real; complex variables are built from real leaves
// via transforms (complex_pair, cis, ...).
class Tape {
public:
    NodeId leaf(Tensor value, bool trainable = false);
    NodeId constant(Tensor value) { return leaf(std::move(value), false); }

    // Elementwise; shapes must match or one side must be a scalar.
    NodeId add(NodeId a, NodeId b);
    NodeId sub(NodeId a, NodeId b);
    NodeId mul(NodeId a, NodeId b);
    NodeId div(NodeId a, NodeId b);

    // Elementwise on real tensors.
    NodeId exp(NodeId a);
    NodeId log1p(NodeId a);
    NodeId sigmoid(NodeId a);
    NodeId sqrt(NodeId a);

    NodeId real_part(NodeId a);
    NodeId imag_part(NodeId a);
    NodeId conj(NodeId a);

    // Multiply by a compile-time constant scalar.
    NodeId scale(NodeId a, cdouble factor);
    NodeId scale(NodeId a, double factor) { return scale(a, cdouble{factor, 0.0}); }

    // e^{j*phi} for real phi.
    NodeId cis(NodeId phi);

    // |z|^2 elementwise, real result.
    NodeId abs2(NodeId z);

    // xr + j*xi from two real tensors of equal shape.
    NodeId complex_pair(NodeId xr, NodeId xi);

    // 2-D x 2-D or 2-D x 1-D product.
    NodeId matmul(NodeId a, NodeId b);

    // Sum over the given axes; no axes = sum everything to a scalar.
    NodeId reduce_sum(NodeId a, std::optional<std::vector<std::size_t>> axes = std::nullopt);

    // 1-D vector to square diagonal matrix and back.
    NodeId diag(NodeId v);
    NodeId diag_part(NodeId m);

    const Tensor& value(NodeId id) const { return node(id).value; }
    const GraphNode& node(NodeId id) const;
    std::size_t size() const { return nodes_.size(); }
    const std::vector<NodeId>& trainable_leaves() const { return trainable_; }

    // Reverse pass from a real scalar loss. One call per tape.
    Gradients backward(NodeId loss);

    void reset();

private:
    GraphNode& node(NodeId id);
    NodeId push(GraphNode n);
    NodeId unary(OpKind op, NodeId a, Tensor value);
    NodeId binary(OpKind op, NodeId a, NodeId b, Tensor value);
    void propagate(GraphNode& n);
    void accumulate(NodeId target, const Tensor& contribution);

    std::vector<GraphNode> nodes_;
    std::vector<NodeId> trainable_;
    bool consumed_ = false;
};

}  // namespace tapeopt
