#pragma once

#include <span>
#include <vector>

#include "tapeopt/tape.hpp"

namespace tapeopt::transforms {

// Differentiable maps from unconstrained real leaves to feasible variables.
// Every builder takes leaf nodes already registered on the tape and returns
// the feasible variable node; the output satisfies its constraint for any
// finite leaf values.

// x = xr + j*xi.
NodeId complex_pair(Tape& tape, NodeId xr, NodeId xi);

// theta_i = e^{j*phi_i}; |theta_i| = 1 by construction.
NodeId unit_modulus(Tape& tape, NodeId phi);

// x = a + (b-a)*sigmoid(xp), so a < x < b strictly.
NodeId box(Tape& tape, NodeId xp, double a, double b);

// x_k = e^{u_k} / sum_i e^{u_i} * P * sigmoid(c): x_k > 0, sum x_k <= P.
// The exponential keeps the normalizing sum positive for any leaves.
NodeId sum_power(Tape& tape, NodeId u, NodeId c, double budget);

// W = W' * sqrt(Pmax / sum_k w'_k^H w'_k): total transmit power is exactly
// Pmax. With a scaler leaf c the target power becomes Pmax * sigmoid(c).
NodeId frobenius_power(Tape& tape, NodeId wr, NodeId wi, double p_max);
NodeId frobenius_power_scaled(Tape& tape, NodeId wr, NodeId wi, NodeId c, double p_max);

// Nullspace basis and particular solution for Ax = b with A full row rank,
// M < K. F has orthonormal columns spanning null(A); x0 = pinv(A) * b.
struct LinEqFactorization {
    Tensor A;      // M x K
    Tensor b;      // M
    Tensor F;      // K x (K-M), empty (0 columns) when K == M
    Tensor x0;     // K
    Tensor pinv;   // K x M
};
LinEqFactorization lin_eq_factorize(const Tensor& A, const Tensor& b);

// x = F*xp + x0, so A*x = b for any xp.
NodeId lin_eq_apply(Tape& tape, NodeId xp, const LinEqFactorization& fac);

// x = F*xp + pinv(A)*(b - e^{mup}), so A*x < b strictly elementwise.
NodeId lin_ineq_apply(Tape& tape, NodeId xp, NodeId mup, const LinEqFactorization& fac);

enum class TransformKind {
    ComplexPair,
    UnitModulus,
    Box,
    SumPower,
    FrobeniusPower,
    LinEq,
    LinIneq,
};

// Declarative description of one constraint reparameterization: which
// unconstrained real leaves it consumes and how they map to the feasible
// variable. Immutable once constructed.
class TransformSpec {
public:
    static TransformSpec complex_pair(std::vector<std::size_t> shape);
    static TransformSpec unit_modulus(std::size_t n);
    static TransformSpec box(std::vector<std::size_t> shape, double a, double b);
    static TransformSpec sum_power(std::size_t k, double budget);
    static TransformSpec frobenius_power(std::size_t m, std::size_t k, double p_max,
                                         bool with_scaler = false);
    static TransformSpec lin_eq(const Tensor& A, const Tensor& b);
    static TransformSpec lin_ineq(const Tensor& A, const Tensor& b);

    TransformKind kind() const { return kind_; }
    const LinEqFactorization& factorization() const { return fac_; }
    double budget() const { return budget_; }

    // Shapes of the unconstrained real leaves, in apply() order.
    std::vector<std::vector<std::size_t>> leaf_shapes() const;

    // Builds the transform on the tape from already-registered leaves.
    NodeId apply(Tape& tape, std::span<const NodeId> leaves) const;

    // Same forward map on a scratch tape, detached from any training tape.
    Tensor recover(std::span<const Tensor> leaf_values) const;

private:
    TransformSpec() = default;

    TransformKind kind_ = TransformKind::ComplexPair;
    std::vector<std::size_t> shape_;
    double lo_ = 0.0, hi_ = 0.0;
    double budget_ = 0.0;
    bool with_scaler_ = false;
    std::size_t rows_ = 0, cols_ = 0;
    LinEqFactorization fac_;
};

}  // namespace tapeopt::transforms
