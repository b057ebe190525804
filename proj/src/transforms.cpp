#include "tapeopt/transforms.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <stdexcept>

namespace tapeopt::transforms {

namespace {

Eigen::MatrixXd to_eigen(const Tensor& t) {
    Eigen::MatrixXd m(t.rows(), t.cols());
    for (std::size_t r = 0; r < t.rows(); ++r)
        for (std::size_t c = 0; c < t.cols(); ++c) m(r, c) = t.at(r, c).real();
    return m;
}

Tensor from_eigen(const Eigen::MatrixXd& m) {
    Tensor t = Tensor::zeros({static_cast<std::size_t>(m.rows()),
                              static_cast<std::size_t>(m.cols())});
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            t[static_cast<std::size_t>(r) * m.cols() + c] = cdouble{m(r, c), 0.0};
    return t;
}

Tensor vector_from_eigen(const Eigen::VectorXd& v) {
    Tensor t = Tensor::zeros({static_cast<std::size_t>(v.size())});
    for (Eigen::Index i = 0; i < v.size(); ++i) t[i] = cdouble{v(i), 0.0};
    return t;
}

// SVD-based nullspace basis, pseudoinverse and particular solution; rank is
// detected with the cutoff 1e-10 * sigma_max. Requires full row rank, M <= K.
LinEqFactorization factorize(const Tensor& A, const Tensor& b) {
    if (A.rank() != 2) throw std::invalid_argument("lin_eq_factorize: A must be a matrix");
    if (!A.is_real() || !b.is_real())
        throw std::invalid_argument("lin_eq_factorize: A and b must be real");
    const std::size_t m = A.rows(), k = A.cols();
    if (b.rank() != 1 || b.dim(0) != m)
        throw std::invalid_argument("lin_eq_factorize: b must be an M-vector");

    const Eigen::MatrixXd a = to_eigen(A);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double cutoff = 1e-10 * sv(0);
    std::size_t rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cutoff) ++rank;
    if (rank != m)
        throw std::invalid_argument("lin_eq_factorize: A is rank-deficient (rank " +
                                    std::to_string(rank) + " of " + std::to_string(m) + ")");

    LinEqFactorization fac;
    fac.A = A;
    fac.b = b;
    fac.F = from_eigen(svd.matrixV().rightCols(k - m));
    const Eigen::MatrixXd pinv = svd.matrixV().leftCols(m) *
                                 sv.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
    fac.pinv = from_eigen(pinv);
    Eigen::VectorXd bv(m);
    for (std::size_t i = 0; i < m; ++i) bv(i) = b[i].real();
    fac.x0 = vector_from_eigen(pinv * bv);
    return fac;
}

}  // namespace

NodeId complex_pair(Tape& tape, NodeId xr, NodeId xi) { return tape.complex_pair(xr, xi); }

NodeId unit_modulus(Tape& tape, NodeId phi) { return tape.cis(phi); }

NodeId box(Tape& tape, NodeId xp, double a, double b) {
    if (a >= b) throw std::invalid_argument("box: requires a < b");
    NodeId s = tape.scale(tape.sigmoid(xp), b - a);
    return tape.add(s, tape.constant(Tensor::scalar(a)));
}

NodeId sum_power(Tape& tape, NodeId u, NodeId c, double budget) {
    if (budget <= 0.0) throw std::invalid_argument("sum_power: budget must be positive");
    NodeId e = tape.exp(u);
    NodeId frac = tape.div(e, tape.reduce_sum(e));
    return tape.mul(tape.scale(frac, budget), tape.sigmoid(c));
}

namespace {

NodeId normalize_power(Tape& tape, NodeId wr, NodeId wi, NodeId target) {
    NodeId wp = tape.complex_pair(wr, wi);
    NodeId power = tape.reduce_sum(tape.abs2(wp));
    if (tape.value(power).scalar_real() <= 0.0)
        throw std::domain_error("frobenius_power: all-zero precursor has no direction");
    return tape.mul(wp, tape.sqrt(tape.div(target, power)));
}

}  // namespace

NodeId frobenius_power(Tape& tape, NodeId wr, NodeId wi, double p_max) {
    if (p_max <= 0.0) throw std::invalid_argument("frobenius_power: p_max must be positive");
    return normalize_power(tape, wr, wi, tape.constant(Tensor::scalar(p_max)));
}

NodeId frobenius_power_scaled(Tape& tape, NodeId wr, NodeId wi, NodeId c, double p_max) {
    if (p_max <= 0.0) throw std::invalid_argument("frobenius_power: p_max must be positive");
    return normalize_power(tape, wr, wi, tape.scale(tape.sigmoid(c), p_max));
}

LinEqFactorization lin_eq_factorize(const Tensor& A, const Tensor& b) {
    if (A.rank() == 2 && A.rows() >= A.cols())
        throw std::invalid_argument("lin_eq_factorize: requires M < K (strictly fewer equations "
                                    "than unknowns)");
    return factorize(A, b);
}

NodeId lin_eq_apply(Tape& tape, NodeId xp, const LinEqFactorization& fac) {
    return tape.add(tape.matmul(tape.constant(fac.F), xp), tape.constant(fac.x0));
}

NodeId lin_ineq_apply(Tape& tape, NodeId xp, NodeId mup, const LinEqFactorization& fac) {
    NodeId slack = tape.exp(mup);
    NodeId particular = tape.matmul(tape.constant(fac.pinv),
                                    tape.sub(tape.constant(fac.b), slack));
    if (fac.F.cols() == 0) return particular;
    return tape.add(tape.matmul(tape.constant(fac.F), xp), particular);
}

TransformSpec TransformSpec::complex_pair(std::vector<std::size_t> shape) {
    TransformSpec s;
    s.kind_ = TransformKind::ComplexPair;
    s.shape_ = std::move(shape);
    return s;
}

TransformSpec TransformSpec::unit_modulus(std::size_t n) {
    TransformSpec s;
    s.kind_ = TransformKind::UnitModulus;
    s.shape_ = {n};
    return s;
}

TransformSpec TransformSpec::box(std::vector<std::size_t> shape, double a, double b) {
    if (a >= b) throw std::invalid_argument("TransformSpec::box: requires a < b");
    TransformSpec s;
    s.kind_ = TransformKind::Box;
    s.shape_ = std::move(shape);
    s.lo_ = a;
    s.hi_ = b;
    return s;
}

TransformSpec TransformSpec::sum_power(std::size_t k, double budget) {
    if (budget <= 0.0) throw std::invalid_argument("TransformSpec::sum_power: budget > 0");
    TransformSpec s;
    s.kind_ = TransformKind::SumPower;
    s.shape_ = {k};
    s.budget_ = budget;
    return s;
}

TransformSpec TransformSpec::frobenius_power(std::size_t m, std::size_t k, double p_max,
                                             bool with_scaler) {
    if (p_max <= 0.0) throw std::invalid_argument("TransformSpec::frobenius_power: p_max > 0");
    TransformSpec s;
    s.kind_ = TransformKind::FrobeniusPower;
    s.rows_ = m;
    s.cols_ = k;
    s.shape_ = {m, k};
    s.budget_ = p_max;
    s.with_scaler_ = with_scaler;
    return s;
}

TransformSpec TransformSpec::lin_eq(const Tensor& A, const Tensor& b) {
    TransformSpec s;
    s.kind_ = TransformKind::LinEq;
    s.fac_ = lin_eq_factorize(A, b);
    s.rows_ = A.rows();
    s.cols_ = A.cols();
    return s;
}

TransformSpec TransformSpec::lin_ineq(const Tensor& A, const Tensor& b) {
    if (A.rank() == 2 && A.rows() > A.cols())
        throw std::invalid_argument("TransformSpec::lin_ineq: more constraints than unknowns "
                                    "cannot be full row rank");
    TransformSpec s;
    s.kind_ = TransformKind::LinIneq;
    s.fac_ = factorize(A, b);
    s.rows_ = A.rows();
    s.cols_ = A.cols();
    return s;
}

std::vector<std::vector<std::size_t>> TransformSpec::leaf_shapes() const {
    switch (kind_) {
        case TransformKind::ComplexPair:
            return {shape_, shape_};
        case TransformKind::UnitModulus:
        case TransformKind::Box:
            return {shape_};
        case TransformKind::SumPower:
            return {shape_, {}};
        case TransformKind::FrobeniusPower:
            if (with_scaler_) return {shape_, shape_, {}};
            return {shape_, shape_};
        case TransformKind::LinEq:
            return {{cols_ - rows_}};
        case TransformKind::LinIneq:
            if (cols_ > rows_) return {{cols_ - rows_}, {rows_}};
            return {{rows_}};
    }
    return {};
}

NodeId TransformSpec::apply(Tape& tape, std::span<const NodeId> leaves) const {
    const auto expected = leaf_shapes();
    if (leaves.size() != expected.size())
        throw std::invalid_argument("TransformSpec::apply: expected " +
                                    std::to_string(expected.size()) + " leaves, got " +
                                    std::to_string(leaves.size()));
    switch (kind_) {
        case TransformKind::ComplexPair:
            return tape.complex_pair(leaves[0], leaves[1]);
        case TransformKind::UnitModulus:
            return tape.cis(leaves[0]);
        case TransformKind::Box:
            return tapeopt::transforms::box(tape, leaves[0], lo_, hi_);
        case TransformKind::SumPower:
            return tapeopt::transforms::sum_power(tape, leaves[0], leaves[1], budget_);
        case TransformKind::FrobeniusPower:
            if (with_scaler_)
                return frobenius_power_scaled(tape, leaves[0], leaves[1], leaves[2], budget_);
            return tapeopt::transforms::frobenius_power(tape, leaves[0], leaves[1], budget_);
        case TransformKind::LinEq:
            return lin_eq_apply(tape, leaves[0], fac_);
        case TransformKind::LinIneq:
            if (cols_ > rows_) return lin_ineq_apply(tape, leaves[0], leaves[1], fac_);
            return lin_ineq_apply(tape, NodeId{}, leaves[0], fac_);
    }
    throw std::logic_error("TransformSpec::apply: unknown kind");
}

Tensor TransformSpec::recover(std::span<const Tensor> leaf_values) const {
    Tape scratch;
    std::vector<NodeId> ids;
    ids.reserve(leaf_values.size());
    for (const Tensor& v : leaf_values) ids.push_back(scratch.constant(v));
    return scratch.value(apply(scratch, ids));
}

}  // namespace tapeopt::transforms
