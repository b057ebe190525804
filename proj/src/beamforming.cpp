#include "tapeopt/beamforming.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "tapeopt/transforms.hpp"

namespace tapeopt::beamforming {

namespace {

constexpr double kLog2e = std::numbers::log2e;

void check_dims(const ChannelSet& cs) {
    const auto& d = cs.dims;
    if (cs.G.rank() != 2 || cs.G.rows() != d.irs_elements || cs.G.cols() != d.bs_antennas)
        throw std::invalid_argument("beamforming: G must be N x M");
    if (cs.Hr.rank() != 2 || cs.Hr.rows() != d.users || cs.Hr.cols() != d.irs_elements)
        throw std::invalid_argument("beamforming: Hr must be K x N");
    if (cs.sigma2 <= 0.0 || cs.p_max <= 0.0)
        throw std::invalid_argument("beamforming: sigma2 and p_max must be positive");
}

}  // namespace

Tensor effective_channel(const Tensor& G, const Tensor& Hr, const Tensor& theta) {
    const std::size_t n = G.rows(), m = G.cols(), k = Hr.rows();
    if (Hr.cols() != n || theta.rank() != 1 || theta.dim(0) != n)
        throw std::invalid_argument("effective_channel: inconsistent shapes");
    Tensor h = Tensor::zeros({k, m}, DType::Complex);
    for (std::size_t r = 0; r < k; ++r)
        for (std::size_t c = 0; c < m; ++c) {
            cdouble acc{0.0, 0.0};
            for (std::size_t i = 0; i < n; ++i) acc += Hr.at(r, i) * theta[i] * G.at(i, c);
            h.at(r, c) = acc;
        }
    return h;
}

double sinr(const Tensor& H, const Tensor& W, double sigma2, std::size_t k) {
    const std::size_t users = H.rows(), m = H.cols();
    if (W.rank() != 2 || W.rows() != m || W.cols() != users)
        throw std::invalid_argument("sinr: W must be M x K matching H");
    if (k >= users) throw std::out_of_range("sinr: user index out of range");
    double signal = 0.0, interference = 0.0;
    for (std::size_t i = 0; i < users; ++i) {
        cdouble acc{0.0, 0.0};
        for (std::size_t c = 0; c < m; ++c) acc += H.at(k, c) * W.at(c, i);
        const double p = std::norm(acc);
        if (i == k)
            signal = p;
        else
            interference += p;
    }
    return signal / (sigma2 + interference);
}

double sum_rate(const Tensor& H, const Tensor& W, double sigma2) {
    double r = 0.0;
    for (std::size_t k = 0; k < H.rows(); ++k) r += std::log1p(sinr(H, W, sigma2, k)) * kLog2e;
    return r;
}

LossGraph loss_graph(Tape& tape, const ChannelSet& channels, const BeamLeaves& leaves) {
    check_dims(channels);
    const auto& d = channels.dims;
    if (leaves.phi.shape() != std::vector<std::size_t>{d.irs_elements})
        throw std::invalid_argument("loss_graph: phi must be an N-vector");
    const std::vector<std::size_t> w_shape{d.bs_antennas, d.users};
    if (leaves.wr.shape() != w_shape || leaves.wi.shape() != w_shape)
        throw std::invalid_argument("loss_graph: wr/wi must be M x K");

    LossGraph g;
    g.phi = tape.leaf(leaves.phi, true);
    g.wr = tape.leaf(leaves.wr, true);
    g.wi = tape.leaf(leaves.wi, true);

    NodeId theta = transforms::unit_modulus(tape, g.phi);
    NodeId h = tape.matmul(tape.matmul(tape.constant(channels.Hr), tape.diag(theta)),
                           tape.constant(channels.G));
    NodeId w = transforms::frobenius_power(tape, g.wr, g.wi, channels.p_max);

    // |H_k w_i|^2 for all pairs; diagonal is signal, rest of the row is
    // interference.
    NodeId powers = tape.abs2(tape.matmul(h, w));
    NodeId signal = tape.diag_part(powers);
    NodeId interference = tape.sub(tape.reduce_sum(powers, {{1}}), signal);
    NodeId gamma = tape.div(signal,
                            tape.add(interference, tape.constant(Tensor::scalar(channels.sigma2))));
    g.loss = tape.scale(tape.reduce_sum(tape.log1p(gamma)), -kLog2e);
    return g;
}

SumRateProblem::SumRateProblem(ChannelSet channels) : channels_(std::move(channels)) {
    check_dims(channels_);
}

std::vector<std::vector<std::size_t>> SumRateProblem::leaf_shapes() const {
    const auto& d = channels_.dims;
    return {{d.irs_elements}, {d.bs_antennas, d.users}, {d.bs_antennas, d.users}};
}

optim::BuiltGraph SumRateProblem::build(Tape& tape, std::span<const Tensor> leaf_values) const {
    if (leaf_values.size() != 3)
        throw std::invalid_argument("SumRateProblem::build: expected phi, wr, wi");
    LossGraph g = loss_graph(tape, channels_,
                             {leaf_values[0], leaf_values[1], leaf_values[2]});
    return {g.loss, {g.phi, g.wr, g.wi}};
}

std::vector<Tensor> SumRateProblem::sample_init(Rng& rng) const {
    const auto& d = channels_.dims;
    std::vector<Tensor> init;
    init.push_back(rng.uniform_tensor({d.irs_elements}, 0.0, 2.0 * std::numbers::pi));
    init.push_back(rng.normal_tensor({d.bs_antennas, d.users}));
    init.push_back(rng.normal_tensor({d.bs_antennas, d.users}));
    return init;
}

Solution solution_from_leaves(const ChannelSet& channels, std::span<const Tensor> leaves,
                              optim::TrainTrace trace) {
    if (leaves.size() != 3)
        throw std::invalid_argument("solution_from_leaves: expected phi, wr, wi");
    const auto& d = channels.dims;
    const auto theta_spec = transforms::TransformSpec::unit_modulus(d.irs_elements);
    const auto w_spec = transforms::TransformSpec::frobenius_power(d.bs_antennas, d.users,
                                                                   channels.p_max);
    Solution s;
    s.theta = theta_spec.recover({{leaves[0]}});
    s.W = w_spec.recover({{leaves[1], leaves[2]}});
    s.sum_rate = sum_rate(effective_channel(channels.G, channels.Hr, s.theta), s.W,
                          channels.sigma2);
    s.trace = std::move(trace);
    return s;
}

Solution solve(const ChannelSet& channels, const SolveConfig& config) {
    SumRateProblem problem(channels);
    optim::TrainResult result = optim::multi_restart(problem, config.restarts, config.seed,
                                                     config.train, config.warm_start);
    return solution_from_leaves(channels, result.best_leaves, std::move(result.trace));
}

double oracle_k1_m1(const ChannelSet& channels) {
    if (channels.dims.users != 1 || channels.dims.bs_antennas != 1)
        throw std::invalid_argument("oracle_k1_m1: requires K = 1 and M = 1");
    check_dims(channels);
    double amp = 0.0;
    for (std::size_t n = 0; n < channels.dims.irs_elements; ++n)
        amp += std::abs(channels.Hr[n] * channels.G[n]);
    return std::log1p(channels.p_max * amp * amp / channels.sigma2) * kLog2e;
}

double oracle_grid(const ChannelSet& channels, std::size_t phase_grid_size) {
    const auto& d = channels.dims;
    if (d.users != 1) throw std::invalid_argument("oracle_grid: requires K = 1");
    if (d.irs_elements > 3)
        throw std::invalid_argument("oracle_grid: grid search over N > 3 elements is too large");
    if (phase_grid_size == 0) throw std::invalid_argument("oracle_grid: empty grid");
    check_dims(channels);

    const std::size_t n = d.irs_elements, m = d.bs_antennas;
    // Per-element channel rows c_n = hr_n * G_{n,*}; h(theta) = sum theta_n c_n.
    std::vector<cdouble> contrib(n * m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < m; ++c) contrib[i * m + c] = channels.Hr[i] * channels.G.at(i, c);

    std::vector<cdouble> grid(phase_grid_size);
    for (std::size_t g = 0; g < phase_grid_size; ++g) {
        const double phi = 2.0 * std::numbers::pi * static_cast<double>(g) /
                           static_cast<double>(phase_grid_size);
        grid[g] = cdouble{std::cos(phi), std::sin(phi)};
    }

    double best = 0.0;
    std::vector<std::size_t> pick(n, 0);
    std::vector<cdouble> h(m);
    while (true) {
        std::fill(h.begin(), h.end(), cdouble{0.0, 0.0});
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t c = 0; c < m; ++c) h[c] += grid[pick[i]] * contrib[i * m + c];
        double h2 = 0.0;
        for (const cdouble& z : h) h2 += std::norm(z);
        // MRT at full power is optimal for a single user.
        best = std::max(best, std::log1p(channels.p_max * h2 / channels.sigma2) * kLog2e);

        std::size_t axis = 0;
        while (axis < n && ++pick[axis] == phase_grid_size) pick[axis++] = 0;
        if (axis == n) break;
    }
    return best;
}

}  // namespace tapeopt::beamforming
