#pragma once

#include "tapeopt/channels.hpp"
#include "tapeopt/optim.hpp"
#include "tapeopt/tape.hpp"

namespace tapeopt::beamforming {

// H = Hr * diag(theta) * G, the K x M channel seen through the surface.
Tensor effective_channel(const Tensor& G, const Tensor& Hr, const Tensor& theta);

// SINR of user k (0-based row of H): |H_k w_k|^2 / (sigma2 + sum_{i!=k} |H_k w_i|^2).
double sinr(const Tensor& H, const Tensor& W, double sigma2, std::size_t k);

// Sum rate in bits: sum_k log2(1 + gamma_k).
double sum_rate(const Tensor& H, const Tensor& W, double sigma2);

// Trainable leaves: phi (N), and the power-unconstrained real/imaginary parts
// of W (M x K each) - exactly N + 2MK real scalars.
struct BeamLeaves {
    Tensor phi;
    Tensor wr;
    Tensor wi;
};

// Builds loss = -R on the tape: cis(phi) -> effective channel -> power
// normalization of W -> SINRs -> sum rate. Returns the loss node and the
// three leaf nodes.
struct LossGraph {
    NodeId loss;
    NodeId phi;
    NodeId wr;
    NodeId wi;
};
LossGraph loss_graph(Tape& tape, const ChannelSet& channels, const BeamLeaves& leaves);

// The joint beamforming instance as a trainable problem. Random
// initialization: phi ~ U[0, 2pi), W' entries ~ N(0,1).
class SumRateProblem : public optim::Problem {
public:
    explicit SumRateProblem(ChannelSet channels);

    std::vector<std::vector<std::size_t>> leaf_shapes() const override;
    optim::BuiltGraph build(Tape& tape, std::span<const Tensor> leaf_values) const override;
    std::vector<Tensor> sample_init(Rng& rng) const override;

    const ChannelSet& channels() const { return channels_; }

private:
    ChannelSet channels_;
};

struct SolveConfig {
    optim::TrainConfig train;
    int restarts = 1;
    std::uint64_t seed = 1;
    const std::vector<Tensor>* warm_start = nullptr;
};

struct Solution {
    Tensor theta;     // complex N-vector, |theta_i| = 1
    Tensor W;         // complex M x K, total power p_max
    double sum_rate;  // bits, recomputed from (theta, W)
    optim::TrainTrace trace;
};

// Multi-restart training of the instance; the returned rate is always
// recomputed from the recovered feasible (theta, W), never read off the tape.
Solution solve(const ChannelSet& channels, const SolveConfig& config);

// Recovers the feasible (theta, W) from trained leaf values {phi, wr, wi}
// and recomputes the rate from scratch.
Solution solution_from_leaves(const ChannelSet& channels, std::span<const Tensor> leaves,
                              optim::TrainTrace trace = {});

// Closed form for K = 1, M = 1: aligning every phase gives
// |h| = sum_n |hr_n g_n|, and full-power transmission is optimal, so
// R* = log2(1 + p_max (sum_n |hr_n g_n|)^2 / sigma2).
double oracle_k1_m1(const ChannelSet& channels);

// Exhaustive search over quantized phases (grid^N combinations) with MRT
// beamforming at full power; K = 1 and N <= 3 only.
double oracle_grid(const ChannelSet& channels, std::size_t phase_grid_size);

}  // namespace tapeopt::beamforming
