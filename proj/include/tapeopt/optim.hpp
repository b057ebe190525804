#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tapeopt/rng.hpp"
#include "tapeopt/tape.hpp"

namespace tapeopt::optim {

// One problem instance: declares its trainable leaves, builds the loss graph
// for given leaf values, and samples random initializations.
struct BuiltGraph {
    NodeId loss;
    std::vector<NodeId> leaves;  // trainable, in declared order
};

class Problem {
public:
    virtual ~Problem() = default;
    virtual std::vector<std::vector<std::size_t>> leaf_shapes() const = 0;
    virtual BuiltGraph build(Tape& tape, std::span<const Tensor> leaf_values) const = 0;
    virtual std::vector<Tensor> sample_init(Rng& rng) const = 0;
};

struct AdamConfig {
    double lr = 0.1;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Standard Adam with bias correction. Moment tensors mirror the leaf shapes.
class AdamState {
public:
    explicit AdamState(AdamConfig cfg = {}) : cfg_(cfg) {}

    void step(std::span<Tensor> leaves, std::span<const Tensor> grads);

    long step_count() const { return t_; }
    const AdamConfig& config() const { return cfg_; }
    const std::vector<Tensor>& first_moments() const { return m_; }
    const std::vector<Tensor>& second_moments() const { return v_; }

private:
    AdamConfig cfg_;
    std::vector<Tensor> m_, v_;
    long t_ = 0;
};

// x <- x - lr * g.
void sgd_step(double lr, std::span<Tensor> leaves, std::span<const Tensor> grads);

// Patience stopping: fires when the running best loss has seen no strict
// improvement (beyond a small relative tolerance) for `patience` consecutive
// iterations, or at the hard iteration cap.
struct StopRule {
    int patience = 25;
    int max_iters = 5000;
    double rel_tol = 1e-9;

    enum class Verdict { Continue, Stop };
    Verdict observe(double loss);

    double best_loss() const { return best_; }
    int stall_count() const { return stall_; }
    int iterations() const { return t_; }
    const std::string& stop_reason() const { return reason_; }

private:
    double best_ = 0.0;
    bool has_best_ = false;
    int stall_ = 0;
    int t_ = 0;
    std::string reason_;
};

struct TrainTrace {
    std::vector<double> losses;  // one entry per iteration
    int iterations_run = 0;
    std::string stop_reason;
    double best_loss = 0.0;
    int best_iteration = 0;  // 1-based index into losses
};

enum class OptimizerKind { Adam, Sgd };

struct TrainConfig {
    OptimizerKind optimizer = OptimizerKind::Adam;
    double lr = 0.1;
    int patience = 25;
    int max_iters = 5000;
};

struct TrainResult {
    std::vector<Tensor> best_leaves;  // values achieving the minimum loss seen
    TrainTrace trace;
};

// Trains one instance from the given initialization. Returns the best-seen
// iterate, never the last one. A non-finite loss aborts the run; the trace up
// to that point is kept and stop_reason is "non_finite_loss".
TrainResult train(const Problem& problem, std::vector<Tensor> init, const TrainConfig& config);

// k independent runs from fresh random initializations (run seeds derived
// from `seed`), plus the warm start as run 0 when given. Returns the run with
// the lowest best loss; ties break toward the earlier run.
TrainResult multi_restart(const Problem& problem, int k, std::uint64_t seed,
                          const TrainConfig& config,
                          const std::vector<Tensor>* warm_start = nullptr);

}  // namespace tapeopt::optim
