#include "tapeopt/optim.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace tapeopt::optim {

namespace {

void check_grads(std::span<Tensor> leaves, std::span<const Tensor> grads) {
    if (leaves.size() != grads.size())
        throw std::invalid_argument("optimizer step: leaf/gradient count mismatch");
    for (std::size_t i = 0; i < leaves.size(); ++i) {
        if (!leaves[i].same_shape(grads[i]))
            throw std::invalid_argument("optimizer step: gradient shape mismatch at leaf " +
                                        std::to_string(i));
        if (!grads[i].all_finite())
            throw std::runtime_error("optimizer step: non-finite gradient at leaf " +
                                     std::to_string(i));
    }
}

}  // namespace

void AdamState::step(std::span<Tensor> leaves, std::span<const Tensor> grads) {
    check_grads(leaves, grads);
    if (m_.empty()) {
        for (const Tensor& g : grads) {
            m_.push_back(Tensor::zeros(g.shape(), DType::Real));
            v_.push_back(Tensor::zeros(g.shape(), DType::Real));
        }
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < leaves.size(); ++i) {
        for (std::size_t e = 0; e < leaves[i].size(); ++e) {
            const double g = grads[i][e].real();
            const double m = cfg_.beta1 * m_[i][e].real() + (1.0 - cfg_.beta1) * g;
            const double v = cfg_.beta2 * v_[i][e].real() + (1.0 - cfg_.beta2) * g * g;
            m_[i][e] = cdouble{m, 0.0};
            v_[i][e] = cdouble{v, 0.0};
            const double update = cfg_.lr * (m / bc1) / (std::sqrt(v / bc2) + cfg_.eps);
            leaves[i][e] = cdouble{leaves[i][e].real() - update, 0.0};
        }
    }
}

void sgd_step(double lr, std::span<Tensor> leaves, std::span<const Tensor> grads) {
    check_grads(leaves, grads);
    for (std::size_t i = 0; i < leaves.size(); ++i)
        for (std::size_t e = 0; e < leaves[i].size(); ++e)
            leaves[i][e] = cdouble{leaves[i][e].real() - lr * grads[i][e].real(), 0.0};
}

StopRule::Verdict StopRule::observe(double loss) {
    if (!std::isfinite(loss)) throw std::invalid_argument("StopRule::observe: loss not finite");
    ++t_;
    if (has_best_ && loss < best_ - rel_tol * std::max(1.0, std::abs(best_))) {
        best_ = loss;
        stall_ = 0;
    } else {
        // The first observation only sets the baseline; nothing decreased yet.
        if (!has_best_ || loss < best_) best_ = loss;
        ++stall_;
    }
    has_best_ = true;
    if (stall_ >= patience) {
        reason_ = "patience";
        return Verdict::Stop;
    }
    if (t_ >= max_iters) {
        reason_ = "max_iters";
        return Verdict::Stop;
    }
    return Verdict::Continue;
}

TrainResult train(const Problem& problem, std::vector<Tensor> init, const TrainConfig& config) {
    const auto shapes = problem.leaf_shapes();
    if (init.size() != shapes.size())
        throw std::invalid_argument("train: initialization has wrong leaf count");
    for (std::size_t i = 0; i < shapes.size(); ++i)
        if (init[i].shape() != shapes[i])
            throw std::invalid_argument("train: initialization shape mismatch at leaf " +
                                        std::to_string(i));

    StopRule rule;
    rule.patience = config.patience;
    rule.max_iters = config.max_iters;
    AdamState adam({.lr = config.lr});

    std::vector<Tensor> values = std::move(init);
    TrainResult result;
    result.trace.best_loss = std::numeric_limits<double>::infinity();

    while (true) {
        Tape tape;
        BuiltGraph graph = problem.build(tape, values);
        const double loss = tape.value(graph.loss).scalar_real();

        if (!std::isfinite(loss)) {
            result.trace.stop_reason = "non_finite_loss";
            break;
        }
        result.trace.losses.push_back(loss);
        if (loss < result.trace.best_loss) {
            result.trace.best_loss = loss;
            result.trace.best_iteration = static_cast<int>(result.trace.losses.size());
            result.best_leaves = values;
        }
        if (rule.observe(loss) == StopRule::Verdict::Stop) {
            result.trace.stop_reason = rule.stop_reason();
            break;
        }

        Gradients grads = tape.backward(graph.loss);
        std::vector<Tensor> g;
        g.reserve(graph.leaves.size());
        for (NodeId id : graph.leaves) g.push_back(grads.at(id));
        if (config.optimizer == OptimizerKind::Adam)
            adam.step(values, g);
        else
            sgd_step(config.lr, values, g);
    }
    result.trace.iterations_run = static_cast<int>(result.trace.losses.size());
    if (result.best_leaves.empty()) result.best_leaves = std::move(values);  // nothing finite
    return result;
}

TrainResult multi_restart(const Problem& problem, int k, std::uint64_t seed,
                          const TrainConfig& config, const std::vector<Tensor>* warm_start) {
    if (k < 1) throw std::invalid_argument("multi_restart: k must be >= 1");

    TrainResult best;
    bool have = false;
    auto consider = [&](TrainResult r) {
        if (!have || r.trace.best_loss < best.trace.best_loss) {
            best = std::move(r);
            have = true;
        }
    };

    if (warm_start != nullptr) consider(train(problem, *warm_start, config));
    for (int run = 0; run < k; ++run) {
        Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(run)));
        consider(train(problem, problem.sample_init(rng), config));
    }
    return best;
}

}  // namespace tapeopt::optim
