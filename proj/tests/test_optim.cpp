#include <doctest.h>

#include <cmath>
#include <limits>

#include "tapeopt/optim.hpp"

using namespace tapeopt;
using namespace tapeopt::optim;

namespace {

// sum (x - c)^2 with analytic optimum 0 at x = c.
class Quadratic : public Problem {
public:
    explicit Quadratic(Tensor target) : target_(std::move(target)) {}

    std::vector<std::vector<std::size_t>> leaf_shapes() const override {
        return {target_.shape()};
    }

    BuiltGraph build(Tape& t, std::span<const Tensor> values) const override {
        NodeId x = t.leaf(values[0], true);
        NodeId d = t.sub(x, t.constant(target_));
        return {t.reduce_sum(t.mul(d, d)), {x}};
    }

    std::vector<Tensor> sample_init(Rng& rng) const override {
        return {rng.normal_tensor(target_.shape())};
    }

private:
    Tensor target_;
};

class ConstantLoss : public Problem {
public:
    std::vector<std::vector<std::size_t>> leaf_shapes() const override { return {{2}}; }

    BuiltGraph build(Tape& t, std::span<const Tensor> values) const override {
        NodeId x = t.leaf(values[0], true);
        return {t.reduce_sum(t.scale(x, 0.0)), {x}};
    }

    std::vector<Tensor> sample_init(Rng& rng) const override {
        return {rng.normal_tensor({2})};
    }
};

// log1p(x) goes NaN below -1.
class BlowUp : public Problem {
public:
    std::vector<std::vector<std::size_t>> leaf_shapes() const override { return {{1}}; }

    BuiltGraph build(Tape& t, std::span<const Tensor> values) const override {
        NodeId x = t.leaf(values[0], true);
        return {t.reduce_sum(t.log1p(x)), {x}};
    }

    std::vector<Tensor> sample_init(Rng&) const override {
        return {Tensor::from_real({1}, {-2.0})};
    }
};

}  // namespace

TEST_CASE("adam first step has magnitude close to lr") {
    AdamState adam({.lr = 0.1});
    std::vector<Tensor> leaves{Tensor::scalar(1.0)};
    std::vector<Tensor> grads{Tensor::scalar(10.0)};
    adam.step(leaves, grads);
    CHECK(leaves[0][0].real() == doctest::Approx(0.9).epsilon(1e-8));

    AdamState adam2({.lr = 0.1});
    std::vector<Tensor> leaves2{Tensor::scalar(0.0)};
    std::vector<Tensor> grads2{Tensor::scalar(-1e-3)};
    adam2.step(leaves2, grads2);
    CHECK(leaves2[0][0].real() == doctest::Approx(0.1).epsilon(1e-4));
}

TEST_CASE("adam first-step magnitude is scale invariant") {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const double g = (rng.uniform() < 0.5 ? -1.0 : 1.0) *
                         std::pow(10.0, rng.uniform(-3.9, 4.0));
        AdamState adam({.lr = 0.1});
        std::vector<Tensor> leaves{Tensor::scalar(0.0)};
        std::vector<Tensor> grads{Tensor::scalar(g)};
        adam.step(leaves, grads);
        const double delta = std::abs(leaves[0][0].real());
        CHECK(delta >= 0.9 * 0.1);
        CHECK(delta <= 0.1 * (1 + 1e-12));
    }
}

TEST_CASE("adam leaves parameters alone on zero gradients") {
    AdamState adam({.lr = 0.1});
    std::vector<Tensor> leaves{Tensor::from_real({3}, {1.0, -2.0, 0.5})};
    std::vector<Tensor> grads{Tensor::zeros({3})};
    for (int i = 0; i < 10; ++i) adam.step(leaves, grads);
    CHECK(leaves[0][0].real() == 1.0);
    CHECK(leaves[0][1].real() == -2.0);
    CHECK(leaves[0][2].real() == 0.5);
}

TEST_CASE("non-finite gradients raise with the leaf identity") {
    AdamState adam;
    std::vector<Tensor> leaves{Tensor::scalar(1.0), Tensor::scalar(2.0)};
    std::vector<Tensor> grads{Tensor::scalar(0.0),
                              Tensor::scalar(std::numeric_limits<double>::quiet_NaN())};
    CHECK_THROWS_WITH_AS(adam.step(leaves, grads), "optimizer step: non-finite gradient at leaf 1",
                         std::runtime_error);
}

TEST_CASE("sgd step") {
    std::vector<Tensor> leaves{Tensor::scalar(1.0)};
    std::vector<Tensor> grads{Tensor::scalar(2.0)};
    sgd_step(0.1, leaves, grads);
    CHECK(leaves[0][0].real() == doctest::Approx(0.8).epsilon(1e-15));

    sgd_step(0.0, leaves, grads);
    CHECK(leaves[0][0].real() == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("one sgd_step equals the hand-derived gradient descent step") {
    // L = 1/2 sum (x - c)^2, so x' = x - lr (x - c), exactly.
    const Tensor c = Tensor::from_real({3}, {1.0, -2.0, 0.25});
    const Tensor x0 = Tensor::from_real({3}, {0.3, 0.7, -1.4});
    const double lr = 0.37;

    Tape t;
    NodeId x = t.leaf(x0, true);
    NodeId d = t.sub(x, t.constant(c));
    NodeId loss = t.scale(t.reduce_sum(t.mul(d, d)), 0.5);
    Gradients g = t.backward(loss);

    std::vector<Tensor> leaves{x0};
    std::vector<Tensor> grads{g.at(x)};
    sgd_step(lr, leaves, grads);

    for (std::size_t i = 0; i < 3; ++i) {
        const double manual = x0[i].real() - lr * (x0[i].real() - c[i].real());
        CHECK(std::abs(leaves[0][i].real() - manual) < 1e-12);
    }
}

TEST_CASE("stop rule counts stalled iterations") {
    SUBCASE("decreasing prefix then flat stops at prefix + patience") {
        StopRule rule;
        int t = 0;
        StopRule::Verdict v = StopRule::Verdict::Continue;
        for (double loss : {5.0, 4.0, 3.0}) {
            ++t;
            v = rule.observe(loss);
            CHECK(v == StopRule::Verdict::Continue);
        }
        while (v == StopRule::Verdict::Continue) {
            ++t;
            v = rule.observe(3.0);
        }
        CHECK(t == 28);
        CHECK(rule.stop_reason() == "patience");
    }

    SUBCASE("flat from the start stops after exactly patience iterations") {
        StopRule rule;
        int t = 0;
        while (rule.observe(3.0) == StopRule::Verdict::Continue) ++t;
        CHECK(t + 1 == 25);
    }

    SUBCASE("improvement at stall 24 resets the counter") {
        StopRule rule;
        rule.observe(10.0);
        for (int i = 0; i < 23; ++i) CHECK(rule.observe(10.0) == StopRule::Verdict::Continue);
        CHECK(rule.stall_count() == 24);
        CHECK(rule.observe(9.0) == StopRule::Verdict::Continue);
        CHECK(rule.stall_count() == 0);
    }

    SUBCASE("strictly decreasing losses run to the iteration cap") {
        StopRule rule;
        rule.max_iters = 200;
        double loss = 100.0;
        int t = 0;
        while (true) {
            ++t;
            loss -= 0.5;
            if (rule.observe(loss) == StopRule::Verdict::Stop) break;
        }
        CHECK(t == 200);
        CHECK(rule.stop_reason() == "max_iters");
    }
}

TEST_CASE("train reaches the optimum of a convex quadratic") {
    Quadratic problem(Tensor::from_real({3}, {1.0, -0.5, 2.0}));
    TrainConfig cfg;  // adam, lr 0.1
    cfg.patience = 100;
    TrainResult r = multi_restart(problem, 1, 7, cfg);
    CHECK(r.trace.best_loss < 1e-6);

    // Reported loss is the min of the trace, and the returned leaves
    // reproduce it exactly.
    double min_loss = std::numeric_limits<double>::infinity();
    for (double l : r.trace.losses) min_loss = std::min(min_loss, l);
    CHECK(r.trace.best_loss == min_loss);

    Tape t;
    BuiltGraph g = problem.build(t, r.best_leaves);
    CHECK(t.value(g.loss).scalar_real() == r.trace.best_loss);
}

TEST_CASE("flat loss from the start runs exactly patience iterations") {
    ConstantLoss problem;
    TrainConfig cfg;
    TrainResult r = multi_restart(problem, 1, 3, cfg);
    CHECK(r.trace.iterations_run == 25);
    CHECK(r.trace.stop_reason == "patience");
}

TEST_CASE("non-finite loss aborts with the trace so far") {
    BlowUp problem;
    TrainConfig cfg;
    TrainResult r = multi_restart(problem, 1, 3, cfg);
    CHECK(r.trace.stop_reason == "non_finite_loss");
    CHECK(r.trace.iterations_run == 0);
}

TEST_CASE("multi_restart with k = 1 equals a single train") {
    Quadratic problem(Tensor::from_real({2}, {0.4, -1.0}));
    TrainConfig cfg;
    TrainResult a = multi_restart(problem, 1, 42, cfg);

    Rng rng(Rng::derive(42, 0));
    TrainResult b = train(problem, problem.sample_init(rng), cfg);
    CHECK(a.trace.best_loss == b.trace.best_loss);
    CHECK(a.trace.iterations_run == b.trace.iterations_run);
}

TEST_CASE("best-of-k is nonincreasing for nested seed sequences") {
    Quadratic problem(Tensor::from_real({2}, {3.0, 3.0}));
    TrainConfig cfg;
    cfg.max_iters = 60;  // stop short of the optimum so runs differ
    double prev = std::numeric_limits<double>::infinity();
    for (int k : {1, 2, 4}) {
        TrainResult r = multi_restart(problem, k, 11, cfg);
        CHECK(r.trace.best_loss <= prev);
        prev = r.trace.best_loss;
    }
}

TEST_CASE("warm start at the optimum is never beaten") {
    const Tensor target = Tensor::from_real({2}, {1.5, -2.5});
    Quadratic problem(target);
    TrainConfig cfg;
    std::vector<Tensor> warm{target};
    TrainResult r = multi_restart(problem, 2, 5, cfg, &warm);
    CHECK(r.trace.best_loss == 0.0);
}

TEST_CASE("training is deterministic for a fixed seed and config") {
    Quadratic problem(Tensor::from_real({3}, {0.1, 0.2, 0.3}));
    TrainConfig cfg;
    TrainResult a = multi_restart(problem, 3, 17, cfg);
    TrainResult b = multi_restart(problem, 3, 17, cfg);
    REQUIRE(a.trace.losses.size() == b.trace.losses.size());
    for (std::size_t i = 0; i < a.trace.losses.size(); ++i)
        CHECK(a.trace.losses[i] == b.trace.losses[i]);
    for (std::size_t i = 0; i < a.best_leaves[0].size(); ++i)
        CHECK(a.best_leaves[0][i].real() == b.best_leaves[0][i].real());
}
