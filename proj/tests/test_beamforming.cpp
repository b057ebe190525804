#include <doctest.h>

#include <cmath>
#include <numbers>

#include "tapeopt/beamforming.hpp"
#include "tapeopt/bench.hpp"
#include "tapeopt/grad_check.hpp"
#include "tapeopt/scenario_io.hpp"
#include "tapeopt/transforms.hpp"

using namespace tapeopt;
using namespace tapeopt::beamforming;

namespace {

ChannelSet random_channels(SystemDims dims, std::uint64_t seed) {
    channels::ScenarioConfig cfg;
    cfg.dims = dims;
    cfg.seed = seed;
    return channels::gen_channels(cfg);
}

// Eq.-style SINR through the quadratic form w^H H_k^H H_k w, evaluated with
// explicit loops; an independent route from the |H_k w|^2 implementation.
double sinr_quadratic_form(const Tensor& H, const Tensor& W, double sigma2, std::size_t k) {
    const std::size_t users = H.rows(), m = H.cols();
    std::vector<cdouble> outer(m * m);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) outer[a * m + b] = std::conj(H.at(k, a)) * H.at(k, b);
    auto quad = [&](std::size_t i) {
        cdouble acc{0.0, 0.0};
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = 0; b < m; ++b)
                acc += std::conj(W.at(a, i)) * outer[a * m + b] * W.at(b, i);
        return acc.real();
    };
    double interference = 0.0;
    for (std::size_t i = 0; i < users; ++i)
        if (i != k) interference += quad(i);
    return quad(k) / (sigma2 + interference);
}

}  // namespace

TEST_CASE("effective channel basics") {
    // Scalar system: hr = 2, g = 3, theta = j -> H = 6j.
    Tensor g = Tensor::from_complex({1, 1}, {cdouble{3, 0}});
    Tensor hr = Tensor::from_complex({1, 1}, {cdouble{2, 0}});
    Tensor theta = Tensor::from_complex({1}, {cdouble{0, 1}});
    CHECK(effective_channel(g, hr, theta)[0] == cdouble{0, 6});

    // All-ones phases collapse to Hr G.
    Rng rng(4);
    Tensor g2 = Tensor::zeros({3, 2}, DType::Complex);
    Tensor hr2 = Tensor::zeros({2, 3}, DType::Complex);
    for (std::size_t i = 0; i < g2.size(); ++i) g2[i] = rng.cnormal();
    for (std::size_t i = 0; i < hr2.size(); ++i) hr2[i] = rng.cnormal();
    Tensor ones = Tensor::zeros({3}, DType::Complex);
    for (std::size_t i = 0; i < 3; ++i) ones[i] = cdouble{1, 0};
    const Tensor h = effective_channel(g2, hr2, ones);
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t c = 0; c < 2; ++c) {
            cdouble acc{0, 0};
            for (std::size_t i = 0; i < 3; ++i) acc += hr2.at(r, i) * g2.at(i, c);
            CHECK(std::abs(h.at(r, c) - acc) < 1e-12);
        }
}

TEST_CASE("effective channel agrees with the tape route") {
    const ChannelSet cs = random_channels({3, 2, 4}, 11);
    Rng rng(5);
    Tensor theta = Tensor::zeros({4}, DType::Complex);
    Tensor phi = rng.uniform_tensor({4}, 0.0, 2.0 * std::numbers::pi);
    for (std::size_t i = 0; i < 4; ++i)
        theta[i] = cdouble{std::cos(phi[i].real()), std::sin(phi[i].real())};

    const Tensor direct = effective_channel(cs.G, cs.Hr, theta);

    Tape t;
    NodeId h = t.matmul(t.matmul(t.constant(cs.Hr), t.diag(t.constant(theta))),
                        t.constant(cs.G));
    const Tensor& on_tape = t.value(h);
    for (std::size_t i = 0; i < direct.size(); ++i)
        CHECK(std::abs(direct[i] - on_tape[i]) < 1e-12);
}

TEST_CASE("sinr single user and zero beam") {
    Tensor h = Tensor::from_complex({1, 1}, {cdouble{1, 0}});
    const double p = 4.0, sigma2 = 0.5;
    Tensor w = Tensor::from_complex({1, 1}, {cdouble{std::sqrt(p), 0}});
    CHECK(sinr(h, w, sigma2, 0) == doctest::Approx(p / sigma2).epsilon(1e-14));

    Tensor h2 = Tensor::from_complex({2, 2}, {cdouble{1, 0}, cdouble{0, 1}, cdouble{1, 1},
                                              cdouble{2, 0}});
    Tensor w2 = Tensor::zeros({2, 2}, DType::Complex);
    w2.at(0, 1) = cdouble{1, 0};
    CHECK(sinr(h2, w2, 1.0, 0) == 0.0);  // w_0 = 0
}

TEST_CASE("sinr matches the quadratic-form route on a random instance") {
    const ChannelSet cs = random_channels({3, 2, 4}, 21);
    Rng rng(6);
    Tensor w = Tensor::zeros({3, 2}, DType::Complex);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = rng.cnormal();
    Tensor theta = Tensor::zeros({4}, DType::Complex);
    for (std::size_t i = 0; i < 4; ++i) {
        const double a = rng.uniform(0.0, 2.0 * std::numbers::pi);
        theta[i] = cdouble{std::cos(a), std::sin(a)};
    }
    const Tensor h = effective_channel(cs.G, cs.Hr, theta);
    for (std::size_t k = 0; k < 2; ++k) {
        const double direct = sinr(h, w, cs.sigma2, k);
        const double quad = sinr_quadratic_form(h, w, cs.sigma2, k);
        CHECK(direct == doctest::Approx(quad).epsilon(1e-12));
    }
}

TEST_CASE("sum rate basics") {
    Tensor h = Tensor::from_complex({1, 1}, {cdouble{1, 0}});
    Tensor w = Tensor::from_complex({1, 1}, {cdouble{std::sqrt(3.0), 0}});
    CHECK(sum_rate(h, w, 1.0) == doctest::Approx(2.0).epsilon(1e-14));  // log2(4)

    Tensor w0 = Tensor::zeros({1, 1}, DType::Complex);
    CHECK(sum_rate(h, w0, 1.0) == 0.0);

    // Additivity over per-user terms.
    const ChannelSet cs = random_channels({2, 3, 4}, 31);
    Rng rng(7);
    Tensor theta = Tensor::zeros({4}, DType::Complex);
    for (std::size_t i = 0; i < 4; ++i) {
        const double a = rng.uniform(0.0, 2.0 * std::numbers::pi);
        theta[i] = cdouble{std::cos(a), std::sin(a)};
    }
    Tensor wk = Tensor::zeros({2, 3}, DType::Complex);
    for (std::size_t i = 0; i < wk.size(); ++i) wk[i] = rng.cnormal();
    const Tensor hk = effective_channel(cs.G, cs.Hr, theta);
    double total = 0.0;
    for (std::size_t k = 0; k < 3; ++k)
        total += std::log2(1.0 + sinr(hk, wk, cs.sigma2, k));
    CHECK(sum_rate(hk, wk, cs.sigma2) == doctest::Approx(total).epsilon(1e-12));
}

TEST_CASE("loss graph equals the negated recovered sum rate") {
    const ChannelSet cs = random_channels({2, 2, 4}, 41);
    SumRateProblem problem(cs);
    Rng rng(8);
    const std::vector<Tensor> leaves = problem.sample_init(rng);

    Tape t;
    optim::BuiltGraph g = problem.build(t, leaves);
    const double loss = t.value(g.loss).scalar_real();

    const Solution s = solution_from_leaves(cs, leaves);
    CHECK(-loss == doctest::Approx(s.sum_rate).epsilon(1e-12));
}

TEST_CASE("loss graph gradient passes the finite-difference check") {
    const ChannelSet cs = random_channels({2, 2, 4}, 51);
    SumRateProblem problem(cs);
    auto build = [&](Tape& t, std::span<const Tensor> p) {
        return problem.build(t, p).loss;
    };
    Rng rng(9);
    CHECK(grad_check(build, problem.sample_init(rng), 1e-5) < 1e-5);
}

TEST_CASE("loss is invariant to global scaling of the beam precursor") {
    const ChannelSet cs = random_channels({3, 2, 8}, 61);
    SumRateProblem problem(cs);
    Rng rng(10);
    std::vector<Tensor> leaves = problem.sample_init(rng);

    Tape t1;
    const double a = t1.value(problem.build(t1, leaves).loss).scalar_real();

    for (std::size_t i = 1; i < 3; ++i)
        for (std::size_t e = 0; e < leaves[i].size(); ++e) leaves[i][e] *= -4.2;
    Tape t2;
    const double b = t2.value(problem.build(t2, leaves).loss).scalar_real();
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("log base only rescales gradients") {
    const ChannelSet cs = random_channels({2, 2, 4}, 71);
    SumRateProblem problem(cs);
    Rng rng(11);
    const std::vector<Tensor> leaves = problem.sample_init(rng);

    // Independent pipeline with the rate in nats: gradients must be
    // proportional by exactly log2(e).
    auto nats_loss = [&](Tape& t, std::span<const Tensor> p) {
        NodeId phi = t.leaf(p[0], true);
        NodeId wr = t.leaf(p[1], true);
        NodeId wi = t.leaf(p[2], true);
        NodeId h = t.matmul(t.matmul(t.constant(cs.Hr), t.diag(t.cis(phi))), t.constant(cs.G));
        NodeId w = transforms::frobenius_power(t, wr, wi, cs.p_max);
        NodeId powers = t.abs2(t.matmul(h, w));
        NodeId signal = t.diag_part(powers);
        NodeId interference = t.sub(t.reduce_sum(powers, {{1}}), signal);
        NodeId gamma = t.div(signal, t.add(interference,
                                           t.constant(Tensor::scalar(cs.sigma2))));
        return t.scale(t.reduce_sum(t.log1p(gamma)), -1.0);
    };

    Tape tb;
    optim::BuiltGraph gb = problem.build(tb, leaves);
    Gradients bits = tb.backward(gb.loss);

    Tape tn;
    NodeId ln = nats_loss(tn, leaves);
    Gradients nats = tn.backward(ln);

    for (std::size_t p = 0; p < bits.size(); ++p)
        for (std::size_t e = 0; e < bits[p].size(); ++e)
            CHECK(bits[p][e].real() ==
                  doctest::Approx(std::numbers::log2e * nats[p][e].real()).epsilon(1e-12));
}

TEST_CASE("per-column beam phases do not change the rate") {
    const ChannelSet cs = random_channels({3, 2, 6}, 81);
    Rng rng(12);
    Tensor theta = Tensor::zeros({6}, DType::Complex);
    for (std::size_t i = 0; i < 6; ++i) {
        const double a = rng.uniform(0.0, 2.0 * std::numbers::pi);
        theta[i] = cdouble{std::cos(a), std::sin(a)};
    }
    Tensor w = Tensor::zeros({3, 2}, DType::Complex);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = rng.cnormal();
    const Tensor h = effective_channel(cs.G, cs.Hr, theta);
    const double before = sum_rate(h, w, cs.sigma2);

    for (std::size_t col = 0; col < 2; ++col) {
        const double beta = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const cdouble rot{std::cos(beta), std::sin(beta)};
        for (std::size_t r = 0; r < 3; ++r) w.at(r, col) *= rot;
    }
    CHECK(sum_rate(h, w, cs.sigma2) == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("solution feasibility and consistency") {
    const ChannelSet cs = random_channels({4, 2, 8}, 91);
    SolveConfig cfg;
    cfg.seed = 7;
    const Solution s = solve(cs, cfg);

    for (std::size_t i = 0; i < s.theta.size(); ++i)
        CHECK(std::abs(std::abs(s.theta[i]) - 1.0) < 1e-12);
    double power = 0.0;
    for (std::size_t i = 0; i < s.W.size(); ++i) power += std::norm(s.W[i]);
    CHECK(std::abs(power - cs.p_max) < 1e-9 * cs.p_max);

    // From-scratch evaluation of the recovered solution.
    const Tensor h = effective_channel(cs.G, cs.Hr, s.theta);
    double rate = 0.0;
    for (std::size_t k = 0; k < 2; ++k)
        rate += std::log2(1.0 + sinr_quadratic_form(h, s.W, cs.sigma2, k));
    CHECK(s.sum_rate == doctest::Approx(rate).epsilon(1e-10));
}

TEST_CASE("oracle closed form") {
    // hr = [1, j], g = [1, 1]^T, p/sigma2 = 1: |h| = 2, R* = log2(5).
    ChannelSet cs;
    cs.dims = {1, 1, 2};
    cs.G = Tensor::from_complex({2, 1}, {cdouble{1, 0}, cdouble{1, 0}});
    cs.Hr = Tensor::from_complex({1, 2}, {cdouble{1, 0}, cdouble{0, 1}});
    cs.sigma2 = 1.0;
    cs.p_max = 1.0;
    CHECK(oracle_k1_m1(cs) == doctest::Approx(std::log2(5.0)).epsilon(1e-14));

    // N = 1: the phase cannot matter.
    ChannelSet c1;
    c1.dims = {1, 1, 1};
    c1.G = Tensor::from_complex({1, 1}, {cdouble{0.4, -0.3}});
    c1.Hr = Tensor::from_complex({1, 1}, {cdouble{-1.0, 2.0}});
    c1.sigma2 = 2.0;
    c1.p_max = 5.0;
    const double amp = std::abs(c1.Hr[0] * c1.G[0]);
    CHECK(oracle_k1_m1(c1) ==
          doctest::Approx(std::log2(1.0 + 5.0 * amp * amp / 2.0)).epsilon(1e-14));

    CHECK_THROWS_AS(oracle_k1_m1(random_channels({2, 2, 4}, 1)), std::invalid_argument);
}

TEST_CASE("all-positive channels are already aligned") {
    ChannelSet cs;
    cs.dims = {1, 1, 3};
    cs.G = Tensor::from_complex({3, 1}, {cdouble{1, 0}, cdouble{0.5, 0}, cdouble{2, 0}});
    cs.Hr = Tensor::from_complex({1, 3}, {cdouble{0.2, 0}, cdouble{1, 0}, cdouble{0.7, 0}});
    cs.sigma2 = 1.0;
    cs.p_max = 1.0;

    Tensor ones = Tensor::zeros({3}, DType::Complex);
    for (std::size_t i = 0; i < 3; ++i) ones[i] = cdouble{1, 0};
    const Tensor h = effective_channel(cs.G, cs.Hr, ones);
    Tensor w = Tensor::from_complex({1, 1}, {cdouble{1, 0}});  // full power, M = 1
    CHECK(sum_rate(h, w, cs.sigma2) == doctest::Approx(oracle_k1_m1(cs)).epsilon(1e-12));
}

TEST_CASE("grid oracle") {
    const ChannelSet c1 = random_channels({1, 1, 1}, 101);
    CHECK(oracle_grid(c1, 16) == doctest::Approx(oracle_k1_m1(c1)).epsilon(1e-12));

    const ChannelSet c2 = random_channels({1, 1, 2}, 102);
    const double analytic = oracle_k1_m1(c2);
    const double grid = oracle_grid(c2, 256);
    CHECK(grid <= analytic * (1 + 1e-12));
    // Quantization bound: every phase is within pi/256 of the optimum.
    double amp = 0.0;
    for (std::size_t n = 0; n < 2; ++n) amp += std::abs(c2.Hr[n] * c2.G[n]);
    const double cosd = std::cos(std::numbers::pi / 256.0);
    const double floor_rate =
        std::log2(1.0 + c2.p_max * amp * amp * cosd * cosd / c2.sigma2);
    CHECK(grid >= floor_rate);

    // Finer grids search supersets.
    const double g64 = oracle_grid(c2, 64);
    const double g128 = oracle_grid(c2, 128);
    CHECK(g64 <= g128);
    CHECK(g128 <= oracle_grid(c2, 256));

    CHECK_THROWS_AS(oracle_grid(random_channels({1, 1, 4}, 103), 8), std::invalid_argument);
    CHECK_THROWS_AS(oracle_grid(random_channels({2, 2, 2}, 104), 8), std::invalid_argument);
}

TEST_CASE("solve approaches the analytic oracle on small instances") {
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const ChannelSet cs = random_channels({1, 1, 8}, 200 + seed);
        SolveConfig cfg;
        cfg.seed = seed;
        const Solution s = solve(cs, cfg);
        if (s.sum_rate >= 0.99 * oracle_k1_m1(cs)) ++hits;
    }
    CHECK(hits >= 4);
}

TEST_CASE("solve matches the brute-force grid on two elements") {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const ChannelSet cs = random_channels({1, 1, 2}, 300 + seed);
        SolveConfig cfg;
        cfg.seed = seed;
        const Solution s = solve(cs, cfg);
        CHECK(std::abs(s.sum_rate - oracle_grid(cs, 256)) < 1e-3);
    }
}

TEST_CASE("more restarts never hurt") {
    const ChannelSet cs = random_channels({2, 2, 8}, 111);
    SolveConfig one;
    one.seed = 13;
    one.restarts = 1;
    SolveConfig four = one;
    four.restarts = 4;
    CHECK(solve(cs, four).sum_rate >= solve(cs, one).sum_rate - 1e-12);
}

TEST_CASE("warm start from the previous solution") {
    const ChannelSet cs = random_channels({2, 2, 8}, 121);
    SolveConfig cfg;
    cfg.seed = 31;
    const Solution first = solve(cs, cfg);

    SumRateProblem problem(cs);
    optim::TrainResult base = optim::multi_restart(problem, 1, cfg.seed, cfg.train);
    SolveConfig warm = cfg;
    warm.warm_start = &base.best_leaves;
    const Solution s = solve(cs, warm);
    CHECK(s.sum_rate >= first.sum_rate - 1e-9);
}
