import numpy as np
import pytest

import tapeopt


def test_gen_channels_shapes_and_determinism():
    cs = tapeopt.gen_channels(m=4, k=2, n=8, seed=3)
    assert cs.G.shape == (8, 4)
    assert cs.Hr.shape == (2, 8)
    assert cs.G.dtype == np.complex128
    assert cs.sigma2 > 0 and cs.p_max > 0
    again = tapeopt.gen_channels(m=4, k=2, n=8, seed=3)
    np.testing.assert_array_equal(cs.G, again.G)
    np.testing.assert_array_equal(cs.Hr, again.Hr)


def test_effective_channel_matches_numpy():
    cs = tapeopt.gen_channels(m=3, k=2, n=5, seed=7)
    rng = np.random.default_rng(0)
    theta = np.exp(1j * rng.uniform(0, 2 * np.pi, size=5))
    h = tapeopt.effective_channel(cs.G, cs.Hr, theta)
    expected = cs.Hr @ np.diag(theta) @ cs.G
    np.testing.assert_allclose(h, expected, rtol=1e-12, atol=1e-30)


def test_sum_rate_matches_numpy():
    cs = tapeopt.gen_channels(m=3, k=2, n=4, seed=9)
    rng = np.random.default_rng(1)
    theta = np.exp(1j * rng.uniform(0, 2 * np.pi, size=4))
    w = rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2))
    h = cs.Hr @ np.diag(theta) @ cs.G

    s = np.abs(h @ w) ** 2
    rates = 0.0
    for k in range(2):
        interference = s[k].sum() - s[k, k]
        rates += np.log2(1 + s[k, k] / (cs.sigma2 + interference))
    assert tapeopt.sum_rate(h, w, cs.sigma2) == pytest.approx(rates, rel=1e-12)


def test_solve_returns_feasible_solution():
    cs = tapeopt.gen_channels(m=2, k=2, n=4, seed=5)
    sol = tapeopt.solve(cs, seed=11)
    np.testing.assert_allclose(np.abs(sol.theta), 1.0, atol=1e-12)
    assert np.sum(np.abs(sol.W) ** 2) == pytest.approx(cs.p_max, rel=1e-9)
    assert sol.sum_rate > 0
    assert sol.iterations == len(sol.losses)
    assert sol.stop_reason in ("patience", "max_iters")

    again = tapeopt.solve(cs, seed=11)
    assert again.sum_rate == sol.sum_rate


def test_solve_near_oracle_and_above_baseline():
    cs = tapeopt.gen_channels(m=1, k=1, n=8, seed=21)
    sol = tapeopt.solve(cs, seed=2)
    assert sol.sum_rate >= 0.99 * tapeopt.oracle_k1_m1(cs)

    cs2 = tapeopt.gen_channels(m=4, k=2, n=16, seed=22)
    sol2 = tapeopt.solve(cs2, seed=3)
    assert sol2.sum_rate > tapeopt.baseline_random_mrt(cs2, samples=8, seed=4)


def test_transforms_feasibility():
    rng = np.random.default_rng(2)
    theta = tapeopt.unit_modulus(rng.normal(size=16))
    np.testing.assert_allclose(np.abs(theta), 1.0, atol=1e-14)

    x = tapeopt.box(rng.normal(size=8), -1.0, 2.0)
    assert np.all(x > -1.0) and np.all(x < 2.0)

    p = tapeopt.sum_power(rng.normal(size=5), 0.3, budget=4.0)
    assert np.all(p > 0) and p.sum() <= 4.0 + 1e-12

    w = tapeopt.frobenius_power(rng.normal(size=(4, 2)), rng.normal(size=(4, 2)), p_max=3.0)
    assert np.sum(np.abs(w) ** 2) == pytest.approx(3.0, rel=1e-12)

    A = rng.normal(size=(2, 5))
    b = rng.normal(size=2)
    F, x0 = tapeopt.lin_eq_factorize(A, b)
    assert F.shape == (5, 3)
    np.testing.assert_allclose(A @ F, 0.0, atol=1e-12)
    np.testing.assert_allclose(A @ x0, b, atol=1e-10)


def test_scenario_round_trip(tmp_path):
    cs = tapeopt.gen_channels(m=2, k=2, n=3, seed=33)
    path = str(tmp_path / "scenario.json")
    tapeopt.save_scenario(path, cs, seed=33)
    loaded, seed = tapeopt.load_scenario(path)
    assert seed == 33
    np.testing.assert_array_equal(loaded.G, cs.G)
    np.testing.assert_array_equal(loaded.Hr, cs.Hr)
    assert loaded.sigma2 == cs.sigma2 and loaded.p_max == cs.p_max


def test_custom_channels_and_oracles():
    G = np.array([[1.0 + 0j], [1.0 + 0j]])  # N=2, M=1
    Hr = np.array([[1.0 + 0j, 1j]])  # K=1
    cs = tapeopt.ChannelSet(G=G, Hr=Hr, sigma2=1.0, p_max=1.0)
    assert tapeopt.oracle_k1_m1(cs) == pytest.approx(np.log2(5.0), rel=1e-14)
    assert tapeopt.oracle_grid(cs, 64) <= tapeopt.oracle_k1_m1(cs) + 1e-12
