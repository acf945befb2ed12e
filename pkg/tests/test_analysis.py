import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from ldpdist.analysis import (
    MinLaplaceMethod,
    SimulationSpec,
    UnreachablePolicy,
    build_w_histograms,
    metric_report,
    min_laplace_expectation,
    mre,
    rmae,
    simulate_y1,
    simulate_y2,
    summarize,
)
from ldpdist.mechanisms import RngStream


def _pair(d01, d10):
    return np.array([[0, d01], [d10, 0]], dtype=float)


def test_rmae_examples():
    truth = _pair(1, 2)
    assert rmae(truth, truth) == 0
    assert rmae(truth, _pair(2, 2)) == pytest.approx(0.5)
    big = np.array([[0, 1, 3], [1, 0, 2], [3, 2, 0]], float)
    assert rmae(big, 2 * big) == pytest.approx(1.0, abs=1e-15)


def test_mre_examples():
    truth = _pair(2, 2)
    assert mre(truth, truth) == 0
    assert mre(_pair(1.5, 1.5), _pair(2, 2)) == pytest.approx(1 / 3)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 12), st.integers(0, 2**31))
def test_mre_permutation_invariant_and_metrics_nonnegative(n, seed):
    rng = np.random.default_rng(seed)
    truth = rng.integers(1, 7, (n, n)).astype(float)
    noisy = rng.integers(1, 7, (n, n)).astype(float)
    np.fill_diagonal(truth, 0)
    np.fill_diagonal(noisy, 0)
    off = ~np.eye(n, dtype=bool)
    shuffled = noisy.copy()
    shuffled[off] = rng.permutation(noisy[off])
    assert mre(truth, noisy) == pytest.approx(mre(truth, shuffled))
    assert rmae(truth, noisy) >= 0 and mre(truth, noisy) >= 0
    assert (rmae(truth, noisy) == 0) == np.array_equal(truth[off], noisy[off])


def test_unreachable_policies():
    truth = np.array([[0, 1, np.inf], [1, 0, np.inf], [np.inf, np.inf, 0]])
    noisy = np.array([[0, 1, 6], [1, 0, 6], [6, 6, 0]], float)
    capped = metric_report(truth, noisy, cap=6, policy="cap")
    assert capped.rmae == 0 and capped.pairs == 6
    excluded = metric_report(truth, noisy, cap=6, policy=UnreachablePolicy.EXCLUDE)
    assert excluded.rmae == 0 and excluded.pairs == 2
    # noisy inf (disconnected synthetic graph) is read as the cap
    est = noisy.copy()
    est[0, 1] = np.inf
    assert rmae(truth, est, cap=6) == pytest.approx(5 / 6)


def test_metric_errors():
    with pytest.raises(ValueError):
        rmae(np.zeros((2, 2)), np.zeros((2, 2)))
    with pytest.raises(ValueError):
        mre(np.zeros((2, 2)), np.ones((2, 2)))
    with pytest.raises(ValueError):
        rmae(np.zeros((2, 2)), np.zeros((3, 3)))


def test_uniform_histograms():
    h = build_w_histograms(SimulationSpec(n=10, t=4, T=6, repeats=1))
    assert h.W.support.tolist() == [4, 5, 6, 7, 8, 9, 10, 11]
    assert np.allclose(h.W.probs, 1 / 8)
    assert h.W2.support.tolist() == [4, 5, 6]
    assert h.W1.support.tolist() == [7, 8, 9, 10, 11]
    assert h.a_draws + h.m_draws == 8


def test_explicit_histograms():
    spec = SimulationSpec(n=11, t=3, T=6, repeats=1, a=(1, 1, 1), m=(2, 2, 2, 2, 2))
    h = build_w_histograms(spec)
    assert h.W2.support.tolist() == [3, 4, 5]
    assert np.allclose(h.W2.probs, 1 / 3)
    # m_{t-1} - a1 = 1, m_t - a2 - 1 = 0, m_{t+1} - a3 = 1
    assert h.counts == {3: 1, 4: 1, 5: 1, 7: 2, 8: 1, 9: 0, 10: 1, 11: 2}
    assert (h.a_draws, h.m_draws) == (3, 6)
    assert np.isclose(h.W.probs.sum(), 1.0)


def test_explicit_histogram_negative_count():
    spec = SimulationSpec(n=9, t=3, T=6, repeats=1, a=(1, 0, 1), m=(2, 0, 2, 2, 2))
    with pytest.raises(ValueError, match="negative"):
        build_w_histograms(spec)


def test_explicit_histogram_total_checked():
    spec = SimulationSpec(n=50, t=3, T=6, repeats=1, a=(1, 1, 1), m=(2, 2, 2, 2, 2))
    with pytest.raises(ValueError):
        build_w_histograms(spec)


def test_spec_validation():
    with pytest.raises(ValueError):
        SimulationSpec(t=5, T=6)
    with pytest.raises(ValueError):
        SimulationSpec(t=1, T=6)
    with pytest.raises(ValueError):
        SimulationSpec(a=(1, 1, 1))
    with pytest.raises(ValueError):
        SimulationSpec(a=(1, 1, 1), m=(1, 1))


def test_simulators_bounded_by_threshold():
    spec = SimulationSpec(n=500, repeats=300, eps=1.0)
    for s in (simulate_y1(spec, RngStream(1)), simulate_y1(spec, RngStream(1), clamp=False),
              simulate_y2(spec, RngStream(2))):
        assert s.max() <= spec.T
    y2 = simulate_y2(spec, RngStream(2))
    assert y2.min() >= 4 - (spec.T - 1)
    assert simulate_y1(spec, RngStream(1)).min() >= 1


def test_noiseless_limits():
    # W degenerate at t: a single candidate at distance t
    spec = SimulationSpec(n=5, t=3, T=6, eps=1e9, repeats=200, a=(3, 0, 0), m=(0, 3, 1, 0, 0))
    assert np.allclose(simulate_y1(spec, RngStream(3)), 3.0, atol=1e-6)
    assert np.all(simulate_y2(spec, RngStream(4)) == 3)
    uniform = SimulationSpec(n=200, t=4, T=6, repeats=200)
    assert np.all(simulate_y2(uniform, RngStream(5), p=0.0) == 4)


def test_y2_monotone_in_p():
    spec = SimulationSpec(n=300, repeats=2000)
    means = [simulate_y2(spec, RngStream(6), p=p).mean() for p in (0.0, 0.05, 0.2, 0.5, 0.9)]
    assert all(b <= a + 0.02 for a, b in zip(means, means[1:]))
    assert means[0] > means[-1]


def test_simulators_deterministic():
    spec = SimulationSpec(n=200, repeats=50)
    assert np.array_equal(simulate_y2(spec, RngStream(7)), simulate_y2(spec, RngStream(7)))
    assert np.array_equal(simulate_y1(spec, RngStream(7)), simulate_y1(spec, RngStream(7)))


def test_summarize():
    s = summarize([1.0, 2.0, 3.0])
    assert s["mean"] == 2.0 and s["std"] == 1.0
    assert s["p05"] == pytest.approx(1.1) and s["p95"] == pytest.approx(2.9)


def _quadrature_min_laplace(n, b):
    dist = stats.laplace(scale=b)

    def density(x):
        return x * n * dist.pdf(x) * dist.sf(x) ** (n - 1)

    lo, _ = integrate.quad(density, -np.inf, 0)
    hi, _ = integrate.quad(density, 0, np.inf)
    return lo + hi


@pytest.mark.parametrize("n", [1, 2, 3, 5, 10])
@pytest.mark.parametrize("b", [0.5, 1.0, 2.0])
def test_exact_series_matches_quadrature(n, b):
    exact = min_laplace_expectation(n, b).value
    assert exact == pytest.approx(_quadrature_min_laplace(n, b), abs=1e-8)


def test_exact_series_examples():
    assert min_laplace_expectation(1, 3.0).value == 0.0
    assert min_laplace_expectation(2, 1.0).value == pytest.approx(-0.75, abs=1e-15)
    assert min_laplace_expectation(2, 1.0, "closed_form").value == pytest.approx(math.log(1 / 6))
    assert math.log(1 / 6) == pytest.approx(-1.7918, abs=1e-4)


@pytest.mark.parametrize("n", [2, 3, 5, 10])
@pytest.mark.parametrize("b", [0.5, 1.0, 2.0])
def test_exact_series_matches_monte_carlo(n, b):
    exact = min_laplace_expectation(n, b)
    mc = min_laplace_expectation(n, b, MinLaplaceMethod.MONTE_CARLO, RngStream(100 + n))
    assert abs(mc.value - exact.value) < 3 * mc.stderr


def test_min_laplace_errors():
    with pytest.raises(ValueError):
        min_laplace_expectation(0)
    with pytest.raises(ValueError):
        min_laplace_expectation(2, 0.0)
    with pytest.raises(ValueError):
        min_laplace_expectation(1, 1.0, MinLaplaceMethod.PAPER_CLOSED_FORM)
    with pytest.raises(ValueError):
        min_laplace_expectation(2, 1.0, MinLaplaceMethod.MONTE_CARLO, draws=1000)
