"""Classical measure-and-prepare benchmarks against independent oracles.

The closed-form Poisson-averaged bound is checked against a brute-force
series built from scipy's Poisson pmf; the attack-strategy bounds are
checked through their ordering and limit properties.
"""

import numpy as np
import pytest
from scipy import stats

from afcmem.bounds import (
    massar_popescu,
    poisson_conditional_bound,
    quantumness_verdict,
    threshold_bound,
    transmitted_constrained_bound,
)


def _series_bound(mu, n_terms=100):
    n = np.arange(1, n_terms + 1)
    p = stats.poisson.pmf(n, mu)
    return float((p * (n + 1) / (n + 2)).sum() / (1.0 - stats.poisson.pmf(0, mu)))


def test_massar_popescu_values():
    assert massar_popescu(1) == pytest.approx(2.0 / 3.0, abs=1e-15)
    assert massar_popescu(2) == pytest.approx(3.0 / 4.0, abs=1e-15)
    assert massar_popescu(100) == pytest.approx(101.0 / 102.0, abs=1e-15)
    with pytest.raises(ValueError):
        massar_popescu(0)


def test_closed_form_matches_series_oracle():
    for mu in np.geomspace(1e-3, 20.0, 60):
        assert abs(poisson_conditional_bound(float(mu)) - _series_bound(mu)) < 1e-10


def test_closed_form_frozen_values():
    assert poisson_conditional_bound(1.0) == pytest.approx(0.7090116466, abs=1e-9)
    assert abs(poisson_conditional_bound(1.0) - 0.7090) < 1e-4
    assert abs(poisson_conditional_bound(1e-3) - 2.0 / 3.0) < 1e-3
    assert 0.88 < poisson_conditional_bound(8.2) < 0.95


def test_closed_form_limits_and_monotonicity():
    mus = np.geomspace(1e-6, 50.0, 300)
    vals = [poisson_conditional_bound(float(m)) for m in mus]
    assert all(2.0 / 3.0 <= v < 1.0 for v in vals)
    assert all(b > a for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        poisson_conditional_bound(0.0)
    with pytest.raises(ValueError):
        threshold_bound(700.0, 0.5)  # photon-number table would overflow


def test_threshold_equals_plain_when_all_light_measured():
    for mu in (0.8, 1.4, 3.6, 8.2):
        res = threshold_bound(mu, 1.0)
        assert res.bound == pytest.approx(poisson_conditional_bound(mu), abs=1e-14)
        assert not res.degenerate


def test_threshold_beats_plain_at_benchmark_efficiency():
    res = threshold_bound(1.4, 0.0385)
    assert res.bound > poisson_conditional_bound(1.4)
    assert res.params.n_min >= 1
    assert 0.0 <= res.params.gamma <= 1.0


def test_threshold_low_mu_limit():
    # with only the n = 1 outcome surviving the threshold, the bound
    # collapses to the single-copy value; the deviation scales like
    # mu / eta_M, so the benchmark uses a moderate measurement efficiency
    assert abs(threshold_bound(1e-3, 0.1).bound - 2.0 / 3.0) < 1e-3


def test_threshold_monotone_in_measurement_efficiency():
    for mu in (0.5, 1.4, 8.2):
        etas = np.linspace(0.01, 1.0, 25)
        vals = [threshold_bound(mu, float(e)).bound for e in etas]
        assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))


def test_threshold_exceeds_plain_everywhere():
    rng = np.random.default_rng(19)
    for _ in range(40):
        mu = float(rng.uniform(0.05, 12.0))
        eta = float(rng.uniform(0.01, 1.0))
        assert threshold_bound(mu, eta).bound >= poisson_conditional_bound(mu) - 1e-12


def test_matching_conventions_ordered():
    # linear matching hands the attacker less emitted light, so its
    # threshold sits at least as high
    for mu in (0.8, 1.4, 3.6):
        for eta in (0.0385, 0.3, 0.9):
            b_exp = threshold_bound(mu, eta, matching="exp").bound
            b_lin = threshold_bound(mu, eta, matching="linear").bound
            assert b_exp <= b_lin + 1e-12
    with pytest.raises(ValueError):
        threshold_bound(1.4, 0.0385, matching="quadratic")


def test_threshold_input_validation():
    with pytest.raises(ValueError):
        threshold_bound(-1.0, 0.5)
    with pytest.raises(ValueError):
        threshold_bound(1.0, 0.0)
    with pytest.raises(ValueError):
        threshold_bound(1.0, 1.5)


def test_transmitted_bound_between_fallback_and_threshold():
    for mu in (0.8, 1.4, 3.6, 8.2):
        res = transmitted_constrained_bound(mu)
        fallback = threshold_bound((1.0 - 0.296) * mu, min(0.0385 / (1.0 - 0.296), 1.0)).bound
        assert res.bound >= fallback - 1e-12
        assert res.bound <= threshold_bound(mu, 0.0385).bound + 1e-12
        assert res.bound >= 2.0 / 3.0


def test_transmitted_bound_deterministic():
    a = transmitted_constrained_bound(1.4, grid_points=30, refine_rounds=1)
    b = transmitted_constrained_bound(1.4, grid_points=30, refine_rounds=1)
    assert a.bound == b.bound
    assert a.params == b.params
    assert "grid 30^3" in a.description


def test_transmitted_strategy_parameters_physical():
    res = transmitted_constrained_bound(1.4)
    p = res.params
    assert 0.0 <= p.p <= 1.0
    assert 0.0 <= p.q <= 1.0
    assert 0.0 < p.delta <= 1.0
    assert 0.0 < p.eta_m1 <= 1.0
    assert 0.0 <= p.eta_m2 <= 1.0
    assert 0.0 <= p.eta_bs <= 1.0


def test_transmitted_refinement_never_hurts():
    coarse = transmitted_constrained_bound(1.4, grid_points=30, refine_rounds=0).bound
    refined = transmitted_constrained_bound(1.4, grid_points=30, refine_rounds=2).bound
    assert refined >= coarse - 1e-15


def test_verdicts():
    assert quantumness_verdict(0.855, 0.001, 0.8411) == "quantum"
    assert quantumness_verdict(0.795, 0.002, 0.8112) == "inconclusive"
    assert quantumness_verdict(0.5, 0.0, 2.0 / 3.0) == "inconclusive"
    # the margin requirement scales with k
    assert quantumness_verdict(0.85, 0.004, 0.841, k=1.0) == "quantum"
    assert quantumness_verdict(0.85, 0.004, 0.841, k=3.0) == "inconclusive"
