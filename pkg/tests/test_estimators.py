import math

import numpy as np
import pytest
from scipy import stats

from mas_trigger.estimators import (CostSummary, EstimateWithCI, cost_ratio, j_ttc,
                                    mean_ci, normal_quantile, q_et_bessel,
                                    q_et_direct, rescale_delta)


def test_normal_quantile_against_scipy():
    for p in (1e-6, 1e-3, 0.02425, 0.1, 0.5, 0.9, 0.975, 0.9875, 0.995, 1 - 1e-6):
        assert normal_quantile(p) == pytest.approx(stats.norm.ppf(p), abs=1e-9)
    assert normal_quantile(0.9875) == pytest.approx(2.241402727604947, abs=1e-12)
    with pytest.raises(ValueError):
        normal_quantile(0.0)
    with pytest.raises(ValueError):
        normal_quantile(1.0)


def test_mean_ci_zero_variance():
    est = mean_ci([1.0, 1.0, 1.0], 0.9)
    assert est.mean == est.lo == est.hi == 1.0
    assert est.var == 0.0
    assert est.n == 3


def test_mean_ci_two_samples():
    # unbiased sample variance of (0, 2) is 2, so the half-width is the
    # two-sided 0.975 quantile itself: z * sqrt(2/2)
    est = mean_ci([0.0, 2.0], 0.975)
    assert est.mean == 1.0
    assert est.var == pytest.approx(2.0, rel=1e-15)
    z = normal_quantile(0.9875)
    assert est.hi - est.mean == pytest.approx(z, rel=1e-12)
    assert est.mean - est.lo == pytest.approx(z, rel=1e-12)


def test_mean_ci_requires_two_samples_and_valid_gamma():
    with pytest.raises(ValueError):
        mean_ci([1.0], 0.9)
    with pytest.raises(ValueError):
        mean_ci([1.0, 2.0], 1.0)
    with pytest.raises(ValueError):
        mean_ci([1.0, 2.0], 0.0)


def test_mean_ci_scale_equivariance_exact():
    rng = np.random.default_rng(8)
    samples = rng.standard_normal(257) + 3.0
    a = mean_ci(samples, 0.95)
    b = mean_ci(2.0 * samples, 0.95)
    assert b.mean == 2.0 * a.mean
    assert b.lo == 2.0 * a.lo
    assert b.hi == 2.0 * a.hi


def test_mean_ci_width_shrinks_like_sqrt_n():
    rng = np.random.default_rng(12)
    base = rng.standard_normal(40_000)
    w_small = mean_ci(base[:2500], 0.95).hi - mean_ci(base[:2500], 0.95).lo
    w_large = mean_ci(base, 0.95).hi - mean_ci(base, 0.95).lo
    assert w_small / w_large == pytest.approx(4.0, rel=0.1)


def test_mean_ci_coverage():
    rng = np.random.default_rng(99)
    gamma, mu = 0.9, 3.0
    covered = 0
    for _ in range(1000):
        est = mean_ci(mu + 2.0 * rng.standard_normal(100), gamma)
        covered += est.lo <= mu <= est.hi
    # binomial 3 sigma around 900 of 1000
    assert abs(covered - 900) <= 3 * math.sqrt(1000 * 0.9 * 0.1)


def test_skew_warning_flag():
    rng = np.random.default_rng(4)
    heavy = np.exp(3.0 * rng.standard_normal(20))
    assert mean_ci(heavy, 0.95).skew_warning
    flat = rng.standard_normal(10_000)
    assert not mean_ci(flat, 0.95).skew_warning


def test_j_ttc():
    assert j_ttc(6, 1.0) == 3.0
    assert j_ttc(123.0, 0.0) == 0.0
    assert j_ttc(20, 2.0) == 2.0 * j_ttc(20, 1.0)
    with pytest.raises(ValueError):
        j_ttc(6, -0.5)


def test_q_et_bessel_inverse_scale_is_exact():
    # all samples equal to 2 N (N+2) / |E| must give exactly 1
    est1 = q_et_bessel([1.0, 1.0, 1.0], 1, 6, 0.95)  # 2*1*3/6 = 1
    assert est1.mean == 1.0 and est1.lo == 1.0 and est1.hi == 1.0
    est3 = q_et_bessel([5.0, 5.0], 3, 6, 0.95)  # 2*3*5/6 = 5
    assert est3.mean == 1.0
    with pytest.raises(ValueError):
        q_et_bessel([1.0, 2.0], 0, 6, 0.95)
    with pytest.raises(ValueError):
        q_et_bessel([], 2, 6, 0.95)


def test_q_et_bessel_chi_square_oracle():
    # on fixed-length intervals E[R(T)^4] = N(N+2)T^2, so the estimate
    # must reproduce |E| T^2 / 2 within 3 standard errors
    from mas_trigger.stochastic_core import make_stream
    from mas_trigger.triggering import sample_ttc_interval

    n, t_period, edge_count, runs = 2, 1.0, 2, 4000
    r4 = np.array([sample_ttc_interval(n, t_period, 1e-2, make_stream(61, k)).r4
                   for k in range(runs)])
    est = q_et_bessel(r4, n, edge_count, 0.95)
    target = edge_count * t_period ** 2 / 2.0
    scale = edge_count / (2.0 * n * (n + 2))
    se = scale * math.sqrt(r4.var(ddof=1) / runs)
    assert abs(est.mean - target) < 3.0 * se


def test_q_et_direct_constant_samples():
    est = q_et_direct([0.5, 0.5, 0.5], 6, 0.95)
    assert est.mean == 3.0 and est.lo == 3.0 and est.hi == 3.0
    with pytest.raises(ValueError):
        q_et_direct([], 6, 0.95)


def test_bessel_and_direct_agree_on_the_same_paths():
    from mas_trigger.stochastic_core import make_stream
    from mas_trigger.triggering import sample_exit

    for n in (2, 5):
        edge_count = n * (n - 1)
        samples = [sample_exit(n, 1.0, 1e-2, make_stream(62, k)) for k in range(2000)]
        r4 = [s.r4 for s in samples]
        q1 = [s.q1 for s in samples]
        bessel = q_et_bessel(r4, n, edge_count, 0.99)
        direct = q_et_direct(q1, edge_count, 0.99)
        gap = abs(bessel.mean - direct.mean)
        assert gap <= (bessel.hi - bessel.lo) / 2 + (direct.hi - direct.lo) / 2
        # the radius estimator is the variance-reduced one
        assert bessel.hi - bessel.lo < direct.hi - direct.lo


def _fixed_est(mean, var, n, gamma=0.975):
    z = normal_quantile(0.5 * (1 + gamma))
    half = z * math.sqrt(var / n)
    return EstimateWithCI(mean=mean, n=n, var=var, lo=mean - half, hi=mean + half,
                          gamma=gamma, skew=0.0, skew_warning=False)


def test_cost_ratio_identity():
    n = 4
    g2 = 0.25
    g1 = n * (n + 2) * g2 * g2
    ratio = cost_ratio(_fixed_est(g1, 0.0, 100), _fixed_est(g2, 0.0, 100), n, 0.975)
    assert ratio.ratio == 1.0
    assert ratio.lo == 1.0 and ratio.hi == 1.0
    assert ratio.joint_level == 0.975 ** 2


def test_cost_ratio_bounds_bracket_strictly():
    r = cost_ratio(_fixed_est(10.0, 4.0, 50), _fixed_est(0.5, 0.01, 50), 3, 0.95)
    assert r.lo < r.ratio < r.hi


def test_cost_ratio_rejects_nonpositive_time_bound():
    with pytest.raises(ValueError):
        cost_ratio(_fixed_est(10.0, 4.0, 50), _fixed_est(0.1, 25.0, 4), 3, 0.95)


def test_rescale_delta():
    base = CostSummary(q_et=0.3, e_t=0.7, var_t=0.11)
    assert rescale_delta(base, 1.0) == base
    scaled = rescale_delta(base, 2.0)
    assert scaled.q_et == 16.0 * base.q_et
    assert scaled.e_t == 4.0 * base.e_t
    assert scaled.var_t == 16.0 * base.var_t
    with pytest.raises(ValueError):
        rescale_delta(base, 0.0)


def test_ratio_unchanged_by_exact_rescale():
    # power-of-two threshold scaling commutes with every float operation
    # in the ratio, so the ratio is bit-identical
    rng = np.random.default_rng(3)
    r4 = np.abs(rng.standard_normal(500)) * 3.0
    t = np.abs(rng.standard_normal(500)) + 0.5
    n = 5
    base = cost_ratio(mean_ci(r4, 0.975), mean_ci(t, 0.975), n, 0.975)
    scaled = cost_ratio(mean_ci(16.0 * r4, 0.975), mean_ci(4.0 * t, 0.975), n, 0.975)
    assert scaled.ratio == base.ratio
    assert scaled.lo == base.lo
    assert scaled.hi == base.hi
