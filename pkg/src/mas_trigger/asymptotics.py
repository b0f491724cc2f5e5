"""Closed-form large-N behavior of the minimum exit time and its
extreme-value limit.

With N independent coordinates, the first threshold crossing is the
minimum of N i.i.d. exit times; rescaled as X = 2(ln N)^2 (T - a_N) it
converges to the law G with survival function exp(-e^r), the negative
of a standard Gumbel variable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .estimators import j_ttc

KAPPA = math.sqrt(2.0 / math.pi)
EULER_GAMMA = 0.5772156649015329


def _check_n(n) -> float:
    n = float(n)
    if n < 2:
        raise ValueError("agent count must be at least 2 (log singularity at 1)")
    return n


def centering_a_n(n) -> float:
    """Centering constant of the rescaled minimum exit time.

    a_N = 1/(2 ln N) - ln(kappa / sqrt(2 ln N)) / (2 (ln N)^2), with
    kappa = sqrt(2/pi).  Real-valued n is accepted so exact-log points
    like n = e^2 can be evaluated.
    """
    n = _check_n(n)
    ln = math.log(n)
    return 1.0 / (2.0 * ln) - math.log(KAPPA / math.sqrt(2.0 * ln)) / (2.0 * ln * ln)


def gumbel_survival(r: float) -> float:
    """P(G >= r) = exp(-exp(r))."""
    if r >= 700.0:  # exp(r) would overflow; the survival is zero anyway
        return 0.0
    return math.exp(-math.exp(r))


def gumbel_cdf(r: float) -> float:
    return 1.0 - gumbel_survival(r)


class GumbelMoments(NamedTuple):
    mean: float
    second_moment: float
    variance: float


def gumbel_moments() -> GumbelMoments:
    """Moments of G: mean -euler_gamma (negative-Gumbel orientation),
    variance pi^2/6."""
    mean = -EULER_GAMMA
    variance = math.pi * math.pi / 6.0
    return GumbelMoments(mean=mean, second_moment=variance + mean * mean,
                         variance=variance)


def expected_exit_asymptote(n, order: str = "refined") -> float:
    """Expected minimum exit time at threshold 1 for large N.

    leading: 1/(2 ln N).  refined: a_N + E[G]/(2 (ln N)^2), which keeps
    the first correction and tracks simulation much better for N <= 100.
    """
    n = _check_n(n)
    ln = math.log(n)
    if order == "leading":
        return 1.0 / (2.0 * ln)
    if order == "refined":
        return centering_a_n(n) - EULER_GAMMA / (2.0 * ln * ln)
    raise ValueError(f"unknown order {order!r}; expected 'leading' or 'refined'")


def variance_asymptote(n) -> float:
    """Variance of the minimum exit time: (pi^2/24) / (ln N)^4."""
    n = _check_n(n)
    ln = math.log(n)
    return (math.pi * math.pi / 24.0) / (ln * ln * ln * ln)


def cost_asymptote(n, edge_count: float) -> float:
    """Large-N event-triggered cost |E|/(4 ln N).

    Defined through the closed-form periodic cost at the leading
    expected exit time, so the algebraic identity with j_ttc is exact.
    """
    return j_ttc(edge_count, expected_exit_asymptote(n, "leading"))


def normalize_exit_samples(t_samples, n) -> np.ndarray:
    """Map exit times to the scale on which their law approaches G.

    The centering here is a_N - ln(2)/(2 (ln N)^2), not a_N itself.  The
    threshold is on |x|, so the small-time exit probability of one
    coordinate is 2 kappa sqrt(w) exp(-1/2w): both barriers contribute,
    doubling the one-sided constant that a_N is written with.  Centering
    with plain a_N leaves the limit shifted to G - ln 2 (empirically:
    sample means head for -gamma - ln 2 and the KS distance for 1/4).
    """
    n = _check_n(n)
    ln = math.log(n)
    a = centering_a_n(n) - math.log(2.0) / (2.0 * ln * ln)
    return 2.0 * ln * ln * (np.asarray(t_samples, dtype=np.float64) - a)


def ks_distance(samples, cdf) -> float:
    """Two-sided Kolmogorov-Smirnov distance of samples against a CDF."""
    xs = np.sort(np.asarray(samples, dtype=np.float64).ravel())
    n = xs.size
    if n == 0:
        raise ValueError("need at least one sample")
    f = np.array([cdf(v) for v in xs])
    grid = np.arange(1, n + 1) / n
    d_plus = float((grid - f).max())
    d_minus = float((f - (grid - 1.0 / n)).max())
    return max(d_plus, d_minus)


@dataclass(frozen=True, slots=True)
class AsymptoticReport:
    """Per-N bundle of the closed-form asymptotic quantities."""

    n_agents: float
    a_n: float
    e_t_leading: float
    e_t_refined: float
    var_t_asymptote: float
    cost_asymptote: float
    ks_stat: float | None = None


def asymptotic_report(n, edge_count: float, ks_stat: float | None = None) -> AsymptoticReport:
    return AsymptoticReport(
        n_agents=float(n),
        a_n=centering_a_n(n),
        e_t_leading=expected_exit_asymptote(n, "leading"),
        e_t_refined=expected_exit_asymptote(n, "refined"),
        var_t_asymptote=variance_asymptote(n),
        cost_asymptote=cost_asymptote(n, edge_count),
        ks_stat=ks_stat,
    )
