"""Samples one renewal interval per run: level-triggered exit or fixed period.

The level rule fires at the first grid time where any coordinate's
magnitude reaches the threshold.  Each sample carries the three
quantities the estimators consume: the exit time, the fourth power of
the state radius at detection, and the time integral of the first
coordinate squared.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .asymptotics import expected_exit_asymptote, variance_asymptote
from .stochastic_core import StreamExhausted, make_stream

STEP_CAP = 10**9
_MAX_BLOCK_ELEMENTS = 8_000_000


class StepCapExceeded(RuntimeError):
    """No trigger within STEP_CAP grid steps; configuration is suspect."""


@dataclass(frozen=True, slots=True)
class TriggerSample:
    """One renewal interval.

    t_exit: length of the interval, an integer multiple of the grid step.
    r4: squared-radius squared at the detection step (overshot grid state).
    q1: trapezoidal integral of the first coordinate squared over the grid.
    """

    t_exit: float
    r4: float
    q1: float


def _plan_blocks(n_agents: int, delta: float, h: float) -> tuple[int, int]:
    """Pick draw-block sizes from the expected exit-step count.

    Only efficiency depends on this; correctness never does, because the
    underlying stream is consumed sequentially and detection is replayed
    identically for any chunking.
    """
    scale = delta * delta / h
    if n_agents == 1:
        mean_steps = scale
        sd_steps = 0.82 * scale
    else:
        mean_steps = min(1.0, expected_exit_asymptote(n_agents, "refined")) * scale
        sd_steps = min(0.82, math.sqrt(variance_asymptote(n_agents))) * scale
    cap = max(64, _MAX_BLOCK_ELEMENTS // n_agents)
    first = int(math.ceil(mean_steps + 0.5 * sd_steps))
    cont = int(math.ceil(max(sd_steps, 0.125 * mean_steps)))
    return min(max(first, 64), cap), min(max(cont, 64), cap)


def _draw_rows(stream, want: int, cols: int) -> np.ndarray:
    # scripted streams bound how many full rows they can still serve
    avail = stream.rows_available(cols)
    rows = want if avail is None else min(want, avail)
    if rows <= 0:
        raise StreamExhausted("stream exhausted before the trigger fired")
    return stream.normals((rows, cols))


def _simulate_exit(n_agents: int, delta: float, h: float, stream) -> TriggerSample:
    sqrt_h = math.sqrt(h)
    first, cont = _plan_blocks(n_agents, delta, h)
    carry = np.zeros(n_agents)
    s_sum = 0.0  # running sum of x1^2 over grid points 1..k
    steps_done = 0
    block = first
    while True:
        z = _draw_rows(stream, block, n_agents)
        np.multiply(z, sqrt_h, out=z)
        np.cumsum(z, axis=0, out=z)
        z += carry
        hit_rows = (np.abs(z) >= delta).any(axis=1)
        if hit_rows.any():
            m = int(hit_rows.argmax())
            col = z[:m + 1, 0]
            s_sum += float(np.dot(col, col))
            f_last = float(z[m, 0]) ** 2
            # trapezoid with zero initial value: right sum minus half the last term
            q1 = h * (s_sum - 0.5 * f_last)
            r2 = float(np.dot(z[m], z[m]))
            steps = steps_done + m + 1
            return TriggerSample(t_exit=steps * h, r4=r2 * r2, q1=q1)
        col = z[:, 0]
        s_sum += float(np.dot(col, col))
        carry = z[-1].copy()
        steps_done += z.shape[0]
        if steps_done >= STEP_CAP:
            raise StepCapExceeded(
                f"no trigger within {STEP_CAP} steps "
                f"(n_agents={n_agents}, delta={delta}, h={h})"
            )
        block = cont


def _simulate_exit_bridge(n_agents: int, delta: float, h: float, stream) -> TriggerSample:
    """Level detection plus a bridge crossing test between grid points.

    For each step the probability that the path touched the threshold
    inside the step, given sub-threshold endpoints a and b, is
    exp(-2(delta-|a|)(delta-|b|)/h) per coordinate; a uniform draw per
    entry decides.  The exit is still declared at the grid point ending
    the step, so r4 may fall below delta^4 when only the bridge fired.
    Bias studies only; consumes extra (uniform) draws per block.
    """
    sqrt_h = math.sqrt(h)
    first, cont = _plan_blocks(n_agents, delta, h)
    carry = np.zeros(n_agents)
    s_sum = 0.0
    steps_done = 0
    block = first
    while True:
        z = _draw_rows(stream, block, n_agents)
        rows = z.shape[0]
        np.multiply(z, sqrt_h, out=z)
        np.cumsum(z, axis=0, out=z)
        z += carry
        prev = np.empty_like(z)
        prev[0] = carry
        prev[1:] = z[:-1]
        az = np.abs(z)
        ap = np.abs(prev)
        level = az >= delta
        interior = ~level & (ap < delta)
        p = np.zeros_like(z)
        gap = (delta - ap) * (delta - az)
        np.exp(-2.0 * gap / h, out=gap)
        p[interior] = gap[interior]
        u = stream.uniforms((rows, n_agents))
        hit_rows = (level | (u < p)).any(axis=1)
        if hit_rows.any():
            m = int(hit_rows.argmax())
            col = z[:m + 1, 0]
            s_sum += float(np.dot(col, col))
            f_last = float(z[m, 0]) ** 2
            q1 = h * (s_sum - 0.5 * f_last)
            r2 = float(np.dot(z[m], z[m]))
            steps = steps_done + m + 1
            return TriggerSample(t_exit=steps * h, r4=r2 * r2, q1=q1)
        col = z[:, 0]
        s_sum += float(np.dot(col, col))
        carry = z[-1].copy()
        steps_done += rows
        if steps_done >= STEP_CAP:
            raise StepCapExceeded(
                f"no trigger within {STEP_CAP} steps "
                f"(n_agents={n_agents}, delta={delta}, h={h}, bridge=True)"
            )
        block = cont


def sample_exit(n_agents: int, delta: float, h: float, s, *, bridge: bool = False) -> TriggerSample:
    """First time any coordinate magnitude reaches delta, on the step grid.

    All coordinates start at the origin and evolve by Euler-Maruyama.
    Detection uses the first grid point where the threshold is met; r4
    and q1 use that (slightly overshot) grid state.
    """
    if n_agents < 1:
        raise ValueError("need at least one agent")
    if delta <= 0:
        raise ValueError("threshold delta must be positive")
    if h <= 0:
        raise ValueError("step size h must be positive")
    if bridge:
        return _simulate_exit_bridge(n_agents, delta, h, s)
    return _simulate_exit(n_agents, delta, h, s)


def sample_ttc_interval(n_agents: int, t_period: float, h: float, s) -> TriggerSample:
    """Fixed-length interval of ceil(t_period/h) steps; t_exit is t_period.

    Serves as the Monte Carlo oracle for the closed-form periodic cost.
    """
    if n_agents < 1:
        raise ValueError("need at least one agent")
    if t_period <= 0:
        raise ValueError("t_period must be positive")
    if h <= 0:
        raise ValueError("step size h must be positive")
    # tolerate quotients a hair above an integer from the division itself
    total = max(1, math.ceil(t_period / h - 1e-9))
    sqrt_h = math.sqrt(h)
    cap = max(64, _MAX_BLOCK_ELEMENTS // n_agents)
    carry = np.zeros(n_agents)
    s_sum = 0.0
    done = 0
    while done < total:
        z = _draw_rows(stream=s, want=min(cap, total - done), cols=n_agents)
        np.multiply(z, sqrt_h, out=z)
        np.cumsum(z, axis=0, out=z)
        z += carry
        col = z[:, 0]
        s_sum += float(np.dot(col, col))
        carry = z[-1].copy()
        done += z.shape[0]
    f_last = float(carry[0]) ** 2
    q1 = h * (s_sum - 0.5 * f_last)
    r2 = float(np.dot(carry, carry))
    return TriggerSample(t_exit=float(t_period), r4=r2 * r2, q1=q1)


def _sample_one(n_agents, delta, h, stream, mode, t_period):
    if mode == "event":
        return _simulate_exit(n_agents, delta, h, stream)
    return sample_ttc_interval(n_agents, t_period, h, stream)


def _chunk_run(args) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n_agents, delta, h, master_seed, idx_start, count, mode, t_period = args
    t = np.empty(count)
    r4 = np.empty(count)
    q1 = np.empty(count)
    for k in range(count):
        sample = _sample_one(n_agents, delta, h, make_stream(master_seed, idx_start + k),
                             mode, t_period)
        t[k] = sample.t_exit
        r4[k] = sample.r4
        q1[k] = sample.q1
    return t, r4, q1


def run_batch(n_agents: int, delta: float, h: float, master_seed: int, n_runs: int,
              mode: str = "event", t_period: float | None = None,
              run_index_start: int = 0, workers: int = 1) -> list[TriggerSample]:
    """One sample per run index, ordered by run index.

    Sample k always comes from make_stream(master_seed, run_index_start + k),
    so the output is identical for any worker count or chunking.
    """
    if n_runs < 1:
        raise ValueError("n_runs must be at least 1")
    if mode not in ("event", "periodic"):
        raise ValueError(f"unknown mode {mode!r}; expected 'event' or 'periodic'")
    if mode == "periodic":
        if t_period is None or t_period <= 0:
            raise ValueError("periodic mode needs a positive t_period")
    if n_agents < 1:
        raise ValueError("need at least one agent")
    if delta <= 0:
        raise ValueError("threshold delta must be positive")
    if h <= 0:
        raise ValueError("step size h must be positive")

    if workers <= 1 or n_runs == 1:
        parts = [_chunk_run((n_agents, delta, h, master_seed, run_index_start,
                             n_runs, mode, t_period))]
    else:
        spans = []
        base, extra = divmod(n_runs, workers)
        start = run_index_start
        for w in range(workers):
            count = base + (1 if w < extra else 0)
            if count == 0:
                continue
            spans.append((n_agents, delta, h, master_seed, start, count, mode, t_period))
            start += count
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_chunk_run, spans))

    samples = []
    for t, r4, q1 in parts:
        samples.extend(TriggerSample(float(a), float(b), float(c))
                       for a, b, c in zip(t, r4, q1))
    return samples
