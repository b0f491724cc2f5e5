"""Deterministic per-run random streams and Brownian-motion stepping.

Every Monte Carlo run owns a counter-based stream keyed by
(master_seed, run_index), so results are reproducible bit-for-bit no
matter how runs are scheduled across workers, and distinct runs are
independent by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1


class StreamExhausted(RuntimeError):
    """A scripted stream ran out of prescribed draws."""


class RngStream:
    """Gaussian source for one run, backed by a Philox counter generator.

    The 128-bit Philox key packs master_seed into the high word and
    run_index into the low word; equal pairs replay the same sequence,
    distinct run indices never share a key.
    """

    def __init__(self, master_seed: int, run_index: int):
        if run_index < 0:
            raise ValueError("run_index must be nonnegative")
        self.master_seed = int(master_seed)
        self.run_index = int(run_index)
        key = ((self.master_seed & _MASK64) << 64) | (self.run_index & _MASK64)
        self._bitgen = np.random.Philox(key=key)
        self._gen = np.random.Generator(self._bitgen)

    def normals(self, shape) -> np.ndarray:
        """Standard-normal draws of the given shape, consumed sequentially."""
        return self._gen.standard_normal(shape)

    def uniforms(self, shape) -> np.ndarray:
        """Uniform(0,1) draws; advances the same underlying counter."""
        return self._gen.random(shape)

    def raw_words(self, count: int) -> np.ndarray:
        """Raw 64-bit generator words, for stream-separation diagnostics.

        Shares state with normals(), so calling this advances the stream.
        """
        return np.atleast_1d(self._bitgen.random_raw(count))

    def rows_available(self, cols: int):
        """Unlimited source: no row bound (None)."""
        return None


class ScriptedStream:
    """Stream stub that replays a fixed pool of raw standard-normal values.

    Used to inject prescribed increments into simulations.  Draws are
    served in order from a flat pool; asking for more than remains
    raises StreamExhausted.
    """

    def __init__(self, values):
        self._pool = np.asarray(values, dtype=np.float64).ravel()
        self._cursor = 0

    def normals(self, shape) -> np.ndarray:
        count = int(np.prod(shape, dtype=np.int64)) if shape != () else 1
        if self._cursor + count > self._pool.size:
            raise StreamExhausted(
                f"scripted stream exhausted: wanted {count} draws, "
                f"{self._pool.size - self._cursor} left"
            )
        out = self._pool[self._cursor:self._cursor + count]
        self._cursor += count
        if shape == ():
            return np.float64(out[0])
        return out.reshape(shape).copy()

    # Bridge diagnostics draw uniforms from the same pool; the script is
    # one flat sequence interpreted by whoever consumes it.
    uniforms = normals

    def rows_available(self, cols: int) -> int:
        return (self._pool.size - self._cursor) // int(cols)


def make_stream(master_seed: int, run_index: int) -> RngStream:
    """Stream for the given run; a pure function of its arguments."""
    return RngStream(master_seed, run_index)


@dataclass(frozen=True, eq=False)
class AgentState:
    """Agent states within one renewal interval.

    t is the elapsed time since the last trigger; x holds one coordinate
    per agent.  A renewal starts at t = 0 with x = 0 (reset to the
    consensus point, which is cost-irrelevant and fixed at the origin).
    """

    t: float
    x: np.ndarray


def initial_state(n_agents: int) -> AgentState:
    """Fresh renewal start: t = 0, all agents at the origin."""
    if n_agents < 1:
        raise ValueError("need at least one agent")
    return AgentState(t=0.0, x=np.zeros(n_agents))


def gaussian_increment(s, h: float, size: int | None = None):
    """One Normal(0, h) increment, or a vector of them when size is given."""
    if h <= 0:
        raise ValueError("step size h must be positive")
    draw = s.normals(() if size is None else (int(size),))
    return draw * math.sqrt(h)


def step_agents(state: AgentState, s, h: float) -> AgentState:
    """Advance every agent by an independent Normal(0, h) increment."""
    if h <= 0:
        raise ValueError("step size h must be positive")
    z = s.normals(state.x.shape)
    return AgentState(t=state.t + h, x=state.x + math.sqrt(h) * z)


def bessel_radius(state: AgentState) -> float:
    """Euclidean norm of the agent vector."""
    return float(np.linalg.norm(state.x))
