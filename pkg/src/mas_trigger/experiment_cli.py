"""End-to-end experiment driver and command-line interface.

Runs per-N Monte Carlo batches, assembles the estimators into one row
per agent count, locates the crossover where the periodic scheme starts
winning, validates the renewal reduction against a long multi-renewal
trajectory, and emits results as CSV.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, fields

import numpy as np

from .asymptotics import (asymptotic_report, expected_exit_asymptote, gumbel_cdf,
                          gumbel_moments, ks_distance, normalize_exit_samples,
                          variance_asymptote)
from .estimators import (EstimateWithCI, RatioWithCI, cost_ratio, j_ttc, mean_ci,
                         normal_quantile, q_et_bessel, q_et_direct)
from .graph_topology import (Graph, directed_edge_count, generate, is_connected,
                             load_edge_list)
from .stochastic_core import StreamExhausted, make_stream
from .triggering import StepCapExceeded, _plan_blocks, run_batch

QUICK_AGENTS = (2, 3, 5, 8, 10, 20, 40, 60, 80)
QUICK_RUNS_T = 2000
QUICK_RUNS_Q = 20000
PAPER_AGENTS = tuple(range(2, 11)) + (12, 15, 20, 25) + tuple(range(30, 81, 5))
PAPER_RUNS_T = 10000
PAPER_RUNS_Q = 250000

CSV_COLUMNS = ("n_agents", "e_t_mean", "e_t_lo", "e_t_hi",
               "q_bessel_mean", "q_bessel_lo", "q_bessel_hi",
               "j_ttc", "ratio", "ratio_lo", "ratio_hi",
               "e_t_theory_refined", "var_t", "var_t_theory")


@dataclass(frozen=True)
class ExperimentConfig:
    """Settings for one full experiment sweep.

    Run indices [0, runs_t) feed the exit-time estimate and
    [runs_t, runs_t + runs_q) the cost estimate, so the two sample sets
    are disjoint and their confidence statements multiply.
    """

    agent_counts: tuple
    delta: float = 1.0
    step_h: float = 1e-4
    runs_t: int = 10000
    runs_q: int = 250000
    gamma: float = 0.975
    master_seed: int = 0
    graph_kind: str = "complete"
    edge_list_path: str | None = None
    cross_check: bool = False
    workers: int = 1


@dataclass(frozen=True)
class ExperimentRow:
    """All per-N results: estimates, coupled periodic cost, ratio, theory."""

    n_agents: int
    e_t: EstimateWithCI
    q_bessel: EstimateWithCI
    q_direct: EstimateWithCI | None
    j_ttc_at_e_t: float
    ratio: RatioWithCI
    e_t_refined_theory: float
    var_t: float
    var_t_theory: float
    r4_raw: EstimateWithCI


@dataclass(frozen=True)
class Crossover:
    """Bracket for the agent count where the schemes swap rank.

    n_low: largest N whose ratio interval sits entirely below 1 (None if
    no such N).  n_high: smallest N from which every sampled interval
    sits entirely above 1.
    """

    n_low: int | None
    n_high: int


def _validate_config(cfg: ExperimentConfig) -> None:
    if not cfg.agent_counts:
        raise ValueError("agent_counts must not be empty")
    for n in cfg.agent_counts:
        if int(n) != n or n < 2:
            raise ValueError(f"agent counts must be integers >= 2, got {n!r}")
    if cfg.delta <= 0:
        raise ValueError("delta must be positive")
    if cfg.step_h <= 0:
        raise ValueError("step_h must be positive")
    if cfg.runs_t < 2 or cfg.runs_q < 2:
        raise ValueError("runs_t and runs_q must both be at least 2")
    if not 0.0 < cfg.gamma < 1.0:
        raise ValueError("gamma must lie strictly inside (0, 1)")
    if cfg.workers < 1:
        raise ValueError("workers must be at least 1")


def _graph_for(cfg: ExperimentConfig, n: int, loaded: Graph | None) -> Graph:
    if loaded is not None:
        if n != loaded.n_nodes:
            raise ValueError(
                f"edge list fixes the node count at {loaded.n_nodes}; "
                f"agent count {n} does not match")
        return loaded
    return generate(cfg.graph_kind, n)


def run_experiment(cfg: ExperimentConfig) -> list[ExperimentRow]:
    """One row per agent count, ordered by N, deterministic in the seed."""
    _validate_config(cfg)
    loaded = None
    if cfg.edge_list_path is not None:
        with open(cfg.edge_list_path, "r", encoding="utf-8") as fh:
            loaded = load_edge_list(fh.read())
    d2 = cfg.delta * cfg.delta
    d4 = d2 * d2
    rows = []
    for n in sorted(set(int(n) for n in cfg.agent_counts)):
        graph = _graph_for(cfg, n, loaded)
        if not is_connected(graph):
            raise ValueError("the experiment requires a connected graph")
        edge_count = directed_edge_count(graph)

        batch_t = run_batch(n, cfg.delta, cfg.step_h, cfg.master_seed, cfg.runs_t,
                            mode="event", run_index_start=0, workers=cfg.workers)
        t_arr = np.fromiter((s.t_exit for s in batch_t), np.float64, len(batch_t))
        e_t = mean_ci(t_arr, cfg.gamma)

        batch_q = run_batch(n, cfg.delta, cfg.step_h, cfg.master_seed, cfg.runs_q,
                            mode="event", run_index_start=cfg.runs_t,
                            workers=cfg.workers)
        r4_arr = np.fromiter((s.r4 for s in batch_q), np.float64, len(batch_q))
        r4_raw = mean_ci(r4_arr, cfg.gamma)
        q_bessel = q_et_bessel(r4_arr, n, edge_count, cfg.gamma)
        q_direct = None
        if cfg.cross_check:
            q1_arr = np.fromiter((s.q1 for s in batch_q), np.float64, len(batch_q))
            q_direct = q_et_direct(q1_arr, edge_count, cfg.gamma)

        rows.append(ExperimentRow(
            n_agents=n,
            e_t=e_t,
            q_bessel=q_bessel,
            q_direct=q_direct,
            j_ttc_at_e_t=j_ttc(edge_count, e_t.mean),
            ratio=cost_ratio(r4_raw, e_t, n, cfg.gamma),
            e_t_refined_theory=expected_exit_asymptote(n, "refined") * d2,
            var_t=e_t.var,
            var_t_theory=variance_asymptote(n) * d4,
            r4_raw=r4_raw,
        ))
    return rows


def find_crossover(rows: list[ExperimentRow]) -> Crossover | None:
    """Bracket the swap point from the per-N ratio intervals.

    Returns None when no suffix of sampled N has its interval entirely
    above 1 (no crossover inside the sampled range).
    """
    n_high = None
    for row in reversed(rows):
        if row.ratio.lo > 1.0:
            n_high = row.n_agents
        else:
            break
    if n_high is None:
        return None
    below = [row.n_agents for row in rows if row.ratio.hi < 1.0]
    return Crossover(n_low=max(below) if below else None, n_high=n_high)


def long_run_oracle(graph: Graph, scheme, horizon: float, h: float, stream) -> float:
    """Time-averaged consensus energy of one long multi-renewal trajectory.

    Simulates the full dynamics with reset-to-origin at every trigger
    (all agents reset when any one fires) and integrates x'Lx by the
    trapezoidal rule.  Independent of the renewal-based estimators; used
    to validate that reduction.  scheme is ("event", delta) or
    ("periodic", t_period).
    """
    kind, value = scheme
    if kind not in ("event", "periodic"):
        raise ValueError(f"unknown scheme {kind!r}; expected 'event' or 'periodic'")
    if value <= 0:
        raise ValueError("scheme parameter must be positive")
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    if h <= 0:
        raise ValueError("step size h must be positive")
    if not is_connected(graph):
        raise ValueError("the oracle requires a connected graph")

    n = graph.n_nodes
    lap = graph.laplacian()
    sqrt_h = math.sqrt(h)
    total = max(1, math.ceil(horizon / h - 1e-9))
    if kind == "event":
        first, cont = _plan_blocks(n, value, h)
        period = None
    else:
        period = max(1, math.ceil(value / h - 1e-9))
        first = cont = max(64, min(period, 8_000_000 // max(n, 1)))

    acc = 0.0
    prev_e = 0.0
    carry = np.zeros(n)
    steps = 0
    left_in_period = period
    block = first
    while steps < total:
        want = min(block, total - steps)
        if period is not None:
            want = min(want, left_in_period)
        z = stream.normals((want, n))
        np.multiply(z, sqrt_h, out=z)
        np.cumsum(z, axis=0, out=z)
        z += carry
        e_rows = ((z @ lap) * z).sum(axis=1)
        if kind == "event":
            hit_rows = (np.abs(z) >= value).any(axis=1)
            if hit_rows.any():
                m = int(hit_rows.argmax())
                acc += h * (0.5 * prev_e + float(e_rows[:m].sum()) + 0.5 * float(e_rows[m]))
                steps += m + 1
                carry = np.zeros(n)
                prev_e = 0.0
                block = first
                continue
        acc += h * (0.5 * prev_e + float(e_rows[:-1].sum()) + 0.5 * float(e_rows[-1]))
        steps += int(z.shape[0])
        carry = z[-1].copy()
        prev_e = float(e_rows[-1])
        block = cont
        if period is not None:
            left_in_period -= int(z.shape[0])
            if left_in_period <= 0:
                carry = np.zeros(n)
                prev_e = 0.0
                left_in_period = period
    return acc / (total * h)


def emit_csv(rows: list[ExperimentRow]) -> str:
    """Fixed-column CSV with 12 significant digits and newline endings."""
    out = [",".join(CSV_COLUMNS)]
    for row in rows:
        values = (row.e_t.mean, row.e_t.lo, row.e_t.hi,
                  row.q_bessel.mean, row.q_bessel.lo, row.q_bessel.hi,
                  row.j_ttc_at_e_t, row.ratio.ratio, row.ratio.lo, row.ratio.hi,
                  row.e_t_refined_theory, row.var_t, row.var_t_theory)
        out.append(",".join([str(row.n_agents)] + ["%.12g" % v for v in values]))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# command-line interface


def _parse_agents(text: str) -> tuple:
    try:
        counts = tuple(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise ValueError(f"could not parse agent counts from {text!r}") from None
    if not counts:
        raise ValueError("empty agent count list")
    return counts


def _parse_graph_spec(spec: str) -> Graph:
    if spec.startswith("edgelist:"):
        path = spec[len("edgelist:"):]
        with open(path, "r", encoding="utf-8") as fh:
            return load_edge_list(fh.read())
    kind, sep, count = spec.partition(":")
    if not sep:
        raise ValueError(f"graph spec {spec!r} needs the form kind:N or edgelist:PATH")
    try:
        n = int(count)
    except ValueError:
        raise ValueError(f"bad node count in graph spec {spec!r}") from None
    return generate(kind, n)


def _parse_scheme(spec: str) -> tuple:
    kind, sep, value = spec.partition(":")
    if not sep or kind not in ("event", "periodic"):
        raise ValueError(
            f"scheme {spec!r} must look like event:<delta> or periodic:<t_period>")
    try:
        parameter = float(value)
    except ValueError:
        raise ValueError(f"bad scheme parameter in {spec!r}") from None
    return kind, parameter


_CONFIG_KEYS = frozenset(f.name for f in fields(ExperimentConfig))


def _config_from_args(args) -> ExperimentConfig:
    kw = {}
    if args.config is not None:
        with open(args.config, "r", encoding="utf-8") as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise ValueError("config file must hold a JSON object")
        unknown = set(loaded) - _CONFIG_KEYS
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        kw.update(loaded)
    if args.quick:
        kw.update(agent_counts=QUICK_AGENTS, runs_t=QUICK_RUNS_T, runs_q=QUICK_RUNS_Q)
    if args.paper:
        kw.update(agent_counts=PAPER_AGENTS, runs_t=PAPER_RUNS_T, runs_q=PAPER_RUNS_Q)
    if args.agents is not None:
        kw["agent_counts"] = _parse_agents(args.agents)
    for flag, key in (("delta", "delta"), ("step", "step_h"), ("runs_t", "runs_t"),
                      ("runs_q", "runs_q"), ("gamma", "gamma"), ("seed", "master_seed"),
                      ("workers", "workers")):
        value = getattr(args, flag)
        if value is not None:
            kw[key] = value
    if args.graph is not None:
        if args.graph.startswith("edgelist:"):
            kw["edge_list_path"] = args.graph[len("edgelist:"):]
        else:
            kw["graph_kind"] = args.graph
    if args.cross_check:
        kw["cross_check"] = True
    if "agent_counts" in kw:
        kw["agent_counts"] = tuple(kw["agent_counts"])
    else:
        raise ValueError(
            "no agent counts given; use --agents, --quick, --paper, or --config")
    return ExperimentConfig(**kw)


def _write_out(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _report_cross_check(rows: list[ExperimentRow], gamma: float) -> None:
    """Compare the radial and direct cost estimates, one stderr line per row.

    The CSV column set is contractual, so this never touches stdout.  The
    gamma-level half-widths are stretched to the 99% level before summing;
    a gap beyond that sum is flagged, since both estimators target the same
    per-cycle cost.
    """
    stretch = normal_quantile(0.995) / normal_quantile(0.5 * (1.0 + gamma))
    for row in rows:
        b, d = row.q_bessel, row.q_direct
        gap = abs(b.mean - d.mean)
        limit = stretch * ((b.hi - b.mean) + (d.hi - d.mean))
        verdict = "ok" if gap <= limit else "MISMATCH"
        print("cross-check n=%d: q_bessel=%.9g q_direct=%.9g gap=%.3g "
              "limit=%.3g %s" % (row.n_agents, b.mean, d.mean, gap, limit, verdict),
              file=sys.stderr)


def _cmd_simulate(args) -> int:
    cfg = _config_from_args(args)
    rows = run_experiment(cfg)
    _write_out(emit_csv(rows), args.out)
    if cfg.cross_check:
        _report_cross_check(rows, cfg.gamma)
    return 0


def _cmd_asymptotics(args) -> int:
    counts = _parse_agents(args.agents)
    try:
        fixed_edges = float(int(args.edges))
    except ValueError:
        fixed_edges = None
    header = "n_agents,a_n,e_t_leading,e_t_refined,var_t_asymptote,cost_asymptote"
    lines = [header]
    for n in counts:
        if fixed_edges is not None:
            edge_count = fixed_edges
        else:
            edge_count = directed_edge_count(generate(args.edges, n))
        rep = asymptotic_report(n, edge_count)
        lines.append(",".join([str(n)] + ["%.12g" % v for v in (
            rep.a_n, rep.e_t_leading, rep.e_t_refined,
            rep.var_t_asymptote, rep.cost_asymptote)]))
    _write_out("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_gumbel_check(args) -> int:
    if args.agents < 2:
        raise ValueError("gumbel-check needs at least 2 agents")
    if args.runs < 2:
        raise ValueError("gumbel-check needs at least 2 runs")
    samples = run_batch(args.agents, 1.0, args.step, args.seed, args.runs,
                        mode="event", workers=args.workers)
    t_arr = np.fromiter((s.t_exit for s in samples), np.float64, len(samples))
    x = normalize_exit_samples(t_arr, args.agents)
    moments = gumbel_moments()
    print(f"n_agents={args.agents} runs={args.runs} step={args.step:g}")
    print("ks_stat=%.9g" % ks_distance(x, gumbel_cdf))
    print("sample_mean=%.9g gumbel_mean=%.9g" % (x.mean(), moments.mean))
    print("sample_var=%.9g gumbel_var=%.9g" % (x.var(ddof=1), moments.variance))
    return 0


def _cmd_oracle(args) -> int:
    graph = _parse_graph_spec(args.graph)
    scheme = _parse_scheme(args.scheme)
    cost = long_run_oracle(graph, scheme, args.horizon, args.step,
                           make_stream(args.seed, 0))
    print("%.12g" % cost)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mas-trigger",
        description="Monte Carlo comparison of periodic and level-triggered "
                    "consensus for Brownian multi-agent systems.")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser(
        "simulate",
        help="run the per-N experiment sweep and emit a CSV of estimates",
        description="Precedence: defaults, then --config, then --quick/--paper, "
                    "then explicit flags.")
    sim.add_argument("--agents", help="comma-separated agent counts, e.g. 2,3,5")
    sim.add_argument("--delta", type=float, help="trigger threshold (default 1.0)")
    sim.add_argument("--step", type=float, help="integration step in seconds (default 1e-4)")
    sim.add_argument("--runs-t", dest="runs_t", type=int,
                     help="runs for the exit-time estimate (default 10000)")
    sim.add_argument("--runs-q", dest="runs_q", type=int,
                     help="runs for the cost estimate (default 250000)")
    sim.add_argument("--gamma", type=float, help="per-estimate confidence level (default 0.975)")
    sim.add_argument("--seed", type=int, help="master seed (default 0)")
    sim.add_argument("--graph", help="complete|ring|path|star or edgelist:PATH")
    sim.add_argument("--workers", type=int, help="parallel worker processes (default 1)")
    sim.add_argument("--out", help="output CSV path (default stdout)")
    sim.add_argument("--config", help="JSON file mirroring the config field names")
    sim.add_argument("--cross-check", dest="cross_check", action="store_true",
                     help="also compute the direct path-integral cost estimate "
                          "and report the comparison on stderr")
    profile = sim.add_mutually_exclusive_group()
    profile.add_argument("--quick", action="store_true",
                         help="desk-scale profile: 9 agent counts, 2000/20000 runs")
    profile.add_argument("--paper", action="store_true",
                         help="full-scale profile: 24 agent counts, 10000/250000 runs")
    sim.set_defaults(func=_cmd_simulate)

    asym = sub.add_parser("asymptotics",
                          help="emit the closed-form large-N quantities as CSV")
    asym.add_argument("--agents", required=True, help="comma-separated agent counts")
    asym.add_argument("--edges", required=True,
                      help="directed edge count, or a graph kind to derive it per N")
    asym.add_argument("--out", help="output CSV path (default stdout)")
    asym.set_defaults(func=_cmd_asymptotics)

    gum = sub.add_parser("gumbel-check",
                         help="compare normalized exit samples to the limit law")
    gum.add_argument("--agents", type=int, required=True)
    gum.add_argument("--runs", type=int, required=True)
    gum.add_argument("--seed", type=int, default=0)
    gum.add_argument("--step", type=float, default=1e-4)
    gum.add_argument("--workers", type=int, default=1)
    gum.set_defaults(func=_cmd_gumbel_check)

    orc = sub.add_parser("oracle",
                         help="long-run average cost of one multi-renewal trajectory")
    orc.add_argument("--graph", required=True, help="kind:N (e.g. complete:2) or edgelist:PATH")
    orc.add_argument("--scheme", required=True, help="event:<delta> or periodic:<t_period>")
    orc.add_argument("--horizon", type=float, required=True, help="trajectory length in seconds")
    orc.add_argument("--step", type=float, default=1e-4)
    orc.add_argument("--seed", type=int, default=0)
    orc.set_defaults(func=_cmd_oracle)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, StepCapExceeded, StreamExhausted) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
