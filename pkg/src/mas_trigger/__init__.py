"""Monte Carlo comparison of time-triggered and event-triggered consensus
for single-integrator multi-agent systems driven by Brownian noise."""

from .asymptotics import (AsymptoticReport, GumbelMoments, asymptotic_report,
                          centering_a_n, cost_asymptote, expected_exit_asymptote,
                          gumbel_cdf, gumbel_moments, gumbel_survival, ks_distance,
                          normalize_exit_samples, variance_asymptote)
from .estimators import (CostSummary, EstimateWithCI, RatioWithCI, cost_ratio,
                         j_ttc, mean_ci, normal_quantile, q_et_bessel, q_et_direct,
                         rescale_delta)
from .experiment_cli import (Crossover, ExperimentConfig, ExperimentRow, emit_csv,
                             find_crossover, long_run_oracle, main, run_experiment)
from .graph_topology import (Graph, consensus_energy, directed_edge_count, generate,
                             is_connected, load_edge_list)
from .stochastic_core import (AgentState, RngStream, ScriptedStream, StreamExhausted,
                              bessel_radius, gaussian_increment, initial_state,
                              make_stream, step_agents)
from .triggering import (StepCapExceeded, TriggerSample, run_batch, sample_exit,
                         sample_ttc_interval)

__version__ = "0.1.0"

__all__ = [
    "AgentState", "AsymptoticReport", "CostSummary", "Crossover", "EstimateWithCI",
    "ExperimentConfig", "ExperimentRow", "Graph", "GumbelMoments", "RatioWithCI",
    "RngStream", "ScriptedStream", "StepCapExceeded", "StreamExhausted",
    "TriggerSample", "asymptotic_report", "bessel_radius", "centering_a_n",
    "consensus_energy", "cost_asymptote", "cost_ratio", "directed_edge_count",
    "emit_csv", "expected_exit_asymptote", "find_crossover", "gaussian_increment",
    "generate", "gumbel_cdf", "gumbel_moments", "gumbel_survival", "initial_state",
    "is_connected", "j_ttc", "ks_distance", "load_edge_list", "long_run_oracle",
    "main", "make_stream", "mean_ci", "normal_quantile", "normalize_exit_samples",
    "q_et_bessel", "q_et_direct", "rescale_delta", "run_batch", "run_experiment",
    "sample_exit", "sample_ttc_interval", "step_agents", "variance_asymptote",
]
