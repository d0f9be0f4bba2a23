"""Perturbation bounds for stationary distributions of finite Markov chains."""

from ._mcpert import (
    BoundReport,
    MCPertError,
    batch_arrival_drift,
    ctmc_deviation_bound,
    ctmc_deviation_matrix,
    ctmc_drift_bound_hitting,
    ctmc_ergodicity_coefficient,
    ctmc_lambda1_bound,
    deviation_matrix,
    drift_bound_hitting,
    ergodicity_coefficient,
    exact_gap,
    fuzz_bounds,
    gallery_model,
    gallery_names,
    group_inverse,
    hitting_times,
    run_cli,
    seneta_best_bound,
    seneta_bound,
    small_set_bound,
    stationary_distribution,
    stationary_distribution_ctmc,
    v_bounds,
    value_iteration_hitting,
)

__all__ = [name for name in dir() if not name.startswith("_")]
