"""Birth Mallows process: finite simulation, global and local limits."""

import json

from ._core import (
    F_map,
    ProcessPath,
    ZWindow,
    box_discrepancy,
    coupled_simulation,
    decode_inversions,
    enumerate_mallows,
    inversion_fluid_limit,
    inversions,
    left_inversions,
    ode_solve,
    permutation_rank,
    permutation_unrank,
    rate_finite,
    rate_limiting,
    rho_density,
    run_experiment,
    sample_mallows,
    simulate_process,
    z_curve,
)


def run(config):
    """Run an experiment described by a config dict; returns the report as a dict."""
    return json.loads(run_experiment(json.dumps(config)))


__all__ = [
    "F_map",
    "ProcessPath",
    "ZWindow",
    "box_discrepancy",
    "coupled_simulation",
    "decode_inversions",
    "enumerate_mallows",
    "inversion_fluid_limit",
    "inversions",
    "left_inversions",
    "ode_solve",
    "permutation_rank",
    "permutation_unrank",
    "rate_finite",
    "rate_limiting",
    "rho_density",
    "run",
    "run_experiment",
    "sample_mallows",
    "simulate_process",
    "z_curve",
]
