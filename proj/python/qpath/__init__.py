"""Continuously monitored qubit trajectories, most-likely paths and
quantum-jump analysis. Thin wrapper over the C++ extension."""

from qpath._core import (  # noqa: F401
    Branch,
    CheckResult,
    Ensemble,
    FixedPoint,
    MedianPath,
    MostLikelyPath,
    QubitParams,
    ShootResult,
    SimConfig,
    SwitchingRate,
    TrajectoryRecord,
    ZenoParams,
    critical_energy,
    drift,
    final_state_profile,
    fixed_point,
    functional_f,
    generate_ensemble,
    instanton,
    integrate_path,
    median_path,
    optimal_readout,
    p_theta_of,
    path_action,
    postselect,
    qnd_action,
    qnd_momenta,
    qnd_path,
    qnd_readout,
    quad_coeffs,
    readout_log_density,
    run_verify,
    shoot,
    simulate_trajectory,
    stochastic_hamiltonian,
    switching_rate,
    traversal_time,
    update_state_exact,
)

__version__ = "0.1.0"
