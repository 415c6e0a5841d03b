"""Recover power-grid inertia and damping from sampled swing dynamics.

The pipeline: load a case (network + true parameters), integrate the swing
equations, resample at the sensor rate, add measurement noise, numerically
differentiate, and solve per-bus linear (or sparse candidate-library)
regressions for the physical parameters. A benchmark CLI wraps seeded
Monte-Carlo scenarios around that pipeline.
"""

from .derivatives import DerivativeConfig, DerivativeEstimate, finite_difference, savgol_derivative
from .estimator import (
    CandidateLibrary,
    DEFAULT_LIBRARY,
    EstimatorConfig,
    NodeSlice,
    ParameterEstimate,
    RegressionProblem,
    analytic_targets,
    build_generator_regression,
    build_library,
    build_load_regression,
    compute_coupling_terms,
    estimate_all,
    estimate_node_decentralized,
    recover_params,
    solve_least_squares,
    stlsq,
)
from .grid import GridModel, TrueParameters, bundled_case_names, bundled_case_path, load_case, neighbors
from .simulate import (
    NoiseSpec,
    SampledTrajectory,
    SolverConfig,
    SystemState,
    add_noise,
    read_trajectory_csv,
    resample_uniform,
    simulate,
    swing_rhs,
    write_trajectory_csv,
)
from .bench import Scenario, ErrorStats, compare_estimators, emit_report, run_scenario, sweep_window

__version__ = "0.1.0"
