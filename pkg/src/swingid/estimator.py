"""Inertia/damping recovery by per-bus regression on sampled dynamics.

Each generator bus contributes a two-column linear system (frequency
derivative against [-omega, net accelerating input]), each load bus a
one-column system, solved independently. A candidate-library mode replaces
the known-structure regressors with a basis of nonlinear terms and selects
the active ones by sequentially thresholded least squares.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .derivatives import DerivativeConfig, DerivativeEstimate
from .grid import GridModel, TrueParameters, neighbors
from .simulate import SampledTrajectory

__all__ = [
    "RankDeficientError",
    "UnphysicalEstimateError",
    "ThresholdTooLargeError",
    "AlignmentError",
    "RegressionProblem",
    "LeastSquaresSolution",
    "BusEstimate",
    "ParameterEstimate",
    "NodeSlice",
    "CandidateLibrary",
    "SparseSolution",
    "EstimatorConfig",
    "DEFAULT_LIBRARY",
    "compute_coupling_terms",
    "build_generator_regression",
    "build_load_regression",
    "solve_least_squares",
    "recover_params",
    "estimate_all",
    "estimate_node_decentralized",
    "build_library",
    "stlsq",
    "analytic_targets",
    "estimate_json_rows",
]

RANK_GUARD = 1e-10  # smallest/largest singular value below this is rank-deficient


class RankDeficientError(ValueError):
    """Regressor matrix has (numerically) dependent columns."""


class UnphysicalEstimateError(ValueError):
    """Recovered coefficients imply a nonpositive inertia or damping."""


class ThresholdTooLargeError(ValueError):
    """Sparse threshold wiped out every candidate term."""


class AlignmentError(ValueError):
    """Local and neighbor measurement series do not line up."""


@dataclass(frozen=True)
class RegressionProblem:
    target: np.ndarray
    regressors: np.ndarray
    column_labels: tuple[str, ...]

    def __post_init__(self):
        if self.regressors.ndim != 2 or self.regressors.shape[1] < 1:
            raise ValueError("regressors must be a T x k matrix with k >= 1")
        if self.target.shape != (self.regressors.shape[0],):
            raise ValueError("target length must match regressor rows")
        if not (np.isfinite(self.target).all() and np.isfinite(self.regressors).all()):
            raise ValueError("regression problem contains NaN/Inf entries")


@dataclass(frozen=True)
class LeastSquaresSolution:
    coefficients: np.ndarray
    residual_norm: float
    condition: float


@dataclass
class BusEstimate:
    """Result of one per-bus regression; ``status`` flags failures."""

    bus: int
    kind: str  # "gen" | "load"
    m_hat: float | None = None
    d_hat: float | None = None
    residual: float | None = None
    rel_err_m: float | None = None
    rel_err_d: float | None = None
    status: str = "ok"

    def attach_truth(self, truth: TrueParameters) -> None:
        if self.status != "ok":
            return
        if self.kind == "gen" and self.m_hat is not None:
            m = truth.inertia[self.bus]
            self.rel_err_m = abs(self.m_hat - m) / abs(m)
        if self.d_hat is not None:
            d = truth.damping[self.bus]
            self.rel_err_d = abs(self.d_hat - d) / abs(d)


@dataclass(frozen=True)
class ParameterEstimate:
    buses: list[BusEstimate]

    @property
    def inertia(self) -> dict[int, float]:
        return {b.bus: b.m_hat for b in self.buses if b.kind == "gen" and b.m_hat is not None}

    @property
    def damping(self) -> dict[int, float]:
        return {b.bus: b.d_hat for b in self.buses if b.d_hat is not None}

    @property
    def residual_norm(self) -> dict[int, float]:
        return {b.bus: b.residual for b in self.buses if b.residual is not None}

    @property
    def failed_buses(self) -> list[int]:
        return [b.bus for b in self.buses if b.status != "ok"]

    def bus(self, bus: int) -> BusEstimate:
        for b in self.buses:
            if b.bus == bus:
                return b
        raise KeyError(bus)


@dataclass(frozen=True)
class EstimatorConfig:
    """End-to-end estimation settings.

    ``smooth_regressors`` applies the same local-polynomial fit (zeroth
    derivative) to the measured channels before they enter the regressor
    matrix; leaving raw noise in the regressors badly attenuates the
    damping estimates. ``None`` means on for the savgol derivative method,
    off for finite differences (clean data).

    ``library`` switches generator buses to the sparse candidate-library
    route with threshold ``stlsq_threshold``; load buses always use the
    single-column regression. The route default (0.05) sits above the
    numerical-derivative error that otherwise leaks into the near-collinear
    sin(a)/cos(a) candidates on clean data.
    """

    deriv: DerivativeConfig = field(default_factory=DerivativeConfig)
    smooth_regressors: bool | None = None
    library: tuple[str, ...] | None = None
    stlsq_threshold: float = 0.05
    stlsq_max_iter: int = 20

    @property
    def smoothing_active(self) -> bool:
        if self.smooth_regressors is None:
            return self.deriv.method == "savgol"
        return self.smooth_regressors

    def smooth(self, series: np.ndarray) -> np.ndarray:
        from scipy.signal import savgol_filter

        return savgol_filter(series, self.deriv.window, self.deriv.order, mode="interp")


# --- regression construction -------------------------------------------------


def _coupling_series(
    b_row: np.ndarray,
    own_delta: np.ndarray,
    neighbor_ids: list[int],
    neighbor_deltas: dict[int, np.ndarray],
) -> np.ndarray:
    """sum_j B_ij sin(delta_i - delta_j) per sample, neighbors ascending."""
    if not neighbor_ids:
        return np.zeros_like(own_delta)
    mat = np.column_stack([neighbor_deltas[j] for j in neighbor_ids])
    bvals = np.array([b_row[j] for j in neighbor_ids])
    return (np.sin(own_delta[:, None] - mat) * bvals).sum(axis=1)


def compute_coupling_terms(model: GridModel, traj: SampledTrajectory, bus: int) -> np.ndarray:
    """Per-sample electrical coupling leaving ``bus``."""
    ids = neighbors(model, bus)
    return _coupling_series(
        model.susceptance[bus], traj.delta[:, bus], ids, {j: traj.delta[:, j] for j in ids}
    )


def _generator_problem(
    injection: float, omega: np.ndarray, coupling: np.ndarray, omega_dot: np.ndarray
) -> RegressionProblem:
    # omega_dot = (D/M) * (-omega) + (1/M) * (P_mech - coupling)
    regressors = np.column_stack([-omega, injection - coupling])
    return RegressionProblem(omega_dot, regressors, ("-omega", "p_mech-coupling"))


def _load_problem(
    injection: float, coupling: np.ndarray, delta_dot: np.ndarray
) -> RegressionProblem:
    # delta_dot = (1/D) * (-(P_load + coupling))
    regressors = (-(injection + coupling))[:, None]
    return RegressionProblem(delta_dot, regressors, ("-(p_load+coupling)",))


def build_generator_regression(
    model: GridModel, traj: SampledTrajectory, omega_dot: DerivativeEstimate, bus: int
) -> RegressionProblem:
    """Two-column system whose solution is [D/M, 1/M] for a generator bus."""
    if bus not in model.generator_buses:
        raise ValueError(f"bus {bus} is not a generator")
    g = model.generator_buses.index(bus)
    coupling = compute_coupling_terms(model, traj, bus)
    return _generator_problem(
        float(model.p_mech[g]), traj.omega[:, g], coupling, omega_dot.values
    )


def build_load_regression(
    model: GridModel, traj: SampledTrajectory, delta_dot: DerivativeEstimate, bus: int
) -> RegressionProblem:
    """One-column system whose solution is [1/D] for a load bus."""
    if bus not in model.load_buses:
        raise ValueError(f"bus {bus} is not a load")
    l = model.load_buses.index(bus)
    coupling = compute_coupling_terms(model, traj, bus)
    return _load_problem(float(model.p_load[l]), coupling, delta_dot.values)


def solve_least_squares(problem: RegressionProblem) -> LeastSquaresSolution:
    """Minimize ||target - regressors @ c|| via an SVD-based solve.

    Rejects rank-deficient systems (smallest singular value below
    ``RANK_GUARD`` of the largest) instead of returning a meaningless fit.
    """
    a, y = problem.regressors, problem.target
    rows, cols = a.shape
    if rows < cols:
        raise ValueError(f"underdetermined system: {rows} rows < {cols} columns")
    svals = np.linalg.svd(a, compute_uv=False)
    if svals[0] == 0.0 or svals[-1] <= RANK_GUARD * svals[0]:
        cond = np.inf if svals[-1] == 0 else svals[0] / svals[-1]
        raise RankDeficientError(
            f"regressors are rank deficient (condition ~ {cond:.3g}); "
            "the data does not excite every term"
        )
    coeffs, *_ = np.linalg.lstsq(a, y, rcond=None)
    residual = float(np.linalg.norm(y - a @ coeffs))
    return LeastSquaresSolution(coeffs, residual, float(svals[0] / svals[-1]))


def recover_params(coefficients: np.ndarray, bus_kind: str):
    """Map regression coefficients back to physical (M, D).

    Generator: c = [D/M, 1/M] -> (M, D); load: c = [1/D] -> D. Nonpositive
    intermediate values raise :class:`UnphysicalEstimateError`.
    """
    c = np.asarray(coefficients, dtype=float)
    if bus_kind == "gen":
        if c.shape != (2,):
            raise ValueError("generator recovery expects two coefficients")
        if c[1] <= 0:
            raise UnphysicalEstimateError(f"1/M coefficient must be positive, got {c[1]:.6g}")
        m_hat = 1.0 / c[1]
        d_hat = c[0] / c[1]
        if d_hat <= 0:
            raise UnphysicalEstimateError(f"recovered damping {d_hat:.6g} is not positive")
        return m_hat, d_hat
    if bus_kind == "load":
        if c.shape != (1,):
            raise ValueError("load recovery expects one coefficient")
        if c[0] <= 0:
            raise UnphysicalEstimateError(f"1/D coefficient must be positive, got {c[0]:.6g}")
        return 1.0 / c[0]
    raise ValueError(f"unknown bus kind {bus_kind!r}")


# --- end-to-end estimation ---------------------------------------------------


def _estimate_bus_series(
    bus: int,
    kind: str,
    b_row: np.ndarray,
    injection: float,
    own_delta: np.ndarray,
    own_omega: np.ndarray | None,
    neighbor_ids: list[int],
    neighbor_deltas: dict[int, np.ndarray],
    t_s: float,
    config: EstimatorConfig,
    target_override: np.ndarray | None = None,
) -> BusEstimate:
    """Shared per-bus pipeline; both the centralized and the per-node entry
    points land here so their numbers are identical by construction.

    Derivative targets always come from the raw measured channel; when
    smoothing is active the regressor channels (own angle/frequency plus
    neighbor angles) are filtered per series before use.
    """
    est = BusEstimate(bus=bus, kind=kind)
    if target_override is not None:
        target = target_override
    elif kind == "gen":
        target = config.deriv.apply(own_omega, t_s).values
    else:
        target = config.deriv.apply(own_delta, t_s).values
    if config.smoothing_active:
        own_delta = config.smooth(own_delta)
        if own_omega is not None:
            own_omega = config.smooth(own_omega)
        neighbor_deltas = {j: config.smooth(neighbor_deltas[j]) for j in neighbor_ids}
    coupling = _coupling_series(b_row, own_delta, neighbor_ids, neighbor_deltas)
    try:
        if kind == "gen":
            if config.library is not None:
                lib = build_library(own_omega, injection - coupling, config.library)
                sparse = stlsq(lib, target, config.stlsq_threshold, config.stlsq_max_iter)
                est.m_hat, est.d_hat = _recover_from_library(lib, sparse)
                est.residual = float(np.linalg.norm(target - lib.matrix @ sparse.coefficients))
            else:
                problem = _generator_problem(injection, own_omega, coupling, target)
                sol = solve_least_squares(problem)
                est.m_hat, est.d_hat = recover_params(sol.coefficients, "gen")
                est.residual = sol.residual_norm
        else:
            problem = _load_problem(injection, coupling, target)
            sol = solve_least_squares(problem)
            est.d_hat = recover_params(sol.coefficients, "load")
            est.residual = sol.residual_norm
    except (RankDeficientError, ThresholdTooLargeError):
        est.status = "rank_deficient"
    except UnphysicalEstimateError:
        est.status = "unphysical"
    return est


def estimate_all(
    model: GridModel,
    traj: SampledTrajectory,
    config: EstimatorConfig = EstimatorConfig(),
    truth: TrueParameters | None = None,
    target_overrides: dict[int, np.ndarray] | None = None,
) -> ParameterEstimate:
    """Estimate every bus's parameters from one sampled trajectory.

    Per-bus failures are recorded in the bus status instead of aborting the
    remaining buses. ``target_overrides`` injects precomputed derivative
    targets (bus -> series), e.g. analytic ones from :func:`analytic_targets`.
    """
    if traj.n_samples < 2:
        raise ValueError("need at least 2 samples")
    estimates = []
    for bus in range(model.n_buses):
        kind = "gen" if bus in model.generator_buses else "load"
        own_omega = None
        if kind == "gen":
            own_omega = traj.omega[:, model.generator_buses.index(bus)]
        ids = neighbors(model, bus)
        est = _estimate_bus_series(
            bus=bus,
            kind=kind,
            b_row=model.susceptance[bus],
            injection=model.injection(bus),
            own_delta=traj.delta[:, bus],
            own_omega=own_omega,
            neighbor_ids=ids,
            neighbor_deltas={j: traj.delta[:, j] for j in ids},
            t_s=traj.t_s,
            config=config,
            target_override=None if target_overrides is None else target_overrides.get(bus),
        )
        if truth is not None:
            est.attach_truth(truth)
        estimates.append(est)
    return ParameterEstimate(estimates)


@dataclass(frozen=True)
class NodeSlice:
    """The only model knowledge a node needs: its susceptance row and injection."""

    bus: int
    kind: str  # "gen" | "load"
    b_row: np.ndarray
    injection: float

    @classmethod
    def from_model(cls, model: GridModel, bus: int) -> "NodeSlice":
        kind = "gen" if bus in model.generator_buses else "load"
        return cls(bus=bus, kind=kind, b_row=model.susceptance[bus], injection=model.injection(bus))


def estimate_node_decentralized(
    node: NodeSlice,
    own_delta: np.ndarray,
    own_omega: np.ndarray | None,
    neighbor_deltas: dict[int, np.ndarray],
    t_s: float,
    config: EstimatorConfig = EstimatorConfig(),
) -> BusEstimate:
    """Per-node estimation from local measurements plus neighbor angles only.

    Given the same series a node would see in the centralized run, the
    result is numerically identical to that bus's entry in
    :func:`estimate_all`.
    """
    ids = [j for j in range(len(node.b_row)) if j != node.bus and node.b_row[j] != 0.0]
    missing = [j for j in ids if j not in neighbor_deltas]
    if missing:
        raise AlignmentError(f"missing neighbor angle series for buses {missing}")
    t = len(own_delta)
    bad = [j for j in ids if len(neighbor_deltas[j]) != t]
    if bad:
        raise AlignmentError(f"neighbor series for buses {bad} not aligned to {t} samples")
    if node.kind == "gen" and (own_omega is None or len(own_omega) != t):
        raise AlignmentError("generator node needs an aligned local frequency series")
    return _estimate_bus_series(
        bus=node.bus,
        kind=node.kind,
        b_row=node.b_row,
        injection=node.injection,
        own_delta=np.asarray(own_delta, dtype=float),
        own_omega=None if own_omega is None else np.asarray(own_omega, dtype=float),
        neighbor_ids=ids,
        neighbor_deltas=neighbor_deltas,
        t_s=t_s,
        config=config,
    )


# --- candidate-library (sparse) route ----------------------------------------

DEFAULT_LIBRARY = (
    "identity(omega)",
    "square(omega)",
    "sin(a)",
    "cos(a)",
    "identity(a)",
    "constant",
)

_CANDIDATES = {
    "identity(omega)": lambda omega, a: omega,
    "square(omega)": lambda omega, a: omega**2,
    "sin(a)": lambda omega, a: np.sin(a),
    "cos(a)": lambda omega, a: np.cos(a),
    "identity(a)": lambda omega, a: a,
    "constant": lambda omega, a: np.ones_like(a),
}


@dataclass(frozen=True)
class CandidateLibrary:
    labels: tuple[str, ...]
    matrix: np.ndarray


@dataclass(frozen=True)
class SparseSolution:
    coefficients: np.ndarray
    active_labels: tuple[str, ...]
    iterations: int

    @property
    def active_mask(self) -> np.ndarray:
        return self.coefficients != 0.0


def build_library(
    omega: np.ndarray, accel_input: np.ndarray, names: "list[str] | tuple[str, ...]"
) -> CandidateLibrary:
    """Evaluate named candidate functions of (omega, a) into library columns.

    ``accel_input`` is the net accelerating term a = P_mech - coupling, the
    same series the known-structure regression uses.
    """
    if not names:
        raise ValueError("candidate list must not be empty")
    unknown = [n for n in names if n not in _CANDIDATES]
    if unknown:
        raise ValueError(f"unknown candidates {unknown}; supported: {sorted(_CANDIDATES)}")
    if len(set(names)) != len(names):
        raise ValueError("candidate names must be unique")
    cols = [_CANDIDATES[n](np.asarray(omega, float), np.asarray(accel_input, float)) for n in names]
    matrix = np.column_stack(cols)
    if not np.isfinite(matrix).all():
        raise ValueError("library evaluation produced non-finite values")
    return CandidateLibrary(tuple(names), matrix)


def stlsq(
    library: CandidateLibrary,
    target: np.ndarray,
    threshold: float = 0.025,
    max_iter: int = 20,
) -> SparseSolution:
    """Sequentially thresholded least squares on unit-normalized columns.

    Iterates {solve on active set, drop |coefficient| < threshold} to a
    fixed point. Coefficients come back in the original column scaling.
    ``threshold`` applies in the normalized scale. Raising
    :class:`ThresholdTooLargeError` when everything is dropped keeps that
    case distinct from ordinary convergence.
    """
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    u = library.matrix
    y = np.asarray(target, dtype=float)
    if y.shape != (u.shape[0],):
        raise ValueError("target length must match library rows")
    norms = np.linalg.norm(u, axis=0)
    if np.any(norms == 0.0):
        dead = [library.labels[int(i)] for i in np.flatnonzero(norms == 0.0)]
        raise ValueError(f"library columns {dead} are identically zero")
    u_hat = u / norms

    k = u.shape[1]
    active = np.ones(k, dtype=bool)
    c_hat = np.zeros(k)
    iterations = 0
    for iterations in range(1, max_iter + 1):
        c_hat = np.zeros(k)
        c_hat[active], *_ = np.linalg.lstsq(u_hat[:, active], y, rcond=None)
        keep = active & (np.abs(c_hat) >= threshold)
        if threshold == 0.0:
            keep = active
        if not keep.any():
            raise ThresholdTooLargeError(
                f"threshold {threshold} zeroed every candidate; largest |c| was "
                f"{np.abs(c_hat).max():.3g}"
            )
        if keep.sum() == active.sum():
            break
        active = keep
    c_hat[~active] = 0.0
    coefficients = c_hat / norms
    labels = tuple(library.labels[i] for i in np.flatnonzero(active))
    return SparseSolution(coefficients, labels, iterations)


def _recover_from_library(lib: CandidateLibrary, sparse: SparseSolution) -> tuple[float, float]:
    """Physical (M, D) from a sparse fit, valid when the active set is the
    linear pair {omega, a}."""
    expected = {"identity(omega)", "identity(a)"}
    if set(sparse.active_labels) != expected:
        raise UnphysicalEstimateError(
            f"sparse fit selected {sparse.active_labels}, not the linear swing terms"
        )
    c_omega = sparse.coefficients[lib.labels.index("identity(omega)")]
    c_a = sparse.coefficients[lib.labels.index("identity(a)")]
    return recover_params(np.array([-c_omega, c_a]), "gen")


# --- oracles & serialization --------------------------------------------------


def analytic_targets(
    model: GridModel, params: TrueParameters, traj: SampledTrajectory
) -> dict[int, np.ndarray]:
    """Exact regression targets evaluated from the dynamics at each sample.

    Returns bus -> series: the frequency derivative for generator buses and
    the angle derivative for load buses. Useful for isolating regression
    accuracy from numerical differentiation error.
    """
    delta, omega = traj.delta, traj.omega
    diff = delta[:, :, None] - delta[:, None, :]
    flows = (model.susceptance[None, :, :] * np.sin(diff)).sum(axis=2)
    out: dict[int, np.ndarray] = {}
    for g, bus in enumerate(model.generator_buses):
        d, m = params.damping[bus], params.inertia[bus]
        out[bus] = (-d * omega[:, g] + model.p_mech[g] - flows[:, bus]) / m
    for l, bus in enumerate(model.load_buses):
        d = params.damping[bus]
        out[bus] = (-model.p_load[l] - flows[:, bus]) / d
    return out


def estimate_json_rows(estimate: ParameterEstimate) -> list[dict]:
    """Per-bus dictionaries in the interchange schema (1-based bus labels)."""
    rows = []
    for b in estimate.buses:
        rows.append(
            {
                "bus": b.bus + 1,
                "kind": b.kind,
                "M_hat": b.m_hat,
                "D_hat": b.d_hat,
                "residual": b.residual,
                "rel_err_M": b.rel_err_m,
                "rel_err_D": b.rel_err_d,
                "status": b.status,
            }
        )
    return rows
