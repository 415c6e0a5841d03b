"""Seeded benchmark scenarios: simulate once, re-noise per run, estimate,
aggregate Monte-Carlo error statistics.

Reports are deterministic for a fixed base seed: run ``r`` is noised with
``base_seed + r`` and wall-clock timings never enter the emitted files.
"""

from __future__ import annotations

import json
import os
import shutil
import subprocess
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .derivatives import DerivativeConfig
from .estimator import (
    BusEstimate,
    EstimatorConfig,
    ParameterEstimate,
    DEFAULT_LIBRARY,
    estimate_all,
    estimate_json_rows,
)
from .grid import GridModel, TrueParameters, bundled_case_path, load_case
from .simulate import (
    NoiseSpec,
    SampledTrajectory,
    SystemState,
    add_noise,
    resample_uniform,
    simulate,
    write_trajectory_csv,
)

__all__ = [
    "Scenario",
    "RunResult",
    "ScenarioResult",
    "ErrorStats",
    "SweepTable",
    "ComparisonReport",
    "run_scenario",
    "sweep_window",
    "compare_estimators",
    "emit_report",
    "pinn_command",
    "resolve_case",
]

ESTIMATORS = ("sindy", "sindy-library", "pinn")
THREADS_ENV = "SWING_SINDY_THREADS"
PINN_CMD_ENV = "SWINGID_PINN_CMD"


def resolve_case(case: str | Path) -> Path:
    """Accept a filesystem path or the name of a bundled case."""
    p = Path(case)
    if p.exists():
        return p
    return bundled_case_path(str(case))


@dataclass(frozen=True)
class Scenario:
    """One benchmark configuration: case, noise, sampling, estimator, seeds."""

    case: str | Path
    noise: NoiseSpec = field(default_factory=NoiseSpec.none)
    t_s: float = 0.01
    n_samples: int = 200
    deriv: DerivativeConfig = field(default_factory=DerivativeConfig)
    estimator: str = "sindy"
    runs: int = 1
    base_seed: int = 0
    init: str = "zero"  # "zero" | "spread" | "spread:<amplitude>"
    label: str | None = None

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.estimator not in ESTIMATORS:
            raise ValueError(f"unknown estimator {self.estimator!r}; expected one of {ESTIMATORS}")

    @property
    def name(self) -> str:
        return self.label or Path(str(self.case)).stem

    def initial_state(self, model: GridModel) -> SystemState:
        if self.init == "zero":
            return SystemState.zeros(model)
        if self.init == "spread":
            return SystemState.spread(model)
        if self.init.startswith("spread:"):
            return SystemState.spread(model, float(self.init.split(":", 1)[1]))
        raise ValueError(f"unknown init spec {self.init!r}")

    def estimator_config(self) -> EstimatorConfig:
        library = DEFAULT_LIBRARY if self.estimator == "sindy-library" else None
        return EstimatorConfig(deriv=self.deriv, library=library)


@dataclass
class RunResult:
    run: int
    seed: int
    estimate: ParameterEstimate
    timing_ms: float
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass
class ScenarioResult:
    scenario: Scenario
    model: GridModel
    truth: TrueParameters
    runs: list[RunResult]

    def parameter_label(self, bus: int, which: str) -> str:
        """M parameters are numbered by generator ordinal (matching the
        usual reporting convention), D parameters by bus label."""
        if which == "M":
            return f"M_{self.model.generator_buses.index(bus) + 1}"
        return f"D_{bus + 1}"

    def error_rows(self) -> list[tuple[str, str, int, float]]:
        """Long-format rows (scenario, parameter, run, rel_err_pct)."""
        rows = []
        for rr in self.runs:
            for b in rr.estimate.buses:
                if b.status != "ok":
                    continue
                if b.rel_err_m is not None:
                    rows.append(
                        (self.scenario.name, self.parameter_label(b.bus, "M"), rr.run, 100.0 * b.rel_err_m)
                    )
                if b.rel_err_d is not None:
                    rows.append(
                        (self.scenario.name, self.parameter_label(b.bus, "D"), rr.run, 100.0 * b.rel_err_d)
                    )
        return rows

    @property
    def timings_ms(self) -> list[float]:
        return [rr.timing_ms for rr in self.runs if not rr.failed]


@dataclass(frozen=True)
class ErrorStats:
    """Per-parameter spread of relative error (%) plus per-run timings."""

    per_parameter: dict[str, dict[str, float]]
    timings_ms: list[float]

    @classmethod
    def from_result(cls, result: ScenarioResult) -> "ErrorStats":
        return cls.from_rows(result.error_rows(), result.timings_ms)

    @classmethod
    def from_rows(cls, rows, timings_ms=()) -> "ErrorStats":
        by_param: dict[str, list[float]] = {}
        for _scen, param, _run, err in rows:
            by_param.setdefault(param, []).append(err)
        stats = {}
        for param, errs in sorted(by_param.items()):
            arr = np.asarray(errs)
            stats[param] = {
                "median": float(np.median(arr)),
                "q1": float(np.percentile(arr, 25)),
                "q3": float(np.percentile(arr, 75)),
                "min": float(arr.min()),
                "max": float(arr.max()),
            }
        return cls(stats, list(timings_ms))

    def median(self, param: str) -> float:
        return self.per_parameter[param]["median"]


def _max_workers(runs: int) -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return 1
    return max(1, min(runs, int(raw)))


def _simulate_clean(scenario: Scenario) -> tuple[GridModel, TrueParameters, SampledTrajectory]:
    model, truth = load_case(resolve_case(scenario.case))
    horizon = scenario.n_samples * scenario.t_s
    solution = simulate(model, truth, scenario.initial_state(model), horizon)
    return model, truth, resample_uniform(solution, scenario.t_s, scenario.n_samples)


def run_scenario(scenario: Scenario, clock=None) -> ScenarioResult:
    """Simulate the scenario once, then noise + estimate per seeded run.

    ``clock`` (default ``time.perf_counter``) is sampled immediately before
    and after the estimation call only, so simulation and I/O never count
    toward the recorded timing. Per-run estimator failures are carried in
    the per-bus statuses, not raised.
    """
    clock = clock or time.perf_counter
    model, truth, clean = _simulate_clean(scenario)

    def one_run(r: int) -> RunResult:
        seed = scenario.base_seed + r
        noisy = add_noise(clean, scenario.noise, seed)
        try:
            if scenario.estimator == "pinn":
                estimate, elapsed_ms = _run_pinn(scenario, noisy, clock)
            else:
                config = scenario.estimator_config()
                t0 = clock()
                estimate = estimate_all(model, noisy, config, truth=truth)
                elapsed_ms = (clock() - t0) * 1e3
        except Exception as exc:
            # a broken run (e.g. a crashing external backend) is recorded,
            # the remaining runs still execute
            return RunResult(run=r, seed=seed, estimate=ParameterEstimate([]),
                             timing_ms=0.0, error=f"{type(exc).__name__}: {exc}")
        return RunResult(run=r, seed=seed, estimate=estimate, timing_ms=elapsed_ms)

    workers = _max_workers(scenario.runs)
    if workers == 1:
        results = [one_run(r) for r in range(scenario.runs)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one_run, range(scenario.runs)))
    return ScenarioResult(scenario=scenario, model=model, truth=truth, runs=results)


def sweep_window(
    scenario: Scenario,
    windows_s: list[float],
    noise_levels: list[float],
    parameter: str = "D_1",
) -> "SweepTable":
    """Mean relative error (%) of one parameter per (window, noise) cell.

    The scenario is simulated once out to the largest window; every run
    draws one noise realization over the full span and each window cell
    estimates from that run's prefix.
    """
    if not windows_s or not noise_levels:
        raise ValueError("need at least one window and one noise level")
    windows_s = sorted(windows_s)
    max_t = max(windows_s)
    full = replace(scenario, n_samples=int(round(max_t / scenario.t_s)))
    model, truth, clean = _simulate_clean(full)
    config = scenario.estimator_config()

    bus, which = _parse_parameter(model, parameter)
    cells = np.full((len(windows_s), len(noise_levels)), np.nan)
    for j, level in enumerate(noise_levels):
        spec = NoiseSpec(scenario.noise.kind if scenario.noise.kind != "none" else "gaussian-relative", level)
        errs = np.full((len(windows_s), scenario.runs), np.nan)
        for r in range(scenario.runs):
            noisy = add_noise(clean, spec, scenario.base_seed + r)
            for i, w in enumerate(windows_s):
                t_count = int(round(w / scenario.t_s))
                pe = estimate_all(model, noisy.window(t_count), config, truth=truth)
                b = pe.bus(bus)
                err = b.rel_err_m if which == "M" else b.rel_err_d
                if b.status == "ok" and err is not None:
                    errs[i, r] = 100.0 * err
        cells[:, j] = np.nanmean(errs, axis=1)
    return SweepTable(parameter, list(windows_s), list(noise_levels), cells)


def _parse_parameter(model: GridModel, parameter: str) -> tuple[int, str]:
    which, _, idx = parameter.partition("_")
    if which not in ("M", "D") or not idx.isdigit():
        raise ValueError(f"parameter must look like M_1 or D_3, got {parameter!r}")
    n = int(idx)
    if which == "M":
        if not 1 <= n <= model.n_generators:
            raise ValueError(f"no generator ordinal {n}")
        return model.generator_buses[n - 1], "M"
    if not 1 <= n <= model.n_buses:
        raise ValueError(f"no bus {n}")
    return n - 1, "D"


@dataclass(frozen=True)
class SweepTable:
    parameter: str
    windows_s: list[float]
    noise_levels: list[float]
    mean_error_pct: np.ndarray  # (len(windows), len(levels))

    def to_csv(self, path: str | Path) -> None:
        header = "window_s," + ",".join(f"sigma_{lvl:g}" for lvl in self.noise_levels)
        lines = [header]
        for i, w in enumerate(self.windows_s):
            cells = ",".join(format(v, ".17g") for v in self.mean_error_pct[i])
            lines.append(f"{w:g},{cells}")
        Path(path).write_text("\n".join(lines) + "\n")


# --- estimator comparison -----------------------------------------------------


def pinn_command() -> list[str] | None:
    """Locate the external comparator backend, if installed."""
    override = os.environ.get(PINN_CMD_ENV)
    if override:
        return override.split()
    exe = shutil.which("pinn-estimate")
    return [exe] if exe else None


def _run_pinn(scenario: Scenario, noisy: SampledTrajectory, clock) -> tuple[ParameterEstimate, float]:
    cmd = pinn_command()
    if cmd is None:
        raise RuntimeError(
            "pinn estimator requested but no backend found; install the comparator "
            f"package or set {PINN_CMD_ENV}"
        )
    case_path = resolve_case(scenario.case)
    with tempfile.TemporaryDirectory() as tmp:
        traj_path = Path(tmp) / "traj.csv"
        out_path = Path(tmp) / "estimate.json"
        write_trajectory_csv(noisy, traj_path)
        argv = cmd + [
            "--case", str(case_path),
            "--traj", str(traj_path),
            "--out", str(out_path),
            "--seed", str(noisy.seed or 0),
        ]
        t0 = clock()
        proc = subprocess.run(argv, capture_output=True, text=True)
        elapsed_ms = (clock() - t0) * 1e3
        if proc.returncode != 0:
            raise RuntimeError(f"pinn backend failed: {proc.stderr.strip()[:500]}")
        rows = json.loads(out_path.read_text())
    return _estimate_from_rows(rows), elapsed_ms


def _estimate_from_rows(rows: list[dict]) -> ParameterEstimate:
    buses = []
    for row in rows:
        buses.append(
            BusEstimate(
                bus=int(row["bus"]) - 1,
                kind=row["kind"],
                m_hat=row.get("M_hat"),
                d_hat=row.get("D_hat"),
                residual=row.get("residual"),
                rel_err_m=row.get("rel_err_M"),
                rel_err_d=row.get("rel_err_D"),
                status=row.get("status", "ok"),
            )
        )
    return ParameterEstimate(buses)


@dataclass
class ComparisonReport:
    scenarios: list[str]
    columns: dict[str, dict[str, ErrorStats | None]]  # scenario -> estimator -> stats
    notices: list[str]
    claims: dict[str, dict[str, bool]]

    def to_json(self) -> dict:
        doc: dict = {"scenarios": self.scenarios, "notices": self.notices, "claims": self.claims}
        doc["results"] = {
            scen: {
                est: None
                if stats is None
                else {
                    "per_parameter": stats.per_parameter,
                    "timing_ms_median": float(np.median(stats.timings_ms)) if stats.timings_ms else None,
                }
                for est, stats in cols.items()
            }
            for scen, cols in self.columns.items()
        }
        return doc


def compare_estimators(
    scenarios: list[Scenario], estimators: tuple[str, ...] = ("sindy", "pinn")
) -> ComparisonReport:
    """Side-by-side error statistics per scenario and estimator.

    A missing backend degrades the report to the available columns and adds
    a notice instead of failing.
    """
    notices = []
    available = []
    for est in estimators:
        if est == "pinn" and pinn_command() is None:
            notices.append("pinn backend unavailable; pinn column skipped")
            continue
        available.append(est)
    columns: dict[str, dict[str, ErrorStats | None]] = {}
    claims: dict[str, dict[str, bool]] = {}
    for scen in scenarios:
        cols: dict[str, ErrorStats | None] = {}
        for est in estimators:
            if est not in available:
                cols[est] = None
                continue
            result = run_scenario(replace(scen, estimator=est))
            cols[est] = ErrorStats.from_result(result)
        columns[scen.name] = cols
        sindy_stats = cols.get("sindy")
        pinn_stats = cols.get("pinn")
        if sindy_stats and pinn_stats:
            worst = lambda st: max(v["median"] for v in st.per_parameter.values())
            claims[scen.name] = {"sindy_worst_median_leq_pinn": worst(sindy_stats) <= worst(pinn_stats)}
    return ComparisonReport(
        scenarios=[s.name for s in scenarios], columns=columns, notices=notices, claims=claims
    )


# --- report emission -----------------------------------------------------------


def emit_report(
    results: "ScenarioResult | list[ScenarioResult]",
    out_dir: str | Path,
    format: str = "csv",
) -> list[Path]:
    """Write per-run error data; deterministic bytes for identical results.

    CSV is the boxplot-ready long format (scenario, parameter, run,
    rel_err_pct); JSON carries scenario metadata plus the per-bus estimate
    rows. Timings are deliberately excluded so repeated invocations of the
    same seeded scenario emit identical files.
    """
    if isinstance(results, ScenarioResult):
        results = [results]
    if not results:
        raise ValueError("no results to report")
    if format not in ("csv", "json"):
        raise ValueError(f"format must be csv or json, got {format!r}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for result in results:
        name = result.scenario.name
        if format == "csv":
            path = out_dir / f"{name}_errors.csv"
            lines = ["scenario,parameter,run,rel_err_pct"]
            for scen, param, run, err in result.error_rows():
                lines.append(f"{scen},{param},{run},{format_float(err)}")
            path.write_text("\n".join(lines) + "\n")
        else:
            path = out_dir / f"{name}_result.json"
            doc = {
                "scenario": {
                    "case": str(result.scenario.case),
                    "noise": {"kind": result.scenario.noise.kind, "level": result.scenario.noise.level},
                    "t_s": result.scenario.t_s,
                    "n_samples": result.scenario.n_samples,
                    "estimator": result.scenario.estimator,
                    "runs": result.scenario.runs,
                    "base_seed": result.scenario.base_seed,
                    "init": result.scenario.init,
                },
                "runs": [
                    {"run": rr.run, "seed": rr.seed, "error": rr.error,
                     "estimates": estimate_json_rows(rr.estimate)}
                    for rr in result.runs
                ],
            }
            path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
        written.append(path)
    return written


def format_float(v: float) -> str:
    return format(v, ".17g")
