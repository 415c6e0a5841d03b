"""Grid data model and case-file ingestion.

A case file describes the network (bus partition, line susceptances,
injections) together with the true per-unit inertia and damping values used
to generate synthetic trajectories. Bus labels in case files are 1-based;
everything internal is 0-based.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

__all__ = [
    "CaseError",
    "GridModel",
    "TrueParameters",
    "load_case",
    "dump_case",
    "save_case",
    "neighbors",
    "bundled_case_path",
    "bundled_case_names",
]


class CaseError(ValueError):
    """Raised when a case file fails to parse or violates a model invariant."""


@dataclass(frozen=True)
class GridModel:
    """Known network structure: bus partition, susceptances, injections.

    ``p_mech`` is aligned with ``generator_buses`` and ``p_load`` with
    ``load_buses``. Instances are immutable (arrays are marked read-only)
    and safe to share across threads.
    """

    n_buses: int
    generator_buses: tuple[int, ...]
    load_buses: tuple[int, ...]
    susceptance: np.ndarray
    p_mech: np.ndarray
    p_load: np.ndarray

    def __post_init__(self):
        for arr in (self.susceptance, self.p_mech, self.p_load):
            arr.setflags(write=False)

    @property
    def n_generators(self) -> int:
        return len(self.generator_buses)

    def is_generator(self, bus: int) -> bool:
        return bus in set(self.generator_buses)

    def injection(self, bus: int) -> float:
        """Mechanical input for a generator bus, load draw for a load bus."""
        if bus in self.generator_buses:
            return float(self.p_mech[self.generator_buses.index(bus)])
        return float(self.p_load[self.load_buses.index(bus)])

    def neighbors(self, bus: int) -> list[int]:
        return neighbors(self, bus)


@dataclass(frozen=True)
class TrueParameters:
    """Ground-truth inertia (generator buses) and damping (all buses)."""

    inertia: dict[int, float]
    damping: dict[int, float]

    def inertia_vector(self, model: GridModel) -> np.ndarray:
        return np.array([self.inertia[b] for b in model.generator_buses])

    def damping_vector(self, model: GridModel) -> np.ndarray:
        return np.array([self.damping[b] for b in range(model.n_buses)])


def neighbors(model: GridModel, bus: int) -> list[int]:
    """Buses coupled to ``bus`` through a nonzero susceptance, ascending."""
    if not 0 <= bus < model.n_buses:
        raise CaseError(f"bus index {bus} out of range [0, {model.n_buses})")
    row = model.susceptance[bus]
    return [j for j in range(model.n_buses) if j != bus and row[j] != 0.0]


def _connected(susceptance: np.ndarray) -> bool:
    n = susceptance.shape[0]
    seen = {0}
    stack = [0]
    while stack:
        i = stack.pop()
        for j in np.nonzero(susceptance[i])[0]:
            if j not in seen:
                seen.add(int(j))
                stack.append(int(j))
    return len(seen) == n


def load_case(path: str | Path) -> tuple[GridModel, TrueParameters]:
    """Parse and validate a case JSON file.

    Raises :class:`CaseError` with the offending bus/line labels on any
    schema or invariant violation (asymmetric susceptance, disconnected
    graph, nonpositive M or D, overlapping generator/load sets).
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CaseError(f"cannot parse case file {path}: {exc}") from exc

    try:
        n = int(raw["n_buses"])
        gens_1b = [int(b) for b in raw["generators"]]
        loads_1b = [int(b) for b in raw["loads"]]
        susceptance = np.asarray(raw["susceptance"], dtype=float)
        p_mech_raw = {int(k): float(v) for k, v in raw["p_mech"].items()}
        p_load_raw = {int(k): float(v) for k, v in raw["p_load"].items()}
        m_raw = {int(k): float(v) for k, v in raw["true_params"]["M"].items()}
        d_raw = {int(k): float(v) for k, v in raw["true_params"]["D"].items()}
    except (KeyError, TypeError, ValueError) as exc:
        raise CaseError(f"case file {path} does not match schema: {exc}") from exc

    overlap = set(gens_1b) & set(loads_1b)
    if overlap:
        raise CaseError(f"buses {sorted(overlap)} listed as both generator and load")
    if sorted(gens_1b + loads_1b) != list(range(1, n + 1)):
        raise CaseError(
            "generator and load sets must partition buses 1.."
            f"{n}, got generators={gens_1b} loads={loads_1b}"
        )
    if susceptance.shape != (n, n):
        raise CaseError(f"susceptance must be {n}x{n}, got {susceptance.shape}")
    if not np.isfinite(susceptance).all():
        raise CaseError("susceptance contains non-finite entries")
    asym = np.argwhere(susceptance != susceptance.T)
    if len(asym):
        i, j = asym[0]
        raise CaseError(
            f"asymmetric susceptance on line ({i + 1},{j + 1}): "
            f"{susceptance[i, j]} != {susceptance[j, i]}"
        )
    diag = np.flatnonzero(np.diag(susceptance))
    if len(diag):
        raise CaseError(f"nonzero susceptance diagonal at bus {diag[0] + 1}")
    if not _connected(susceptance):
        raise CaseError("susceptance graph is not connected")

    if set(p_mech_raw) != set(gens_1b):
        raise CaseError("p_mech keys must be exactly the generator buses")
    if set(p_load_raw) != set(loads_1b):
        raise CaseError("p_load keys must be exactly the load buses")
    if set(m_raw) != set(gens_1b):
        raise CaseError("true_params.M keys must be exactly the generator buses")
    if set(d_raw) != set(range(1, n + 1)):
        raise CaseError("true_params.D must cover every bus")
    for b, m in m_raw.items():
        if m <= 0:
            raise CaseError(f"nonpositive inertia M={m} at bus {b}")
    for b, d in d_raw.items():
        if d <= 0:
            raise CaseError(f"nonpositive damping D={d} at bus {b}")

    gens = tuple(b - 1 for b in gens_1b)
    loads = tuple(b - 1 for b in loads_1b)
    model = GridModel(
        n_buses=n,
        generator_buses=gens,
        load_buses=loads,
        susceptance=susceptance,
        p_mech=np.array([p_mech_raw[b + 1] for b in gens]),
        p_load=np.array([p_load_raw[b + 1] for b in loads]),
    )
    params = TrueParameters(
        inertia={b - 1: m_raw[b] for b in gens_1b},
        damping={b - 1: d_raw[b] for b in range(1, n + 1)},
    )
    return model, params


def dump_case(model: GridModel, params: TrueParameters, note: str | None = None) -> dict:
    """Serialize a model back to the case JSON schema (1-based labels)."""
    doc = {
        "n_buses": model.n_buses,
        "generators": [b + 1 for b in model.generator_buses],
        "loads": [b + 1 for b in model.load_buses],
        "susceptance": model.susceptance.tolist(),
        "p_mech": {str(b + 1): float(v) for b, v in zip(model.generator_buses, model.p_mech)},
        "p_load": {str(b + 1): float(v) for b, v in zip(model.load_buses, model.p_load)},
        "true_params": {
            "M": {str(b + 1): params.inertia[b] for b in model.generator_buses},
            "D": {str(b + 1): params.damping[b] for b in range(model.n_buses)},
        },
    }
    if note is not None:
        doc["note"] = note
    return doc


def save_case(model: GridModel, params: TrueParameters, path: str | Path) -> None:
    Path(path).write_text(json.dumps(dump_case(model, params), indent=1))


def bundled_case_names() -> list[str]:
    """Names of the case fixtures shipped with the package."""
    root = resources.files("swingid") / "cases"
    return sorted(p.name[: -len(".json")] for p in root.iterdir() if p.name.endswith(".json"))


def bundled_case_path(name: str) -> Path:
    """Resolve a bundled case name (with or without .json) to its file path."""
    stem = name[: -len(".json")] if name.endswith(".json") else name
    path = Path(str(resources.files("swingid") / "cases" / f"{stem}.json"))
    if not path.exists():
        raise CaseError(f"no bundled case named {name!r}; have {bundled_case_names()}")
    return path
