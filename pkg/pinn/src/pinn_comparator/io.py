"""File interchange with the estimation toolkit.

The comparator never imports the primary package; it reads the same case
JSON and trajectory CSV files and writes the same per-bus estimate JSON
rows, so the two sides stay comparable through files alone.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = ["GridData", "Trajectory", "read_case", "read_trajectory", "write_estimate_rows"]


@dataclass(frozen=True)
class GridData:
    """Network structure plus the recorded true parameters (for error columns)."""

    n_buses: int
    generators: list[int]
    loads: list[int]
    susceptance: np.ndarray
    p_mech: np.ndarray
    p_load: np.ndarray
    m_true: np.ndarray  # aligned with generators
    d_true: np.ndarray  # aligned with bus index


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    delta: np.ndarray  # (T, n_buses)
    omega: np.ndarray  # (T, n_generators)


def read_case(path: str | Path) -> GridData:
    raw = json.loads(Path(path).read_text())
    n = int(raw["n_buses"])
    gens = [int(b) - 1 for b in raw["generators"]]
    loads = [int(b) - 1 for b in raw["loads"]]
    return GridData(
        n_buses=n,
        generators=gens,
        loads=loads,
        susceptance=np.asarray(raw["susceptance"], dtype=float),
        p_mech=np.array([float(raw["p_mech"][str(b + 1)]) for b in gens]),
        p_load=np.array([float(raw["p_load"][str(b + 1)]) for b in loads]),
        m_true=np.array([float(raw["true_params"]["M"][str(b + 1)]) for b in gens]),
        d_true=np.array([float(raw["true_params"]["D"][str(b + 1)]) for b in range(n)]),
    )


def read_trajectory(path: str | Path) -> Trajectory:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader if row]
    n = sum(1 for h in header if h.startswith("delta_"))
    g = sum(1 for h in header if h.startswith("omega_g"))
    if header[0] != "t" or n == 0 or len(header) != 1 + n + g:
        raise ValueError(f"unrecognized trajectory header: {header}")
    data = np.asarray(rows)
    return Trajectory(times=data[:, 0], delta=data[:, 1 : 1 + n], omega=data[:, 1 + n :])


def write_estimate_rows(grid: GridData, m_hat: np.ndarray, d_hat: np.ndarray, path: str | Path) -> list[dict]:
    """Per-bus estimate rows in the shared schema; returns what was written."""
    rows = []
    for bus in range(grid.n_buses):
        if bus in grid.generators:
            g = grid.generators.index(bus)
            m_val, m_true = float(m_hat[g]), float(grid.m_true[g])
        else:
            m_val = m_true = None
        d_val, d_true = float(d_hat[bus]), float(grid.d_true[bus])
        unphysical = d_val <= 0 or (m_val is not None and m_val <= 0)
        rows.append(
            {
                "bus": bus + 1,
                "kind": "gen" if bus in grid.generators else "load",
                "M_hat": m_val,
                "D_hat": d_val,
                "residual": None,
                "rel_err_M": None if m_val is None else abs(m_val - m_true) / abs(m_true),
                "rel_err_D": abs(d_val - d_true) / abs(d_true),
                "status": "unphysical" if unphysical else "ok",
            }
        )
    Path(path).write_text(json.dumps(rows, indent=1) + "\n")
    return rows
