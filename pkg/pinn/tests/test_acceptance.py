"""Comparator acceptance: parameter recovery on the baseline system and the
documented failure contrast against the regression estimator on the slow
system. Both consume the primary toolkit strictly through its CLI and
files. Run with ``pytest -s`` for the PASS lines. Each training is a full
20k-epoch run (about two minutes on a laptop CPU).
"""

import csv
import json
import subprocess

import numpy as np

from pinn_comparator.io import read_case, read_trajectory
from pinn_comparator.model import PinnConfig
from pinn_comparator.train import train

from conftest import primary_case_path, simulate_trajectory

SEED = 7


def pinn_errors(case_name, tmp_path, *, noise, seed, init):
    grid = read_case(primary_case_path(case_name))
    traj = read_trajectory(simulate_trajectory(tmp_path, case_name, noise=noise, seed=seed, init=init))
    result = train(grid, traj, PinnConfig(epochs=20000, seed=0))
    errs = {}
    for g, bus in enumerate(grid.generators):
        errs[f"M_{g + 1}"] = abs(result.m_hat[g] - grid.m_true[g]) / grid.m_true[g]
    for bus in range(grid.n_buses):
        errs[f"D_{bus + 1}"] = abs(result.d_hat[bus] - grid.d_true[bus]) / grid.d_true[bus]
    return errs, result


def sindy_errors(case_name, tmp_path, *, noise, seed, init):
    """Reference errors through the primary CLI's JSON report (run 0 uses
    the same noise seed the trajectory above was generated with)."""
    out = tmp_path / f"sindy_{case_name}"
    subprocess.run(
        ["swingid", "estimate", "--case", case_name, "--noise", noise, "--runs", "1",
         "--seed", str(seed), "--init", init, "--out", str(out), "--format", "json", "--no-plot"],
        check=True, capture_output=True,
    )
    doc = json.loads((out / f"{case_name}_result.json").read_text())
    errs = {}
    gen_ordinal = 0
    for row in doc["runs"][0]["estimates"]:
        if row["kind"] == "gen":
            gen_ordinal += 1
            errs[f"M_{gen_ordinal}"] = row["rel_err_M"]
        errs[f"D_{row['bus']}"] = row["rel_err_D"]
    return errs


def test_system_a_recovery(tmp_path):
    """Most parameters within 10% on the baseline system, and the returned
    iterate's loss does not exceed the initialization loss."""
    errs, result = pinn_errors("case4_sysA", tmp_path, noise="gaussian:0.05", seed=SEED, init="spread:0.3")
    within = sum(1 for v in errs.values() if v <= 0.10)
    assert within > len(errs) / 2, errs
    assert result.best_loss <= result.init_loss
    print(f"\nPASS  comparator System A: {within}/{len(errs)} params within 10% "
          f"({ {k: round(100 * v, 1) for k, v in errs.items()} } %), "
          f"loss {result.init_loss:.3g} -> {result.best_loss:.3g}")


def test_system_c_contrast_with_regression(tmp_path):
    """On the slow system at least one comparator parameter error exceeds
    the regression estimator's by 5x or more."""
    pinn, _ = pinn_errors("case4_sysC", tmp_path, noise="gaussian:0.05", seed=SEED, init="zero")
    sindy = sindy_errors("case4_sysC", tmp_path, noise="gaussian:0.05", seed=SEED, init="zero")
    ratios = {}
    for param, p_err in pinn.items():
        s_err = sindy.get(param)
        if s_err is not None and s_err > 0:
            ratios[param] = p_err / s_err
    assert ratios and max(ratios.values()) >= 5.0, {
        "pinn_pct": {k: round(100 * v, 1) for k, v in pinn.items()},
        "sindy_pct": {k: round(100 * v, 1) for k, v in sindy.items()},
    }
    worst = max(ratios, key=ratios.get)
    print(f"\nPASS  comparator System C contrast: {worst} ratio {ratios[worst]:.1f}x "
          f"(pinn {100 * pinn[worst]:.1f}% vs regression {100 * sindy[worst]:.1f}%)")
