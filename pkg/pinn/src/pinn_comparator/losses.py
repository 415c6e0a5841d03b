"""Data and physics losses.

The physics residuals are factored out so they can be evaluated on any
(outputs, derivatives) source: the training loop feeds network outputs with
autodiff time derivatives, tests feed manufactured trajectories with exact
derivatives.
"""

from __future__ import annotations

import torch

from .io import GridData

__all__ = ["data_loss", "physics_residuals", "physics_loss", "grid_tensors"]


def grid_tensors(grid: GridData):
    return {
        "susceptance": torch.as_tensor(grid.susceptance, dtype=torch.float64),
        "p_mech": torch.as_tensor(grid.p_mech, dtype=torch.float64),
        "p_load": torch.as_tensor(grid.p_load, dtype=torch.float64),
        "generators": torch.tensor(grid.generators),
        "loads": torch.tensor(grid.loads),
    }


def data_loss(delta_hat, omega_hat, delta_meas, omega_meas) -> torch.Tensor:
    """Mean over samples of the summed squared angle and frequency misfits."""
    if delta_hat.shape != delta_meas.shape or omega_hat.shape != omega_meas.shape:
        raise ValueError("network outputs and measurements are misaligned")
    per_sample = ((omega_hat - omega_meas) ** 2).sum(dim=1) + ((delta_hat - delta_meas) ** 2).sum(dim=1)
    return per_sample.mean()


def physics_residuals(delta_hat, omega_hat, ddelta_dt, domega_dt, grid_t, m, d):
    """The three residual families of the swing dynamics.

    f1: generator angle rate vs frequency output.
    f2: generator torque balance, f3: load power balance; both include the
    network coupling through sin of the predicted angle differences.
    """
    gens, loads = grid_t["generators"], grid_t["loads"]
    diff = delta_hat.unsqueeze(2) - delta_hat.unsqueeze(1)
    flows = (grid_t["susceptance"].unsqueeze(0) * torch.sin(diff)).sum(dim=2)
    f1 = ddelta_dt[:, gens] - omega_hat
    f2 = m * domega_dt + d[gens] * omega_hat - grid_t["p_mech"] + flows[:, gens]
    f3 = d[loads] * ddelta_dt[:, loads] + grid_t["p_load"] + flows[:, loads]
    return f1, f2, f3


def physics_loss(delta_hat, omega_hat, ddelta_dt, domega_dt, grid_t, m, d) -> torch.Tensor:
    f1, f2, f3 = physics_residuals(delta_hat, omega_hat, ddelta_dt, domega_dt, grid_t, m, d)
    return ((f1**2).sum(dim=1) + (f2**2).sum(dim=1) + (f3**2).sum(dim=1)).mean()
