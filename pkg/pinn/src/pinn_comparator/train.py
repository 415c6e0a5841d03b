"""Joint training of the trajectory network and the physical parameters."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch

from .io import GridData, Trajectory
from .losses import data_loss, grid_tensors, physics_loss
from .model import PinnConfig, TrajectoryNet, outputs_with_time_derivatives

__all__ = ["PinnResult", "TrainingDiverged", "train"]

torch.set_default_dtype(torch.float64)


class TrainingDiverged(RuntimeError):
    def __init__(self, epoch: int):
        super().__init__(f"loss became non-finite at epoch {epoch}")
        self.epoch = epoch


@dataclass
class PinnResult:
    """Parameters at the lowest total-loss iterate plus the loss history."""

    m_hat: np.ndarray
    d_hat: np.ndarray
    best_loss: float
    best_epoch: int
    final_l1: float
    final_l2: float
    init_loss: float
    curve: list[float] = field(repr=False, default_factory=list)


def train(grid: GridData, traj: Trajectory, config: PinnConfig = PinnConfig()) -> PinnResult:
    """Minimize data misfit + physics residual over network weights and the
    unknown inertia/damping, seeded and deterministic on CPU.

    The returned parameters belong to the best (lowest total loss) epoch,
    which for zero-epoch budgets is the untrained initialization.
    """
    torch.manual_seed(config.seed)
    net = TrajectoryNet(grid.n_buses, len(grid.generators), config)
    m = torch.nn.Parameter(torch.ones(len(grid.generators)))
    d = torch.nn.Parameter(torch.ones(grid.n_buses))
    grid_t = grid_tensors(grid)

    t_max = float(traj.times[-1])
    s = torch.as_tensor(traj.times / t_max).reshape(-1, 1).requires_grad_(True)
    delta_meas = torch.as_tensor(traj.delta)
    omega_meas = torch.as_tensor(traj.omega)

    def losses():
        delta_hat, omega_hat, ddelta_dt, domega_dt = outputs_with_time_derivatives(net, s, t_max)
        l1 = data_loss(delta_hat, omega_hat, delta_meas, omega_meas)
        l2 = physics_loss(delta_hat, omega_hat, ddelta_dt, domega_dt, grid_t, m, d)
        return l1, l2

    opt = torch.optim.Adam(list(net.parameters()) + [m, d], lr=config.learning_rate)
    gamma = config.lr_decay_total ** (1.0 / max(config.epochs, 1))
    sched = torch.optim.lr_scheduler.ExponentialLR(opt, gamma=gamma)

    l1, l2 = losses()
    init_loss = float((l1 + l2).item())
    best = (init_loss, 0, m.detach().clone(), d.detach().clone())
    final_l1, final_l2 = float(l1.item()), float(l2.item())
    curve = [init_loss]

    for epoch in range(1, config.epochs + 1):
        opt.zero_grad()
        l1, l2 = losses()
        total = l1 + l2
        if not torch.isfinite(total):
            raise TrainingDiverged(epoch)
        total.backward()
        opt.step()
        sched.step()
        value = float(total.item())
        curve.append(value)
        final_l1, final_l2 = float(l1.item()), float(l2.item())
        if value < best[0]:
            best = (value, epoch, m.detach().clone(), d.detach().clone())

    best_loss, best_epoch, m_best, d_best = best
    return PinnResult(
        m_hat=m_best.numpy(),
        d_hat=d_best.numpy(),
        best_loss=best_loss,
        best_epoch=best_epoch,
        final_l1=final_l1,
        final_l2=final_l2,
        init_loss=init_loss,
        curve=curve,
    )
