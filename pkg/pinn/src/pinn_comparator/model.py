"""Network and configuration for the physics-informed comparator."""

from __future__ import annotations

from dataclasses import dataclass

import torch

__all__ = ["PinnConfig", "TrajectoryNet", "outputs_with_time_derivatives"]


@dataclass(frozen=True)
class PinnConfig:
    hidden_layers: int = 2
    neurons_per_layer: int = 30
    epochs: int = 20000
    learning_rate: float = 1e-3
    lr_decay_total: float = 0.1  # learning rate shrinks to this fraction by the last epoch
    seed: int = 0

    def __post_init__(self):
        if self.hidden_layers < 1 or self.neurons_per_layer < 1:
            raise ValueError("layer sizes must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")


class TrajectoryNet(torch.nn.Module):
    """Normalized time -> (angles for every bus, frequency per generator)."""

    def __init__(self, n_buses: int, n_generators: int, config: PinnConfig):
        super().__init__()
        self.n_buses = n_buses
        self.n_generators = n_generators
        width = config.neurons_per_layer
        layers: list[torch.nn.Module] = [torch.nn.Linear(1, width), torch.nn.Tanh()]
        for _ in range(config.hidden_layers - 1):
            layers += [torch.nn.Linear(width, width), torch.nn.Tanh()]
        layers.append(torch.nn.Linear(width, n_buses + n_generators))
        self.seq = torch.nn.Sequential(*layers)

    def forward(self, s: torch.Tensor) -> torch.Tensor:
        return self.seq(s)


def outputs_with_time_derivatives(net: TrajectoryNet, s: torch.Tensor, t_max: float):
    """(delta_hat, omega_hat, d delta/dt, d omega/dt) at the normalized
    times ``s``; derivatives come from automatic differentiation through
    the network, rescaled to real time by 1/t_max."""
    if not s.requires_grad:
        raise ValueError("normalized time tensor must require grad")
    out = net(s)
    cols = [
        torch.autograd.grad(out[:, k].sum(), s, create_graph=True)[0][:, 0]
        for k in range(out.shape[1])
    ]
    dout = torch.stack(cols, dim=1) / t_max
    n = net.n_buses
    return out[:, :n], out[:, n:], dout[:, :n], dout[:, n:]
