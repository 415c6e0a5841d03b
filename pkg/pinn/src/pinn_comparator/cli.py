"""Estimate grid parameters from a trajectory CSV with the physics-informed
network, emitting the shared per-bus estimate JSON."""

from __future__ import annotations

import argparse
import json
import sys

from .io import read_case, read_trajectory, write_estimate_rows
from .model import PinnConfig
from .train import train

__all__ = ["main"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pinn-estimate", description=__doc__)
    parser.add_argument("--case", required=True, help="case JSON path")
    parser.add_argument("--traj", required=True, help="trajectory CSV path")
    parser.add_argument("--out", required=True, help="estimate JSON output path")
    parser.add_argument("--epochs", type=int, default=20000)
    parser.add_argument("--lr", type=float, default=1e-3)
    parser.add_argument("--seed", type=int, default=0)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        grid = read_case(args.case)
        traj = read_trajectory(args.traj)
        config = PinnConfig(epochs=args.epochs, learning_rate=args.lr, seed=args.seed)
        result = train(grid, traj, config)
        write_estimate_rows(grid, result.m_hat, result.d_hat, args.out)
        print(
            f"best loss {result.best_loss:.6g} at epoch {result.best_epoch} "
            f"(init {result.init_loss:.6g}); wrote {args.out}"
        )
        return 0
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(json.dumps({"error": {"type": type(exc).__name__, "message": str(exc)}}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
