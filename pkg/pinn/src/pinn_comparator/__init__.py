"""Physics-informed neural comparator for grid parameter estimation.

Fits a small network mapping time to the grid trajectory while jointly
training the inertia and damping values that make the swing-equation
residuals vanish; consumes the estimation toolkit's case JSON and
trajectory CSV files and emits the same per-bus estimate JSON rows.
"""

from .io import GridData, Trajectory, read_case, read_trajectory, write_estimate_rows
from .losses import data_loss, grid_tensors, physics_loss, physics_residuals
from .model import PinnConfig, TrajectoryNet, outputs_with_time_derivatives
from .train import PinnResult, TrainingDiverged, train

__version__ = "0.1.0"
