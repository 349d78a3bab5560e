"""Grid sweeps and multi-trajectory studies"""

from .runner import SweepGrid, SweepRecord, SweepResult, point_seed, run_sweep
from .studies import config_for_point, dephasing_study, named_points, noise_study

__all__ = [
    "SweepGrid",
    "SweepRecord",
    "SweepResult",
    "config_for_point",
    "dephasing_study",
    "named_points",
    "noise_study",
    "point_seed",
    "run_sweep",
]
