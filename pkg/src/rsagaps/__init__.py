"""Random sequential packing of rods and squares, classical and ghost variants."""
from .classical import PackingState, saturate_naive, saturate_split
from .ghost import GhostState, run_ghost_circle, run_ghost_interval
from .intervals import Interval, IntervalSet
from .rng import RngStream, trial_stream

__all__ = [
    "GhostState",
    "Interval",
    "IntervalSet",
    "PackingState",
    "RngStream",
    "run_ghost_circle",
    "run_ghost_interval",
    "saturate_naive",
    "saturate_split",
    "trial_stream",
]
__version__ = "0.1.0"
