"""Discrete-event simulator of VR task offloading over device, fog and cloud tiers."""
from ._accel import NUMBA
from .config import SimConfig
from .engine import Topology, run, simulate
from .metrics import immersive_experience, summarize
from .policy import PlacementSplit
from .workload import Placement, PowerLawSpec, WorkloadParams

__all__ = [
    "NUMBA", "Placement", "PlacementSplit", "PowerLawSpec", "SimConfig", "Topology",
    "WorkloadParams", "immersive_experience", "run", "simulate", "summarize",
]
__version__ = "0.1.0"
