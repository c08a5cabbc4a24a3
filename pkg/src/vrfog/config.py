"""Simulation configuration and its defaults."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

from .engine import Topology
from .policy import PlacementSplit
from .workload import WorkloadParams

DEFAULT_SPLIT = PlacementSplit(1 / 3, 1 / 3, 1 / 3)


@dataclass(frozen=True)
class SimConfig:
    topology: Topology = field(default_factory=Topology)
    workload: WorkloadParams = field(default_factory=WorkloadParams)
    split: PlacementSplit = DEFAULT_SPLIT
    cache_s: float = 0.0
    congestion: float = 0.0
    catalog_n: int = 1000
    seed: int = 0
    replications: int = 10

    def __post_init__(self):
        if not 0.0 <= self.cache_s <= 1.0:
            raise ValueError(f"cache_s must lie in [0, 1], got {self.cache_s}")
        if not 0.0 <= self.congestion < 1.0:
            raise ValueError(f"congestion must lie in [0, 1), got {self.congestion}")
        if self.catalog_n < 1:
            raise ValueError("catalog_n must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be >= 0")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")

    @property
    def pareto_ratio(self) -> float:
        return self.workload.compute_spec.ratio

    def replace(self, **changes) -> "SimConfig":
        return dataclasses.replace(self, **changes)

    def with_topology(self, **changes) -> "SimConfig":
        return self.replace(topology=dataclasses.replace(self.topology, **changes))

    def with_workload(self, **changes) -> "SimConfig":
        return self.replace(workload=dataclasses.replace(self.workload, **changes))

    def with_ratio(self, demand: float, deadline: float | None = None) -> "SimConfig":
        """Set the support ratio of the demand laws (and optionally the deadline law)."""
        wp = self.workload
        changes = dict(compute_spec=dataclasses.replace(wp.compute_spec, ratio=demand),
                       delivery_spec=dataclasses.replace(wp.delivery_spec, ratio=demand))
        if deadline is not None:
            changes["deadline_spec"] = dataclasses.replace(wp.deadline_spec, ratio=deadline)
        return self.with_workload(**changes)
