"""Device/fog/cloud topology, task routing and the discrete-event run.

Times are in ms. CPU capacities are Gcycles/s and link capacities Mb/s, as in
the configuration; the kernel works per ms.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from . import _kernels
from .policy import EMPTY_CACHE, CacheState, assign_placements, build_cache, apply_congestion
from .workload import (Catalog, Placement, TaskRequest, TaskTable, build_catalog, concat_tasks,
                       shot_table, task_table, tasks_from_requests)

MAX_STAGES = 3
NEG_WORK_TOL = 1e-9


class EngineFault(RuntimeError):
    """Internal inconsistency of the event loop; never a user error."""


@dataclass(frozen=True)
class Topology:
    n_fog: int = 4
    device_cpu: float = 4 * 3.4          # Gcycles/s per device
    fog_cpu: float = 128 * 4 * 3.4       # Gcycles/s per fog node
    cloud_cpu: float = 1024 * 4 * 3.4    # Gcycles/s
    wireless_total: float = 1024.0       # Mb/s, split evenly over fog nodes
    backhaul_total: float = 512.0        # Mb/s, one shared link

    def __post_init__(self):
        if self.n_fog < 1:
            raise ValueError("n_fog must be >= 1")
        for name in ("device_cpu", "fog_cpu", "cloud_cpu", "wireless_total", "backhaul_total"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")

    @property
    def wireless_per_fog(self) -> float:
        return self.wireless_total / self.n_fog

    def capacity(self, rid: "ResourceId") -> float:
        return {
            ResourceKind.DEVICE_CPU: self.device_cpu,
            ResourceKind.FOG_CPU: self.fog_cpu,
            ResourceKind.CLOUD_CPU: self.cloud_cpu,
            ResourceKind.WIRELESS: self.wireless_per_fog,
            ResourceKind.BACKHAUL: self.backhaul_total,
        }[rid.kind]


class ResourceKind(Enum):
    DEVICE_CPU = "device_cpu"
    FOG_CPU = "fog_cpu"
    CLOUD_CPU = "cloud_cpu"
    WIRELESS = "wireless"
    BACKHAUL = "backhaul"


@dataclass(frozen=True)
class ResourceId:
    kind: ResourceKind
    index: int = 0  # device id or fog id (1..M); unused for cloud/backhaul


StagePlan = list  # list[tuple[ResourceId, float]]


@dataclass
class Resource:
    """A processor-sharing resource tracked by explicit remaining work.

    ``capacity`` is in work units per ms. ``remaining`` maps job keys to work.
    """

    id: ResourceId
    capacity: float
    remaining: dict = field(default_factory=dict)
    last_update: float = 0.0

    def add(self, key, work: float, now: float) -> None:
        advance_resource(self, now)
        self.remaining[key] = float(work)

    def next_completion(self) -> float:
        if not self.remaining:
            return np.inf
        n = len(self.remaining)
        return self.last_update + min(self.remaining.values()) * n / self.capacity

    def pop_finished(self, tol: float = 1e-12) -> list:
        done = [k for k, w in self.remaining.items() if w <= tol]
        for k in done:
            del self.remaining[k]
        return done


def advance_resource(resource: Resource, now: float) -> Resource:
    dt = now - resource.last_update
    if dt < 0:
        raise EngineFault(f"cannot advance {resource.id} backwards ({dt})")
    if resource.remaining and dt > 0:
        share = dt * resource.capacity / len(resource.remaining)
        for k, w in resource.remaining.items():
            left = w - share
            if left < -NEG_WORK_TOL * max(1.0, w):
                raise EngineFault(f"job {k} on {resource.id} overshot by {-left}")
            resource.remaining[k] = max(left, 0.0)
    resource.last_update = now
    return resource


def route(task: TaskRequest, topology: Topology, cache: CacheState = EMPTY_CACHE) -> StagePlan:
    f = task.fog_id
    wireless = (ResourceId(ResourceKind.WIRELESS, f), task.delivery_size)
    placement = Placement(task.placement)
    if placement == Placement.LOCAL:
        return [(ResourceId(ResourceKind.DEVICE_CPU, task.device_id), task.compute_demand)]
    if placement not in (Placement.FOG, Placement.CLOUD):
        raise ValueError(f"cannot route placement {placement!r}")
    if cache.hits(task.type_rank):
        return [wireless]
    if placement == Placement.FOG:
        return [(ResourceId(ResourceKind.FOG_CPU, f), task.compute_demand), wireless]
    return [(ResourceId(ResourceKind.CLOUD_CPU), task.compute_demand),
            (ResourceId(ResourceKind.BACKHAUL), task.delivery_size), wireless]


@dataclass(frozen=True)
class TaskRecord:
    id: int
    release_time: float
    completion_time: float
    deadline: float
    placement: Placement
    cache_hit: bool
    stage_delays: tuple

    @property
    def delay(self) -> float:
        return self.completion_time - self.release_time

    @property
    def met_deadline(self) -> bool:
        return self.delay <= self.deadline


@dataclass
class RunResult:
    """Column-form trace of one run."""

    tasks: TaskTable
    cache_hit: np.ndarray
    n_stages: np.ndarray
    stage_done: np.ndarray  # (n, MAX_STAGES), NaN for unused stages

    def __len__(self):
        return len(self.tasks)

    @property
    def completion_time(self) -> np.ndarray:
        idx = np.arange(len(self))
        return self.stage_done[idx, self.n_stages - 1] if len(self) else np.zeros(0)

    @property
    def delay(self) -> np.ndarray:
        return self.completion_time - self.tasks.release_time

    @property
    def deadline(self) -> np.ndarray:
        return self.tasks.deadline

    @property
    def placement(self) -> np.ndarray:
        return self.tasks.placement

    def stage_delays(self) -> np.ndarray:
        prev = np.column_stack([self.tasks.release_time, self.stage_done[:, :-1]])
        return self.stage_done - prev

    def records(self) -> list[TaskRecord]:
        comp = self.completion_time
        delays = self.stage_delays()
        t = self.tasks
        return [TaskRecord(i, float(t.release_time[i]), float(comp[i]), float(t.deadline[i]),
                           Placement(int(t.placement[i])), bool(self.cache_hit[i]),
                           tuple(float(x) for x in delays[i, :self.n_stages[i]]))
                for i in range(len(self))]


def stage_arrays(tasks: TaskTable, topology: Topology, cache: CacheState = EMPTY_CACHE):
    """Vectorized :func:`route` over a task table.

    Resource layout: fog CPUs 0..M-1, wireless M..2M-1, cloud CPU 2M,
    backhaul 2M+1, device CPUs from 2M+2. Returns per-ms capacities too.
    """
    n = len(tasks)
    m = topology.n_fog
    fog0 = tasks.fog_id - 1
    pl = tasks.placement
    if np.any((pl < Placement.LOCAL) | (pl > Placement.CLOUD)):
        raise ValueError("every task needs a placement before routing")
    local = pl == Placement.LOCAL
    hit = ~local & cache.hits(tasks.type_rank)
    fog_miss = (pl == Placement.FOG) & ~hit
    cloud_miss = (pl == Placement.CLOUD) & ~hit

    res = np.zeros((n, MAX_STAGES), dtype=np.int64)
    work = np.zeros((n, MAX_STAGES))
    nst = np.ones(n, dtype=np.int64)
    wl = m + fog0

    res[local, 0] = 2 * m + 2 + tasks.device_id[local]
    work[local, 0] = tasks.compute_demand[local]

    res[hit, 0] = wl[hit]
    work[hit, 0] = tasks.delivery_size[hit]

    nst[fog_miss] = 2
    res[fog_miss, 0] = fog0[fog_miss]
    work[fog_miss, 0] = tasks.compute_demand[fog_miss]
    res[fog_miss, 1] = wl[fog_miss]
    work[fog_miss, 1] = tasks.delivery_size[fog_miss]

    nst[cloud_miss] = 3
    res[cloud_miss, 0] = 2 * m
    work[cloud_miss, 0] = tasks.compute_demand[cloud_miss]
    res[cloud_miss, 1] = 2 * m + 1
    work[cloud_miss, 1] = tasks.delivery_size[cloud_miss]
    res[cloud_miss, 2] = wl[cloud_miss]
    work[cloud_miss, 2] = tasks.delivery_size[cloud_miss]

    n_dev = int(tasks.device_id.max()) + 1 if n else 0
    cap = np.empty(2 * m + 2 + n_dev)
    cap[:m] = topology.fog_cpu
    cap[m:2 * m] = topology.wireless_per_fog
    cap[2 * m] = topology.cloud_cpu
    cap[2 * m + 1] = topology.backhaul_total
    cap[2 * m + 2:] = topology.device_cpu
    return nst, res, work, cap / 1000.0, hit


def execute(tasks: TaskTable, topology: Topology, cache: CacheState = EMPTY_CACHE) -> RunResult:
    """Run already-placed tasks through the network."""
    nst, res, work, cap, hit = stage_arrays(tasks, topology, cache)
    try:
        done = _kernels.ps_network(tasks.release_time, nst, res, work, cap)
    except RuntimeError as exc:
        if "engine fault" in str(exc):
            raise EngineFault(str(exc)) from exc
        raise
    return RunResult(tasks, hit, nst, done)


@dataclass
class Streams:
    catalog: np.random.Generator
    shots: np.random.Generator
    tasks: np.random.Generator
    placement: np.random.Generator

    @classmethod
    def from_seed(cls, seed: int) -> "Streams":
        children = np.random.SeedSequence(seed).spawn(4)
        return cls(*(np.random.default_rng(c) for c in children))


def build_workload(config, catalog: Optional[Catalog] = None) -> tuple[Catalog, TaskTable]:
    """Catalog plus placed task table for ``config``; deterministic in the seed."""
    streams = Streams.from_seed(config.seed)
    wp = config.workload
    if catalog is None:
        catalog = build_catalog(config.catalog_n, wp.tasks_per_device_exponent,
                                wp.compute_spec, wp.delivery_spec, streams.catalog)
    shots = shot_table(wp, config.topology.n_fog, streams.shots)
    tasks = task_table(shots, catalog, wp, streams.tasks)
    tasks.placement = assign_placements(config.split, streams.placement, len(tasks))
    return catalog, tasks


def simulate(config, extra_tasks=()) -> RunResult:
    """One replication of ``config`` in column form.

    ``extra_tasks`` are injected :class:`TaskRequest` objects with their
    placement set; their demands are taken as given.
    """
    catalog, tasks = build_workload(config)
    if extra_tasks:
        injected = tasks_from_requests(extra_tasks)
        injected.device_id = injected.device_id + (int(tasks.device_id.max()) + 1 if len(tasks) else 0)
        tasks = concat_tasks([tasks, injected])
    cache = build_cache(catalog, config.cache_s)
    topo = apply_congestion(config.topology, config.congestion)
    return execute(tasks, topo, cache)


def run_single_resource(arrivals, works, capacity: float) -> np.ndarray:
    """Completion times of jobs on one PS resource (capacity per time unit)."""
    arrivals = np.asarray(arrivals, dtype=float)
    order = np.argsort(arrivals, kind="stable")
    n = len(arrivals)
    work = np.zeros((n, 1))
    work[:, 0] = np.asarray(works, dtype=float)[order]
    done = _kernels.ps_network(arrivals[order], np.ones(n, dtype=np.int64),
                               np.zeros((n, 1), dtype=np.int64), work, np.array([float(capacity)]))
    out = np.empty(n)
    out[order] = done[:, 0]
    return out


def run(config) -> list[TaskRecord]:
    return simulate(config).records()
