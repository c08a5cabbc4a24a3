"""Stochastic workload: bounded power laws, task catalog, shot-noise devices.

Every sampler takes an explicit ``numpy.random.Generator``; nothing here keeps
random state of its own.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

DEFAULT_RATIO = 1e6
# run defaults: demand laws far heavier than the deadline law (see README, calibration)
DEMAND_RATIO = 1e9
DEADLINE_RATIO = 10.0


class Placement(IntEnum):
    LOCAL = 0
    FOG = 1
    CLOUD = 2
    UNASSIGNED = -1


def _mean_factor(exponent: float, ratio: float) -> float:
    """E[X]/L for the bounded Pareto on [L, ratio*L] with the given shape."""
    if ratio == 1.0:
        return 1.0
    log_r = math.log(ratio)
    tail = -math.expm1(-exponent * log_r)  # 1 - r**-a
    if exponent == 1.0:
        return log_r / tail
    # a/(1-a) * (r**(1-a) - 1), written to stay accurate for a near 1
    return exponent * math.expm1((1.0 - exponent) * log_r) / (1.0 - exponent) / tail


@dataclass(frozen=True)
class PowerLawSpec:
    """Bounded Pareto law described by its mean, shape and support ratio H/L."""

    mean: float
    exponent: float
    ratio: float = DEFAULT_RATIO

    def __post_init__(self):
        if not self.mean > 0:
            raise ValueError(f"mean must be > 0, got {self.mean}")
        if not self.exponent > 0:
            raise ValueError(f"exponent must be > 0, got {self.exponent}")
        if not self.ratio >= 1:
            raise ValueError(f"ratio must be >= 1, got {self.ratio}")

    @property
    def lower(self) -> float:
        return self.mean / _mean_factor(self.exponent, self.ratio)

    @property
    def upper(self) -> float:
        return self.lower * self.ratio

    def analytic_mean(self) -> float:
        return self.lower * _mean_factor(self.exponent, self.ratio)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        lo, a = self.lower, self.exponent
        if self.ratio == 1.0:
            return np.where(x >= lo, 1.0, 0.0)
        xc = np.clip(x, lo, self.upper)
        out = -np.expm1(a * np.log(lo / xc)) / -math.expm1(-a * math.log(self.ratio))
        return np.where(x < lo, 0.0, np.where(x >= self.upper, 1.0, out))

    def ppf(self, u):
        u = np.asarray(u, dtype=float)
        lo = self.lower
        if self.ratio == 1.0:
            return np.full(u.shape, lo) if u.ndim else lo
        tail = -math.expm1(-self.exponent * math.log(self.ratio))
        x = lo * (1.0 - u * tail) ** (-1.0 / self.exponent)
        return np.clip(x, lo, self.upper)


def sample_bounded_pareto(spec: PowerLawSpec, rng: np.random.Generator, size=None):
    """Inverse-CDF draw(s) from ``spec``; a scalar when ``size`` is None."""
    if spec.ratio == 1.0:
        # point mass: no randomness consumed
        return spec.mean if size is None else np.full(size, spec.mean)
    u = rng.random(size)
    x = spec.ppf(u)
    return float(x) if size is None else x


def task_count_spec(mean: float, exponent: float, ratio: Optional[float] = None) -> PowerLawSpec:
    """Law for the number of tasks per device.

    With ``ratio=None`` the support is pinned to start at one task and the upper
    bound is solved so the mean is exact; rounding then never needs the clamp.
    When the mean is out of reach for such a law (exponent above one) the
    default ratio is used instead.
    """
    if mean < 1:
        raise ValueError(f"mean task count must be >= 1, got {mean}")
    if ratio is not None:
        return PowerLawSpec(mean, exponent, ratio)
    if mean == 1.0:
        return PowerLawSpec(1.0, exponent, 1.0)
    # for exponent > 1 the mean of a law starting at one is capped at a/(a-1)
    if exponent > 1 and mean >= 0.999 * exponent / (exponent - 1):
        return PowerLawSpec(mean, exponent, DEFAULT_RATIO)
    gap = lambda r: _mean_factor(exponent, r) - mean
    hi = 2.0
    while gap(hi) < 0:
        hi *= 4.0
        if hi > 1e15 or not np.isfinite(gap(hi)):
            return PowerLawSpec(mean, exponent, DEFAULT_RATIO)
    r = brentq(gap, 1.0 + 1e-12, hi, xtol=1e-12, maxiter=200)
    return PowerLawSpec(mean, exponent, r)


def sample_task_count(mean: float, exponent: float, rng: np.random.Generator,
                      ratio: Optional[float] = None, size=None):
    spec = task_count_spec(mean, exponent, ratio)
    x = sample_bounded_pareto(spec, rng, size)
    n = np.maximum(np.rint(x), 1).astype(np.int64)
    return int(n) if size is None else n


@dataclass(frozen=True)
class CatalogEntry:
    rank: int
    popularity: float
    compute_demand: float
    delivery_size: float


@dataclass(frozen=True)
class Catalog:
    popularity_exponent: float
    popularity: np.ndarray      # index i -> rank i+1
    compute_demand: np.ndarray  # gigacycles
    delivery_size: np.ndarray   # megabits
    _cdf: np.ndarray = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        if self._cdf is None:
            cdf = np.cumsum(self.popularity)
            cdf[-1] = 1.0
            object.__setattr__(self, "_cdf", cdf)

    @property
    def size(self) -> int:
        return len(self.popularity)

    @property
    def entries(self) -> list[CatalogEntry]:
        return [CatalogEntry(i + 1, float(p), float(c), float(d)) for i, (p, c, d)
                in enumerate(zip(self.popularity, self.compute_demand, self.delivery_size))]


def zipf_weights(size: int, exponent: float) -> np.ndarray:
    if size < 1:
        raise ValueError("catalog size must be >= 1")
    if exponent < 0:
        raise ValueError("popularity exponent must be >= 0")
    w = np.arange(1, size + 1, dtype=float) ** -exponent
    return w / w.sum()


def build_catalog(size: int, popularity_exponent: float, compute_spec: PowerLawSpec,
                  delivery_spec: PowerLawSpec, rng: np.random.Generator) -> Catalog:
    pop = zipf_weights(size, popularity_exponent)
    compute = np.atleast_1d(sample_bounded_pareto(compute_spec, rng, size))
    delivery = np.atleast_1d(sample_bounded_pareto(delivery_spec, rng, size))
    return Catalog(popularity_exponent, pop, compute, delivery)


def sample_type(catalog: Catalog, rng: np.random.Generator, size=None):
    """Rank(s) drawn with probability proportional to popularity."""
    u = rng.random(size)
    idx = np.searchsorted(catalog._cdf, u, side="right")
    ranks = np.minimum(idx, catalog.size - 1) + 1
    return int(ranks) if size is None else ranks.astype(np.int64)


@dataclass(frozen=True)
class WorkloadParams:
    arrival_density: float = 0.42  # shots per ms
    horizon: float = 60_000.0      # ms
    dwell: float = 4.0             # ms
    tasks_per_device_mean: float = 4.0
    tasks_per_device_exponent: float = 0.8
    compute_spec: PowerLawSpec = PowerLawSpec(100.0, 0.48, DEMAND_RATIO)
    delivery_spec: PowerLawSpec = PowerLawSpec(100.0, 0.48, DEMAND_RATIO)
    deadline_spec: PowerLawSpec = PowerLawSpec(10.0, 0.48, DEADLINE_RATIO)
    task_count_ratio: Optional[float] = None

    def __post_init__(self):
        if self.arrival_density < 0:
            raise ValueError("arrival_density must be >= 0")
        if not self.horizon > 0 or not self.dwell > 0:
            raise ValueError("horizon and dwell must be > 0")
        if self.dwell > self.horizon:
            raise ValueError("dwell must not exceed horizon")
        if self.tasks_per_device_mean < 1:
            raise ValueError("tasks_per_device_mean must be >= 1")
        if not self.tasks_per_device_exponent > 0:
            raise ValueError("tasks_per_device_exponent must be > 0")


@dataclass(frozen=True)
class DeviceShot:
    id: int
    arrival_time: float
    dwell: float
    fog_id: int
    task_count: int


@dataclass
class TaskRequest:
    id: int
    device_id: int
    type_rank: int
    release_time: float
    deadline: float
    compute_demand: float
    delivery_size: float
    placement: Placement = Placement.UNASSIGNED
    fog_id: int = 1


@dataclass
class ShotTable:
    """Column form of a list of :class:`DeviceShot`."""

    arrival_time: np.ndarray
    fog_id: np.ndarray
    task_count: np.ndarray
    dwell: float

    def __len__(self):
        return len(self.arrival_time)

    def to_shots(self) -> list[DeviceShot]:
        return [DeviceShot(i, float(t), self.dwell, int(f), int(n)) for i, (t, f, n)
                in enumerate(zip(self.arrival_time, self.fog_id, self.task_count))]


@dataclass
class TaskTable:
    """Column form of the task requests of a run, ordered by release time."""

    device_id: np.ndarray
    fog_id: np.ndarray
    type_rank: np.ndarray
    release_time: np.ndarray
    deadline: np.ndarray
    compute_demand: np.ndarray
    delivery_size: np.ndarray
    placement: np.ndarray

    def __len__(self):
        return len(self.release_time)

    def to_requests(self) -> list[TaskRequest]:
        return [TaskRequest(i, int(self.device_id[i]), int(self.type_rank[i]),
                            float(self.release_time[i]), float(self.deadline[i]),
                            float(self.compute_demand[i]), float(self.delivery_size[i]),
                            Placement(int(self.placement[i])), int(self.fog_id[i]))
                for i in range(len(self))]

    def write_trace(self, path) -> None:
        """One CSV line per task, no header."""
        with open(path, "w") as fh:
            for i in range(len(self)):
                reals = (self.release_time[i], self.deadline[i], self.compute_demand[i],
                         self.delivery_size[i])
                fh.write(f"{i},{self.device_id[i]},{self.fog_id[i]},{self.type_rank[i]},"
                         + ",".join(repr(float(x)) for x in reals) + "\n")


def shot_table(params: WorkloadParams, n_fog: int, rng: np.random.Generator) -> ShotTable:
    """Poisson shot process on [0, horizon) with uniform fog association."""
    if n_fog < 1:
        raise ValueError("need at least one fog node")
    lam = params.arrival_density
    if lam == 0:
        empty_i = np.zeros(0, dtype=np.int64)
        return ShotTable(np.zeros(0), empty_i, empty_i.copy(), params.dwell)
    n = rng.poisson(lam * params.horizon)
    times = np.sort(rng.random(n) * params.horizon)
    fog = rng.integers(1, n_fog + 1, size=n)
    counts = sample_task_count(params.tasks_per_device_mean, params.tasks_per_device_exponent,
                               rng, params.task_count_ratio, size=n)
    return ShotTable(times, fog.astype(np.int64), counts, params.dwell)


def generate_shots(params: WorkloadParams, n_fog: int, rng: np.random.Generator) -> list[DeviceShot]:
    return shot_table(params, n_fog, rng).to_shots()


def task_table(shots: ShotTable, catalog: Catalog, params: WorkloadParams,
               rng: np.random.Generator) -> TaskTable:
    """Expand every shot into its task requests (placement left unassigned)."""
    counts = shots.task_count
    device = np.repeat(np.arange(len(shots), dtype=np.int64), counts)
    total = len(device)
    release = shots.arrival_time[device] + rng.random(total) * shots.dwell
    ranks = sample_type(catalog, rng, total)
    deadline = np.atleast_1d(sample_bounded_pareto(params.deadline_spec, rng, total))
    order = np.argsort(release, kind="stable")
    device, release, ranks, deadline = device[order], release[order], ranks[order], deadline[order]
    return TaskTable(
        device_id=device,
        fog_id=shots.fog_id[device],
        type_rank=ranks,
        release_time=release,
        deadline=deadline,
        compute_demand=catalog.compute_demand[ranks - 1],
        delivery_size=catalog.delivery_size[ranks - 1],
        placement=np.full(total, Placement.UNASSIGNED, dtype=np.int64),
    )


def generate_tasks(shot: DeviceShot, catalog: Catalog, params: WorkloadParams,
                   rng: np.random.Generator, first_id: int = 0) -> list[TaskRequest]:
    table = ShotTable(np.array([shot.arrival_time]), np.array([shot.fog_id]),
                      np.array([shot.task_count]), shot.dwell)
    tasks = task_table(table, catalog, params, rng).to_requests()
    for k, t in enumerate(tasks):
        t.id = first_id + k
        t.device_id = shot.id
    return tasks


def concat_tasks(tables: Sequence[TaskTable]) -> TaskTable:
    cols = {name: np.concatenate([getattr(t, name) for t in tables])
            for name in TaskTable.__dataclass_fields__}
    order = np.argsort(cols["release_time"], kind="stable")
    return TaskTable(**{k: v[order] for k, v in cols.items()})


def tasks_from_requests(requests: Iterable[TaskRequest]) -> TaskTable:
    reqs = sorted(requests, key=lambda r: (r.release_time, r.id))
    return TaskTable(
        device_id=np.array([r.device_id for r in reqs], dtype=np.int64),
        fog_id=np.array([r.fog_id for r in reqs], dtype=np.int64),
        type_rank=np.array([r.type_rank for r in reqs], dtype=np.int64),
        release_time=np.array([r.release_time for r in reqs], dtype=float),
        deadline=np.array([r.deadline for r in reqs], dtype=float),
        compute_demand=np.array([r.compute_demand for r in reqs], dtype=float),
        delivery_size=np.array([r.delivery_size for r in reqs], dtype=float),
        placement=np.array([int(r.placement) for r in reqs], dtype=np.int64),
    )
