"""Immersive experience, run summaries and curve/summary file output."""
from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .workload import Placement

Z95 = 1.959963984540054


class NoTasksError(ValueError):
    """Raised when a metric is asked for over an empty record set."""


def _columns(records):
    """(delay, deadline, hit, placement) arrays from a RunResult or TaskRecords."""
    if hasattr(records, "stage_done"):
        if len(records) == 0:
            raise NoTasksError("no tasks")
        return records.delay, records.deadline, records.cache_hit, records.placement
    records = list(records)
    if not records:
        raise NoTasksError("no tasks")
    delay = np.array([r.completion_time - r.release_time for r in records])
    deadline = np.array([r.deadline for r in records])
    hit = np.array([bool(r.cache_hit) for r in records])
    placement = np.array([int(r.placement) for r in records])
    return delay, deadline, hit, placement


def immersive_experience(records) -> float:
    """Fraction of tasks delivered within their own deadline."""
    delay, deadline, _, _ = _columns(records)
    return float(np.count_nonzero(delay <= deadline)) / len(delay)


@dataclass(frozen=True)
class RunSummary:
    total_tasks: int
    met_deadline_count: int
    immersive_experience: float
    mean_delay_ms: float
    median_delay_ms: float
    p95_delay_ms: float
    cache_hit_fraction: float
    local_tasks: int
    fog_tasks: int
    cloud_tasks: int

    def to_dict(self) -> dict:
        return asdict(self)


def summarize(records) -> RunSummary:
    delay, deadline, hit, placement = _columns(records)
    n = len(delay)
    met = int(np.count_nonzero(delay <= deadline))
    return RunSummary(
        total_tasks=n,
        met_deadline_count=met,
        immersive_experience=met / n,
        mean_delay_ms=float(delay.mean()),
        median_delay_ms=float(np.median(delay)),
        p95_delay_ms=float(np.percentile(delay, 95)),
        cache_hit_fraction=float(np.count_nonzero(hit)) / n,
        local_tasks=int(np.count_nonzero(placement == Placement.LOCAL)),
        fog_tasks=int(np.count_nonzero(placement == Placement.FOG)),
        cloud_tasks=int(np.count_nonzero(placement == Placement.CLOUD)),
    )


def mean_ci(values: Sequence[float], z: float = Z95) -> tuple[float, float, float]:
    """Mean and normal-approximation CI over replications; degenerate for n=1."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("no replications")
    m = float(v.mean())
    if v.size == 1:
        return m, m, m
    half = z * float(v.std(ddof=1)) / math.sqrt(v.size)
    return m, m - half, m + half


def _atomic_write(destination, text: str) -> None:
    dest = Path(destination)
    dest.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=dest.parent, prefix=f".{dest.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, dest)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit_curve(points, destination) -> Path:
    """Write ``x,ie[,ci_low,ci_high]`` rows; x must be strictly increasing."""
    xs = [p[0] for p in points]
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise ValueError("curve x values must be strictly increasing")
    lines = [",".join(repr(float(v)) for v in p) for p in points]
    _atomic_write(destination, "".join(line + "\n" for line in lines))
    return Path(destination)


def emit_json(obj, destination) -> Path:
    _atomic_write(destination, json.dumps(obj, indent=2, sort_keys=True) + "\n")
    return Path(destination)
