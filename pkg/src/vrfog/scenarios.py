"""Case-study presets and the replicated sweep driver."""
from __future__ import annotations

import dataclasses
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .config import SimConfig
from .engine import simulate
from .metrics import emit_curve, emit_json, mean_ci, summarize
from .policy import PlacementSplit

log = logging.getLogger(__name__)

GHZ_CORE = 3.4
CORES = 4


def _percent(a, b, c) -> PlacementSplit:
    return PlacementSplit.from_percent(a, b, c)


def _grid(start, stop, num) -> tuple[float, ...]:
    return tuple(float(v) for v in np.round(np.linspace(start, stop, num), 10))


LOAD_GRID = _grid(0.02, 0.50, 13)
PROACTIVITY_GRID = _grid(0.0, 1.0, 11)
CONGESTION_GRID = tuple(sorted(set(_grid(0.0, 0.9, 10)) | {0.42}))


@dataclass(frozen=True)
class Preset:
    """A base configuration plus the parameter swept for one curve."""

    scenario: str
    name: str
    config: SimConfig
    axis: str
    grid: tuple[float, ...]
    pin_cache: bool = False  # reactive curves keep S = 0 whatever the axis says

    @property
    def slug(self) -> str:
        return self.name.replace(" ", "_")

    def at(self, value: float) -> SimConfig:
        if self.axis == "arrival_density":
            return self.config.with_workload(arrival_density=value)
        if self.axis == "cache_s":
            return self.config.replace(cache_s=0.0 if self.pin_cache else value)
        if self.axis == "congestion":
            return self.config.replace(congestion=value)
        raise ValueError(f"unknown axis {self.axis!r}")


CS1_NAMES = ("VR I", "VR II", "Fog I", "Fog II", "Cloud I", "Cloud II")
CS2_NAMES = tuple(f"{mode} {h}" for mode in ("Reactive", "Proactive") for h in "LMH")
CS3_NAMES = tuple(f"{p} {m}" for p in ("VR", "Fog", "Cloud") for m in "RP")

_CS1 = {
    "VR I": (dict(device_cpu=2 * 3.2), (37, 33, 30)),
    "VR II": (dict(device_cpu=1 * 3.2), (59, 25, 16)),
    "Fog I": (dict(fog_cpu=256 * CORES * GHZ_CORE, wireless_total=1024.0), (30, 37, 33)),
    "Fog II": (dict(fog_cpu=16 * CORES * GHZ_CORE, wireless_total=256.0), (16, 59, 25)),
    "Cloud I": (dict(cloud_cpu=1024 * CORES * GHZ_CORE, backhaul_total=512.0), (30, 33, 37)),
    "Cloud II": (dict(cloud_cpu=128 * CORES * GHZ_CORE, backhaul_total=16.0), (16, 25, 59)),
}
_HOMOGENEITY = {"L": 0.1, "M": 0.6, "H": 0.8}
_CS3_SPLITS = {"VR": (50, 30, 20), "Fog": (20, 50, 30), "Cloud": (20, 30, 50)}


def preset_cs1(name: str, base: Optional[SimConfig] = None) -> Preset:
    if name not in _CS1:
        raise KeyError(f"unknown cs1 preset {name!r}; expected one of {CS1_NAMES}")
    topo, split = _CS1[name]
    cfg = (base or SimConfig()).with_topology(**topo).replace(split=_percent(*split), cache_s=0.0)
    return Preset("cs1", name, cfg, "arrival_density", LOAD_GRID)


def preset_cs2(name: str, base: Optional[SimConfig] = None) -> Preset:
    try:
        mode, level = name.split()
        alpha = _HOMOGENEITY[level]
        if mode not in ("Reactive", "Proactive"):
            raise ValueError
    except (ValueError, KeyError):
        raise KeyError(f"unknown cs2 preset {name!r}; expected one of {CS2_NAMES}") from None
    cfg = ((base or SimConfig()).with_topology(backhaul_total=64.0)
           .with_workload(tasks_per_device_exponent=alpha)
           .replace(split=_percent(16, 25, 59), cache_s=0.0))
    return Preset("cs2", name, cfg, "cache_s", PROACTIVITY_GRID, pin_cache=(mode == "Reactive"))


def preset_cs3(name: str, base: Optional[SimConfig] = None) -> Preset:
    try:
        place, mode = name.split()
        split = _CS3_SPLITS[place]
        cache = {"R": 0.0, "P": 0.8}[mode]
    except (ValueError, KeyError):
        raise KeyError(f"unknown cs3 preset {name!r}; expected one of {CS3_NAMES}") from None
    cfg = ((base or SimConfig()).with_topology(backhaul_total=64.0)
           .replace(split=_percent(*split), cache_s=cache))
    return Preset("cs3", name, cfg, "congestion", CONGESTION_GRID)


PRESETS: dict[str, tuple[Callable[..., Preset], tuple[str, ...]]] = {
    "cs1": (preset_cs1, CS1_NAMES),
    "cs2": (preset_cs2, CS2_NAMES),
    "cs3": (preset_cs3, CS3_NAMES),
}


def presets(scenario: str, names: Optional[Sequence[str]] = None,
            base: Optional[SimConfig] = None) -> list[Preset]:
    factory, all_names = PRESETS[scenario]
    return [factory(n, base) for n in (names or all_names)]


@dataclass
class CurvePoint:
    x: float
    ies: list[float]              # one per replication, seed order
    summaries: list[dict] = field(default_factory=list)
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def stats(self) -> tuple[float, float, float]:
        return mean_ci(self.ies)


@dataclass
class Curve:
    preset: Preset
    seeds: tuple[int, ...]
    points: list[CurvePoint]

    def point(self, x: float) -> CurvePoint:
        for p in self.points:
            if abs(p.x - x) < 1e-9:
                return p
        raise KeyError(x)

    def rows(self) -> list[tuple[float, float, float, float]]:
        return [(p.x, *p.stats()) for p in self.points if p.ok]

    def summary(self) -> dict:
        return {
            "scenario": self.preset.scenario,
            "preset": self.preset.name,
            "axis": self.preset.axis,
            "seeds": list(self.seeds),
            "points": [
                {"x": p.x, "error": p.error, "immersive_experience": p.ies,
                 **(dict(zip(("ie_mean", "ci_low", "ci_high"), p.stats())) if p.ok else {}),
                 "runs": p.summaries}
                for p in self.points
            ],
        }


def _run_point(job):
    config, seeds = job
    ies, sums = [], []
    try:
        for s in seeds:
            summary = summarize(simulate(config.replace(seed=s)))
            ies.append(summary.immersive_experience)
            sums.append(summary.to_dict())
    except Exception as exc:  # one bad point must not sink the sweep
        return [], [], f"{type(exc).__name__}: {exc}"
    return ies, sums, None


def run_sweep(preset: Preset, grid: Optional[Sequence[float]] = None,
              replications: Optional[int] = None, seeds: Optional[Sequence[int]] = None,
              jobs: int = 1) -> Curve:
    """Replicate every grid point over the same seed list (common random numbers)."""
    grid = tuple(preset.grid if grid is None else grid)
    if seeds is None:
        reps = replications or preset.config.replications
        seeds = tuple(preset.config.seed + k for k in range(reps))
    seeds = tuple(seeds)
    work = [(preset.at(x), seeds) for x in grid]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_point, work))
    else:
        results = [_run_point(w) for w in work]
    points = []
    for x, (ies, sums, err) in zip(grid, results):
        if err:
            log.error("%s %s=%g failed: %s", preset.name, preset.axis, x, err)
        points.append(CurvePoint(x, ies, sums, err))
    return Curve(preset, seeds, points)


def write_curve(curve: Curve, out_dir, fmt: str = "csv") -> list[Path]:
    base = Path(out_dir) / curve.preset.scenario
    written = []
    if fmt in ("csv", "both"):
        written.append(emit_curve(curve.rows(), base / f"{curve.preset.slug}.csv"))
    if fmt in ("json", "both"):
        written.append(emit_json(curve.summary(), base / f"{curve.preset.slug}.json"))
    return written


def write_sweep_summary(curves: Sequence[Curve], out_dir, scenario: str) -> Path:
    return emit_json({"scenario": scenario, "curves": [c.summary() for c in curves]},
                     Path(out_dir) / scenario / "summary.json")


def paired_margin(a: CurvePoint, b: CurvePoint) -> tuple[float, float, float]:
    """Mean and CI of the per-seed IE difference a - b (same seed list)."""
    if len(a.ies) != len(b.ies):
        raise ValueError("points were replicated over different seed lists")
    return mean_ci(np.subtract(a.ies, b.ies))
