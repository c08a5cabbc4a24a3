"""Placement splits, proactive fog cache and wireless congestion."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .workload import Catalog, Placement


@dataclass(frozen=True)
class PlacementSplit:
    p_local: float
    p_fog: float
    p_cloud: float

    def __post_init__(self):
        probs = (self.p_local, self.p_fog, self.p_cloud)
        if any(not 0.0 <= p <= 1.0 for p in probs):
            raise ValueError(f"split probabilities must lie in [0, 1], got {probs}")
        if abs(sum(probs) - 1.0) > 1e-12:
            raise ValueError(f"split must sum to 1, got {sum(probs)!r}")

    @classmethod
    def from_percent(cls, local, fog, cloud) -> "PlacementSplit":
        # percent triples like (16, 25, 59) are exact in hundredths
        return cls(local / 100, fog / 100, 1.0 - local / 100 - fog / 100)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.p_local, self.p_fog, self.p_cloud)


def assign_placements(split: PlacementSplit, rng: np.random.Generator, size: int) -> np.ndarray:
    u = rng.random(size)
    out = np.full(size, Placement.CLOUD, dtype=np.int64)
    out[u < split.p_local + split.p_fog] = Placement.FOG
    out[u < split.p_local] = Placement.LOCAL
    return out


def assign_placement(split: PlacementSplit, rng: np.random.Generator) -> Placement:
    return Placement(int(assign_placements(split, rng, 1)[0]))


@dataclass(frozen=True)
class CacheState:
    """Top-ranked task types whose results are pre-stored at every fog node."""

    storage_fraction: float
    n_cached: int
    catalog_size: int

    @property
    def cached_ranks(self) -> frozenset[int]:
        return frozenset(range(1, self.n_cached + 1))

    def hits(self, ranks) -> np.ndarray:
        """Vectorized lookup over an array of ranks."""
        return np.asarray(ranks) <= self.n_cached


EMPTY_CACHE = CacheState(0.0, 0, 0)


def build_cache(catalog: Catalog, storage_fraction: float) -> CacheState:
    if not 0.0 <= storage_fraction <= 1.0:
        raise ValueError(f"storage fraction must lie in [0, 1], got {storage_fraction}")
    n = catalog.size
    # guard against 0.3*10 -> 3.0000000000000004 rounding up to 4
    k = math.ceil(round(storage_fraction * n, 9))
    if storage_fraction > 0:
        k = max(k, 1)  # empty only when S is exactly zero
    return CacheState(storage_fraction, min(k, n), n)


def lookup(cache: CacheState, type_rank: int) -> bool:
    return 1 <= type_rank <= cache.n_cached


def analytic_hit_rate(catalog: Catalog, storage_fraction: float) -> float:
    k = build_cache(catalog, storage_fraction).n_cached
    return float(catalog.popularity[:k].sum()) if k else 0.0


def apply_congestion(topology, congestion: float):
    """Scale the total wireless capacity by ``1 - congestion``."""
    if not 0.0 <= congestion < 1.0:
        raise ValueError(f"congestion must lie in [0, 1), got {congestion}")
    return dataclasses.replace(topology, wireless_total=topology.wireless_total * (1.0 - congestion))
