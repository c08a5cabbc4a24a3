"""Independent checks for the engine: a textbook formula and a dense replay.

Nothing here shares code with the event loop.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._accel import njit

MAX_TINY_JOBS = 50


def mm1_ps_mean_sojourn(arrival_rate: float, mean_work: float, capacity: float) -> float:
    """Mean time in system of an M/M/1 processor-sharing queue."""
    rho = arrival_rate * mean_work / capacity
    if rho >= 1:
        raise ValueError(f"unstable queue: utilization {rho:.4g} >= 1")
    return (mean_work / capacity) / (1.0 - rho)


@dataclass(frozen=True)
class TinyInstance:
    arrivals: tuple[float, ...]
    works: tuple[float, ...]

    def __post_init__(self):
        if len(self.arrivals) != len(self.works):
            raise ValueError("arrivals and works differ in length")
        if len(self.works) > MAX_TINY_JOBS:
            raise ValueError(f"at most {MAX_TINY_JOBS} jobs")
        if any(w <= 0 for w in self.works):
            raise ValueError("works must be > 0")

    @classmethod
    def random(cls, rng: np.random.Generator, n_jobs: int, span: float = 5.0,
               mean_work: float = 0.5) -> "TinyInstance":
        arr = np.sort(rng.random(n_jobs) * span)
        works = rng.exponential(mean_work, n_jobs) + 1e-3
        return cls(tuple(arr), tuple(works))


@njit(cache=True)
def _euler(arrivals, works, capacity, dt):
    n = arrivals.shape[0]
    remaining = works.copy()
    done = np.full(n, np.nan)
    started = np.zeros(n, dtype=np.bool_)
    left = n
    t = arrivals.min()
    while left > 0:
        active = 0
        for i in range(n):
            if not started[i] and arrivals[i] <= t:
                started[i] = True
            if started[i] and np.isnan(done[i]):
                active += 1
        if active == 0:
            nxt = np.inf
            for i in range(n):
                if not started[i] and arrivals[i] < nxt:
                    nxt = arrivals[i]
            t = nxt
            continue
        drain = capacity / active * dt
        for i in range(n):
            if started[i] and np.isnan(done[i]):
                remaining[i] -= drain
                if remaining[i] <= 0.0:
                    done[i] = t + dt
                    left -= 1
        t += dt
    return done


def dense_replay(instance: TinyInstance, capacity: float, dt: float = 1e-4) -> np.ndarray:
    """Completion times by explicit Euler steps of processor-sharing dynamics."""
    if not dt > 0:
        raise ValueError("dt must be > 0")
    return _euler(np.asarray(instance.arrivals, dtype=float),
                  np.asarray(instance.works, dtype=float), float(capacity), float(dt))
