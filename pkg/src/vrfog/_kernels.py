"""Event-loop kernel for networks of egalitarian processor-sharing resources.

Each resource keeps a virtual clock ``vtime``: the service every resident job
has received since the resource last went idle, growing at ``capacity / n``.
A job of work ``w`` joining at virtual time ``v`` leaves when the clock reaches
``v + w``; a per-resource min-heap of those finish marks gives the next
departure. This is the remaining-work update done once per membership change
for the whole active set, so every event costs O(log n).

Written in the numba-compatible subset so the same source runs compiled or as
plain Python (see ``_accel``).
"""
import heapq

import numpy as np

from ._accel import TypedList, njit

FAULT_TOL = 1e-9


@njit(cache=True)
def _advance(r, now, vtime, last, nact, capacity, heaps):
    n = nact[r]
    if n > 0:
        dt = now - last[r]
        if dt < 0.0:
            raise RuntimeError("engine fault: time went backwards on a resource")
        vnew = vtime[r] + dt * capacity[r] / n
        if heaps[r][0][0] - vnew < -FAULT_TOL * max(1.0, vnew):
            raise RuntimeError("engine fault: remaining work went negative")
        vtime[r] = vnew
    last[r] = now


@njit(cache=True)
def _reschedule(r, now, vtime, nact, version, capacity, heaps, events):
    version[r] += 1
    n = nact[r]
    if n > 0:
        residual = heaps[r][0][0] - vtime[r]
        if residual < 0.0:
            residual = 0.0
        heapq.heappush(events, (now + residual * n / capacity[r], r, version[r]))


@njit(cache=True)
def _admit(task, stage, now, stage_res, stage_work, vtime, last, nact, version,
           capacity, heaps, events):
    r = stage_res[task, stage]
    _advance(r, now, vtime, last, nact, capacity, heaps)
    heapq.heappush(heaps[r], (vtime[r] + stage_work[task, stage], task))
    nact[r] += 1
    _reschedule(r, now, vtime, nact, version, capacity, heaps, events)


@njit(cache=True)
def ps_network(release, n_stages, stage_res, stage_work, capacity):
    """Run tasks through their stage pipelines.

    release    (n,)   release times, non-decreasing
    n_stages   (n,)   stages per task, 1..K
    stage_res  (n, K) resource index of each stage
    stage_work (n, K) work of each stage, in capacity units x time
    capacity   (R,)   service capacity of each resource per time unit

    Returns ``done`` (n, K): time each stage finished (NaN past n_stages).
    """
    n_tasks = release.shape[0]
    n_res = capacity.shape[0]
    done = np.full(stage_work.shape, np.nan)
    stage_of = np.zeros(n_tasks, dtype=np.int64)
    vtime = np.zeros(n_res)
    last = np.zeros(n_res)
    nact = np.zeros(n_res, dtype=np.int64)
    version = np.zeros(n_res, dtype=np.int64)

    heaps = TypedList()
    for _ in range(n_res):
        h = [(0.0, 0)]
        h.pop()
        heaps.append(h)
    events = [(0.0, 0, 0)]
    events.pop()
    finished = [0]

    nxt = 0
    inf = np.inf
    while True:
        while len(events) > 0 and events[0][2] != version[events[0][1]]:
            heapq.heappop(events)
        t_dep = events[0][0] if len(events) > 0 else inf
        t_arr = release[nxt] if nxt < n_tasks else inf
        if t_dep == inf and t_arr == inf:
            break

        if t_dep <= t_arr:
            now, r, _ = heapq.heappop(events)
            _advance(r, now, vtime, last, nact, capacity, heaps)
            h = heaps[r]
            mark, task = heapq.heappop(h)
            if mark > vtime[r]:
                vtime[r] = mark
            finished.clear()
            finished.append(task)
            tol = 1e-12 * max(1.0, vtime[r])
            while len(h) > 0 and h[0][0] <= vtime[r] + tol:
                mark, task = heapq.heappop(h)
                finished.append(task)
            nact[r] -= len(finished)
            if nact[r] == 0:
                vtime[r] = 0.0
            _reschedule(r, now, vtime, nact, version, capacity, heaps, events)
            for task in finished:
                s = stage_of[task]
                done[task, s] = now
                s += 1
                if s < n_stages[task]:
                    stage_of[task] = s
                    _admit(task, s, now, stage_res, stage_work, vtime, last, nact,
                           version, capacity, heaps, events)
        else:
            _admit(nxt, 0, t_arr, stage_res, stage_work, vtime, last, nact,
                   version, capacity, heaps, events)
            nxt += 1
    return done
