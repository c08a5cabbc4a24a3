import numpy as np
import pytest

from vrfog.engine import run_single_resource
from vrfog.oracle import TinyInstance, dense_replay, mm1_ps_mean_sojourn

DT = 1e-4


def test_mm1_examples():
    assert mm1_ps_mean_sojourn(1.0, 0.5, 1.0) == pytest.approx(1.0)
    assert mm1_ps_mean_sojourn(1e-12, 0.5, 2.0) == pytest.approx(0.25)
    assert mm1_ps_mean_sojourn(0.9, 1.0, 1.0) == pytest.approx(10.0)
    with pytest.raises(ValueError):
        mm1_ps_mean_sojourn(1.0, 1.0, 1.0)


def test_tiny_instance_limits():
    with pytest.raises(ValueError):
        TinyInstance(tuple(range(51)), (1.0,) * 51)
    with pytest.raises(ValueError):
        TinyInstance((0.0,), (0.0,))
    with pytest.raises(ValueError):
        TinyInstance((0.0, 1.0), (1.0,))


def test_dense_replay_examples():
    assert dense_replay(TinyInstance((0.0,), (1.0,)), 1.0) == pytest.approx([1.0], abs=DT)
    assert dense_replay(TinyInstance((0.0, 0.0), (0.7, 0.7)), 1.0) == pytest.approx([1.4, 1.4], abs=DT)
    assert dense_replay(TinyInstance((0.0, 0.5), (1.0, 1.0)), 1.0) == pytest.approx([1.5, 2.0], abs=2 * DT)
    # idle gap is skipped exactly
    assert dense_replay(TinyInstance((0.0, 10.0), (1.0, 1.0)), 2.0) == pytest.approx([0.5, 10.5], abs=DT)
    with pytest.raises(ValueError):
        dense_replay(TinyInstance((0.0,), (1.0,)), 1.0, dt=0)


def test_engine_matches_dense_replay():
    rng = np.random.default_rng(20)
    worst = 0.0
    for _ in range(100):
        inst = TinyInstance.random(rng, int(rng.integers(1, 21)))
        cap = float(rng.uniform(0.5, 2.0))
        engine = run_single_resource(inst.arrivals, inst.works, cap)
        worst = max(worst, np.abs(engine - dense_replay(inst, cap, DT)).max())
    assert worst <= 10 * DT


@pytest.mark.parametrize("rho", [0.3, 0.5, 0.7])
def test_engine_matches_mm1_ps(rho):
    rng = np.random.default_rng(int(rho * 10))
    n, mean_work, cap = 2_000_000, 1.0, 1.0
    lam = rho * cap / mean_work
    arrivals = np.cumsum(rng.exponential(1 / lam, n))
    works = rng.exponential(mean_work, n)
    sojourn = run_single_resource(arrivals, works, cap) - arrivals
    expected = mm1_ps_mean_sojourn(lam, mean_work, cap)
    assert sojourn[n // 20:].mean() == pytest.approx(expected, rel=0.03)
