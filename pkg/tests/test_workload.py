import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from vrfog.workload import (
    DeviceShot, PowerLawSpec, ShotTable, WorkloadParams, build_catalog, generate_shots,
    generate_tasks, sample_bounded_pareto, sample_task_count, sample_type, shot_table,
    task_count_spec, task_table, zipf_weights,
)


class FixedU:
    """Stand-in generator whose uniforms are fixed."""

    def __init__(self, u):
        self.u = u

    def random(self, size=None):
        return self.u if size is None else np.full(size, self.u)


def quad_mean(spec):
    """Mean by quadrature of the bounded Pareto density, in log space."""
    lo, hi, a = spec.lower, spec.upper, spec.exponent
    norm = 1 - (lo / hi) ** a
    # x * pdf(x) dx with x = e^s: a lo^a e^{(1-a)s} ds / norm
    f = lambda s: a * lo ** a * math.exp((1 - a) * s) / norm
    val, _ = integrate.quad(f, math.log(lo), math.log(hi), limit=200, epsrel=1e-13)
    return val


def analytic_sd(spec):
    lo, hi, a = spec.lower, spec.upper, spec.exponent
    norm = 1 - (lo / hi) ** a
    f = lambda s: a * lo ** a * math.exp((2 - a) * s) / norm
    m2, _ = integrate.quad(f, math.log(lo), math.log(hi), limit=200, epsrel=1e-12)
    return math.sqrt(m2 - spec.mean ** 2)


def test_ratio_one_is_point_mass():
    spec = PowerLawSpec(100, 0.48, 1)
    assert sample_bounded_pareto(spec, np.random.default_rng(0)) == 100.0


@pytest.mark.parametrize("mean,a,r", [
    (100, 0.48, 1e6), (10, 0.48, 1e6), (4, 0.8, 1e6), (100, 0.48, 1e9),
    (10, 0.48, 10), (5, 1.0, 1e3), (5, 1.0 + 1e-9, 1e3), (3, 1.7, 50), (2, 2.0, 7.0),
])
def test_lower_bound_reproduces_mean(mean, a, r):
    spec = PowerLawSpec(mean, a, r)
    assert spec.upper == pytest.approx(r * spec.lower, rel=1e-15)
    assert quad_mean(spec) == pytest.approx(mean, rel=1e-9)


def test_inverse_cdf_endpoints():
    spec = PowerLawSpec(10, 0.48, 1e6)
    assert sample_bounded_pareto(spec, FixedU(0.0)) == spec.lower
    top = sample_bounded_pareto(spec, FixedU(np.nextafter(1.0, 0.0)))
    assert top == pytest.approx(1e6 * spec.lower, rel=1e-9)
    # closed-form CDF at the endpoints
    assert spec.cdf(spec.lower) == 0.0
    assert spec.cdf(spec.upper) == 1.0


@pytest.mark.parametrize("spec", [PowerLawSpec(10, 0.48, 1e6), PowerLawSpec(4, 0.8, 30),
                                  PowerLawSpec(2, 1.0, 100)])
def test_cdf_matches_integrated_density(spec):
    lo, a = spec.lower, spec.exponent
    norm = 1 - spec.ratio ** -a
    pdf = lambda x: a * lo ** a * x ** (-a - 1) / norm
    for q in (0.01, 0.3, 0.9, 0.999):
        x = float(spec.ppf(q))
        val, _ = integrate.quad(pdf, lo, x, limit=200)
        assert val == pytest.approx(q, rel=1e-7)
        assert spec.cdf(x) == pytest.approx(q, rel=1e-12)


@pytest.mark.parametrize("spec", [PowerLawSpec(100, 0.48, 1e3), PowerLawSpec(10, 0.48, 10),
                                  PowerLawSpec(100, 0.48, 1e6)])
def test_empirical_mean_within_four_standard_errors(spec):
    n = 1_000_000
    x = sample_bounded_pareto(spec, np.random.default_rng(11), n)
    assert np.all((x >= spec.lower) & (x <= spec.upper))
    assert abs(x.mean() - spec.mean) < 4 * analytic_sd(spec) / math.sqrt(n)


@given(mean=st.floats(0.01, 1e4), a=st.floats(0.05, 2.0), log_r=st.floats(0.0, 25.0),
       seed=st.integers(0, 2**32 - 1))
@settings(max_examples=200, deadline=None)
def test_draws_stay_in_support(mean, a, log_r, seed):
    spec = PowerLawSpec(mean, a, math.exp(log_r))
    assert spec.analytic_mean() == pytest.approx(mean, rel=1e-9)
    x = sample_bounded_pareto(spec, np.random.default_rng(seed), 64)
    assert np.all(x >= spec.lower) and np.all(x <= spec.upper * (1 + 1e-12))


def test_invalid_specs_rejected():
    for args in [(0, 0.5), (1, 0), (1, 0.5, 0.5)]:
        with pytest.raises(ValueError):
            PowerLawSpec(*args)


def test_catalog_popularity_examples():
    assert zipf_weights(4, 1.0) == pytest.approx([12 / 25, 6 / 25, 4 / 25, 3 / 25], abs=1e-15)
    assert zipf_weights(3, 0.0) == pytest.approx([1 / 3] * 3, abs=1e-15)
    with pytest.raises(ValueError):
        zipf_weights(0, 1.0)


@given(n=st.integers(1, 3000), a=st.floats(0, 5))
def test_popularity_is_probability_vector(n, a):
    p = zipf_weights(n, a)
    assert abs(p.sum() - 1) <= 1e-12
    assert np.all(np.diff(p) <= 0)


def test_catalog_demand_mean_over_builds():
    # ratio 100 keeps the 20 x 1000 draw mean at ~1.2% standard error
    spec = PowerLawSpec(100, 0.48, 100)
    rng = np.random.default_rng(5)
    means = [build_catalog(1000, 0.8, spec, spec, rng).compute_demand.mean() for _ in range(20)]
    assert np.mean(means) == pytest.approx(100, rel=0.05)


def test_catalog_is_fixed_per_type():
    spec = PowerLawSpec(100, 0.48)
    cat = build_catalog(50, 0.8, spec, spec, np.random.default_rng(1))
    assert cat.size == 50 and np.all(cat.compute_demand > 0) and np.all(cat.delivery_size > 0)
    assert [e.rank for e in cat.entries] == list(range(1, 51))


def test_sample_type_frequencies():
    spec = PowerLawSpec(1, 0.5, 10)
    rng = np.random.default_rng(2)
    one = build_catalog(1, 1.0, spec, spec, rng)
    assert set(sample_type(one, rng, 1000)) == {1}
    four = build_catalog(4, 1.0, spec, spec, rng)
    ranks = sample_type(four, rng, 1_000_000)
    assert np.mean(ranks == 1) == pytest.approx(0.48, abs=0.005)
    skew = build_catalog(2, 50.0, spec, spec, rng)
    assert np.mean(sample_type(skew, rng, 10_000) == 1) > 0.999


def test_task_count_examples():
    rng = np.random.default_rng(3)
    assert sample_task_count(1, 0.8, rng, ratio=1) == 1
    assert sample_task_count(1, 0.8, rng) == 1
    counts = sample_task_count(4, 0.8, rng, size=1_000_000)
    assert 3.5 <= counts.mean() <= 4.5
    assert counts.min() >= 1


def test_task_count_support_starts_at_one():
    for a in (0.1, 0.6, 0.8):
        spec = task_count_spec(4, a)
        assert spec.lower == pytest.approx(1.0, rel=1e-9)
        assert quad_mean(spec) == pytest.approx(4, rel=1e-9)


@given(mu=st.floats(1, 20), a=st.floats(0.1, 2), ratio=st.one_of(st.none(), st.floats(1, 1e6)),
       seed=st.integers(0, 1000))
@settings(max_examples=50, deadline=None)
def test_task_count_never_below_one(mu, a, ratio, seed):
    counts = sample_task_count(mu, a, np.random.default_rng(seed), ratio=ratio, size=200)
    assert counts.min() >= 1


def test_no_shots_without_arrivals():
    assert generate_shots(WorkloadParams(arrival_density=0), 4, np.random.default_rng(0)) == []


def test_shot_count_is_poisson():
    shots = shot_table(WorkloadParams(arrival_density=0.1, horizon=10_000), 4,
                       np.random.default_rng(4))
    assert abs(len(shots) - 1000) <= 3 * math.sqrt(1000)
    assert np.all((shots.arrival_time >= 0) & (shots.arrival_time < 10_000))


def test_fog_association_uniform():
    params = WorkloadParams(arrival_density=1.0, horizon=100_000)
    shots = shot_table(params, 4, np.random.default_rng(6))
    assert len(shots) > 90_000
    freq = np.bincount(shots.fog_id, minlength=5)[1:] / len(shots)
    assert freq == pytest.approx([0.25] * 4, abs=0.01)


def test_interarrivals_are_exponential():
    lam = 0.5
    shots = shot_table(WorkloadParams(arrival_density=lam, horizon=220_000), 4,
                       np.random.default_rng(8))
    gaps = np.diff(shots.arrival_time)[:100_000]
    assert len(gaps) == 100_000
    assert stats.kstest(gaps, "expon", args=(0, 1 / lam)).pvalue > 0.01


def test_task_releases_inside_dwell():
    params = WorkloadParams()
    rng = np.random.default_rng(9)
    spec = PowerLawSpec(1, 0.5, 10)
    cat = build_catalog(10, 0.8, spec, spec, rng)
    tasks = generate_tasks(DeviceShot(0, 100.0, 4.0, 2, 7), cat, params, rng)
    assert len(tasks) == 7
    for t in tasks:
        assert 100.0 <= t.release_time <= 104.0
        assert t.deadline > 0 and t.fog_id == 2
        assert t.compute_demand == cat.compute_demand[t.type_rank - 1]


def test_deadline_mean():
    params = WorkloadParams()
    rng = np.random.default_rng(10)
    spec = PowerLawSpec(1, 0.5, 10)
    cat = build_catalog(10, 0.8, spec, spec, rng)
    n = 250_000
    shots = ShotTable(np.arange(n, dtype=float), np.ones(n, dtype=np.int64),
                      np.full(n, 4, dtype=np.int64), 4.0)
    tasks = task_table(shots, cat, params, rng)
    assert len(tasks) == 1_000_000
    assert tasks.deadline.mean() == pytest.approx(10, rel=0.01)


def _workload(seed):
    params = WorkloadParams(arrival_density=0.2, horizon=5000)
    rng = np.random.default_rng(seed)
    cat = build_catalog(100, 0.8, params.compute_spec, params.delivery_spec, rng)
    return task_table(shot_table(params, 4, rng), cat, params, rng)


def test_workload_is_deterministic():
    a, b = _workload(42), _workload(42)
    for name in a.__dataclass_fields__:
        np.testing.assert_array_equal(getattr(a, name), getattr(b, name))
    assert not np.array_equal(a.release_time[:10], _workload(43).release_time[:10])


def test_trace_export(tmp_path):
    tasks = _workload(1)
    path = tmp_path / "trace.csv"
    tasks.write_trace(path)
    lines = path.read_text().splitlines()
    assert len(lines) == len(tasks)
    fields = lines[0].split(",")
    assert len(fields) == 8 and fields[0] == "0"
    assert float(fields[4]) == tasks.release_time[0]
