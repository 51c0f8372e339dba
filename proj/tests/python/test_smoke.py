"""End-to-end smoke tests for the delaystab Python bindings."""

import math

import pytest

import delaystab as ds


def test_distribution_constructors_and_stats():
    d = ds.DelayDistribution.dirac(1.5)
    assert d.mean == pytest.approx(1.5)

    mix = ds.DelayDistribution.discrete([(0.2, 0.37), (2.0, 0.63)])
    assert mix.mean == pytest.approx(1.334)
    assert mix.max_delay == pytest.approx(2.0)
    assert len(mix.atoms()) == 2

    g = ds.DelayDistribution.gamma(2, 1.0)
    assert math.isinf(g.max_delay)

    back = ds.DelayDistribution.from_json(mix.to_json())
    assert back.mean == pytest.approx(1.334)


def test_trig_moments_and_transform():
    u = ds.DelayDistribution.uniform(0.0, 2.0)
    c, s = ds.trig_moments(u, 1.3)
    assert c == pytest.approx(0.19826975839287084, abs=1e-13)
    assert s == pytest.approx(0.7141879820649797, abs=1e-13)

    z = ds.laplace(ds.DelayDistribution.exponential(1.0), 1 + 1j)
    assert z == pytest.approx(1.0 / (2.0 + 1.0j))


def test_universal_bound_and_verdicts():
    assert ds.universal_bound(0.0, 1.0) == pytest.approx(math.pi / 2)
    assert ds.hayes_verdict(0.0, 1.0, 1.0) == "Stable"
    assert ds.hayes_verdict(0.0, 1.0, 2.0) == "Unstable"
    assert ds.classify_region(2.0, 1.0) == "Stable"

    v = ds.decide_stability(0.0, 1.0, ds.DelayDistribution.dirac(3.2))
    assert v["status"] == "Unstable"
    assert v["unstable_count"] == 2

    v = ds.decide_stability(0.0, 1.0, ds.DelayDistribution.dirac(1.0))
    assert v["status"] == "Stable"


def test_leading_root_and_census():
    lead = ds.leading_root(0.0, ds.DelayDistribution.dirac(1.0))
    assert lead == pytest.approx(-0.3181315052047641 + 1.3372357014306895j, abs=1e-12)

    rep = ds.count_unstable_roots(0.0, ds.DelayDistribution.dirac(2.0))
    assert rep["unstable_count"] == 2
    assert rep["leading_root"].real > 0


def test_extremal_reduction_preserves_mean():
    mix = ds.DelayDistribution.discrete([(0.2, 0.37), (2.0, 0.63)])
    pair = ds.reduce_to_extremal(mix, 1.0, -0.1)
    assert pair["p1"] + pair["p2"] == pytest.approx(1.0)
    assert pair["p2"] * pair["tau2"] == pytest.approx(1.334, abs=1e-10)
    assert pair["tau2"] == pytest.approx(1.755889059179826861, abs=1e-9)
    assert pair["s_star"] >= 0.6463  # never below the input sine moment

    c, _ = ds.trig_moments(mix, 1.0)
    assert c == pytest.approx(0.100452126776559693, abs=1e-14)


def test_boundary_trace_and_chart():
    tr = ds.trace_boundary(ds.DelayDistribution.exponential(1.0), u_max=20.0,
                           n_points=400)
    assert not tr["degenerate"]
    hopf = [b for b in tr["branches"] if b["kind"] == "HopfCurve"]
    assert hopf
    for u, a, E in hopf[0]["points"][::25]:
        if a < -1e-6:
            assert E == pytest.approx(-1.0 / a, rel=1e-9)

    grid = ds.chart(ds.DelayDistribution.gamma(2, 1.0), [0.0], [3.9, 4.1])
    assert grid["status"] == ["Stable", "Unstable"]
    assert grid["unstable_count"] == [0, 2]


def test_simulation_matches_leading_root():
    d = ds.DelayDistribution.dirac(1.0)
    trace = ds.simulate(0.0, 1.0, d, T=60.0)
    assert ds.decay_rate(trace) == pytest.approx(-0.3181315, abs=2e-3)
    assert ds.oscillation_frequency(trace) == pytest.approx(1.3372357, abs=2e-3)
    assert trace.dt == pytest.approx(0.005)
    assert len(trace.values) == len(trace.times)


def test_spec_errors_surface_as_value_errors():
    with pytest.raises(Exception):
        ds.DelayDistribution.from_json('{"kind":"dirac"}')
