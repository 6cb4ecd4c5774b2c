import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from firefront.errors import DataError
from firefront.evaluation import (boundary_coverage, contours_svg, credible_band, mean_threat_score,
                                  threat_score)
from firefront.geometry import signed_distance_field
from firefront.grid import BoundarySet, GridSpec, ScalarField, circle_ring

G4 = GridSpec(2, 2, 0.0, 1.0, 0.0, 1.0)


def field(vals, mask=None, grid=G4):
    return ScalarField(grid, np.asarray(vals, float), mask)


def test_threat_score_examples():
    a = field([-1, -1, 1, 1])
    assert threat_score(a, a)[0] == 1.0
    assert threat_score(field([-1, 1, 1, 1]), field([1, -1, 1, 1]))[0] == 0.0
    ts, a11, a10, a01 = threat_score(field([-1, -1, 1, 1]), field([-1, 1, -1, 1]))
    assert (a11, a10, a01) == (1, 1, 1) and ts == pytest.approx(1 / 3)
    with pytest.raises(DataError, match="no event"):
        threat_score(field([1, 1, 1, 1]), field([2, 2, 2, 2]))


def test_threat_score_threshold_and_masks():
    pred, truth = field([0.0, 0.5, 1, 1]), field([0.0, 1, 1, 1])
    assert threat_score(pred, truth)[0] == 1.0
    assert threat_score(pred, truth, tau=0.5)[0] == 0.5
    masked = field([-1, -1, 1, 1], [True, False, True, True])
    ts, a11, a10, a01 = threat_score(masked, field([-1, 1, 1, 1]))
    assert ts == 1.0 and a10 == 0


def test_mean_threat_score():
    truth = field([-1, -1, 1, 1])
    rep = mean_threat_score([truth, field([-1, 1, 1, 1])], truth)
    assert rep.mean_ts == pytest.approx(0.75)
    d = rep.to_dict()
    assert d["n_draws"] == 2 and d["ts_min"] == 0.5 and d["ts_max"] == 1.0
    with pytest.raises(DataError):
        mean_threat_score([], truth)


# quarter-integers keep shifts exact in floating point
vals4 = arrays(float, 4, elements=st.integers(-12, 12).map(lambda k: k / 4))


@given(vals4, vals4, st.integers(-8, 8).map(lambda k: k / 4))
def test_threat_score_properties(p, q, c):
    p[0], q[0] = -4.0, -4.0
    ts, *_ = threat_score(field(p), field(q))
    assert 0.0 <= ts <= 1.0
    assert ts == threat_score(field(q), field(p))[0]
    shifted = threat_score(field(p + c), field(q + c), tau=c)[0]
    assert shifted == pytest.approx(ts)


@given(st.lists(vals4, min_size=1, max_size=5), vals4)
def test_mean_ts_between_extremes(draws, truth):
    truth[0] = -4.0
    rep = mean_threat_score([field(d) for d in draws], field(truth))
    assert rep.ts.min() - 1e-15 <= rep.mean_ts <= rep.ts.max() + 1e-15


def test_credible_band_constant_and_normal():
    lo, hi, mean = credible_band([field([2, 2, 2, 2])] * 40)
    assert np.all(lo.values == 2) and np.all(hi.values == 2) and np.all(mean.values == 2)
    z = np.random.default_rng(0).standard_normal((10_000, 4))
    lo, hi, _ = credible_band([field(r) for r in z])
    assert np.all(np.abs(lo.values + 1.96) <= 0.05) and np.all(np.abs(hi.values - 1.96) <= 0.05)


def test_credible_band_nesting_and_errors():
    draws = [field(r) for r in np.random.default_rng(1).normal(size=(200, 4))]
    lo90, hi90, _ = credible_band(draws, 0.9)
    lo95, hi95, _ = credible_band(draws, 0.95)
    assert np.all(lo95.values <= lo90.values) and np.all(hi90.values <= hi95.values)
    with pytest.raises(DataError, match="at least 20"):
        credible_band(draws[:19])
    with pytest.raises(DataError):
        credible_band(draws, 1.0)
    with pytest.raises(DataError):
        credible_band([])


def test_boundary_coverage():
    g = GridSpec(41, 41, -2.0, 2.0, -2.0, 2.0)
    sdf = signed_distance_field(BoundarySet([circle_ring(n=64)]), g)
    truth = BoundarySet([circle_ring(n=64)])
    wide = (ScalarField(g, sdf.values - 0.2), ScalarField(g, sdf.values + 0.2))
    assert boundary_coverage(*wide, truth) == 1.0
    inside = (ScalarField(g, sdf.values + 0.5), ScalarField(g, sdf.values + 1.0))
    assert boundary_coverage(*inside, truth) == 0.0
    with pytest.raises(DataError):
        boundary_coverage(*wide, BoundarySet([]))


def test_contours_svg():
    g = GridSpec(21, 21, -2.0, 2.0, -2.0, 2.0)
    sdf = signed_distance_field(BoundarySet([circle_ring()]), g)
    svg = contours_svg({"truth": sdf, "empty": ScalarField(g, np.ones(g.n))})
    assert svg.startswith("<svg") and svg.endswith("</svg>")
    assert svg.count("<polyline") == 1 and "<title>truth</title>" in svg


def test_boundary_coverage_constant_bands():
    truth = BoundarySet([circle_ring(n=16)])
    g = GridSpec(9, 9, -2.0, 2.0, -2.0, 2.0)
    assert boundary_coverage(ScalarField(g, -np.ones(g.n)), ScalarField(g, np.ones(g.n)), truth) == 1.0
    half = ScalarField(g, np.full(g.n, 0.5))
    assert boundary_coverage(half, ScalarField(g, np.ones(g.n)), truth) == 0.0
