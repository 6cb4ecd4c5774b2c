import numpy as np
import pytest
from hypothesis import given, strategies as st

from firefront.errors import DataError
from firefront.geometry import count_regions, extract_zero_contour, gradient_norm, signed_distance_field
from firefront.grid import BoundarySet, GridSpec, ScalarField, circle_ring
from firefront.levelset import (MERGING_GRID, VSHAPE_GRID, EvolutionConfig, add_observation_noise,
                                evolve_normal, generate_merging_circles, generate_vshape,
                                north_bias_speed, redistance)


def cone(g, r0=1.0):
    return ScalarField.from_function(g, lambda x, y: np.hypot(x, y) - r0)


@pytest.fixture(scope="module")
def merging():
    return generate_merging_circles()


@pytest.fixture(scope="module")
def vshape():
    return generate_vshape()


def test_evolve_constant_speed_circle_radius_exact():
    g = GridSpec(41, 41, -2.0, 2.0, -2.0, 2.0)
    out = evolve_normal(cone(g), ScalarField(g, np.ones(g.n)), 0.1)
    want = cone(g, 1.1).values
    assert np.max(np.abs(out.values - want)) <= 1e-12


def test_evolve_identities():
    g = GridSpec(5, 5, -1.0, 1.0, -1.0, 1.0)
    phi = cone(g)
    assert np.array_equal(evolve_normal(phi, ScalarField(g, np.zeros(g.n)), 0.5).values, phi.values)
    assert np.array_equal(evolve_normal(phi, ScalarField(g, np.ones(g.n)), 0.0).values, phi.values)
    with pytest.raises(DataError):
        evolve_normal(phi, ScalarField(GridSpec(5, 5, 0, 1, 0, 1), np.zeros(25)), 0.1)


@given(st.floats(-10, 10), st.floats(0, 2))
def test_evolve_commutes_with_constant_shift(c, dt):
    g = GridSpec(5, 5, -1.0, 1.0, -1.0, 1.0)
    phi = cone(g)
    v = ScalarField.from_function(g, lambda x, y: x * y + 0.3)
    a = evolve_normal(phi, v, dt).values + c
    b = evolve_normal(ScalarField(g, phi.values + c), v, dt).values
    assert np.allclose(a, b, rtol=0, atol=1e-12)


def test_redistance_fixed_point_and_rescaling():
    g = GridSpec(41, 41, -2.0, 2.0, -2.0, 2.0)
    sdf = signed_distance_field(BoundarySet([circle_ring(n=720)]), g)
    assert np.max(np.abs(redistance(sdf).values - sdf.values)) <= 2 * g.h
    scaled = redistance(ScalarField(g, 3 * sdf.values))
    assert np.max(np.abs(scaled.values - sdf.values)) <= 2 * g.h
    with pytest.raises(DataError):
        redistance(ScalarField(g, np.ones(g.n)))


def test_redistance_restores_unit_gradient():
    g = GridSpec(41, 41, -2.0, 2.0, -2.0, 2.0)
    stretched = ScalarField.from_function(g, lambda x, y: (np.hypot(x, y) - 1.0) * (1 + x * x))
    out = redistance(stretched)
    gn = gradient_norm(out).as_2d()
    r = np.hypot(*g.centers().T).reshape(g.shape)
    safe = (r > 4 * g.h) & (r < 1.8)
    assert np.max(np.abs(gn[safe] - 1.0)) <= 0.1


def test_merging_circles_topology(merging):
    s = merging
    assert s.T == 27 and s.grid == MERGING_GRID
    counts = [len(extract_zero_contour(f).rings) for f in s.fields]
    assert counts[0] == 2 and counts[-1] == 1
    assert all(c == 2 for c in counts[:26])
    comps = [count_regions(f.as_2d() <= 0) for f in s.fields]
    first = comps.index(1)
    assert all(c == 1 for c in comps[first:])


def test_merging_circles_fields_are_sdfs(merging):
    for f in merging.fields[::6]:
        gn = gradient_norm(f).as_2d()[1:-1, 1:-1]
        assert np.median(np.abs(gn - 1.0)) < 0.05


def test_merging_circles_speed_zero_and_overlap():
    s = generate_merging_circles(config=EvolutionConfig(speed=0.0))
    assert all(np.array_equal(f.values, s.fields[0].values) for f in s.fields)
    with pytest.raises(DataError):
        generate_merging_circles(centers=((0, 3), (1.5, 3)))


def test_vshape_area_and_fill(vshape):
    s = vshape
    assert s.T == 15 and s.grid == VSHAPE_GRID
    areas = [np.count_nonzero(f.values <= 0) for f in s.fields]
    assert all(b > a for a, b in zip(areas, areas[1:]))
    g = s.grid
    pts = g.centers()
    notch = (np.abs(pts[:, 0]) < 0.5) & (pts[:, 1] > 2.0) & (pts[:, 1] < 5.0)
    assert np.any(s.fields[0].values[notch] > 0)
    assert np.all(s.fields[-1].values[notch] < 0)


def test_vshape_isotropic_speed_rounds_the_v():
    cfg = EvolutionConfig(dt=0.05, n_steps=6, speed="north_bias", params={"a": 1.0, "b": 0.0})
    s = generate_vshape(config=cfg)
    areas = [np.count_nonzero(f.values <= 0) for f in s.fields]
    assert all(b > a for a, b in zip(areas, areas[1:]))
    v = north_bias_speed(s.fields[0], 1.0, 0.0)
    assert np.all(v.values == 1.0)


def test_north_bias_speed_formula():
    g = GridSpec(9, 9, -1.0, 1.0, -1.0, 1.0)
    phi = ScalarField.from_function(g, lambda x, y: y)
    assert np.allclose(north_bias_speed(phi, 0.5, 2.0).values, 2.5)
    phi = ScalarField.from_function(g, lambda x, y: -y)
    assert np.allclose(north_bias_speed(phi, 0.5, 2.0).values, 0.0)
    flat = ScalarField(g, np.zeros(g.n))
    assert np.all(north_bias_speed(flat, 0.5, 2.0).values == 0.5)


def test_observation_noise(merging):
    assert all(np.array_equal(a.values, b.values)
               for a, b in zip(add_observation_noise(merging, 0.0, 1).fields, merging.fields))
    noisy = add_observation_noise(merging, 0.2, 7)
    again = add_observation_noise(merging, 0.2, 7)
    assert all(np.array_equal(a.values, b.values) for a, b in zip(noisy.fields, again.fields))
    diff = noisy.values() - merging.values()
    n = diff.size
    var = diff.var(ddof=1)
    se = 0.04 * np.sqrt(2.0 / (n - 1))
    assert abs(var - 0.04) <= 3 * se


def test_evolution_config_validation():
    with pytest.raises(DataError):
        EvolutionConfig(dt=0.0)
    with pytest.raises(DataError):
        EvolutionConfig(n_steps=3, redistance_every=4)
