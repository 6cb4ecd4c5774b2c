"""Normal-direction level-set evolution and synthetic front generators."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .errors import DataError
from .geometry import extract_zero_contour, signed_distance_field
from .grid import BoundarySet, GridSpec, ScalarField, check_same_grid
from .series import ObservationSeries

MERGING_GRID = GridSpec(30, 30, -7.0, 7.0, -1.0, 7.0)
VSHAPE_GRID = GridSpec(31, 31, -10.0, 10.0, -1.0, 10.0)
# north-bias preset constants and step; a + b is the fastest (northward) speed
VSHAPE_A, VSHAPE_B, VSHAPE_DT = 1.0, 3.0, 0.05


@dataclass
class EvolutionConfig:
    """Time stepping for the generators.

    ``speed`` is a constant outward speed, the name of a preset
    (``"north_bias"``), or one speed field per step. ``params`` holds preset
    constants.
    """

    dt: float = 0.06
    n_steps: int = 26
    redistance_every: int = 1
    speed: Union[float, str, Sequence[ScalarField]] = 1.0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.dt > 0:
            raise DataError("dt must be positive")
        if self.n_steps < 1:
            raise DataError("n_steps must be a positive integer")
        if not 0 <= self.redistance_every <= self.n_steps:
            raise DataError("redistance_every must lie in [0, n_steps]")


def evolve_normal(field: ScalarField, speed: ScalarField, dt: float) -> ScalarField:
    """One forward-Euler step of ``d(phi)/dt + v_n = 0`` for a signed distance field."""
    check_same_grid(field.grid, speed.grid)
    if dt < 0:
        raise DataError("dt must be non-negative")
    mask = None
    if not (field.fully_observed and speed.fully_observed):
        mask = field.observed & speed.observed
    return ScalarField(field.grid, field.values - speed.values * dt, mask)


def redistance(field: ScalarField) -> ScalarField:
    """Rebuild an exact signed distance field from the current zero contour."""
    contour = extract_zero_contour(field)
    return signed_distance_field(contour, field.grid)


def north_bias_speed(field: ScalarField, a: float, b: float) -> ScalarField:
    """``max(0, a + b * n_y)`` with ``n`` the unit outward normal of ``field``."""
    g = field.grid
    gy, gx = np.gradient(field.as_2d(), g.hy, g.hx)
    norm = np.hypot(gx, gy)
    ny_ = np.where(norm < 1e-8, 0.0, gy / np.where(norm < 1e-8, 1.0, norm))
    return ScalarField(g, np.maximum(0.0, a + b * ny_).ravel())


def _evolve_series(phi0: ScalarField, config: EvolutionConfig, speed_fn) -> ObservationSeries:
    fields = [phi0]
    phi = phi0
    for k in range(config.n_steps):
        speed = speed_fn(phi, k)
        phi = evolve_normal(phi, speed, config.dt)
        # a step that moves nothing leaves the zero set alone; skip the
        # polygonization error redistancing would add
        moved = np.any(speed.values[speed.observed] != 0.0)
        if moved and config.redistance_every and (k + 1) % config.redistance_every == 0:
            phi = redistance(phi)
        fields.append(phi)
    times = config.dt * np.arange(config.n_steps + 1)
    return ObservationSeries(phi0.grid, times, fields)


def _speed_function(config: EvolutionConfig, grid: GridSpec):
    sp = config.speed
    if isinstance(sp, str):
        if sp != "north_bias":
            raise DataError(f"unknown speed preset {sp!r}")
        a = config.params.get("a", VSHAPE_A)
        b = config.params.get("b", VSHAPE_B)
        return lambda phi, k: north_bias_speed(phi, a, b)
    if np.isscalar(sp):
        const = ScalarField(grid, np.full(grid.n, float(sp)))
        return lambda phi, k: const
    fields = list(sp)
    if len(fields) < config.n_steps:
        raise DataError("need one speed field per step")
    return lambda phi, k: fields[k]


def generate_merging_circles(grid: Optional[GridSpec] = None,
                             config: Optional[EvolutionConfig] = None,
                             centers=((-2.7, 3.0), (2.7, 3.0)),
                             radius: float = 1.0) -> ObservationSeries:
    """Two circular fronts growing at constant speed until they merge.

    With the defaults the two fronts are separate on the grid for the first
    26 fields and join in field 27.
    """
    grid = grid or MERGING_GRID
    config = config or EvolutionConfig()
    if isinstance(config.speed, str) or not np.isscalar(config.speed):
        raise DataError("merging circles use a constant outward speed")
    (x1, y1), (x2, y2) = centers
    if np.hypot(x2 - x1, y2 - y1) <= 2 * radius:
        raise DataError("circles overlap initially; they must merge during the series")
    pts = grid.centers()
    d1 = np.hypot(pts[:, 0] - x1, pts[:, 1] - y1) - radius
    d2 = np.hypot(pts[:, 0] - x2, pts[:, 1] - y2) - radius
    phi0 = ScalarField(grid, np.minimum(d1, d2))
    return _evolve_series(phi0, config, _speed_function(config, grid))


def vshape_ring(tip=(0.0, 0.5), arm: float = 6.0, width: float = 1.5) -> np.ndarray:
    """Chevron polygon opening to the north."""
    x0, y0 = tip
    ring = [(x0, y0), (x0 + arm, y0 + arm), (x0 + arm - width, y0 + arm),
            (x0, y0 + width), (x0 - arm + width, y0 + arm), (x0 - arm, y0 + arm), (x0, y0)]
    return np.array(ring)


def generate_vshape(grid: Optional[GridSpec] = None,
                    config: Optional[EvolutionConfig] = None,
                    ring: Optional[np.ndarray] = None) -> ObservationSeries:
    """A V-shaped front pushed northward; its notch fills in over 15 fields."""
    grid = grid or VSHAPE_GRID
    config = config or EvolutionConfig(dt=VSHAPE_DT, n_steps=14, speed="north_bias")
    ring = vshape_ring() if ring is None else ring
    phi0 = signed_distance_field(BoundarySet([ring]), grid)
    return _evolve_series(phi0, config, _speed_function(config, grid))


def add_observation_noise(series: ObservationSeries, sigma_d: float, seed: int) -> ObservationSeries:
    """Add i.i.d. ``N(0, sigma_d^2)`` noise to every observed cell."""
    if sigma_d < 0:
        raise DataError("sigma_d must be non-negative")
    rng = np.random.default_rng(seed)
    noisy = []
    for f in series.fields:
        eps = rng.standard_normal(series.grid.n) * sigma_d
        noisy.append(ScalarField(f.grid, f.values + eps, f.mask))
    return ObservationSeries(series.grid, series.times.copy(), noisy)
