"""Covariate raster preprocessing: resampling, terrain derivatives, scaling."""
from __future__ import annotations

import numpy as np

from .errors import DataError
from .grid import GridSpec, ScalarField


def bilinear_at(src: ScalarField, xs, ys) -> tuple[np.ndarray, np.ndarray]:
    """Bilinearly interpolate ``src`` at arbitrary points inside its extent.

    Masked source cells contribute the value 0. Returns the interpolated
    values and a boolean array that is False wherever a masked source cell
    carried non-zero weight.
    """
    g = src.grid
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    fx = np.clip((xs - g.x_min) / g.hx, 0.0, g.nx - 1)
    fy = np.clip((ys - g.y_min) / g.hy, 0.0, g.ny - 1)
    i0 = np.minimum(np.floor(fx).astype(int), g.nx - 2)
    j0 = np.minimum(np.floor(fy).astype(int), g.ny - 2)
    tx = fx - i0
    ty = fy - j0
    vals = np.where(src.observed, src.values, 0.0).reshape(g.shape)
    obs = src.observed.reshape(g.shape)
    out = np.zeros(xs.shape)
    ok = np.ones(xs.shape, dtype=bool)
    for dj, wy in ((0, 1.0 - ty), (1, ty)):
        for di, wx in ((0, 1.0 - tx), (1, tx)):
            w = wx * wy
            out += w * vals[j0 + dj, i0 + di]
            ok &= obs[j0 + dj, i0 + di] | (w == 0.0)
    return out, ok


def bilinear_resample(src: ScalarField, dst_grid: GridSpec) -> ScalarField:
    """Resample ``src`` onto ``dst_grid`` by bilinear interpolation.

    Missing source cells are read as 0; destination cells that depended on
    them are flagged as unobserved in the returned mask (their value stays 0).
    """
    if not src.grid.contains_extent(dst_grid):
        raise DataError("destination grid extent lies outside the source raster")
    if src.grid == dst_grid:
        return src.copy()
    pts = dst_grid.centers()
    values, ok = bilinear_at(src, pts[:, 0], pts[:, 1])
    out = ScalarField(dst_grid, values)
    if not ok.all():
        out.mask = ok
    return out


def slope_aspect(dem: ScalarField, z_factor: float = 1.0) -> tuple[ScalarField, ScalarField]:
    """Slope and aspect in degrees using Horn's eight-neighbour gradient.

    Aspect is the compass direction of steepest descent: 0 north-facing,
    90 east, 180 south, 270 west. Flat cells get aspect 0. Border cells use
    edge-replicated neighbours. ``z_factor`` converts elevation units to map
    units (e.g. metres to degrees on a lon/lat grid).
    """
    if not z_factor > 0:
        raise DataError("z_factor must be positive")
    g = dem.grid
    if not dem.fully_observed:
        raise DataError("slope/aspect need a fully observed DEM")
    if g.nx < 3 or g.ny < 3:
        raise DataError("slope/aspect need at least 3 cells per axis")
    z = np.pad(dem.as_2d() * z_factor, 1, mode="edge")
    # rows increase northward; n*/s* are the rows above/below the centre
    s_w, s_c, s_e = z[:-2, :-2], z[:-2, 1:-1], z[:-2, 2:]
    c_w, c_e = z[1:-1, :-2], z[1:-1, 2:]
    n_w, n_c, n_e = z[2:, :-2], z[2:, 1:-1], z[2:, 2:]
    dzdx = ((n_e + 2 * c_e + s_e) - (n_w + 2 * c_w + s_w)) / (8.0 * g.hx)
    dzdy = ((n_w + 2 * n_c + n_e) - (s_w + 2 * s_c + s_e)) / (8.0 * g.hy)
    grad = np.hypot(dzdx, dzdy)
    slope = np.degrees(np.arctan(grad))
    aspect = np.mod(np.degrees(np.arctan2(-dzdx, -dzdy)), 360.0)
    aspect = np.where(grad < 1e-12, 0.0, aspect)
    return ScalarField(g, slope), ScalarField(g, aspect)


def standardize(field: ScalarField) -> ScalarField:
    """Center and scale to unit sample sd over observed cells; missing -> 0."""
    obs = field.observed
    vals = field.values[obs]
    if vals.size < 2:
        raise DataError("constant covariate: fewer than 2 observed cells")
    sd = vals.std(ddof=1)
    if not sd > 0.0:
        raise DataError("constant covariate")
    out = np.zeros(field.grid.n)
    out[obs] = (vals - vals.mean()) / sd
    return ScalarField(field.grid, out)
