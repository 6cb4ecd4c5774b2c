"""Dataset assembly: boundary files to series, rasters to covariate matrices."""
from __future__ import annotations

import logging
from typing import Mapping, Optional, Sequence

import numpy as np

from .basis import CovariateMatrix
from .errors import DataError
from .geometry import signed_distance_field
from .grid import BoundarySet, GridSpec, ScalarField
from .raster import bilinear_resample, slope_aspect, standardize
from .series import ObservationSeries

log = logging.getLogger(__name__)


def rasterize(boundaries: Sequence[BoundarySet], grid: GridSpec,
              times: Optional[Sequence[float]] = None) -> ObservationSeries:
    """Signed distance fields of each boundary on ``grid``.

    ``times`` defaults to the boundaries' own timestamps (hours).
    """
    if len(boundaries) < 3:
        raise DataError(f"need at least 3 boundaries, got {len(boundaries)}")
    if times is None:
        times = [b.timestamp for b in boundaries]
    fields = []
    for k, b in enumerate(boundaries):
        try:
            fields.append(signed_distance_field(b, grid))
        except DataError as exc:
            raise DataError(f"boundary {k}: {exc}") from exc
    return ObservationSeries(grid, np.asarray(times, dtype=float), fields)


def build_covariates(rasters: Mapping[str, ScalarField], grid: GridSpec,
                     dem: Optional[ScalarField] = None, z_factor: float = 1.0,
                     sources: Optional[Mapping[str, str]] = None) -> CovariateMatrix:
    """Resample, derive slope/aspect from the DEM, standardize, zero the gaps.

    Column order is ``slope, aspect`` (when a DEM is given) followed by the
    rasters in mapping order. The DEM is resampled first and slope/aspect
    computed on the analysis grid, so aspect is never interpolated across
    its 0/360 wrap.
    """
    sources = dict(sources or {})
    fields, names, prov = [], [], []

    def add(name, field, info):
        try:
            col = standardize(field)
        except DataError as exc:
            raise DataError(f"covariate {name!r}: {exc}") from exc
        obs = field.observed
        fields.append(col)
        names.append(name)
        prov.append(dict(info, mean=float(np.mean(field.values[obs])),
                         sd=float(np.std(field.values[obs], ddof=1)),
                         n_missing=int(np.count_nonzero(~obs))))

    if dem is not None:
        dem_g = _resample(dem, grid, "dem")
        slope, aspect = slope_aspect(dem_g, z_factor)
        src = sources.get("dem", "dem")
        add("slope", slope, {"source": src, "derived": "slope_degrees", "z_factor": z_factor})
        add("aspect", aspect, {"source": src, "derived": "aspect_degrees", "z_factor": z_factor})
    for name, raster in rasters.items():
        if name in names:
            raise DataError(f"duplicate covariate name {name!r}")
        add(name, _resample(raster, grid, name), {"source": sources.get(name, name), "derived": None})
    if not fields:
        raise DataError("no covariate rasters given")
    log.info("built %d covariate columns: %s", len(names), ", ".join(names))
    return CovariateMatrix.from_fields(fields, names, prov)


def _resample(src: ScalarField, grid: GridSpec, name: str) -> ScalarField:
    if not src.grid.contains_extent(grid):
        raise DataError(f"raster {name!r} does not cover the analysis grid extent")
    return bilinear_resample(src, grid)
