"""Small synthetic fire: five perimeters plus canopy, vegetation and DEM rasters.

The files are shipped under ``firefront/data/demo`` and can be regenerated
bit-for-bit with :func:`write_demo`.
"""
from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np

from .grid import BoundarySet, GridSpec, ScalarField
from .io import write_boundary, write_field, write_json

DEMO_GRID = GridSpec(30, 30, -119.8, -118.8, 34.2, 34.7)
RASTER_GRID = GridSpec(45, 25, -119.85, -118.75, 34.15, 34.75)
DEMO_TIMES = ["2018-11-08T06:00:00Z", "2018-11-09T02:00:00Z", "2018-11-10T01:00:00Z",
              "2018-11-11T02:00:00Z", "2018-11-11T23:00:00Z"]
METRES_TO_DEGREES = 1.0 / 111_000.0


def demo_perimeter(k: int, n: int = 120) -> np.ndarray:
    """Lobed perimeter ``k`` (0-based), growing and drifting north-east."""
    theta = 2.0 * np.pi * np.arange(n) / n
    r0 = 0.04 + 0.025 * k
    r = r0 * (1.0 + 0.25 * np.cos(theta - np.pi / 4) + 0.1 * np.sin(3 * theta))
    cx, cy = -119.35 + 0.01 * k, 34.43 + 0.005 * k
    # aspect ratio of a degree of longitude at this latitude
    pts = np.column_stack([cx + r * np.cos(theta) / np.cos(np.radians(34.45)), cy + r * np.sin(theta)])
    return np.vstack([pts, pts[:1]])


def demo_rasters() -> dict:
    g = RASTER_GRID
    pts = g.centers()
    x = (pts[:, 0] - g.x_min) / (g.x_max - g.x_min)
    y = (pts[:, 1] - g.y_min) / (g.y_max - g.y_min)
    canopy = 40.0 + 30.0 * np.sin(3.0 * x) * np.cos(2.0 * y) + 10.0 * y
    canopy_mask = ~((x > 0.8) & (y < 0.2))
    vegetation = 100.0 + 50.0 * np.cos(4.0 * x + y) - 20.0 * x * y
    dem = 300.0 + 900.0 * np.exp(-((x - 0.7) ** 2 + (y - 0.6) ** 2) / 0.08) + 200.0 * y
    return {"canopy": ScalarField(g, canopy, canopy_mask),
            "vegetation": ScalarField(g, vegetation),
            "dem": ScalarField(g, dem)}


def write_demo(directory) -> Path:
    """Write the demo inputs and a config chain into ``directory``.

    Running ``firefront <verb> --config config_<verb>.json`` for rasterize,
    covariates, fit and forecast (in that order) writes everything to
    ``directory/run``.
    """
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    entries = []
    for k, stamp in enumerate(DEMO_TIMES):
        name = f"perimeter_{k}.json"
        write_boundary(d / name, BoundarySet([demo_perimeter(k)], float(k)))
        entries.append({"file": name, "time": stamp})
    for name, field in demo_rasters().items():
        write_field(d / f"{name}.json", field)
    common = {"schema_version": 1, "out_dir": "run", "seed": 0}
    write_json(d / "config_rasterize.json", dict(
        common, command="rasterize", grid=DEMO_GRID.to_dict(), boundaries=entries, out="series"))
    write_json(d / "config_covariates.json", dict(
        common, command="covariates", grid=DEMO_GRID.to_dict(),
        rasters={"canopy": "canopy.json", "vegetation": "vegetation.json"},
        dem="dem.json", z_factor=METRES_TO_DEGREES, out="covariates.json"))
    write_json(d / "config_fit.json", dict(
        common, command="fit", series="run/series", covariates="run/covariates.json",
        variant="M2", J=4, train_steps=4, n_iter=3000, n_burn=1000, out="samples"))
    write_json(d / "config_forecast.json", dict(
        common, command="forecast", samples="run/samples", truth_series="run/series",
        truth_index=4, out="forecast", svg=True))
    return d


def demo_path() -> Path:
    """Location of the packaged demo files."""
    return Path(str(resources.files("firefront") / "data" / "demo"))
