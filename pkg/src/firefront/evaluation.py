"""Forecast verification: threat score, credible bands, boundary coverage."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DataError
from .grid import BoundarySet, ScalarField, check_same_grid
from .raster import bilinear_at


@dataclass
class ScoreReport:
    ts: np.ndarray
    a11: np.ndarray
    a10: np.ndarray
    a01: np.ndarray
    tau: float = 0.0

    @property
    def mean_ts(self) -> float:
        return float(np.mean(self.ts))

    def to_dict(self) -> dict:
        return {"mean_ts": self.mean_ts, "tau": self.tau,
                "ts_sd": float(np.std(self.ts, ddof=1)) if len(self.ts) > 1 else 0.0,
                "ts_min": float(np.min(self.ts)), "ts_max": float(np.max(self.ts)),
                "n_draws": int(len(self.ts)),
                "ts": self.ts.tolist(), "a11": self.a11.tolist(),
                "a10": self.a10.tolist(), "a01": self.a01.tolist()}


def _events(values: np.ndarray, tau: float) -> np.ndarray:
    return values <= tau


def threat_score(pred: ScalarField, truth: ScalarField, tau: float = 0.0):
    """``A11 / (A11 + A10 + A01)`` with areas counted in cells.

    A cell is an event when its value is ``<= tau``. Cells unobserved in
    either field are ignored. Returns ``(ts, a11, a10, a01)``.
    """
    check_same_grid(pred.grid, truth.grid)
    both = pred.observed & truth.observed
    p = _events(pred.values, tau) & both
    o = _events(truth.values, tau) & both
    a11 = int(np.count_nonzero(p & o))
    a10 = int(np.count_nonzero(p & ~o))
    a01 = int(np.count_nonzero(~p & o))
    denom = a11 + a10 + a01
    if denom == 0:
        raise DataError("no event cells")
    return a11 / denom, a11, a10, a01


def mean_threat_score(draws: Sequence[ScalarField], truth: ScalarField, tau: float = 0.0) -> ScoreReport:
    if len(draws) == 0:
        raise DataError("need at least one draw")
    rows = np.array([threat_score(d, truth, tau) for d in draws])
    return ScoreReport(rows[:, 0], rows[:, 1].astype(int), rows[:, 2].astype(int),
                       rows[:, 3].astype(int), tau)


def credible_band(draws, level: float = 0.95):
    """Per-cell equal-tailed band and mean of a sequence of fields.

    Returns ``(lower, upper, mean)``.
    """
    if not 0 < level < 1:
        raise DataError("level must lie in (0, 1)")
    fields = list(draws)
    if not fields:
        raise DataError("no draws")
    grid = fields[0].grid
    arr = np.vstack([f.values for f in fields])
    min_draws = int(np.ceil(1.0 / (1.0 - level)))
    if arr.shape[0] < min_draws:
        raise DataError(f"a {level:.0%} band needs at least {min_draws} draws, got {arr.shape[0]}")
    alpha = (1.0 - level) / 2.0
    lo, hi = np.quantile(arr, [alpha, 1.0 - alpha], axis=0, method="linear")
    return ScalarField(grid, lo), ScalarField(grid, hi), ScalarField(grid, arr.mean(axis=0))


def boundary_coverage(lower: ScalarField, upper: ScalarField, truth: BoundarySet) -> float:
    """Fraction of boundary vertices where ``lower <= 0 <= upper`` (bilinear)."""
    check_same_grid(lower.grid, upper.grid)
    pts = truth.vertices()
    if len(pts) == 0:
        raise DataError("no boundary")
    lo, _ = bilinear_at(lower, pts[:, 0], pts[:, 1])
    hi, _ = bilinear_at(upper, pts[:, 0], pts[:, 1])
    return float(np.mean((lo <= 0.0) & (hi >= 0.0)))


def contours_svg(fields: dict, width: int = 480, colors: Optional[dict] = None) -> str:
    """Minimal SVG of the zero contours of named fields on a shared grid."""
    from .geometry import extract_zero_contour
    colors = colors or {}
    palette = ["#d62728", "#1f77b4", "#2ca02c", "#7f7f7f", "#9467bd"]
    grid = next(iter(fields.values())).grid
    sx = width / (grid.x_max - grid.x_min)
    height = int(round((grid.y_max - grid.y_min) * sx))
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'viewBox="0 0 {width} {height}">',
             f'<rect width="{width}" height="{height}" fill="white" stroke="black"/>']
    for k, (name, f) in enumerate(fields.items()):
        color = colors.get(name, palette[k % len(palette)])
        try:
            rings = extract_zero_contour(f).rings
        except DataError:
            continue
        for ring in rings:
            pts = " ".join(f"{(x - grid.x_min) * sx:.2f},{(grid.y_max - y) * sx:.2f}" for x, y in ring)
            parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5">'
                         f'<title>{name}</title></polyline>')
    parts.append("</svg>")
    return "\n".join(parts)
