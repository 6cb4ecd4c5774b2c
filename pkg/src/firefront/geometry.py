"""Signed distance fields, inside tests, zero-contour extraction and gradients."""
from __future__ import annotations

import numpy as np

from .errors import DataError
from .grid import BoundarySet, GridSpec, ScalarField

_CHUNK = 2_000_000


def _check_boundary(boundary: BoundarySet) -> None:
    if not boundary.rings:
        raise DataError("no boundary")
    for k, ring in enumerate(boundary.rings):
        if np.sum(np.hypot(*np.diff(ring, axis=0).T)) == 0.0:
            raise DataError(f"degenerate ring {k}: zero-length perimeter")


def _edge_tolerance(points: np.ndarray, a: np.ndarray) -> float:
    scale = max(1.0, float(np.max(np.abs(points))), float(np.max(np.abs(a))))
    return 1e-12 * scale


def _min_segment_distance(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact Euclidean distance from every point to the nearest segment."""
    best = np.full(len(points), np.inf)
    step = max(1, _CHUNK // max(len(points), 1))
    for lo in range(0, len(a), step):
        sa, sb = a[lo:lo + step], b[lo:lo + step]
        d = sb - sa
        dd = np.einsum("ij,ij->i", d, d)
        dd = np.where(dd == 0.0, 1.0, dd)
        px = points[:, 0:1] - sa[None, :, 0]
        py = points[:, 1:2] - sa[None, :, 1]
        t = np.clip((px * d[None, :, 0] + py * d[None, :, 1]) / dd[None, :], 0.0, 1.0)
        ex = px - t * d[None, :, 0]
        ey = py - t * d[None, :, 1]
        np.minimum(best, np.sqrt(ex * ex + ey * ey).min(axis=1), out=best)
    return best


def _crossing_parity(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Even-odd parity of a +x ray from each point against all segments."""
    parity = np.zeros(len(points), dtype=bool)
    step = max(1, _CHUNK // max(len(points), 1))
    px = points[:, 0:1]
    py = points[:, 1:2]
    for lo in range(0, len(a), step):
        ax, ay = a[lo:lo + step, 0][None, :], a[lo:lo + step, 1][None, :]
        bx, by = b[lo:lo + step, 0][None, :], b[lo:lo + step, 1][None, :]
        straddle = (ay > py) != (by > py)
        with np.errstate(divide="ignore", invalid="ignore"):
            x_int = ax + (py - ay) * (bx - ax) / (by - ay)
        hits = straddle & (px < x_int)
        parity ^= (np.count_nonzero(hits, axis=1) % 2).astype(bool)
    return parity


def points_inside(points: np.ndarray, boundary: BoundarySet) -> np.ndarray:
    """Vectorized :func:`point_in_region` for an ``(M, 2)`` array of points."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    a, b = boundary.segments()
    if len(a) == 0:
        return np.zeros(len(points), dtype=bool)
    on_edge = _min_segment_distance(points, a, b) <= _edge_tolerance(points, a)
    return _crossing_parity(points, a, b) | on_edge


def point_in_region(point, boundary: BoundarySet) -> bool:
    """Even-odd inside test. Points lying on an edge count as inside."""
    return bool(points_inside(np.asarray(point, dtype=float)[None, :], boundary)[0])


def signed_distance_field(boundary: BoundarySet, grid: GridSpec) -> ScalarField:
    """Exact signed distance from every cell center to the boundary rings.

    Negative inside (odd number of enclosing rings), positive outside, zero on
    an edge.
    """
    _check_boundary(boundary)
    pts = grid.centers()
    a, b = boundary.segments()
    dist = _min_segment_distance(pts, a, b)
    on_edge = dist <= _edge_tolerance(pts, a)
    inside = _crossing_parity(pts, a, b)
    values = np.where(inside, -dist, dist)
    values[on_edge] = 0.0
    return ScalarField(grid, values)


# Marching squares. Corner order of a cell: 0=(i,j) 1=(i+1,j) 2=(i+1,j+1) 3=(i,j+1);
# edge order: 0=bottom(0-1) 1=right(1-2) 2=top(3-2) 3=left(0-3).
_EDGE_PAIRS = {
    1: [(3, 0)], 2: [(0, 1)], 3: [(3, 1)], 4: [(1, 2)], 6: [(0, 2)], 7: [(3, 2)],
    8: [(2, 3)], 9: [(2, 0)], 11: [(2, 1)], 12: [(1, 3)], 13: [(1, 0)], 14: [(0, 3)],
}


def extract_zero_contour(field: ScalarField) -> BoundarySet:
    """Closed rings of the 0-level set of ``field`` by marching squares.

    Cells with value <= 0 are treated as inside. Crossing points are linearly
    interpolated along cell edges. Regions touching the grid border are closed
    along the border itself. Saddle cells are disambiguated by the mean of the
    four corner values. Masked cells are not supported.
    """
    if not field.fully_observed:
        raise DataError("contour extraction needs a fully observed field")
    v = field.as_2d()
    inside = v <= 0.0
    if inside.all() or not inside.any():
        raise DataError("no zero level set")
    grid = field.grid
    ny, nx = grid.shape
    # one ring of ghost nodes, always outside; crossings on ghost edges collapse
    # onto the adjacent real node, which clips contours to the border
    pin = np.zeros((ny + 2, nx + 2), dtype=bool)
    pin[1:-1, 1:-1] = inside
    pv = np.ones((ny + 2, nx + 2))
    pv[1:-1, 1:-1] = v
    real = np.zeros((ny + 2, nx + 2), dtype=bool)
    real[1:-1, 1:-1] = True
    xs, ys = grid.x, grid.y

    def node_xy(i, j):
        return xs[i - 1], ys[j - 1]

    def crossing(key):
        kind, i, j = key
        i2, j2 = (i + 1, j) if kind == "h" else (i, j + 1)
        r1, r2 = real[j, i], real[j2, i2]
        if r1 and not r2:
            return node_xy(i, j)
        if r2 and not r1:
            return node_xy(i2, j2)
        v1, v2 = pv[j, i], pv[j2, i2]
        t = v1 / (v1 - v2)
        x1, y1 = node_xy(i, j)
        x2, y2 = node_xy(i2, j2)
        return x1 + t * (x2 - x1), y1 + t * (y2 - y1)

    def edge_key(i, j, e):
        return (("h", i, j), ("v", i + 1, j), ("h", i, j + 1), ("v", i, j))[e]

    neighbors: dict = {}

    def link(p, q):
        neighbors.setdefault(p, []).append(q)
        neighbors.setdefault(q, []).append(p)

    c = (pin[:-1, :-1].astype(int) | (pin[:-1, 1:].astype(int) << 1)
         | (pin[1:, 1:].astype(int) << 2) | (pin[1:, :-1].astype(int) << 3))
    for j, i in zip(*np.nonzero((c != 0) & (c != 15))):
        code = int(c[j, i])
        if code in (5, 10):
            corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)]
            vals = [pv[b, a] for a, b in corners if real[b, a]]
            joined = np.mean(vals) <= 0.0
            if code == 5:
                pairs = [(3, 2), (1, 0)] if joined else [(3, 0), (1, 2)]
            else:
                pairs = [(0, 3), (2, 1)] if joined else [(0, 1), (2, 3)]
        else:
            pairs = _EDGE_PAIRS[code]
        for e1, e2 in pairs:
            link(edge_key(i, j, e1), edge_key(i, j, e2))

    rings = []
    seen = set()
    for start in neighbors:
        if start in seen:
            continue
        path = [start]
        seen.add(start)
        prev, cur = None, start
        while True:
            nbrs = neighbors[cur]
            nxt = nbrs[0] if nbrs[0] != prev else nbrs[1]
            if len(nbrs) == 2 and nbrs[0] == nbrs[1]:
                nxt = nbrs[0]
            if nxt == start:
                break
            path.append(nxt)
            seen.add(nxt)
            prev, cur = cur, nxt
        pts = np.array([crossing(k) for k in path])
        keep = np.ones(len(pts), dtype=bool)
        keep[1:] = np.any(pts[1:] != pts[:-1], axis=1)
        pts = pts[keep]
        if len(pts) > 1 and np.array_equal(pts[0], pts[-1]):
            pts = pts[:-1]
        if len(np.unique(pts, axis=0)) >= 3:
            rings.append(np.vstack([pts, pts[:1]]))
    if not rings:
        raise DataError("no zero level set")
    return BoundarySet(rings)


def gradient_norm(field: ScalarField) -> ScalarField:
    """Per-cell Euclidean norm of the finite-difference gradient.

    Central differences in the interior, one-sided differences on the border.
    """
    g = field.grid
    if g.nx < 3 or g.ny < 3:
        raise DataError("gradient_norm needs at least 3 cells per axis")
    dy, dx = np.gradient(field.as_2d(), g.hy, g.hx)
    return ScalarField(g, np.hypot(dx, dy), field.mask)


def count_regions(negative: np.ndarray) -> int:
    """Number of 4-connected components of a boolean 2-D array."""
    from scipy import ndimage
    return int(ndimage.label(negative)[1])
