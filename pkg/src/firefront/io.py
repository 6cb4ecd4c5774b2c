"""On-disk formats for fields, boundaries, series, bases and posterior draws.

Every writer produces byte-identical output for identical input: JSON is
written with sorted keys and ``repr`` floats (which round-trip exactly), and
binary blocks use plain ``.npy`` files.
"""
from __future__ import annotations

import csv
import json
import os
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .basis import BasisMatrix, CovariateMatrix
from .errors import DataError
from .grid import BoundarySet, GridSpec, ScalarField
from .inference.diagnostics import MONITORED, effective_sample_size
from .inference.gibbs import PosteriorSamples
from .inference.model import Hyperparameters, ModelSpec
from .series import ObservationSeries

FORMAT_VERSION = 1
PathLike = Union[str, os.PathLike]
CHUNK = 5000


def write_json(path: PathLike, obj) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(obj, sort_keys=True, indent=1, allow_nan=False)
    path.write_text(text + "\n", encoding="utf-8")


def read_json(path: PathLike):
    path = Path(path)
    if not path.is_file():
        raise DataError(f"file not found: {path}")
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})") from exc


def _check_format(doc, kind: str, path) -> None:
    if not isinstance(doc, dict) or doc.get("format") != kind:
        raise DataError(f"{path}: not a {kind} file")
    if doc.get("version") != FORMAT_VERSION:
        raise DataError(f"{path}: unsupported {kind} version {doc.get('version')!r}")


# -- masks -------------------------------------------------------------------

def mask_to_rle(mask: Optional[np.ndarray]) -> Optional[list]:
    """Run lengths of alternating observed/missing cells, starting with observed."""
    if mask is None:
        return None
    runs = []
    current, count = True, 0
    for m in np.asarray(mask, dtype=bool):
        if m == current:
            count += 1
        else:
            runs.append(count)
            current, count = m, 1
    runs.append(count)
    return runs


def rle_to_mask(runs: Optional[Sequence[int]], n: int) -> Optional[np.ndarray]:
    if runs is None:
        return None
    if any(int(r) < 0 for r in runs) or sum(int(r) for r in runs) != n:
        raise DataError(f"mask run lengths must be non-negative and sum to {n}")
    out = np.empty(n, dtype=bool)
    pos, value = 0, True
    for r in runs:
        out[pos:pos + int(r)] = value
        pos += int(r)
        value = not value
    return out


# -- fields ------------------------------------------------------------------

def field_to_dict(field: ScalarField) -> dict:
    vals = [None if not ok else float(v) for v, ok in zip(field.values, field.observed)]
    return {"format": "firefront-field", "version": FORMAT_VERSION,
            "grid": field.grid.to_dict(), "mask_rle": mask_to_rle(field.mask), "values": vals}


def field_from_dict(doc: dict, source="<dict>") -> ScalarField:
    _check_format(doc, "firefront-field", source)
    grid = GridSpec.from_dict(doc["grid"])
    raw = doc["values"]
    if len(raw) != grid.n:
        raise DataError(f"{source}: expected {grid.n} values, got {len(raw)}")
    mask = rle_to_mask(doc.get("mask_rle"), grid.n)
    vals = np.array([np.nan if v is None else float(v) for v in raw])
    if mask is None and np.isnan(vals).any():
        mask = ~np.isnan(vals)
    return ScalarField(grid, vals, mask)


def write_field(path: PathLike, field: ScalarField) -> None:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        write_field_csv(path, field)
    else:
        write_json(path, field_to_dict(field))


def read_field(path: PathLike) -> ScalarField:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return read_field_csv(path)
    return field_from_dict(read_json(path), path)


def write_field_csv(path: PathLike, field: ScalarField) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pts = field.grid.centers()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y", "value"])
        for (x, y), v, ok in zip(pts, field.values, field.observed):
            w.writerow([repr(float(x)), repr(float(y)), repr(float(v)) if ok else ""])


def _axis_from_coords(coords: np.ndarray, name: str, path) -> tuple:
    u = np.unique(coords)
    if len(u) < 2:
        raise DataError(f"{path}: need at least two distinct {name} coordinates")
    return len(u), float(u[0]), float(u[-1])


def read_field_csv(path: PathLike) -> ScalarField:
    """Read an ``x,y,value`` table covering every cell of a regular grid once."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"file not found: {path}")
    xs, ys, vs = [], [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"x", "y", "value"} <= set(reader.fieldnames):
            raise DataError(f"{path}: CSV needs columns x, y, value")
        for k, row in enumerate(reader, start=2):
            try:
                xs.append(float(row["x"]))
                ys.append(float(row["y"]))
                vs.append(float(row["value"]) if row["value"].strip() else np.nan)
            except (TypeError, ValueError) as exc:
                raise DataError(f"{path}: line {k}: {exc}") from exc
    xs, ys, vs = np.array(xs), np.array(ys), np.array(vs)
    nx, x0, x1 = _axis_from_coords(xs, "x", path)
    ny, y0, y1 = _axis_from_coords(ys, "y", path)
    grid = GridSpec(nx, ny, x0, x1, y0, y1)
    if len(vs) != grid.n:
        raise DataError(f"{path}: {len(vs)} rows do not fill a {nx}x{ny} grid")
    ix = np.rint((xs - x0) / grid.hx).astype(int)
    iy = np.rint((ys - y0) / grid.hy).astype(int)
    if not (np.allclose(grid.x[ix], xs, rtol=0, atol=1e-9 * grid.hx)
            and np.allclose(grid.y[iy], ys, rtol=0, atol=1e-9 * grid.hy)):
        raise DataError(f"{path}: coordinates are not on a regular grid")
    flat = iy * nx + ix
    if len(np.unique(flat)) != grid.n:
        raise DataError(f"{path}: duplicate cells")
    vals = np.empty(grid.n)
    vals[flat] = vs
    mask = ~np.isnan(vals)
    return ScalarField(grid, vals, None if mask.all() else mask)


# -- boundaries ----------------------------------------------------------------

def write_boundary(path: PathLike, boundary: BoundarySet) -> None:
    rings = [[[float(x), float(y)] for x, y in ring] for ring in boundary.rings]
    write_json(path, {"format": "firefront-boundary", "version": FORMAT_VERSION,
                      "timestamp": float(boundary.timestamp), "rings": rings})


def read_boundary(path: PathLike, timestamp: Optional[float] = None) -> BoundarySet:
    """Read a polygon file: ``{"rings": [[[x, y], ...], ...]}``.

    ``format``/``version`` keys are optional here so hand-written files load.
    Parse failures name the file and the offending ring.
    """
    doc = read_json(path)
    if not isinstance(doc, dict) or "rings" not in doc:
        raise DataError(f"{path}: polygon file needs a 'rings' list")
    if "format" in doc and doc["format"] != "firefront-boundary":
        raise DataError(f"{path}: not a firefront-boundary file")
    rings = []
    for k, ring in enumerate(doc["rings"]):
        try:
            arr = np.asarray(ring, dtype=float)
        except (TypeError, ValueError) as exc:
            raise DataError(f"{path}: ring {k}: {exc}") from exc
        if arr.ndim != 2 or arr.shape[1] != 2 or not np.isfinite(arr).all():
            raise DataError(f"{path}: ring {k}: expected a list of finite [x, y] pairs")
        rings.append(arr)
    ts = timestamp if timestamp is not None else float(doc.get("timestamp", 0.0))
    try:
        return BoundarySet(rings, ts)
    except (DataError, ValueError) as exc:
        raise DataError(f"{path}: {exc}") from exc


# -- time stamps -------------------------------------------------------------

def parse_timestamp(value) -> datetime:
    if not isinstance(value, str):
        raise DataError(f"expected an ISO-8601 string, got {value!r}")
    text = value.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    try:
        dt = datetime.fromisoformat(text)
    except ValueError as exc:
        raise DataError(f"bad ISO-8601 timestamp {value!r}") from exc
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt


def times_to_hours(stamps: Sequence) -> np.ndarray:
    """Hours since the first stamp. Accepts all-ISO strings or all numbers (hours)."""
    if len(stamps) == 0:
        return np.zeros(0)
    if all(isinstance(s, str) for s in stamps):
        parsed = [parse_timestamp(s) for s in stamps]
        return np.array([(p - parsed[0]).total_seconds() / 3600.0 for p in parsed])
    if all(isinstance(s, (int, float)) and not isinstance(s, bool) for s in stamps):
        return np.asarray(stamps, dtype=float)
    raise DataError("timestamps must be all ISO-8601 strings or all numbers of hours")


# -- series ------------------------------------------------------------------

def write_series(directory: PathLike, series: ObservationSeries, origin: Optional[str] = None) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    names = []
    for k, f in enumerate(series.fields):
        name = f"field_{k:03d}.json"
        write_field(d / name, f)
        names.append(name)
    write_json(d / "manifest.json", {
        "format": "firefront-series", "version": FORMAT_VERSION,
        "grid": series.grid.to_dict(), "times": [float(t) for t in series.times],
        "deltas": [float(x) for x in series.deltas], "fields": names,
        "time_units": "hours", "origin": origin})


def read_series(directory: PathLike) -> ObservationSeries:
    d = Path(directory)
    path = d / "manifest.json"
    doc = read_json(path)
    _check_format(doc, "firefront-series", path)
    grid = GridSpec.from_dict(doc["grid"])
    fields = [read_field(d / name) for name in doc["fields"]]
    for name, f in zip(doc["fields"], fields):
        if f.grid != grid:
            raise DataError(f"{d / name}: grid differs from the series manifest")
    times = np.asarray(doc["times"], dtype=float)
    if len(times) != len(fields):
        raise DataError(f"{path}: {len(times)} times for {len(fields)} fields")
    return ObservationSeries(grid, times, fields)


# -- basis and covariates ------------------------------------------------------

def basis_to_dict(basis: BasisMatrix) -> dict:
    cols = np.asarray(basis.columns, dtype=float)
    return {"format": "firefront-basis", "version": FORMAT_VERSION,
            "grid": basis.grid.to_dict() if basis.grid is not None else None,
            "n": int(cols.shape[0]), "J": int(cols.shape[1]),
            "eigenvalues": [float(v) for v in basis.eigenvalues],
            "columns": [float(v) for v in cols.ravel(order="F")]}


def basis_from_dict(doc: dict, source="<dict>") -> BasisMatrix:
    _check_format(doc, "firefront-basis", source)
    n, J = int(doc["n"]), int(doc["J"])
    flat = np.asarray(doc["columns"], dtype=float)
    if flat.size != n * J:
        raise DataError(f"{source}: expected {n * J} basis entries, got {flat.size}")
    grid = GridSpec.from_dict(doc["grid"]) if doc.get("grid") is not None else None
    return BasisMatrix(grid, flat.reshape((n, J), order="F"), np.asarray(doc["eigenvalues"], dtype=float))


def write_basis(path: PathLike, basis: BasisMatrix) -> None:
    write_json(path, basis_to_dict(basis))


def read_basis(path: PathLike) -> BasisMatrix:
    return basis_from_dict(read_json(path), path)


def covariates_to_dict(cov: CovariateMatrix) -> dict:
    cols = np.asarray(cov.columns, dtype=float)
    return {"format": "firefront-covariates", "version": FORMAT_VERSION,
            "grid": cov.grid.to_dict(), "names": list(cov.names),
            "provenance": list(cov.provenance), "n": int(cols.shape[0]), "P": int(cols.shape[1]),
            "columns": [float(v) for v in cols.ravel(order="F")]}


def covariates_from_dict(doc: dict, source="<dict>") -> CovariateMatrix:
    _check_format(doc, "firefront-covariates", source)
    n, P = int(doc["n"]), int(doc["P"])
    flat = np.asarray(doc["columns"], dtype=float)
    if flat.size != n * P:
        raise DataError(f"{source}: expected {n * P} covariate entries, got {flat.size}")
    return CovariateMatrix(GridSpec.from_dict(doc["grid"]), flat.reshape((n, P), order="F"),
                           list(doc["names"]), list(doc.get("provenance") or [{}] * P))


def write_covariates(path: PathLike, cov: CovariateMatrix) -> None:
    write_json(path, covariates_to_dict(cov))


def read_covariates(path: PathLike) -> CovariateMatrix:
    return covariates_from_dict(read_json(path), path)


# -- posterior draws -----------------------------------------------------------

def write_samples(directory: PathLike, samples: PosteriorSamples, chunk: int = CHUNK) -> None:
    """Blocks split along the draw axis into ``.npy`` chunks plus a manifest."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    spec = samples.spec
    write_basis(d / "basis.json", spec.basis)
    if spec.covariates is not None:
        write_covariates(d / "covariates.json", spec.covariates)
    blocks = {}
    for name in sorted(samples.draws):
        arr = np.ascontiguousarray(samples.draws[name])
        files = []
        for k, start in enumerate(range(0, max(len(arr), 1), chunk)):
            fname = f"{name}_{k:04d}.npy"
            np.save(d / fname, arr[start:start + chunk], allow_pickle=False)
            files.append(fname)
        blocks[name] = {"shape": list(arr.shape), "dtype": str(arr.dtype), "chunks": files}
    np.save(d / "iterations.npy", np.asarray(samples.iterations, dtype=np.int64), allow_pickle=False)
    np.save(d / "spectral_radius_trace.npy", samples.spectral_radius_trace, allow_pickle=False)
    write_json(d / "manifest.json", {
        "format": "firefront-samples", "version": FORMAT_VERSION,
        "spec": {"variant": spec.variant, "n_iter": spec.n_iter, "n_burn": spec.n_burn,
                 "thin": spec.thin, "seed": spec.seed, "J": spec.J,
                 "hyper": asdict(spec.hyper)},
        "covariates": "covariates.json" if spec.covariates is not None else None,
        "basis": "basis.json", "times": [float(t) for t in samples.times],
        "phi_times": list(samples.phi_times), "held_out": list(samples.held_out),
        "blocks": blocks, "iterations": "iterations.npy",
        "spectral_radius_trace": "spectral_radius_trace.npy", "n_draws": samples.L})


def _load_npy(path: Path) -> np.ndarray:
    if not path.is_file():
        raise DataError(f"file not found: {path}")
    return np.load(path, allow_pickle=False)


def read_samples(directory: PathLike) -> PosteriorSamples:
    d = Path(directory)
    doc = read_json(d / "manifest.json")
    _check_format(doc, "firefront-samples", d / "manifest.json")
    s = doc["spec"]
    basis = read_basis(d / doc["basis"])
    cov = read_covariates(d / doc["covariates"]) if doc.get("covariates") else None
    spec = ModelSpec(s["variant"], basis, cov, Hyperparameters(**s["hyper"]),
                     n_iter=s["n_iter"], n_burn=s["n_burn"], thin=s["thin"], seed=s["seed"])
    draws = {}
    for name, meta in doc["blocks"].items():
        parts = [_load_npy(d / f) for f in meta["chunks"]]
        arr = np.concatenate(parts, axis=0) if parts else np.empty(meta["shape"])
        if list(arr.shape) != list(meta["shape"]):
            raise DataError(f"{d}: block {name} has shape {arr.shape}, manifest says {meta['shape']}")
        draws[name] = arr
    return PosteriorSamples(spec, np.asarray(doc["times"], dtype=float),
                            _load_npy(d / doc["iterations"]), draws, list(doc["phi_times"]),
                            _load_npy(d / doc["spectral_radius_trace"]), list(doc["held_out"]))


# -- reports -----------------------------------------------------------------

def _interval(x: np.ndarray, level: float = 0.95) -> list:
    a = (1.0 - level) / 2.0
    lo, hi = np.quantile(x, [a, 1.0 - a], axis=0)
    return [np.atleast_1d(lo).tolist(), np.atleast_1d(hi).tolist()]


def _ess_table(samples: PosteriorSamples) -> dict:
    out = {}
    for block in MONITORED:
        arr = samples.draws.get(block)
        if arr is None or arr.reshape(len(arr), -1).shape[1] == 0:
            continue
        if samples.L < 100:
            out[block] = None
            continue
        res = effective_sample_size(samples, block)
        out[block] = {"ess": res.ess.tolist(), "degenerate": res.degenerate.tolist()}
    return out


def fit_report(samples: PosteriorSamples, level: float = 0.95) -> dict:
    """Posterior summaries: covariate effects with equal-tailed intervals,
    variances, transition, spectral-radius trace summary and ESS table."""
    d = samples.draws
    spec = samples.spec
    names = list(spec.covariates.names) if spec.covariates is not None else []
    effects = []
    lo, hi = _interval(d["beta"], level) if d["beta"].shape[1] else ([], [])
    for k, name in enumerate(names):
        col = d["beta"][:, k]
        effects.append({"name": name, "mean": float(col.mean()), "sd": float(col.std(ddof=1)) if len(col) > 1 else 0.0,
                        "lower": float(lo[k]), "upper": float(hi[k])})
    trace = samples.spectral_radius_trace
    post = d["spectral_radius"]
    report = {
        "variant": spec.variant, "J": spec.J, "P": len(names), "n_draws": samples.L,
        "n_iter": spec.n_iter, "n_burn": spec.n_burn, "thin": spec.thin, "seed": spec.seed,
        "level": level, "covariate_effects": effects,
        "sigma2_d": {"mean": float(d["sigma2_d"].mean()), "interval": _interval(d["sigma2_d"], level)},
        "sigma2_p": {"mean": float(d["sigma2_p"].mean()), "interval": _interval(d["sigma2_p"], level)},
        "transition_mean": d["transition"].mean(axis=0).tolist(),
        "spectral_radius": {
            "post_burn_mean": float(post.mean()), "post_burn_max": float(post.max()),
            "fraction_above_one": float(np.mean(post > 1.0)),
            "trace_max": float(trace.max()), "trace_final": float(trace[-1])},
        "ess": _ess_table(samples), "held_out": list(samples.held_out),
        "times": [float(t) for t in samples.times],
    }
    return report


def format_effects_table(report: dict) -> str:
    """Plain-text covariate table: mean and interval per coefficient."""
    pct = int(round(100 * report["level"]))
    lines = [f"{'covariate':<14}{'mean':>12}{f'{pct}% lower':>14}{f'{pct}% upper':>14}"]
    for e in report["covariate_effects"]:
        lines.append(f"{e['name']:<14}{e['mean']:>12.4g}{e['lower']:>14.4g}{e['upper']:>14.4g}")
    if not report["covariate_effects"]:
        lines.append("(no covariates)")
    s2d, s2p = report["sigma2_d"], report["sigma2_p"]
    lines.append(f"{'sigma2_d':<14}{s2d['mean']:>12.4g}{s2d['interval'][0][0]:>14.4g}{s2d['interval'][1][0]:>14.4g}")
    lines.append(f"{'sigma2_p':<14}{s2p['mean']:>12.4g}{s2p['interval'][0][0]:>14.4g}{s2p['interval'][1][0]:>14.4g}")
    sr = report["spectral_radius"]
    lines.append(f"spectral radius: mean {sr['post_burn_mean']:.4f}, max {sr['post_burn_max']:.4f}, "
                 f"share > 1: {sr['fraction_above_one']:.3f}")
    return "\n".join(lines)

