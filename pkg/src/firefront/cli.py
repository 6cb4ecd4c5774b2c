"""Command-line interface.

Verbs: rasterize, covariates, simulate, fit, forecast, evaluate, report.
Each verb reads a JSON or TOML config (``--config``), writes its artifacts under
``--out-dir`` and leaves a ``run_record_<verb>.json`` next to them.

Exit codes: 0 success, 2 config error, 3 data error, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import logging
import platform
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional

import numpy as np
import scipy

from . import __version__, config as cfgmod
from .basis import exponential_basis
from .errors import ConfigError, DataError, FirefrontError
from .evaluation import boundary_coverage, contours_svg, credible_band, mean_threat_score
from .grid import GridSpec, ScalarField
from .inference import ModelSpec, forecast, predict_interior, run_chain
from .inference.model import Hyperparameters
from .io import (fit_report, format_effects_table, read_boundary, read_covariates, read_field,
                 read_json, read_samples, read_series, times_to_hours, write_covariates,
                 write_field, write_json, write_samples, write_series)
from .levelset import (EvolutionConfig, VSHAPE_DT, add_observation_noise, generate_merging_circles,
                       generate_vshape)
from .pipeline import build_covariates, rasterize

log = logging.getLogger("firefront")
VERBS = ("rasterize", "covariates", "simulate", "fit", "forecast", "evaluate", "report")


def _versions() -> dict:
    return {"firefront": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "scipy": scipy.__version__}


def _write_record(out_dir: Path, cfg: dict, outputs: list) -> None:
    write_json(out_dir / f"run_record_{cfg['command']}.json", {
        "command": cfg["command"], "config": cfg, "config_sha256": cfgmod.config_hash(cfg),
        "seed": cfg["seed"], "versions": _versions(), "outputs": sorted(outputs)})


def _grid(doc: dict) -> GridSpec:
    try:
        return GridSpec.from_dict(doc)
    except (DataError, TypeError) as exc:
        raise ConfigError(f"invalid grid: {exc}") from exc


def _truth_field(cfg: dict) -> Optional[ScalarField]:
    if cfg["truth"] and cfg["truth_series"]:
        raise ConfigError("give either 'truth' or 'truth_series', not both")
    if cfg["truth"]:
        return read_field(cfg["truth"])
    if cfg["truth_series"]:
        if cfg["truth_index"] is None:
            raise ConfigError("'truth_series' needs 'truth_index' (0-based)")
        series = read_series(cfg["truth_series"])
        if not 0 <= cfg["truth_index"] < series.T:
            raise ConfigError(f"truth_index {cfg['truth_index']} outside 0..{series.T - 1}")
        return series.fields[cfg["truth_index"]]
    return None


# -- verbs -------------------------------------------------------------------

def cmd_rasterize(cfg: dict, base: Path, out_dir: Path) -> list:
    grid = _grid(cfg["grid"])
    entries = cfg["boundaries"]
    if len(entries) < 3:
        raise DataError(f"need at least 3 boundary files, got {len(entries)}")
    for k, e in enumerate(entries):
        if not isinstance(e, dict) or set(e) != {"file", "time"}:
            raise ConfigError(f"boundaries[{k}] must be an object with keys 'file' and 'time'")
    hours = times_to_hours([e["time"] for e in entries])
    boundaries = [read_boundary((base / e["file"]).resolve(), float(h)) for e, h in zip(entries, hours)]
    series = rasterize(boundaries, grid, hours)
    origin = entries[0]["time"] if isinstance(entries[0]["time"], str) else None
    write_series(out_dir / cfg["out"], series, origin)
    log.info("rasterized %d boundaries onto a %dx%d grid", series.T, grid.nx, grid.ny)
    return [cfg["out"]]


def cmd_covariates(cfg: dict, base: Path, out_dir: Path) -> list:
    grid = _grid(cfg["grid"])
    rasters, sources = {}, {}
    for name, rel in cfg["rasters"].items():
        if not isinstance(rel, str):
            raise ConfigError(f"rasters[{name!r}] must be a file path")
        rasters[name] = read_field((base / rel).resolve())
        sources[name] = rel
    dem = None
    if cfg["dem"]:
        dem = read_field(cfg["dem"])
        sources["dem"] = Path(cfg["dem"]).name
    cov = build_covariates(rasters, grid, dem, float(cfg["z_factor"]), sources)
    write_covariates(out_dir / cfg["out"], cov)
    return [cfg["out"]]


def cmd_simulate(cfg: dict, base: Path, out_dir: Path) -> list:
    preset = cfg["preset"]
    grid = _grid(cfg["grid"]) if cfg["grid"] is not None else None
    kwargs = {"redistance_every": cfg["redistance_every"], "params": cfg["params"]}
    if preset == "merging_circles":
        defaults = EvolutionConfig()
        evo = EvolutionConfig(dt=cfg["dt"] or defaults.dt, n_steps=cfg["n_steps"] or defaults.n_steps,
                              speed=defaults.speed if cfg["speed"] is None else float(cfg["speed"]),
                              **kwargs)
        series = generate_merging_circles(grid, evo)
    elif preset == "vshape":
        if cfg["speed"] is not None:
            raise ConfigError("the vshape preset takes 'params' {a, b}, not 'speed'")
        evo = EvolutionConfig(dt=cfg["dt"] or VSHAPE_DT, n_steps=cfg["n_steps"] or 14,
                              speed="north_bias", **kwargs)
        series = generate_vshape(grid, evo)
    else:
        raise ConfigError(f"unknown preset {preset!r}; use 'merging_circles' or 'vshape'")
    if cfg["sigma_d"] > 0:
        series = add_observation_noise(series, float(cfg["sigma_d"]), cfg["seed"])
    write_series(out_dir / cfg["out"], series)
    return [cfg["out"]]


def _fit_one(args):
    spec, series, phi_times, out, report_path, level = args
    samples = run_chain(spec, series, phi_times, callback=_progress(spec))
    write_samples(out, samples)
    write_json(report_path, fit_report(samples, level))
    return str(out)


def _progress(spec: ModelSpec):
    step = max(spec.n_iter // 10, 1)

    def cb(it, state):
        if (it + 1) % step == 0:
            log.info("seed %d: iteration %d/%d", spec.seed, it + 1, spec.n_iter)
    return cb


def cmd_fit(cfg: dict, base: Path, out_dir: Path, threads: int = 1) -> list:
    series = read_series(cfg["series"])
    if cfg["train_steps"] is not None:
        if not 3 <= cfg["train_steps"] <= series.T:
            raise ConfigError(f"train_steps must lie in 3..{series.T}")
        series = series.head(cfg["train_steps"])
    hold = cfg["hold_out"]
    if any(not isinstance(k, int) or isinstance(k, bool) for k in hold):
        raise ConfigError("hold_out must list 0-based integer time indices")
    if any(not 1 <= k < series.T for k in hold):
        raise ConfigError(f"hold_out indices must lie in 1..{series.T - 1} (index 0 fixes phi_0)")
    if hold:
        series = series.with_missing(hold)
    cov = read_covariates(cfg["covariates"]) if cfg["covariates"] else None
    if cov is not None and cov.grid != series.grid:
        raise DataError("covariate grid does not match the series grid")
    if cfg["n_chains"] < 1:
        raise ConfigError("n_chains must be >= 1")
    try:
        hyper = Hyperparameters(**cfg["hyper"])
    except TypeError as exc:
        raise ConfigError(f"invalid hyper block: {exc}") from exc
    if not 1 <= cfg["J"] <= series.grid.n:
        raise ConfigError(f"J must lie in 1..{series.grid.n}")
    basis = exponential_basis(series.grid, cfg["J"], cfg["range"])
    phi_times = sorted(set([series.T] + [k + 1 for k in hold] + [int(t) for t in cfg["phi_times"]]))
    jobs, outputs = [], []
    for c in range(cfg["n_chains"]):
        spec = ModelSpec(cfg["variant"], basis, cov, hyper, n_iter=cfg["n_iter"],
                         n_burn=cfg["n_burn"], thin=cfg["thin"], seed=cfg["seed"] + c)
        if cfg["n_chains"] == 1:
            out, rep = out_dir / cfg["out"], out_dir / cfg["report"]
            outputs += [cfg["out"], cfg["report"]]
        else:
            out = out_dir / cfg["out"] / f"chain_{c:02d}"
            rep = out / cfg["report"]
            outputs.append(f"{cfg['out']}/chain_{c:02d}")
        jobs.append((spec, series, phi_times, out, rep, 0.95))
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(threads, len(jobs))) as pool:
            list(pool.map(_fit_one, jobs))
    else:
        for job in jobs:
            _fit_one(job)
    for job in jobs:
        print(format_effects_table(read_json(job[4])))
    return outputs


def _band_outputs(draws, level, out: Path, grid) -> tuple:
    try:
        lo, hi, mean = credible_band(draws, level)
    except DataError as exc:
        log.warning("no credible band: %s", exc)
        return None, None, ScalarField(grid, np.mean([d.values for d in draws], axis=0))
    write_field(out / "lower.json", lo)
    write_field(out / "upper.json", hi)
    return lo, hi, mean


def _score(draws, truth, cfg, lo, hi) -> dict:
    score = mean_threat_score(draws, truth, float(cfg["tau"])).to_dict()
    if cfg["truth_boundary"]:
        if lo is None:
            raise DataError("boundary coverage needs a credible band (too few draws)")
        score["boundary_coverage"] = boundary_coverage(lo, hi, read_boundary(cfg["truth_boundary"]))
    return score


def cmd_forecast(cfg: dict, base: Path, out_dir: Path) -> list:
    samples = read_samples(cfg["samples"])
    grid = samples.spec.basis.grid
    truth = _truth_field(cfg)
    if truth is not None and truth.grid != grid:
        raise DataError("truth grid does not match the fitted grid")
    if cfg["interior_time"] is not None:
        if cfg["horizon"] is not None:
            raise ConfigError("give either 'horizon' or 'interior_time', not both")
        fc = predict_interior(samples, grid, cfg["interior_time"], seed=cfg["seed"])
    else:
        horizon = cfg["horizon"]
        if horizon is None and cfg["truth_series"] and cfg["truth_index"] is not None:
            t_truth = read_series(cfg["truth_series"]).times[cfg["truth_index"]]
            horizon = float(t_truth - samples.times[-1])
        if horizon is None:
            raise ConfigError("'horizon' is required unless it can be taken from truth_series")
        fc = forecast(samples, grid, horizon, seed=cfg["seed"])
    out = out_dir / cfg["out"]
    out.mkdir(parents=True, exist_ok=True)
    np.save(out / "draws_z.npy", fc.z, allow_pickle=False)
    np.save(out / "draws_phi.npy", fc.phi, allow_pickle=False)
    draws = fc.draws
    lo, hi, mean = _band_outputs(draws, float(cfg["level"]), out, grid)
    write_field(out / "mean.json", mean)
    manifest = {"format": "firefront-forecast", "version": 1, "grid": grid.to_dict(),
                "steps": fc.steps, "interior_time": cfg["interior_time"], "n_draws": len(draws),
                "level": cfg["level"], "draws": "draws_z.npy", "phi": "draws_phi.npy"}
    write_json(out / "manifest.json", manifest)
    if truth is not None:
        score = _score(draws, truth, cfg, lo, hi)
        write_json(out / "score.json", score)
        print(f"mean TS {score['mean_ts']:.4f} over {score['n_draws']} draws")
    if cfg["svg"]:
        layers = {"mean": mean}
        if truth is not None:
            layers = {"truth": truth, "mean": mean}
        if lo is not None:
            layers.update(lower=lo, upper=hi)
        (out / "contours.svg").write_text(contours_svg(layers) + "\n", encoding="utf-8")
    return [cfg["out"]]


def cmd_evaluate(cfg: dict, base: Path, out_dir: Path) -> list:
    fdir = Path(cfg["forecast"])
    man = read_json(fdir / "manifest.json")
    if man.get("format") != "firefront-forecast":
        raise DataError(f"{fdir}: not a forecast directory")
    grid = GridSpec.from_dict(man["grid"])
    path = fdir / man["draws"]
    if not path.is_file():
        raise DataError(f"file not found: {path}")
    z = np.load(path, allow_pickle=False)
    draws = [ScalarField(grid, row) for row in z]
    truth = _truth_field(cfg)
    if truth is None:
        raise ConfigError("evaluate needs 'truth' or 'truth_series'")
    if truth.grid != grid:
        raise DataError("truth grid does not match the forecast grid")
    lo = hi = None
    if cfg["truth_boundary"]:
        lo, hi, _ = credible_band(draws, float(cfg["level"]))
    score = _score(draws, truth, cfg, lo, hi)
    write_json(out_dir / cfg["out"], score)
    print(f"mean TS {score['mean_ts']:.4f} over {score['n_draws']} draws")
    return [cfg["out"]]


def cmd_report(cfg: dict, base: Path, out_dir: Path) -> list:
    report = fit_report(read_samples(cfg["samples"]), float(cfg["level"]))
    write_json(out_dir / cfg["out"], report)
    print(format_effects_table(report))
    return [cfg["out"]]


COMMANDS = {"rasterize": cmd_rasterize, "covariates": cmd_covariates, "simulate": cmd_simulate,
            "fit": cmd_fit, "forecast": cmd_forecast, "evaluate": cmd_evaluate, "report": cmd_report}


# -- entry point ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="run configuration (.json or .toml)")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="override the config seed")
    common.add_argument("--out-dir", default=argparse.SUPPRESS, help="output directory")
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                        help="worker processes for multi-chain fits")
    common.add_argument("-v", "--verbose", action="count", default=argparse.SUPPRESS,
                        help="more logging (repeatable)")
    parser = argparse.ArgumentParser(prog="firefront", parents=[common],
                                     description="Bayesian level-set forecasting of fire fronts.")
    parser.add_argument("--version", action="version", version=f"firefront {__version__}")
    sub = parser.add_subparsers(dest="verb", metavar="VERB")
    sub.required = True
    for verb in VERBS:
        p = sub.add_parser(verb, parents=[common], help=COMMANDS[verb].__name__.replace("cmd_", ""))
        if verb == "simulate":
            p.add_argument("--preset", choices=("merging_circles", "vshape"), default=None)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    verbose = getattr(args, "verbose", 0)
    logging.basicConfig(level=logging.WARNING - 10 * min(verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        overrides = {"seed": getattr(args, "seed", None)}
        if args.verb == "simulate":
            overrides["preset"] = args.preset
        cfg, base = cfgmod.load(getattr(args, "config", None), args.verb, overrides)
        cfg = cfgmod.resolve_inputs(cfg, base)
        out_arg = getattr(args, "out_dir", None)
        if out_arg is not None:
            out_dir = Path(out_arg)
        elif cfg["out_dir"] is not None:
            out_dir = base / cfg["out_dir"]
        else:
            out_dir = Path.cwd()
        threads = getattr(args, "threads", 1)
        if threads < 1:
            raise ConfigError("--threads must be >= 1")
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.verb == "fit":
            outputs = cmd_fit(cfg, base, out_dir, threads)
        else:
            outputs = COMMANDS[args.verb](cfg, base, out_dir)
        _write_record(out_dir, cfg, outputs)
        return 0
    except FirefrontError as exc:
        print(f"firefront {args.verb}: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"firefront {args.verb}: error: {exc}", file=sys.stderr)
        return DataError.exit_code


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
