"""Schema-versioned run configurations (JSON or TOML) for the command-line verbs."""
from __future__ import annotations

import hashlib
import json
import sys
from pathlib import Path
from typing import Any, Optional

from .errors import ConfigError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SCHEMA_VERSION = 1
_NUM = (int, float)
_OPT_STR = (str, type(None))

# key -> (accepted types, default); a default of REQUIRED marks mandatory keys
REQUIRED = object()
_COMMON = {
    "schema_version": (int, REQUIRED),
    "command": (str, None),
    "seed": (int, 0),
    "out_dir": (_OPT_STR, None),
}
SCHEMAS = {
    "rasterize": {
        "grid": (dict, REQUIRED),
        "boundaries": (list, REQUIRED),
        "out": (str, "series"),
    },
    "covariates": {
        "grid": (dict, REQUIRED),
        "rasters": (dict, {}),
        "dem": (_OPT_STR, None),
        "z_factor": (_NUM, 1.0),
        "out": (str, "covariates.json"),
    },
    "simulate": {
        "preset": (str, REQUIRED),
        "grid": ((dict, type(None)), None),
        "dt": ((int, float, type(None)), None),
        "n_steps": ((int, type(None)), None),
        "speed": ((int, float, type(None)), None),
        "params": (dict, {}),
        "redistance_every": (int, 1),
        "sigma_d": (_NUM, 0.0),
        "out": (str, "series"),
    },
    "fit": {
        "series": (str, REQUIRED),
        "variant": (str, "M2"),
        "J": (int, 6),
        "range": ((int, float, type(None)), None),
        "covariates": (_OPT_STR, None),
        "hyper": (dict, {}),
        "n_iter": (int, 30_000),
        "n_burn": (int, 20_000),
        "thin": (int, 1),
        "hold_out": (list, []),
        "train_steps": ((int, type(None)), None),
        "phi_times": (list, []),
        "n_chains": (int, 1),
        "out": (str, "samples"),
        "report": (str, "fit_report.json"),
    },
    "forecast": {
        "samples": (str, REQUIRED),
        "horizon": ((int, float, list, type(None)), None),
        "interior_time": ((int, type(None)), None),
        "truth": (_OPT_STR, None),
        "truth_series": (_OPT_STR, None),
        "truth_index": ((int, type(None)), None),
        "truth_boundary": (_OPT_STR, None),
        "level": (_NUM, 0.95),
        "tau": (_NUM, 0.0),
        "svg": (bool, False),
        "out": (str, "forecast"),
    },
    "evaluate": {
        "forecast": (str, REQUIRED),
        "truth": (_OPT_STR, None),
        "truth_series": (_OPT_STR, None),
        "truth_index": ((int, type(None)), None),
        "truth_boundary": (_OPT_STR, None),
        "level": (_NUM, 0.95),
        "tau": (_NUM, 0.0),
        "out": (str, "score.json"),
    },
    "report": {
        "samples": (str, REQUIRED),
        "level": (_NUM, 0.95),
        "out": (str, "fit_report.json"),
    },
}
# keys holding input paths, resolved against the config file's directory
INPUT_PATHS = {"series", "covariates", "samples", "forecast", "truth", "truth_series",
               "truth_boundary", "dem"}


def _type_ok(value, types) -> bool:
    if isinstance(value, bool) and bool not in (types if isinstance(types, tuple) else (types,)):
        return False
    return isinstance(value, types)


def validate(doc: Any, command: str) -> dict:
    """Check a config document against its command schema and fill defaults."""
    if command not in SCHEMAS:
        raise ConfigError(f"unknown command {command!r}")
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    schema = dict(_COMMON, **SCHEMAS[command])
    unknown = sorted(set(doc) - set(schema))
    if unknown:
        raise ConfigError(f"unknown config keys for {command!r}: {', '.join(unknown)}")
    out = {}
    for key, (types, default) in schema.items():
        if key in doc:
            value = doc[key]
            if not _type_ok(value, types):
                raise ConfigError(f"config key {key!r} has the wrong type ({type(value).__name__})")
            out[key] = value
        elif default is REQUIRED:
            raise ConfigError(f"config key {key!r} is required for {command!r}")
        else:
            out[key] = json.loads(json.dumps(default))
    if out["schema_version"] != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {out['schema_version']}; expected {SCHEMA_VERSION}")
    if out["command"] is not None and out["command"] != command:
        raise ConfigError(f"config is for {out['command']!r}, not {command!r}")
    out["command"] = command
    return out


def load(path: Optional[str], command: str, overrides: Optional[dict] = None) -> tuple[dict, Path]:
    """Read, override, validate. Returns the config and its base directory."""
    if path is None:
        doc, base = {"schema_version": SCHEMA_VERSION}, Path.cwd()
    else:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {p}")
        text = p.read_text(encoding="utf-8")
        if p.suffix.lower() == ".toml":
            try:
                doc = tomllib.loads(text)
            except tomllib.TOMLDecodeError as exc:
                raise ConfigError(f"{p}: invalid TOML ({exc})") from exc
        else:
            try:
                doc = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{p}: invalid JSON ({exc})") from exc
        base = p.resolve().parent
    if isinstance(doc, dict):
        doc = dict(doc, **{k: v for k, v in (overrides or {}).items() if v is not None})
    return validate(doc, command), base


def resolve_inputs(cfg: dict, base: Path) -> dict:
    out = dict(cfg)
    for key in INPUT_PATHS & set(cfg):
        if isinstance(cfg[key], str):
            out[key] = str((base / cfg[key]).resolve())
    return out


def config_hash(cfg: dict) -> str:
    text = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()
