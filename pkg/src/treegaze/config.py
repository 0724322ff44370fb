"""Declarative run configuration for the command-line pipeline."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

PATH_KEYS = ("conllu", "fixations", "norms", "surprisal", "epochs_dir")


@dataclass
class RunConfig:
    conllu: Path | None = None
    fixations: Path | None = None
    norms: Path | None = None
    surprisal: Path | None = None
    epochs_dir: Path | None = None
    out_dir: Path = Path("out")
    min_fixation_ms: float = 100.0
    bins: int = 4
    n_perm: int = 1000
    n_boot: int = 1000
    alpha: float = 0.05
    max_parents: int = 4
    restarts: int = 8
    seed: int = 0
    rois: dict[str, list[int]] = field(default_factory=dict)

    def require(self, *keys: str) -> None:
        """Check that the named input paths are configured and exist."""
        for key in keys:
            value = getattr(self, key)
            if value is None:
                raise ConfigError(f"config is missing required path {key!r}")
            if not Path(value).exists():
                raise ConfigError(f"configured {key} path does not exist: {value}")


def load_config(path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")

    cfg = RunConfig()
    paths = raw.get("paths", {})
    if not isinstance(paths, dict):
        raise ConfigError("config 'paths' must be an object")
    for key, value in paths.items():
        if key not in PATH_KEYS:
            raise ConfigError(f"unknown path key {key!r} (expected one of {PATH_KEYS})")
        # relative paths are resolved against the config file's directory
        setattr(cfg, key, (path.parent / value).resolve() if value else None)

    params = raw.get("parameters", {})
    if not isinstance(params, dict):
        raise ConfigError("config 'parameters' must be an object")
    numeric = {
        "min_fixation_ms": (float, 0.0, None),
        "bins": (int, 2, 64),
        "n_perm": (int, 1, None),
        "n_boot": (int, 2, None),
        "alpha": (float, 0.0, 1.0),
        "max_parents": (int, 0, None),
        "restarts": (int, 0, None),
        "seed": (int, 0, None),
    }
    for key, value in params.items():
        if key not in numeric:
            raise ConfigError(f"unknown parameter {key!r}")
        cast, lo, hi = numeric[key]
        try:
            value = cast(value)
        except (TypeError, ValueError):
            raise ConfigError(f"parameter {key!r} must be numeric") from None
        if (lo is not None and value < lo) or (hi is not None and value > hi):
            raise ConfigError(f"parameter {key!r} out of range: {value}")
        if key == "alpha" and not 0.0 < value < 1.0:
            raise ConfigError(f"parameter 'alpha' must lie strictly in (0, 1): {value}")
        setattr(cfg, key, value)

    rois = raw.get("rois", {})
    if not isinstance(rois, dict):
        raise ConfigError("config 'rois' must map names to channel-index lists")
    for name, channels in rois.items():
        if not isinstance(channels, list) or not all(isinstance(c, int) for c in channels):
            raise ConfigError(f"ROI {name!r} must be a list of integer channel indices")
        if not channels:
            raise ConfigError(f"ROI {name!r} is empty")
    cfg.rois = {str(k): list(v) for k, v in rois.items()}

    out_dir = raw.get("out_dir", "out")
    cfg.out_dir = (path.parent / out_dir).resolve()
    return cfg


def dump_config(cfg: RunConfig) -> str:
    """Serialize the resolved configuration (archived next to the reports)."""
    payload = {
        "paths": {k: (str(getattr(cfg, k)) if getattr(cfg, k) else None) for k in PATH_KEYS},
        "parameters": {
            "min_fixation_ms": cfg.min_fixation_ms,
            "bins": cfg.bins,
            "n_perm": cfg.n_perm,
            "n_boot": cfg.n_boot,
            "alpha": cfg.alpha,
            "max_parents": cfg.max_parents,
            "restarts": cfg.restarts,
            "seed": cfg.seed,
        },
        "rois": cfg.rois,
        "out_dir": str(cfg.out_dir),
    }
    return json.dumps(payload, indent=2, sort_keys=True)
