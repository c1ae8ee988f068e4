"""Pipeline configuration.

Values come from, in increasing precedence: built-in defaults (the
published rule weights, iteration cap, and sketch cap), a `key = value`
config file, environment variables prefixed ``BIBMIG_``, and command-line
flags. Unknown keys are rejected rather than ignored.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Callable

__all__ = ["PipelineConfig", "load_config", "ConfigError"]

ENV_PREFIX = "BIBMIG_"


class ConfigError(ValueError):
    pass


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _parse_opt_int(text: str):
    lowered = text.strip().lower()
    return None if lowered in ("", "none") else int(text)


def _parse_str_list(text: str) -> tuple[str, ...]:
    return tuple(item.strip() for item in text.split(",") if item.strip())


def _parse_int_list(text: str) -> tuple[int, ...]:
    return tuple(int(item) for item in text.split(",") if item.strip())


@dataclass
class PipelineConfig:
    corpus: str = ""
    gazetteer: str = ""
    out: str = "out"
    seed: int = 0

    # graph rules
    lambda1: float = 1.0
    lambda2: float = 3.0
    lambda3: float = 2.0
    normalize: bool = True   # row-normalize W; False runs the raw iteration

    # propagation
    max_iterations: int = 100
    tolerance: float = 1e-6
    chunk_width: int | None = None

    # ingest
    year_min: int = 1900
    year_max: int = 2100

    # sketches
    station_cap: int = 10
    baseline_year: int | None = None
    kth_moves: tuple[int, ...] = (2, 3, 4, 5)

    # fitting
    fit_families: tuple[str, ...] = ("lognormal", "gamma", "exponential",
                                     "invgauss", "powerlaw")
    sim_researchers: int = 10000
    sim_horizon: float = 5.0
    plot_grid: int = 200

    # link analysis
    min_count: int = 10
    damping: float = 0.85
    hits_tol: float = 1e-8
    hits_max_iter: int = 100
    pagerank_tol: float = 1e-10
    pagerank_max_iter: int = 1000
    hub_quantile: float = 0.9
    authority_quantile: float = 0.9
    weighted_hits: bool = True


_PARSERS: dict[str, Callable[[str], object]] = {
    "corpus": str, "gazetteer": str, "out": str,
    "seed": int,
    "lambda1": float, "lambda2": float, "lambda3": float,
    "normalize": _parse_bool,
    "max_iterations": int, "tolerance": float, "chunk_width": _parse_opt_int,
    "year_min": int, "year_max": int,
    "station_cap": int, "baseline_year": _parse_opt_int, "kth_moves": _parse_int_list,
    "fit_families": _parse_str_list,
    "sim_researchers": int, "sim_horizon": float, "plot_grid": int,
    "min_count": int, "damping": float,
    "hits_tol": float, "hits_max_iter": int,
    "pagerank_tol": float, "pagerank_max_iter": int,
    "hub_quantile": float, "authority_quantile": float,
    "weighted_hits": _parse_bool,
}

assert set(_PARSERS) == {f.name for f in fields(PipelineConfig)}


def _parse_file(path: Path) -> dict[str, str]:
    values: dict[str, str] = {}
    for line_number, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{line_number}: expected 'key = value'")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def load_config(
    path: str | Path | None = None,
    cli_overrides: dict[str, object] | None = None,
    environ: dict[str, str] | None = None,
) -> PipelineConfig:
    environ = os.environ if environ is None else environ
    textual: dict[str, str] = {}
    if path is not None:
        file_path = Path(path)
        if not file_path.exists():
            raise ConfigError(f"config file not found: {file_path}")
        textual.update(_parse_file(file_path))
    for name in _PARSERS:
        env_value = environ.get(ENV_PREFIX + name.upper())
        if env_value is not None:
            textual[name] = env_value

    config = PipelineConfig()
    for key, text in textual.items():
        if key not in _PARSERS:
            raise ConfigError(f"unknown config key: {key}")
        try:
            setattr(config, key, _PARSERS[key](text))
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"bad value for {key}: {text!r} ({exc})") from exc
    for key, value in (cli_overrides or {}).items():
        if value is not None:
            setattr(config, key, value)
    return config
