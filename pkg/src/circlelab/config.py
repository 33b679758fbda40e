"""Experiment configuration: JSON schemas per subcommand, defaults, validation.

Every validator rejects unknown keys and names the offending key in its
error message; syntax errors carry the line/column from the JSON decoder.
"""

from __future__ import annotations

import json
from typing import Optional

from .system import GeneratorSystem, system_from_config

SUBCOMMANDS = (
    "lyapunov",
    "stationary",
    "dichotomy",
    "contract",
    "basin",
    "hyperbolic",
    "xi",
    "lln",
)


class ConfigError(ValueError):
    """Configuration rejected; the message names the offending key."""


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}")
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be an object")
    return raw


def _num(cfg, key, default, lo=None, hi=None, integer=False):
    val = cfg.get(key, default)
    if val is None:
        raise ConfigError(f"{key}: required")
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {val!r}")
    if integer:
        if float(val) != int(val):
            raise ConfigError(f"{key}: expected an integer, got {val!r}")
        val = int(val)
    else:
        val = float(val)
    if lo is not None and val < lo:
        raise ConfigError(f"{key}: must be >= {lo}, got {val!r}")
    if hi is not None and val > hi:
        raise ConfigError(f"{key}: must be <= {hi}, got {val!r}")
    return val


def _choice(cfg, key, default, options):
    val = cfg.get(key, default)
    if val not in options:
        raise ConfigError(f"{key}: expected one of {sorted(options)}, got {val!r}")
    return val


def _check_keys(cfg, allowed, where="config"):
    unknown = set(cfg) - set(allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")


_COMMON = ("experiment", "seed", "out")


def _system(cfg) -> GeneratorSystem:
    if "system" not in cfg:
        raise ConfigError("system: required")
    try:
        return system_from_config(cfg["system"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def validate_config(subcommand: str, raw: dict) -> dict:
    """Resolve defaults and validate; returns the effective config dict.

    The effective dict is fully JSON-serializable and embeds every value a
    rerun needs, so any report reproduces its own run.
    """
    if subcommand not in SUBCOMMANDS:
        raise ConfigError(f"unknown experiment {subcommand!r}")
    declared = raw.get("experiment")
    if declared is not None and declared != subcommand:
        raise ConfigError(
            f"experiment: config declares {declared!r} but the {subcommand!r} subcommand was invoked"
        )
    validator = globals()[f"_validate_{subcommand}"]
    eff = validator(raw)
    eff["experiment"] = subcommand
    if "seed" in raw:
        eff["seed"] = _num(raw, "seed", None, lo=0, hi=2**64 - 1, integer=True)
    return eff


def effective_seed(eff: dict, cli_seed: Optional[int]) -> int:
    if cli_seed is not None:
        return int(cli_seed)
    if "seed" in eff:
        return int(eff["seed"])
    raise ConfigError("seed: required (set it in the config or pass --seed)")


def _validate_lyapunov(raw):
    _check_keys(raw, _COMMON + ("system", "start", "horizon", "n_paths", "bins"))
    sys = _system(raw)
    return {
        "system": sys.to_config(),
        "start": _num(raw, "start", 0.17, lo=0.0, hi=1.0),
        "horizon": _num(raw, "horizon", 10_000, lo=100, hi=10**8, integer=True),
        "n_paths": _num(raw, "n_paths", 100, lo=2, hi=10**6, integer=True),
        "bins": _num(raw, "bins", 512, lo=2, hi=10**5, integer=True),
    }


def _validate_stationary(raw):
    _check_keys(raw, _COMMON + ("system", "bins", "tol", "max_iter"))
    sys = _system(raw)
    return {
        "system": sys.to_config(),
        "bins": _num(raw, "bins", 512, lo=2, hi=10**5, integer=True),
        "tol": _num(raw, "tol", 1e-8, lo=1e-15, hi=1.0),
        "max_iter": _num(raw, "max_iter", 100_000, lo=1, hi=10**7, integer=True),
    }


def _validate_dichotomy(raw):
    _check_keys(
        raw,
        _COMMON
        + (
            "system",
            "bins",
            "start",
            "horizon",
            "n_paths",
            "ue_steps",
            "ue_starts",
            "invariance_tol",
            "ue_spread_tol",
            "stat_emp_tol",
            "symmetry_tol",
            "stationary_tol",
            "max_iter",
        ),
    )
    sys = _system(raw)
    return {
        "system": sys.to_config(),
        "bins": _num(raw, "bins", 512, lo=2, hi=10**5, integer=True),
        "start": _num(raw, "start", 0.17, lo=0.0, hi=1.0),
        "horizon": _num(raw, "horizon", 10_000, lo=100, hi=10**8, integer=True),
        "n_paths": _num(raw, "n_paths", 100, lo=2, hi=10**6, integer=True),
        "ue_steps": _num(raw, "ue_steps", 1_000_000, lo=1, hi=10**8, integer=True),
        "ue_starts": _num(raw, "ue_starts", 10, lo=2, hi=10**3, integer=True),
        "invariance_tol": _num(raw, "invariance_tol", 1e-2, lo=0.0, hi=1.0),
        "ue_spread_tol": _num(raw, "ue_spread_tol", 0.03, lo=0.0, hi=1.0),
        "stat_emp_tol": _num(raw, "stat_emp_tol", 0.02, lo=0.0, hi=1.0),
        "symmetry_tol": _num(raw, "symmetry_tol", 1e-10, lo=0.0, hi=1.0),
        "stationary_tol": _num(raw, "stationary_tol", 1e-8, lo=1e-15, hi=1.0),
        "max_iter": _num(raw, "max_iter", 100_000, lo=1, hi=10**7, integer=True),
    }


def _validate_contract(raw):
    _check_keys(
        raw,
        _COMMON
        + (
            "system",
            "x0",
            "alpha_target",
            "half_width",
            "horizon",
            "n_trajectories",
            "lyap_horizon",
            "lyap_n_paths",
            "save_traces",
        ),
    )
    sys = _system(raw)
    alpha = raw.get("alpha_target", "half_lambda")
    if alpha != "half_lambda":
        alpha = _num(raw, "alpha_target", None, lo=1e-12)
    return {
        "system": sys.to_config(),
        "x0": _num(raw, "x0", 0.17, lo=0.0, hi=1.0),
        "alpha_target": alpha,
        "half_width": _num(raw, "half_width", 5e-4, lo=1e-12, hi=0.2499),
        "horizon": _num(raw, "horizon", 10_000, lo=10, hi=10**7, integer=True),
        "n_trajectories": _num(raw, "n_trajectories", 200, lo=1, hi=10**5, integer=True),
        "lyap_horizon": _num(raw, "lyap_horizon", 10_000, lo=100, hi=10**8, integer=True),
        "lyap_n_paths": _num(raw, "lyap_n_paths", 50, lo=2, hi=10**6, integer=True),
        "save_traces": _choice(raw, "save_traces", "failures", ("all", "failures", "none")),
    }


def _validate_basin(raw):
    _check_keys(
        raw,
        _COMMON + ("system", "attractors", "start", "horizon", "n_paths", "capture_radius"),
    )
    sys = _system(raw)
    attractors = raw.get("attractors")
    if not isinstance(attractors, list) or not attractors:
        raise ConfigError("attractors: required non-empty list of circle points")
    for i, a in enumerate(attractors):
        if isinstance(a, bool) or not isinstance(a, (int, float)):
            raise ConfigError(f"attractors[{i}]: expected a number, got {a!r}")
    return {
        "system": sys.to_config(),
        "attractors": [float(a) % 1.0 for a in attractors],
        "start": _num(raw, "start", 0.01, lo=0.0, hi=1.0),
        "horizon": _num(raw, "horizon", 3000, lo=10, hi=10**7, integer=True),
        "n_paths": _num(raw, "n_paths", 4000, lo=10, hi=10**6, integer=True),
        "capture_radius": _num(raw, "capture_radius", 0.05, lo=1e-9, hi=0.49),
    }


def _hyperbolic_block(raw, dt_default, T_default, delta_default):
    return {
        "dt": _num(raw, "dt", dt_default, lo=1e-9, hi=1.0),
        "T": _num(raw, "T", T_default, lo=1e-6),
        "delta": _num(raw, "delta", delta_default, lo=1e-6),
        "A": _num(raw, "A", 1.0, lo=1e-9),
    }


def _validate_hyperbolic(raw):
    _check_keys(
        raw,
        _COMMON + ("kappas", "kappa", "dt", "T", "delta", "A", "n_paths", "start", "sample_path_points"),
    )
    if "kappas" in raw and "kappa" in raw:
        raise ConfigError("kappa: give either 'kappa' or 'kappas', not both")
    if "kappas" in raw:
        ks = raw["kappas"]
        if not isinstance(ks, list) or not ks:
            raise ConfigError("kappas: expected a non-empty list of numbers")
        kappas = [_num({"kappas": k}, "kappas", None) for k in ks]
    else:
        kappas = [_num(raw, "kappa", 1.0)]
    start = raw.get("start", [0.0, 1.0])
    if not (isinstance(start, list) and len(start) == 2):
        raise ConfigError("start: expected [x0, y0]")
    if not isinstance(start[1], (int, float)) or isinstance(start[1], bool) or start[1] <= 0:
        raise ConfigError("start: y0 must be positive")
    eff = _hyperbolic_block(raw, dt_default=0.05, T_default=1000.0, delta_default=5.0)
    eff.update(
        {
            "kappas": kappas,
            "n_paths": _num(raw, "n_paths", 1000, lo=2, hi=10**6, integer=True),
            "start": [float(start[0]), float(start[1])],
            "sample_path_points": _num(raw, "sample_path_points", 1000, lo=2, hi=10**6, integer=True),
        }
    )
    return eff


def _validate_xi(raw):
    _check_keys(
        raw,
        _COMMON
        + (
            "kappa",
            "dt",
            "T",
            "delta",
            "A",
            "xi0",
            "bins",
            "window",
            "escape_threshold",
            "escape_runs",
            "escape_horizon",
            "escape_dt",
        ),
    )
    window = raw.get("window", [-10.0, 10.0])
    if not (isinstance(window, list) and len(window) == 2 and window[0] < window[1]):
        raise ConfigError("window: expected [lo, hi] with lo < hi")
    eff = _hyperbolic_block(raw, dt_default=1e-3, T_default=1e5, delta_default=0.1)
    eff.update(
        {
            "kappa": _num(raw, "kappa", 3.0),
            "xi0": _num(raw, "xi0", 0.0),
            "bins": _num(raw, "bins", 200, lo=2, hi=10**5, integer=True),
            "window": [float(window[0]), float(window[1])],
            "escape_threshold": _num(raw, "escape_threshold", 10.0, lo=1e-9),
            "escape_runs": _num(raw, "escape_runs", 100, lo=1, hi=10**5, integer=True),
            "escape_horizon": _num(raw, "escape_horizon", 1e4, lo=1.0),
            "escape_dt": _num(raw, "escape_dt", 0.01, lo=1e-9, hi=1.0),
        }
    )
    return eff


def _validate_lln(raw):
    _check_keys(
        raw, _COMMON + ("kappa", "dt", "T", "delta", "A", "start", "oracle_samples", "band_halfwidth")
    )
    start = raw.get("start", [0.0, 1.0])
    if not (isinstance(start, list) and len(start) == 2):
        raise ConfigError("start: expected [x0, y0]")
    eff = _hyperbolic_block(raw, dt_default=1e-3, T_default=1000.0, delta_default=0.1)
    eff.update(
        {
            "kappa": _num(raw, "kappa", 0.0),
            "start": [float(start[0]), float(start[1])],
            "oracle_samples": _num(raw, "oracle_samples", 100_000, lo=100, hi=10**7, integer=True),
            "band_halfwidth": _num(raw, "band_halfwidth", 0.1, lo=0.0),
        }
    )
    return eff
