"""Config file loading (TOML, one section per module) and run manifests."""

import dataclasses
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field

from .alternating import AoOptions
from .bench import DEFAULT_SCHEMES, Scheme
from .channel import LINKS, ScenarioConfig, dbm_to_watts
from .errors import ConfigError
from .irsopt import IrsOptions
from .txcov import ScaOptions

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = ["RunConfig", "load_config", "config_from_dict", "config_snapshot", "write_manifest"]

_POSITIONS = ("ap_pos", "user_pos", "eve_pos", "irs_pos")
_SCENARIO_KEYS = (
    {"n_t", "n_r", "n_e", "m", "p_max_dbm", "noise_r_dbm", "noise_e_dbm", "beta0_db", "d0", "los_model", "master_seed"}
    | set(_POSITIONS)
    | {f"kappa_{k}" for k in LINKS}
    | {f"alpha_{k}" for k in LINKS}
)
_SCA_KEYS = {f.name for f in dataclasses.fields(ScaOptions)}
_IRS_KEYS = {f.name for f in dataclasses.fields(IrsOptions)}
_AO_KEYS = {"theta_tol", "max_rounds", "q_levels", "reoptimize_q_after_projection", "objective_tol"}
_BENCH_KEYS = {"schemes", "realizations", "workers"}
_SECTIONS = {"scenario": _SCENARIO_KEYS, "ao": _AO_KEYS, "sca": _SCA_KEYS, "irs": _IRS_KEYS, "bench": _BENCH_KEYS}


@dataclass(frozen=True)
class RunConfig:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    ao: AoOptions = field(default_factory=AoOptions)
    schemes: tuple = DEFAULT_SCHEMES
    realizations: int = 100
    workers: int = 1


def _scenario(sec):
    kw = {}
    for key in ("n_t", "n_r", "n_e", "m", "master_seed"):
        if key in sec:
            kw[key] = int(sec[key])
    for key in ("beta0_db", "d0"):
        if key in sec:
            kw[key] = float(sec[key])
    if "los_model" in sec:
        kw["los_model"] = str(sec["los_model"])
    for key in _POSITIONS:
        if key in sec:
            pos = sec[key]
            if not isinstance(pos, list) or len(pos) != 2:
                raise ConfigError(f"{key} must be a two-element list")
            kw[key] = (float(pos[0]), float(pos[1]))
    if "p_max_dbm" in sec:
        kw["p_max"] = dbm_to_watts(float(sec["p_max_dbm"]))
    if "noise_r_dbm" in sec:
        kw["sigma_r2"] = dbm_to_watts(float(sec["noise_r_dbm"]))
    if "noise_e_dbm" in sec:
        kw["sigma_e2"] = dbm_to_watts(float(sec["noise_e_dbm"]))
    defaults = ScenarioConfig()
    kw["kappa"] = {k: float(sec.get(f"kappa_{k}", defaults.kappa[k])) for k in LINKS}
    kw["alpha"] = {k: float(sec.get(f"alpha_{k}", defaults.alpha[k])) for k in LINKS}
    return ScenarioConfig(**kw)


def config_from_dict(data):
    """Build a :class:`RunConfig` from parsed TOML; unknown keys are errors."""
    for section, values in data.items():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown config section [{section}]")
        if not isinstance(values, dict):
            raise ConfigError(f"[{section}] must be a table")
        unknown = set(values) - _SECTIONS[section]
        if unknown:
            raise ConfigError(f"unknown keys in [{section}]: {', '.join(sorted(unknown))}")
    try:
        scenario = _scenario(data.get("scenario", {}))
        sca = ScaOptions(**data.get("sca", {}))
        irs = IrsOptions(**data.get("irs", {}))
        ao = AoOptions(sca=sca, irs=irs, **data.get("ao", {}))
        bench = data.get("bench", {})
        schemes = tuple(Scheme.parse(s) for s in bench.get("schemes", [s.name for s in DEFAULT_SCHEMES]))
        realizations = int(bench.get("realizations", 100))
        workers = int(bench.get("workers", 1))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    if realizations < 1 or workers < 1:
        raise ConfigError("realizations and workers must be >= 1")
    return RunConfig(scenario, ao, schemes, realizations, workers)


def load_config(path):
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(data)


def _plain(obj):
    if dataclasses.is_dataclass(obj):
        return {f.name: _plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def config_snapshot(cfg):
    snap = _plain(cfg)
    snap["schemes"] = [s.name for s in cfg.schemes]
    return snap


def write_manifest(path, manifest):
    """Write JSON next to the outputs via a temp file and atomic rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=".manifest-", suffix=".json", dir=directory)
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path
