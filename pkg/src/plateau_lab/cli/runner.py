"""Config handling and scenario execution.

Config files are TOML::

    [run]
    scenario = "euclidean-circle"   # required unless given on the command line
    seed = 0
    tol_scale = 1.0
    out = "runs"

    [params]                        # scenario parameters, see `plateau-lab list -v`
    levels = [3, 4]

Unknown sections, unknown keys and values whose type differs from the
default raise ConfigError.  The merged configuration, defaults included, is
echoed into every result file.
"""

from __future__ import annotations

import copy
import sys
import traceback
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConfigError
from . import artifacts
from .scenarios import REGISTRY, Context

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

RUN_KEYS = {"scenario": str, "seed": int, "tol_scale": float, "out": str}


@dataclass
class RunConfig:
    scenario: str
    params: dict
    seed: int = 0
    tol_scale: float = 1.0
    out: str = "runs"

    def echo(self) -> dict:
        return {"scenario": self.scenario, "seed": self.seed, "tol_scale": self.tol_scale, "params": self.params}


@dataclass
class RunArtifact:
    result_json: Path
    tables: list = field(default_factory=list)
    plots: list = field(default_factory=list)
    maps: list = field(default_factory=list)
    passed: bool = False
    payload: dict = field(default_factory=dict)


def _same_kind(default, value) -> bool:
    if isinstance(default, bool) or isinstance(value, bool):
        return isinstance(default, bool) and isinstance(value, bool)
    if isinstance(default, (int, float)):
        return isinstance(value, (int, float))
    if isinstance(default, (list, tuple)):
        return isinstance(value, (list, tuple))
    return isinstance(value, type(default))


def merge_params(name: str, overrides: dict | None) -> dict:
    if name not in REGISTRY:
        raise ConfigError(f"unknown scenario {name!r}; see `plateau-lab list`")
    params = copy.deepcopy(REGISTRY[name].defaults)
    for key, value in (overrides or {}).items():
        if key not in params:
            raise ConfigError(f"scenario {name!r} has no parameter {key!r}")
        if not _same_kind(params[key], value):
            raise ConfigError(f"parameter {key!r} expects {type(params[key]).__name__}")
        params[key] = value
    return params


def load_config(path) -> dict:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    extra = set(data) - {"run", "params"}
    if extra:
        raise ConfigError(f"unknown config sections: {sorted(extra)}")
    run = data.get("run", {})
    for key, value in run.items():
        if key not in RUN_KEYS:
            raise ConfigError(f"unknown [run] key {key!r}")
        kind = RUN_KEYS[key]
        if not (isinstance(value, kind) or (kind is float and isinstance(value, int))) or isinstance(value, bool):
            raise ConfigError(f"[run] {key} must be {kind.__name__}")
    return data


def build_config(scenario=None, config_path=None, level=None, mu=None, seed=None, tol_scale=None,
                 out=None) -> RunConfig:
    data = load_config(config_path) if config_path else {}
    run = data.get("run", {})
    name = scenario or run.get("scenario")
    if not name:
        raise ConfigError("no scenario given")
    overrides = dict(data.get("params", {}))
    defaults = REGISTRY[name].defaults if name in REGISTRY else {}
    if level is not None:
        if "level" in defaults:
            overrides["level"] = int(level)
        elif "levels" in defaults:
            overrides["levels"] = [int(level)]
        else:
            raise ConfigError(f"scenario {name!r} has no mesh level")
    if mu is not None:
        if "mu" not in defaults:
            raise ConfigError(f"scenario {name!r} has no volume parameter")
        overrides["mu"] = str(mu)
    params = merge_params(name, overrides)
    scale = float(tol_scale if tol_scale is not None else run.get("tol_scale", 1.0))
    if not scale > 0:
        raise ConfigError("tol_scale must be positive")
    return RunConfig(name, params, int(seed if seed is not None else run.get("seed", 0)), scale,
                     str(out or run.get("out", "runs")))


def execute(cfg: RunConfig) -> tuple[dict, Context]:
    """Run one scenario; errors are recorded as a failed assertion."""
    ctx = Context(seed=cfg.seed, tol_scale=cfg.tol_scale)
    try:
        REGISTRY[cfg.scenario].run(cfg.params, ctx)
    except Exception as exc:  # recorded in the artifact, nonzero exit
        ctx.results["error"] = {"type": type(exc).__name__, "message": str(exc),
                                "where": traceback.format_exc().strip().splitlines()[-1]}
        ctx.holds("completed_without_error", False, type(exc).__name__)
    payload = {
        "scenario": cfg.scenario,
        "config": cfg.echo(),
        "results": ctx.results,
        "assertions": ctx.assertions,
    }
    return payload, ctx


def payload_text(name: str, overrides=None, seed: int = 0, tol_scale: float = 1.0) -> str:
    cfg = RunConfig(name, merge_params(name, overrides), seed, tol_scale)
    payload, _ = execute(cfg)
    return artifacts.dumps(payload)


def run_scenario(cfg: RunConfig) -> RunArtifact:
    """Execute and write ``<out>/<scenario>/result.json`` plus tables, maps and plots."""
    payload, ctx = execute(cfg)
    base = Path(cfg.out) / cfg.scenario
    payload["provenance"] = {
        "code_sha256": artifacts.code_hash(),
        "config_sha256": artifacts.text_hash(artifacts.dumps(cfg.echo())),
    }
    art = RunArtifact(result_json=base / "result.json", passed=ctx.passed, payload=payload)
    for name, rows in ctx.tables.items():
        art.tables.append(artifacts.write_text(base / f"{name}.csv", artifacts.rows_to_csv(rows)))
    for name, u in ctx.maps.items():
        art.maps.append(artifacts.write_text(base / f"{name}.map.json", u.to_json()))
        art.plots.append(artifacts.write_text(base / f"{name}.svg", artifacts.plot_map_svg(u, f"{cfg.scenario}: {name}")))
    payload["artifacts"] = {
        "tables": [p.name for p in art.tables],
        "maps": [p.name for p in art.maps],
        "plots": [p.name for p in art.plots],
    }
    artifacts.write_text(art.result_json, artifacts.dumps(payload))
    return art
