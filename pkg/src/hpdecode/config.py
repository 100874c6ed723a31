"""Experiment configuration: YAML files with a strict schema.

Unknown keys are rejected at every level. Values are checked here as far as
possible without running anything; the computation modules re-validate.
"""
from __future__ import annotations

import copy
import os
from dataclasses import dataclass, field
from typing import Any

import yaml

from .errors import InvalidInputError

MODES = ("exact", "membrane", "mc", "predict", "sweep")
ENV_PREFIX = "HPDECODE_"

GATE_KINDS = {
    "xxz": {"kind", "J_xy", "J_z", "dressing_seed"},
    "haar": {"kind", "seed"},
    "identity": {"kind"},
    "swap": {"kind"},
}

SCHEMA: dict[str, Any] = {
    "mode": None,
    "seed": None,
    "output": None,
    "circuit": {"L": None, "q": None, "bc": None, "parity": None, "assignment": None, "gate": "gate", "edge_gates_seed": None},
    "partition": {"L_A": None, "L_D": None},
    "times": {"start": None, "stop": None, "step": None, "values": None, "window": None},
    "mc": {"samples": None},
    "predict": {"kind": None, "J_xy": None, "J_z": None, "n": None, "z1": None},
    "sweep": {"base": None, "vary": "free", "reduce": None},
}

DEFAULTS = {
    "seed": 0,
    "output": "out.csv",
    "circuit": {"L": 8, "q": 2, "bc": "open", "parity": "even", "assignment": "floquet", "gate": {"kind": "identity"}},
    "partition": {"L_A": 1, "L_D": 1},
    "times": {},
    "mc": {"samples": 100},
    "predict": {},
    "sweep": {},
}


def _check_keys(data: dict, schema: dict, where: str):
    if not isinstance(data, dict):
        raise InvalidInputError(f"{where or 'config'} must be a mapping")
    for k, v in data.items():
        if k not in schema:
            raise InvalidInputError(f"unknown key {where + '.' if where else ''}{k}")
        sub = schema[k]
        if isinstance(sub, dict):
            _check_keys(v, sub, f"{where}.{k}" if where else k)
        elif sub == "gate":
            if not isinstance(v, dict) or v.get("kind") not in GATE_KINDS:
                raise InvalidInputError(f"circuit.gate.kind must be one of {sorted(GATE_KINDS)}")
            extra = set(v) - GATE_KINDS[v["kind"]]
            if extra:
                raise InvalidInputError(f"unknown key(s) for gate kind {v['kind']}: {sorted(extra)}")


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k != "gate":
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def set_dotted(data: dict, key: str, value) -> dict:
    out = copy.deepcopy(data)
    cur = out
    parts = key.split(".")
    for p in parts[:-1]:
        cur = cur.setdefault(p, {})
        if not isinstance(cur, dict):
            raise InvalidInputError(f"cannot set {key}: {p} is not a mapping")
    cur[parts[-1]] = value
    return out


def env_overrides(environ=None) -> dict:
    """Overrides from variables like HPDECODE_CIRCUIT__L=10 (double underscore nests)."""
    environ = os.environ if environ is None else environ
    out: dict = {}
    for name, raw in environ.items():
        if not name.startswith(ENV_PREFIX):
            continue
        key = name[len(ENV_PREFIX) :].lower().replace("__", ".")
        if key in ("threads",):
            continue
        out = set_dotted(out, _env_key(key), yaml.safe_load(raw))
    return out


def _env_key(key: str) -> str:
    # environment names are upper case; restore the few mixed-case schema keys
    fixes = {"l": "L", "l_a": "L_A", "l_d": "L_D", "j_xy": "J_xy", "j_z": "J_z"}
    return ".".join(fixes.get(p, p) for p in key.split("."))


@dataclass
class ExperimentConfig:
    mode: str
    data: dict = field(repr=False)

    @property
    def seed(self) -> int:
        return int(self.data["seed"])

    @property
    def output(self) -> str:
        return self.data["output"]

    def section(self, name: str) -> dict:
        return self.data[name]

    def to_dict(self) -> dict:
        return copy.deepcopy(self.data)


def from_dict(raw: dict, overrides: dict | None = None, need_times: bool = True) -> ExperimentConfig:
    raw = raw or {}
    _check_keys(raw, SCHEMA, "")
    if overrides:
        _check_keys(overrides, SCHEMA, "")
        raw = _merge(raw, overrides)
    data = _merge(DEFAULTS, raw)
    mode = data.get("mode")
    if mode not in MODES:
        raise InvalidInputError(f"mode must be one of {MODES}, got {mode!r}")
    seed = data["seed"]
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2**64:
        raise InvalidInputError("seed must be an unsigned 64-bit integer")
    validate(ExperimentConfig(mode, data), need_times)
    return ExperimentConfig(mode, data)


def load(path: str, overrides: dict | None = None) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    return from_dict(raw or {}, overrides)


def _positive_int(v, name, minimum=1):
    if not isinstance(v, int) or isinstance(v, bool) or v < minimum:
        raise InvalidInputError(f"{name} must be an integer >= {minimum}, got {v!r}")


def time_grid(cfg: ExperimentConfig) -> list[int]:
    """Explicit ``values``, a start/stop/step range, or the [5L, 10L] saturation window."""
    tm = cfg.section("times")
    L = cfg.section("circuit")["L"]
    if tm.get("values") is not None:
        vals = tm["values"]
        if not isinstance(vals, list) or not vals:
            raise InvalidInputError("times.values must be a non-empty list")
        for v in vals:
            _positive_int(v, "times.values entry", 0)
        return sorted(set(vals))
    if tm.get("window") == "saturation":
        return list(range(5 * L, 10 * L + 1, 2))
    if tm.get("window") is not None:
        raise InvalidInputError("times.window must be 'saturation'")
    start, stop, step = tm.get("start", 0), tm.get("stop"), tm.get("step", 1)
    if stop is None:
        return []
    _positive_int(start, "times.start", 0)
    _positive_int(stop, "times.stop", 0)
    _positive_int(step, "times.step", 1)
    if stop < start:
        raise InvalidInputError("times.stop must be >= times.start")
    return list(range(start, stop + 1, step))


def validate(cfg: ExperimentConfig, need_times: bool = True):
    c = cfg.section("circuit")
    _positive_int(c["L"], "circuit.L", 2)
    _positive_int(c["q"], "circuit.q", 2)
    if c["bc"] not in ("open", "periodic"):
        raise InvalidInputError("circuit.bc must be 'open' or 'periodic'")
    if c["parity"] not in ("even", "odd"):
        raise InvalidInputError("circuit.parity must be 'even' or 'odd'")
    if c["assignment"] not in ("floquet", "random"):
        raise InvalidInputError("circuit.assignment must be 'floquet' or 'random'")
    p = cfg.section("partition")
    _positive_int(p["L_A"], "partition.L_A")
    _positive_int(p["L_D"], "partition.L_D")
    if cfg.mode == "sweep":
        sw = cfg.section("sweep")
        if sw.get("base") not in ("exact", "membrane", "mc", "predict"):
            raise InvalidInputError("sweep.base must be one of exact, membrane, mc, predict")
        vary = sw.get("vary")
        if not isinstance(vary, dict) or len(vary) != 1:
            raise InvalidInputError("sweep.vary must map exactly one dotted key to a list of values")
        (key, values), = vary.items()
        if not isinstance(values, list) or not values:
            raise InvalidInputError("sweep.vary values must be a non-empty list")
        top = key.split(".")[0]
        if top not in SCHEMA or top in ("mode", "sweep"):
            raise InvalidInputError(f"cannot sweep over {key}")
        how = sw.get("reduce", "none")
        if how not in ("none", "window_mean", "front_width", "last"):
            raise InvalidInputError("sweep.reduce must be none, window_mean, front_width or last")
        if how == "front_width" and sw["base"] != "membrane":
            raise InvalidInputError("reduce=front_width requires base=membrane")
        base = {k: v2 for k, v2 in cfg.data.items() if k != "sweep"} | {"mode": sw["base"]}
        for v in values:
            from_dict(set_dotted(base, key, v), need_times=how != "front_width")
        return
    times = time_grid(cfg)
    if need_times and cfg.mode in ("exact", "mc", "membrane") and not times:
        raise InvalidInputError("a time grid is required (times.stop, times.values or times.window)")
    if cfg.mode == "membrane" and any(t % 2 == 0 for t in times):
        raise InvalidInputError("membrane mode accepts odd times only")
    if cfg.mode == "mc":
        _positive_int(cfg.section("mc")["samples"], "mc.samples")
    if cfg.mode == "predict":
        kind = cfg.section("predict").get("kind")
        if kind not in ("duc_plateau", "scrambled_plateau", "yoshida_kitaev_bound", "perturbed_decay", "integrable_du", "saturation", "infinite_size_plateau"):
            raise InvalidInputError(f"unknown predict.kind {kind!r}")
