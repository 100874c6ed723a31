"""Dispatch experiment configs to the computation modules and write CSV output."""
from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from . import config as cfgmod
from . import membrane, predictions
from .brickwork import CircuitSpec, Floquet, FloquetWithEdges, RandomGates
from .config import ExperimentConfig
from .errors import InvalidInputError
from .hpcore import HPPartition, decoding_series
from .qgates import haar_gate, haar_unitary, identity_gate, random_dressing, swap_gate, xxz_gate

CSV_HEADER = ("t", "delta", "method", "seed")


@dataclass(frozen=True)
class Row:
    t: int | None
    delta: float
    method: str
    seed: int | None = None


@dataclass(frozen=True)
class FitResult:
    exponent: float
    intercept: float
    r2: float
    n: int

    def __post_init__(self):
        if self.n < 3:
            raise InvalidInputError("a fit needs at least three points")


def fit_power_law(xs, ys) -> FitResult:
    """Least-squares fit of log y = intercept + exponent * log x."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise InvalidInputError("xs and ys must be 1-d sequences of equal length")
    if len(x) < 3:
        raise InvalidInputError("a fit needs at least three points")
    if np.any(x <= 0) or np.any(y <= 0) or not np.all(np.isfinite(x) & np.isfinite(y)):
        raise InvalidInputError("power-law fits need positive finite data")
    lx, ly = np.log(x), np.log(y)
    slope, icpt = np.polyfit(lx, ly, 1)
    resid = ly - (icpt + slope * lx)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else max(0.0, min(1.0, 1.0 - float(resid @ resid) / ss_tot))
    return FitResult(float(slope), float(icpt), r2, len(x))


# --- building objects from config sections ----------------------------------


def make_gate(gcfg: dict, q: int):
    kind = gcfg["kind"]
    if kind == "identity":
        return identity_gate(q)
    if kind == "swap":
        return swap_gate(q)
    if kind == "haar":
        return haar_gate(q, gcfg.get("seed", 0))
    if kind == "xxz":
        if q != 2:
            raise InvalidInputError("XXZ gates are defined for q = 2")
        seed = gcfg.get("dressing_seed")
        dressing = None if seed is None else random_dressing(2, seed)
        return xxz_gate(float(gcfg.get("J_xy", 0.0)), float(gcfg.get("J_z", 0.0)), dressing)
    raise InvalidInputError(f"unknown gate kind {kind!r}")


def make_spec(cfg: ExperimentConfig, seed: int | None = None) -> CircuitSpec:
    c = cfg.section("circuit")
    L, q = c["L"], c["q"]
    if c["assignment"] == "random":
        assignment = RandomGates(cfg.seed if seed is None else seed)
    else:
        g = make_gate(c["gate"], q)
        if c.get("edge_gates_seed") is not None:
            rng = np.random.default_rng(c["edge_gates_seed"])
            assignment = FloquetWithEdges(g, (haar_unitary(q, rng), haar_unitary(q, rng)))
        else:
            assignment = Floquet(g)
    return CircuitSpec(L, q, c["bc"], assignment, c["parity"])


def make_partition(cfg: ExperimentConfig) -> HPPartition:
    c, p = cfg.section("circuit"), cfg.section("partition")
    return HPPartition(c["L"], p["L_A"], p["L_D"], c["q"])


# --- modes --------------------------------------------------------------------


def _run_exact(cfg):
    spec = make_spec(cfg)
    spec.check_capacity()
    s = decoding_series(spec, make_partition(cfg), cfgmod.time_grid(cfg))[0]
    seed = cfg.seed if cfg.section("circuit")["assignment"] == "random" else None
    return [Row(int(t), float(d), "exact", seed) for t, d in zip(s.t, s.delta)]


def _run_membrane(cfg):
    p = make_partition(cfg)
    times = cfgmod.time_grid(cfg)
    ts, d = membrane.membrane_series(p.L, p.L_A, p.L_D, p.q, max(times))
    lookup = dict(zip(ts.tolist(), d.tolist()))
    return [Row(t, lookup[t], "membrane") for t in times]


def _run_mc(cfg):
    p = make_partition(cfg)
    c = cfg.section("circuit")
    res = membrane.haar_mc_series(p.L, p, cfgmod.time_grid(cfg), cfg.section("mc")["samples"], cfg.seed, c["bc"])
    return [Row(t, r.mean, "mc", cfg.seed) for t, r in res.items()]


def _run_predict(cfg):
    pr = cfg.section("predict")
    c, pt = cfg.section("circuit"), cfg.section("partition")
    q, L, L_A, L_D = c["q"], c["L"], pt["L_A"], pt["L_D"]
    kind = pr["kind"]
    if kind == "duc_plateau":
        return [Row(None, predictions.duc_plateau(q, L_A, L_D), "prediction")]
    if kind == "scrambled_plateau":
        return [Row(None, predictions.scrambled_plateau_from_strings(q, L_A, L_D), "prediction")]
    if kind == "yoshida_kitaev_bound":
        return [Row(None, predictions.yoshida_kitaev_bound(HPPartition(L, L_A, L_D, q)), "prediction")]
    if kind == "saturation":
        return [Row(None, membrane.saturation_delta(L, L_A, L_D, q), "prediction")]
    if kind == "infinite_size_plateau":
        return [Row(None, membrane.infinite_size_plateau(q, L_A, L_D), "prediction")]
    if kind == "perturbed_decay":
        z1 = pr.get("z1")
        if z1 is None:
            raise InvalidInputError("predict.z1 is required for perturbed_decay")
        if pr.get("n") is not None:
            return [Row(None, predictions.perturbed_decay(q, pr["n"], L, float(z1)), "prediction")]
        rows = []
        for t in cfgmod.time_grid(cfg):
            if (t - L) % 2 == 0 and 1 <= predictions.decay_index(t, L) <= L - predictions.decay_index(t, L):
                n = predictions.decay_index(t, L)
                rows.append(Row(t, predictions.perturbed_decay(q, n, L, float(z1)), "prediction"))
        return rows
    if kind == "integrable_du":
        g = make_gate(c["gate"], q)
        return [Row(t, predictions.integrable_du_delta(g, t, L, c["parity"]), "prediction") for t in cfgmod.time_grid(cfg)]
    raise InvalidInputError(f"unknown predict.kind {kind!r}")


RUNNERS = {"exact": _run_exact, "membrane": _run_membrane, "mc": _run_mc, "predict": _run_predict}


def point_seed(master: int, index: int) -> int:
    """Seed of sweep point ``index``: an independent stream spawned from the master seed."""
    ss = np.random.SeedSequence(entropy=master, spawn_key=(index,))
    return int(ss.generate_state(1, np.uint64)[0])


def sweep_points(cfg: ExperimentConfig) -> list[tuple[object, ExperimentConfig]]:
    sw = cfg.section("sweep")
    (key, values), = sw["vary"].items()
    base = {k: v for k, v in cfg.data.items() if k != "sweep"}
    base["mode"] = sw["base"]
    need_times = sw.get("reduce", "none") != "front_width"
    pts = []
    for i, v in enumerate(values):
        d = cfgmod.set_dotted(base, key, v)
        d["seed"] = point_seed(cfg.seed, i)
        pts.append((v, cfgmod.from_dict(d, need_times=need_times)))
    return pts


def _reduce(point: ExperimentConfig, how: str, rows: list[Row]) -> float:
    if how == "front_width":
        p = make_partition(point)
        return membrane.front_width(p.L, p.q, L_A=p.L_A, L_D=p.L_D)
    if how == "last":
        return rows[-1].delta
    if how == "window_mean":
        L = point.section("circuit")["L"]
        sel = [r.delta for r in rows if r.t is not None and 5 * L <= r.t <= 10 * L]
        if not sel:
            raise InvalidInputError("window_mean needs samples in [5L, 10L]")
        return float(np.mean(sel))
    raise InvalidInputError(f"unknown reduction {how!r}")


def _run_point(point: ExperimentConfig, how: str):
    rows = [] if how == "front_width" else RUNNERS[point.mode](point)
    value = None if how == "none" else _reduce(point, how, rows)
    return rows, value


def run_sweep(cfg: ExperimentConfig, threads: int = 1):
    pts = sweep_points(cfg)
    how = cfg.section("sweep").get("reduce", "none")
    if threads > 1 and len(pts) > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(_run_point, [p for _, p in pts], [how] * len(pts)))
    else:
        results = [_run_point(p, how) for _, p in pts]
    return pts, results


# --- output -------------------------------------------------------------------


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return "nan" if math.isnan(x) else format(x, ".17g")
    return str(x)


def rows_to_csv(rows: list[Row]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([fmt(r.t), fmt(float(r.delta)), r.method, fmt(r.seed)])
    return buf.getvalue()


def _write(path: str, text: str):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def write_meta(path: str, payload: dict):
    _write(path + ".meta.json", json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n")


def _meta(cfg: ExperimentConfig, extra=None) -> dict:
    d = {"hpdecode_version": __version__, "config": cfg.to_dict(), "numpy_version": np.__version__}
    if cfg.mode in ("exact",):
        d["circuit"] = make_spec(cfg).describe()
    d.update(extra or {})
    return d


def run(cfg: ExperimentConfig, out: str | None = None, threads: int = 1) -> list[str]:
    """Execute ``cfg`` and write its CSV (plus a ``.meta.json`` sidecar). Returns written paths."""
    out = out or cfg.output
    if cfg.mode != "sweep":
        rows = RUNNERS[cfg.mode](cfg)
        _write(out, rows_to_csv(rows))
        write_meta(out, _meta(cfg))
        return [out]
    pts, results = run_sweep(cfg, threads)
    stem, ext = os.path.splitext(out)
    ext = ext or ".csv"
    written = []
    (key, _), = cfg.section("sweep")["vary"].items()
    how = cfg.section("sweep").get("reduce", "none")
    summary = io.StringIO()
    sw = csv.writer(summary, lineterminator="\n")
    sw.writerow(("point", "x", "value", "seed"))
    for i, ((value, point), (rows, red)) in enumerate(zip(pts, results)):
        if rows:
            path = f"{stem}_{i:03d}{ext}"
            _write(path, rows_to_csv(rows))
            write_meta(path, _meta(point, {"sweep_key": key, "sweep_value": value, "point": i}))
            written.append(path)
        if red is not None:
            sw.writerow((i, fmt(value if not isinstance(value, int) else value), fmt(float(red)), point.seed))
    if how != "none":
        path = f"{stem}_summary{ext}"
        _write(path, summary.getvalue())
        write_meta(path, _meta(cfg, {"sweep_key": key, "reduce": how}))
        written.append(path)
    return written


def read_xy(path: str, x: str = "x", y: str = "value") -> tuple[list[float], list[float]]:
    with open(path, encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or x not in rows[0] or y not in rows[0]:
        raise InvalidInputError(f"{path} lacks columns {x!r} and {y!r}")
    return [float(r[x]) for r in rows], [float(r[y]) for r in rows]


def fit_to_dict(fr: FitResult) -> dict:
    return asdict(fr)
