"""Scenario-driven command line interface.

    eulerrays run SCENARIO [--out DIR] [--workers N]
    eulerrays catalog [--machine]
    eulerrays schema

A scenario is a YAML document with the sections ``field``, ``task``,
``integrator`` and ``output``; ``eulerrays schema`` prints every key.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Mapping

import numpy as np
import yaml

from . import __version__
from .burgers import (
    BurgersError,
    Grid1D,
    bump_profile_1d,
    describe_shock,
    shock_time_estimate,
    solve_burgers,
    solve_linearized,
    write_ledger_csv,
    write_snapshots_csv,
)
from .fields import CATALOG, FieldError, field_from_dict, random_trig_poly, verify_field
from .flowcore import RaySeed, integrate_ray, monitor_invariants, write_trajectory
from .growth import (
    GrowthError,
    SamplingPlan,
    certify_vorticity_bound,
    estimate_beta,
    full_seeds,
    lyapunov_exponent,
)
from .integrate import IntegrationError, IntegratorConfig
from .wkb import PacketError, PacketRun, PacketSpec, sweep_from_run, write_frame, write_scaling_csv

log = logging.getLogger("eulerrays")

EXIT_OK, EXIT_CONFIG, EXIT_ABORT, EXIT_VERDICT = 0, 1, 2, 3
OUT_ENV = "EULERRAYS_OUT"
TASKS = ("verify_field", "ray", "invariants", "beta", "lyapunov", "certify", "wkb_sweep", "burgers")
FORMATS = ("json", "csv", "jsonl", "frame")


class ConfigError(ValueError):
    def __init__(self, path: str, msg: str):
        super().__init__(f"{path}: {msg}" if path else msg)
        self.path = path


# -- typed key tables ---------------------------------------------------------

REQUIRED = object()


def _num(v, path):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(path, f"expected a number, got {v!r}")
    if not math.isfinite(v):
        raise ConfigError(path, "must be finite")
    return float(v)


def _int(v, path):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(path, f"expected an integer, got {v!r}")
    return int(v)


def _bool(v, path):
    if not isinstance(v, bool):
        raise ConfigError(path, f"expected true/false, got {v!r}")
    return v


def _str(v, path):
    if not isinstance(v, str):
        raise ConfigError(path, f"expected a string, got {v!r}")
    return v


def _vec3(v, path):
    if not isinstance(v, list) or len(v) != 3:
        raise ConfigError(path, f"expected a list of 3 numbers, got {v!r}")
    return tuple(_num(c, f"{path}[{i}]") for i, c in enumerate(v))


def _floats(v, path):
    if not isinstance(v, list):
        raise ConfigError(path, f"expected a list of numbers, got {v!r}")
    return tuple(_num(c, f"{path}[{i}]") for i, c in enumerate(v))


def _box(v, path):
    if not isinstance(v, list) or len(v) != 2:
        raise ConfigError(path, "expected [[lo x, lo y, lo z], [hi x, hi y, hi z]]")
    return (_vec3(v[0], f"{path}[0]"), _vec3(v[1], f"{path}[1]"))


def _mapping(v, path):
    if not isinstance(v, dict):
        raise ConfigError(path, f"expected a mapping, got {v!r}")
    return v


def _list(v, path):
    if not isinstance(v, list):
        raise ConfigError(path, f"expected a list, got {v!r}")
    return v


def _opt(conv):
    def f(v, path):
        return None if v is None else conv(v, path)

    f.__name__ = conv.__name__
    return f


TYPE_NAMES = {
    "_num": "number", "_int": "integer", "_bool": "bool", "_str": "string", "_vec3": "[x, y, z]",
    "_floats": "list of numbers", "_box": "[[lo], [hi]]", "_mapping": "mapping", "_list": "list",
}

# key: (converter, default, description)
Table = dict[str, tuple[Callable, Any, str]]

FIELD_KEYS: Table = {
    "kind": (_str, REQUIRED, "catalog kind (see `eulerrays catalog`)"),
    "params": (_mapping, {}, "kind parameters; omitted ones take catalog defaults"),
    "modes": (_list, [], "trig_poly modes: list of {k, amp, freq}"),
    "random": (_opt(_mapping), None, "trig_poly only: draw modes instead of listing them"),
    "box": (_opt(_box), None, "sampling box for free-space kinds"),
    "steady_euler": (_bool, False, "run the steady-Euler check (steady kinds only)"),
}
MODE_KEYS: Table = {
    "k": (_vec3, REQUIRED, "integer wavevector"),
    "amp": (_list, REQUIRED, "3 complex components, each a number or [re, im]"),
    "freq": (_num, 0.0, "temporal frequency"),
}
RANDOM_KEYS: Table = {
    "rng_seed": (_int, REQUIRED, "generator seed"),
    "n_pairs": (_int, 4, "conjugate mode pairs"),
    "kmax": (_int, 2, "largest wavevector component"),
    "amplitude": (_num, 1.0, "mode amplitude scale"),
    "time_dependent": (_bool, True, "draw nonzero frequencies"),
}
INTEGRATOR_KEYS: Table = {
    "method": (_str, "dp54", "dp54 (adaptive) or rk4 (fixed step = max_step)"),
    "rtol": (_num, 1e-10, "relative tolerance"),
    "atol": (_num, 1e-10, "absolute tolerance"),
    "max_step": (_opt(_num), None, "largest step; null means horizon/100"),
    "initial_step": (_opt(_num), None, "first trial step; null means max_step/10"),
    "dense_output": (_bool, False, "interpolate output times instead of landing on them"),
}
OUTPUT_KEYS: Table = {
    "dir": (_opt(_str), None, "output directory (overridden by $EULERRAYS_OUT, then --out)"),
    "formats": (_list, list(FORMATS), "subset of json, csv, jsonl, frame; json is always written"),
}
SEED_KEYS: Table = {
    "x0": (_vec3, REQUIRED, "launch point"),
    "xi0": (_vec3, REQUIRED, "wave covector"),
    "b0": (_vec3, REQUIRED, "amplitude, orthogonal to xi0"),
    "btilde0": (_opt(_vec3), None, "optional second amplitude, orthogonal to xi0"),
    "omega0": (_opt(_vec3), None, "initial vorticity; null means the field's value at x0"),
}
RANDOM_SEED_KEYS: Table = {
    "n": (_int, REQUIRED, "number of seeds"),
    "rng_seed": (_int, 0, "generator seed"),
}
PLAN_KEYS: Table = {
    "n_seeds": (_int, 512, "random seeds per estimate"),
    "rng_seed": (_int, 0, "generator seed"),
    "refine_rounds": (_int, 3, "local refinement rounds"),
    "refine_scale": (_num, 0.5, "first-round perturbation radius"),
    "refine_shrink": (_num, 0.25, "radius factor per round"),
    "refine_count": (_int, 64, "candidates per round"),
    "sample_box": (_opt(_box), None, "free-space sampling box; null means the field box"),
    "time_grid": (_int, 20, "sample times in (0, T]"),
    "canonical_positions": (_int, 4, "positions that also get axis-aligned frames"),
}
PACKET_KEYS: Table = {
    "x0": (_vec3, (0.0, 0.0, 0.0), "packet centre"),
    "xi0": (_vec3, REQUIRED, "unit covector"),
    "b0": (_vec3, REQUIRED, "unit amplitude orthogonal to xi0"),
    "delta": (_num, 0.5, "bump radius"),
    "epsilons": (_floats, [0.1, 0.03, 0.01], "strictly decreasing wavelengths (at least 3)"),
    "h": (_num, 0.025, "grid spacing"),
    "dt": (_num, 0.005, "time step of the residual's centered difference"),
    "p": (_num, 2.0, "default norm exponent"),
    "T": (_num, 1.0, "final time"),
    "n_times": (_int, 5, "residual sample times in [0, T]"),
    "phase": (_str, "envelope", "envelope (exact phase derivatives) or grid (h, dt <= eps/10)"),
    "pad": (_num, 0.2, "grid padding as a fraction of the support extent"),
}
PROFILE_KINDS: dict[str, Table] = {
    "sine": {
        "amplitude": (_num, -1.0, "offset + amplitude sin(wavenumber (x - shift))"),
        "wavenumber": (_int, 1, ""),
        "shift": (_num, 0.0, ""),
        "offset": (_num, 0.0, ""),
    },
    "constant": {"value": (_num, REQUIRED, "uniform state")},
    "riemann": {
        "left": (_num, 1.0, "state on [0, position)"),
        "right": (_num, -1.0, "state on [position, period)"),
        "position": (_opt(_num), None, "jump location; null means period/2"),
    },
    "bump": {
        "center": (_num, math.pi, "base + height bump((x - center)/width)"),
        "width": (_num, 1.0, ""),
        "height": (_num, 1.0, ""),
        "base": (_num, 0.0, ""),
    },
}
TASK_KEYS: dict[str, Table] = {
    "verify_field": {
        "n_samples": (_int, 1000, "sample points"),
        "rng_seed": (_int, 0, "sampling seed"),
        "check_steady": (_opt(_bool), None, "force (true) or skip (false) the steady-Euler check"),
        "tol": (_num, 1e-8, "pass threshold"),
    },
    "ray": {
        "seeds": (_list, REQUIRED, "list of seed mappings"),
        "T": (_num, REQUIRED, "final time (negative integrates backward)"),
        "n_times": (_opt(_int), None, "uniform output times; null records every accepted step"),
    },
    "invariants": {
        "seeds": (_list, [], "explicit seed mappings"),
        "random_seeds": (_opt(_mapping), None, "{n, rng_seed}: random seeds with btilde0 = xi0 x b0"),
        "T": (_num, REQUIRED, "final time"),
        "tol": (_num, 1e-8, "largest admissible relative drift"),
    },
    "beta": {
        "T": (_num, REQUIRED, "horizon"),
        "plan": (_mapping, {}, "sampling plan"),
    },
    "lyapunov": {
        "T_max": (_num, REQUIRED, "horizon; the slope is fitted over [T_max/2, T_max]"),
        "plan": (_mapping, {}, "sampling plan"),
    },
    "certify": {
        "T": (_num, REQUIRED, "horizon"),
        "plan": (_mapping, {}, "sampling plan"),
        "grid": (_int, 64, "vorticity sampling nodes per axis"),
    },
    "wkb_sweep": {
        "packet": (_mapping, REQUIRED, "packet specification"),
        "ps": (_opt(_floats), None, "norm exponents; null means [packet.p]"),
    },
    "burgers": {
        "nx": (_int, 1024, "cells"),
        "period": (_num, 2 * math.pi, "domain length"),
        "cfl": (_num, 0.5, "Courant number in (0, 1]"),
        "T": (_num, REQUIRED, "final time"),
        "times": (_floats, [], "extra snapshot times"),
        "u0": (_mapping, {"kind": "sine", "amplitude": -1.0}, "profile for u"),
        "v0": (_mapping, {"kind": "bump"}, "profile for v"),
        "shock_multiple": (_num, 10.0, "indicator growth that counts as a shock"),
    },
}
TOP_KEYS = ("field", "task", "integrator", "output")


def _take(data: Any, table: Table, path: str) -> dict[str, Any]:
    data = {} if data is None else _mapping(data, path)
    unknown = sorted(set(data) - set(table))
    if unknown:
        raise ConfigError(f"{path}.{unknown[0]}" if path else unknown[0], "unknown key")
    out = {}
    for key, (conv, default, _) in table.items():
        sub = f"{path}.{key}" if path else key
        if key in data:
            out[key] = conv(data[key], sub)
        elif default is REQUIRED:
            raise ConfigError(sub, "missing required key")
        else:
            out[key] = default
    return out


# -- scenario -----------------------------------------------------------------


@dataclass
class Scenario:
    field: Any
    task: str
    params: dict[str, Any]
    integrator: IntegratorConfig
    output_dir: str | None
    formats: tuple[str, ...]
    text: str
    rng_seeds: dict[str, int] = field(default_factory=dict)

    @property
    def sha256(self) -> str:
        return hashlib.sha256(self.text.encode()).hexdigest()


def _parse_field(data: Any, seeds: dict[str, int]):
    f = _take(data, FIELD_KEYS, "field")
    if f["kind"] not in CATALOG:
        raise ConfigError("field.kind", f"unknown field kind {f['kind']!r}; one of {sorted(CATALOG)}")
    try:
        if f["random"] is not None:
            if f["kind"] != "trig_poly":
                raise ConfigError("field.random", "only valid for kind trig_poly")
            if f["modes"]:
                raise ConfigError("field.random", "give either modes or random, not both")
            r = _take(f["random"], RANDOM_KEYS, "field.random")
            seeds["field.random.rng_seed"] = r["rng_seed"]
            return random_trig_poly(**r)
        for i, m in enumerate(f["modes"]):
            _take(m, MODE_KEYS, f"field.modes[{i}]")
        for k, v in f["params"].items():
            _num(v, f"field.params.{k}")
        d = {k: f[k] for k in ("kind", "params", "modes", "steady_euler")}
        if f["box"] is not None:
            d["box"] = [list(f["box"][0]), list(f["box"][1])]
        return field_from_dict(d)
    except (FieldError, ValueError, TypeError, KeyError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("field", str(exc)) from exc


def _parse_seed(data: Any, path: str) -> RaySeed:
    s = _take(data, SEED_KEYS, path)
    try:
        return RaySeed(**s)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


def _parse_plan(data: Any, path: str, seeds: dict[str, int]) -> SamplingPlan:
    d = _take(data, PLAN_KEYS, path)
    seeds[f"{path}.rng_seed"] = d["rng_seed"]
    try:
        return SamplingPlan(**d)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


def _parse_packet(data: Any, path: str) -> PacketSpec:
    d = _take(data, PACKET_KEYS, path)
    try:
        return PacketSpec(**d)
    except (PacketError, ValueError) as exc:
        raise ConfigError(path, str(exc)) from exc


def _parse_profile(data: Any, path: str) -> dict[str, Any]:
    data = _mapping(data, path)
    kind = _str(data.get("kind"), f"{path}.kind") if "kind" in data else None
    if kind not in PROFILE_KINDS:
        raise ConfigError(f"{path}.kind", f"expected one of {sorted(PROFILE_KINDS)}, got {kind!r}")
    rest = {k: v for k, v in data.items() if k != "kind"}
    return {"kind": kind, **_take(rest, PROFILE_KINDS[kind], path)}


def make_profile(prof: Mapping[str, Any], period: float) -> Callable[[np.ndarray], np.ndarray]:
    kind = prof["kind"]
    if kind == "sine":
        return lambda x: prof["offset"] + prof["amplitude"] * np.sin(
            prof["wavenumber"] * 2 * np.pi / period * (x - prof["shift"])
        )
    if kind == "constant":
        return lambda x: np.full_like(x, prof["value"])
    if kind == "riemann":
        pos = period / 2 if prof["position"] is None else prof["position"]
        return lambda x: np.where(x < pos, prof["left"], prof["right"])
    return lambda x: prof["base"] + prof["height"] * bump_profile_1d((x - prof["center"]) / prof["width"])


def parse_scenario(text: str) -> Scenario:
    """Parse and fully validate a scenario document."""
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("", f"not a valid YAML document: {exc}") from exc
    data = _mapping(data, "scenario")
    unknown = sorted(set(data) - set(TOP_KEYS))
    if unknown:
        raise ConfigError(unknown[0], "unknown key")
    if "task" not in data:
        raise ConfigError("task", "missing required key")
    seeds: dict[str, int] = {}
    task_data = _mapping(data["task"], "task")
    name = task_data.get("name")
    if name not in TASKS:
        raise ConfigError("task.name", f"expected one of {list(TASKS)}, got {name!r}")
    params = _take({k: v for k, v in task_data.items() if k != "name"}, TASK_KEYS[name], "task")
    if name == "burgers":
        # one-dimensional; a field section may only carry a label
        _take(data.get("field"), {"kind": (_str, "burgers", "")}, "field")
        spec = None
    elif "field" not in data:
        raise ConfigError("field", "missing required key")
    else:
        spec = _parse_field(data["field"], seeds)
    try:
        integ = IntegratorConfig(**_take(data.get("integrator"), INTEGRATOR_KEYS, "integrator"))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("integrator", str(exc)) from exc
    out = _take(data.get("output"), OUTPUT_KEYS, "output")
    for i, fmt in enumerate(out["formats"]):
        if fmt not in FORMATS:
            raise ConfigError(f"output.formats[{i}]", f"expected one of {list(FORMATS)}, got {fmt!r}")

    if name == "verify_field":
        seeds["task.rng_seed"] = params["rng_seed"]
    elif name == "ray":
        params["seeds"] = [_parse_seed(s, f"task.seeds[{i}]") for i, s in enumerate(params["seeds"])]
        if not params["seeds"]:
            raise ConfigError("task.seeds", "at least one seed is required")
        if params["n_times"] is not None and params["n_times"] < 2:
            raise ConfigError("task.n_times", "must be >= 2")
    elif name == "invariants":
        explicit = [_parse_seed(s, f"task.seeds[{i}]") for i, s in enumerate(params["seeds"])]
        if params["random_seeds"] is not None:
            r = _take(params["random_seeds"], RANDOM_SEED_KEYS, "task.random_seeds")
            if r["n"] < 1:
                raise ConfigError("task.random_seeds.n", "must be >= 1")
            seeds["task.random_seeds.rng_seed"] = r["rng_seed"]
            explicit += full_seeds(spec, r["n"], r["rng_seed"])
        if not explicit:
            raise ConfigError("task.seeds", "give seeds or random_seeds")
        params["seeds"] = explicit
    elif name in ("beta", "lyapunov", "certify"):
        params["plan"] = _parse_plan(params["plan"], "task.plan", seeds)
        horizon = "T_max" if name == "lyapunov" else "T"
        if not params[horizon] > 0:
            raise ConfigError(f"task.{horizon}", "must be positive")
        if name == "lyapunov" and params["plan"].time_grid < 20:
            raise ConfigError("task.plan.time_grid", "lyapunov fit needs time_grid >= 20")
        if name == "certify" and params["grid"] < 2:
            raise ConfigError("task.grid", "must be >= 2")
    elif name == "wkb_sweep":
        pk = _parse_packet(params["packet"], "task.packet")
        params["packet"] = pk
        ps = params["ps"] if params["ps"] is not None else (pk.p,)
        for i, p in enumerate(ps):
            if not 1 < p < math.inf:
                raise ConfigError(f"task.ps[{i}]", "p must lie in (1, inf)")
        if len(pk.epsilons) < 3:
            raise ConfigError("task.packet.epsilons", "a sweep needs at least 3 epsilons")
        params["ps"] = tuple(ps)
    elif name == "burgers":
        try:
            params["grid"] = Grid1D(params.pop("nx"), params.pop("period"))
        except BurgersError as exc:
            raise ConfigError("task.nx", str(exc)) from exc
        if not 0 < params["cfl"] <= 1:
            raise ConfigError("task.cfl", "must lie in (0, 1]")
        if not params["T"] > 0:
            raise ConfigError("task.T", "must be positive")
        for i, t in enumerate(params["times"]):
            if not 0 <= t <= params["T"]:
                raise ConfigError(f"task.times[{i}]", "must lie in [0, T]")
        params["u0"] = _parse_profile(params["u0"], "task.u0")
        params["v0"] = _parse_profile(params["v0"], "task.v0")
    return Scenario(spec, name, params, integ, out["dir"], tuple(out["formats"]), text, seeds)


# -- running ------------------------------------------------------------------


def _dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


class Outputs:
    """Collects result files in memory and writes them after the task succeeds."""

    def __init__(self, formats: tuple[str, ...]):
        self.formats = formats
        self.files: dict[str, str] = {}

    def wants(self, fmt: str) -> bool:
        return fmt == "json" or fmt in self.formats

    def add(self, name: str, text: str) -> None:
        self.files[name] = text

    def json(self, name: str, obj: Any) -> None:
        self.add(name, _dumps(obj))

    def stream(self, name: str, writer: Callable[[io.StringIO], None]) -> None:
        buf = io.StringIO(newline="")
        writer(buf)
        self.add(name, buf.getvalue())


def _write_atomic(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _series_csv(pairs, header=("t", "sup_b")):
    def w(fh):
        cw = csv.writer(fh)
        cw.writerow(header)
        for row in pairs:
            cw.writerow([repr(float(c)) for c in row])

    return w


def _run_task(sc: Scenario, out: Outputs, workers: int) -> bool:
    """Execute the task; returns the verdict (False maps to exit status 3)."""
    p, spec, cfg = sc.params, sc.field, sc.integrator
    head = {"task": sc.task, "field": spec.to_dict() if spec is not None else None}
    if sc.task == "verify_field":
        rep = verify_field(spec, p["n_samples"], p["rng_seed"], p["check_steady"], p["tol"])
        out.json("field_report.json", {**head, **rep.to_dict()})
        return rep.passed

    if sc.task == "ray":
        T = p["T"]
        t_eval = np.linspace(0.0, T, p["n_times"]).tolist() if p["n_times"] else None
        summary = []
        for i, seed in enumerate(p["seeds"]):
            traj = integrate_ray(spec, seed, T, cfg, t_eval)
            if out.wants("jsonl"):
                out.stream(f"trajectory_{i:03d}.jsonl", lambda fh, tr=traj: write_trajectory(tr, fh))
            summary.append({
                "seed": seed.to_dict(),
                "final": traj[-1].to_record(),
                "n_states": len(traj),
                "invariants": monitor_invariants(traj).to_dict(),
            })
        out.json("ray_report.json", {**head, "T": T, "rays": summary})
        return True

    if sc.task == "invariants":
        rows, worst = [], 0.0
        for seed in p["seeds"]:
            led = monitor_invariants(integrate_ray(spec, seed, p["T"], cfg))
            worst = max(worst, led.max_relative())
            rows.append({"seed": seed.to_dict(), **led.to_dict()})
        ok = worst <= p["tol"]
        out.json("invariants.json", {**head, "T": p["T"], "tol": p["tol"],
                                     "max_relative_drift": worst, "passed": ok, "rays": rows})
        return ok

    if sc.task == "beta":
        rep = estimate_beta(spec, p["T"], p["plan"], cfg, workers)
        out.json("growth_report.json", {**head, **rep.to_dict()})
        if out.wants("csv"):
            out.stream("sup_series.csv", _series_csv(rep.sup_series))
        return True

    if sc.task == "lyapunov":
        rep = lyapunov_exponent(spec, p["T_max"], p["plan"], cfg, workers)
        out.json("lyapunov_report.json", {**head, **rep.to_dict()})
        if out.wants("csv"):
            out.stream("sup_series.csv", _series_csv(rep.growth.sup_series))
        return True

    if sc.task == "certify":
        cert = certify_vorticity_bound(spec, p["T"], p["plan"], cfg, workers, p["grid"])
        out.json("certificate.json", {**head, **cert.to_dict()})
        return cert.verdict and cert.theorem1_ok

    if sc.task == "wkb_sweep":
        pk = p["packet"]
        run = PacketRun(spec, pk, cfg, workers)
        for q in p["ps"]:
            rep = sweep_from_run(run, q)
            tag = f"p{q:g}"
            out.json(f"scaling_{tag}.json", {**head, "packet": pk.to_dict(), **rep.to_dict()})
            if out.wants("csv"):
                out.stream(f"scaling_{tag}.csv", lambda fh, r=rep: write_scaling_csv(r, fh))
            if out.wants("frame"):
                for e in pk.epsilons:
                    fr = run.final_frame(e, q)
                    out.stream(f"frame_{tag}_eps{e:g}.txt", lambda fh, f=fr: write_frame(f, fh))
        return True

    # burgers
    grid = p["grid"]
    u0 = make_profile(p["u0"], grid.period)
    v0 = make_profile(p["v0"], grid.period)
    run = solve_burgers(u0, p["T"], grid, p["cfl"], p["times"])
    solve_linearized(run, v0)
    t_shock = shock_time_estimate(run, p["shock_multiple"])
    l1 = run.l1_ledger
    mass = run.mass
    tv = run.total_variation()
    rep = {
        "task": "burgers",
        "nx": grid.nx,
        "period": grid.period,
        "cfl": p["cfl"],
        "T": p["T"],
        "n_steps": int(len(run.step_times) - 1),
        "u0": p["u0"],
        "v0": p["v0"],
        "mass_drift": float(np.max(np.abs(mass - mass[0]))),
        "v_mass_drift": float(np.max(np.abs(run.v_steps.sum(axis=1) - run.v_steps[0].sum())) * grid.dx),
        "l1_initial": float(l1[0]),
        "l1_relative_drift": float(np.max(np.abs(l1 / l1[0] - 1))) if l1[0] > 0 else 0.0,
        "l1_non_increasing": bool(np.all(np.diff(l1) <= 1e-13 * max(l1[0], 1e-300))),
        "tv_non_increasing": bool(np.all(np.diff(tv) <= 1e-12 * max(tv[0], 1.0))),
        "shock_time": t_shock,
        "shock": describe_shock(t_shock),
        "notes": run.notes,
    }
    out.json("burgers_report.json", rep)
    if out.wants("csv"):
        out.stream("burgers_snapshots.csv", lambda fh: write_snapshots_csv(run, fh))
        out.stream("burgers_ledger.csv", lambda fh: write_ledger_csv(run, fh))
    return True


def resolve_out_dir(sc: Scenario, cli_out: str | None, scenario_path: str | None = None) -> Path:
    if cli_out:
        return Path(cli_out)
    if os.environ.get(OUT_ENV):
        return Path(os.environ[OUT_ENV])
    if sc.output_dir:
        return Path(sc.output_dir)
    stem = Path(scenario_path).stem if scenario_path else "scenario"
    return Path("results") / stem


def run_scenario(sc: Scenario, out_dir: str | Path, workers: int = 1) -> tuple[dict[str, Any], bool]:
    """Run the task, write result files and the manifest; returns (manifest, verdict).

    Nothing is written unless the task completes.
    """
    if workers < 1:
        raise ConfigError("--workers", "must be >= 1")
    started = datetime.now(timezone.utc).isoformat()
    out = Outputs(sc.formats)
    log.info("running %s", sc.task)
    verdict = _run_task(sc, out, workers)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    try:
        for name in sorted(out.files):
            path = out_dir / name
            _write_atomic(path, out.files[name])
            written.append(path)
        manifest = {
            "tool": "eulerrays",
            "version": __version__,
            "task": sc.task,
            "scenario_sha256": sc.sha256,
            "rng_seeds": dict(sorted(sc.rng_seeds.items())),
            "workers": workers,
            "started": started,
            "finished": datetime.now(timezone.utc).isoformat(),
            "verdict": "pass" if verdict else "fail",
            "files": [
                {
                    "name": name,
                    "sha256": hashlib.sha256(out.files[name].encode()).hexdigest(),
                    "bytes": len(out.files[name].encode()),
                }
                for name in sorted(out.files)
            ],
        }
        _write_atomic(out_dir / "manifest.json", _dumps(manifest))
    except BaseException:
        for path in written:
            path.unlink(missing_ok=True)
        raise
    return manifest, verdict


# -- catalog and schema -------------------------------------------------------


def catalog_entries() -> list[dict[str, Any]]:
    return [
        {
            "kind": kind,
            "params": dict(defaults),
            "domain": domain,
            "steady_euler_available": steady,
        }
        for kind, (defaults, domain, steady) in CATALOG.items()
    ]


def list_catalog(machine: bool = False) -> str:
    entries = catalog_entries()
    if machine:
        return _dumps(entries)
    lines = []
    for e in entries:
        params = ", ".join(f"{k}={v:g}" for k, v in e["params"].items()) or "modes (see schema)"
        steady = "steady_euler available" if e["steady_euler_available"] else "no steady_euler"
        lines.append(f"{e['kind']:<10} {e['domain']:<6} {params:<28} {steady}")
    return "\n".join(lines) + "\n"


OUTPUT_DOC = {
    "manifest.json": "tool, version, task, scenario_sha256, rng_seeds, workers, started, finished, "
                     "verdict, files[{name, sha256, bytes}]; written last, atomically",
    "field_report.json": "verify_field: max_div, max_stretch_identity, max_steady_defect, passed",
    "ray_report.json": "ray: per seed {seed, final state, n_states, invariants drift}",
    "trajectory_NNN.jsonl": "ray: one record per line {t, gamma, xi, b, [btilde], omega}",
    "invariants.json": "invariants: max_relative_drift, passed, per-ray drift of omega.xi, b.xi, "
                       "btilde.xi, det(b, btilde, xi)",
    "growth_report.json": "beta: beta_estimate (lower estimate), argmax_seed, sup_series, "
                          "refinement_history",
    "lyapunov_report.json": "lyapunov: slope, intercept, fit_residual, fit_window, growth",
    "sup_series.csv": "beta, lyapunov: columns t, sup_b",
    "certificate.json": "certify: L, omega_sup_T, omega_sup_0, beta_estimate, verdict, "
                        "vorticity_free, theorem1{ratio, bound_beta_squared, consistent}",
    "scaling_pP.json": "wkb_sweep: epsilons, max_residuals, slope, C_fit, norm_ratio, "
                       "corrector_ratio, gamma_lower, residuals per epsilon",
    "scaling_pP.csv": "wkb_sweep: columns eps, residual, norm_ratio",
    "frame_pP_epsE.txt": "wkb_sweep: JSON header line {origin, spacing, dims, t, eps, delta}, "
                         "then per support node: x y z S phi xi1 xi2 xi3 b1 b2 b3 "
                         "Re v1 Re v2 Re v3 Im v1 Im v2 Im v3",
    "burgers_report.json": "burgers: mass and L1 drifts, monotonicity flags, shock_time",
    "burgers_snapshots.csv": "burgers: columns t, x, u, v (cell centres)",
    "burgers_ledger.csv": "burgers: columns t, l1, shock_indicator (every step)",
}


def _table_doc(table: Table) -> dict[str, Any]:
    doc = {}
    for key, (conv, default, desc) in table.items():
        entry = {"type": TYPE_NAMES.get(conv.__name__, conv.__name__)}
        if default is REQUIRED:
            entry["required"] = True
        else:
            entry["default"] = list(default) if isinstance(default, tuple) else default
        if desc:
            entry["doc"] = desc
        doc[key] = entry
    return doc


def schema_document() -> str:
    doc = {
        "scenario": {
            "field": _table_doc(FIELD_KEYS),
            "field.modes[]": _table_doc(MODE_KEYS),
            "field.random": _table_doc(RANDOM_KEYS),
            "task": {"name": {"type": "string", "required": True, "one_of": list(TASKS)}},
            **{f"task ({name})": _table_doc(t) for name, t in TASK_KEYS.items()},
            "seed": _table_doc(SEED_KEYS),
            "task.random_seeds": _table_doc(RANDOM_SEED_KEYS),
            "plan": _table_doc(PLAN_KEYS),
            "packet": _table_doc(PACKET_KEYS),
            **{f"profile (kind: {k})": _table_doc(t) for k, t in PROFILE_KINDS.items()},
            "integrator": _table_doc(INTEGRATOR_KEYS),
            "output": _table_doc(OUTPUT_KEYS),
        },
        "notes": [
            "burgers scenarios ignore the field section except an optional kind label",
            "floats in result files are written with full round-trip precision",
            f"${OUT_ENV} overrides output.dir; --out overrides both",
        ],
        "outputs": OUTPUT_DOC,
        "exit_codes": {0: "success", 1: "usage or configuration error",
                       2: "computation aborted", 3: "certificate or check failed"},
    }
    return yaml.safe_dump(doc, sort_keys=False, width=100)


# -- entry point --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eulerrays", description="Ray growth diagnostics for Euler flows")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario file")
    run.add_argument("scenario", type=Path)
    run.add_argument("--out", default=None, help="output directory")
    run.add_argument("--workers", type=int, default=1, help="worker processes")
    cat = sub.add_parser("catalog", help="list field kinds")
    cat.add_argument("--machine", action="store_true", help="JSON output")
    sub.add_parser("schema", help="print the scenario and output schema")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s")
    if args.command == "catalog":
        sys.stdout.write(list_catalog(args.machine))
        return EXIT_OK
    if args.command == "schema":
        sys.stdout.write(schema_document())
        return EXIT_OK
    try:
        text = args.scenario.read_text()
        sc = parse_scenario(text)
        if args.workers < 1:
            raise ConfigError("--workers", "must be >= 1")
    except (OSError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out_dir = resolve_out_dir(sc, args.out, str(args.scenario))
    try:
        manifest, verdict = run_scenario(sc, out_dir, args.workers)
    except (IntegrationError, GrowthError, PacketError, BurgersError, FieldError,
            ValueError, FloatingPointError) as exc:
        print(f"error: {sc.task} aborted: {exc}", file=sys.stderr)
        return EXIT_ABORT
    print(f"{sc.task}: {manifest['verdict']} -> {out_dir}")
    return EXIT_OK if verdict else EXIT_VERDICT


if __name__ == "__main__":
    sys.exit(main())
