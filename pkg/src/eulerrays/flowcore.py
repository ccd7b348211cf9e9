"""Bicharacteristic-amplitude rays, vorticity transport and the inverse flow.

Along a trajectory ``gamma' = u(t, gamma)`` with ``J = d_x u(t, gamma)``::

    xi'    = -J^T xi
    b'     = -J b + 2 (xi^T J b / |xi|^2) xi        (same for btilde)
    omega' =  J omega

The packed state of one ray is ``[gamma, xi, b, btilde, omega]`` (15 reals).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import IO, Iterable, Sequence

import numpy as np

from .fields import FieldSpec, eval_jacobian, eval_velocity, eval_vorticity
from .integrate import BatchResult, IntegrationError, IntegratorConfig, integrate_batch

XI_UNDERFLOW = 1e-300

G, XI, B, BT, OM = slice(0, 3), slice(3, 6), slice(6, 9), slice(9, 12), slice(12, 15)


def _matvec(M, v):
    return np.stack(
        [M[:, i, 0] * v[:, 0] + M[:, i, 1] * v[:, 1] + M[:, i, 2] * v[:, 2] for i in range(3)],
        axis=1,
    )


def _tmatvec(M, v):
    return np.stack(
        [M[:, 0, i] * v[:, 0] + M[:, 1, i] * v[:, 1] + M[:, 2, i] * v[:, 2] for i in range(3)],
        axis=1,
    )


def _dot(a, b):
    return a[:, 0] * b[:, 0] + a[:, 1] * b[:, 1] + a[:, 2] * b[:, 2]


def _cross(a, b):
    return np.stack(
        [
            a[:, 1] * b[:, 2] - a[:, 2] * b[:, 1],
            a[:, 2] * b[:, 0] - a[:, 0] * b[:, 2],
            a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0],
        ],
        axis=1,
    )


def amplitude_rhs(J: np.ndarray, xi: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Right-hand side of the amplitude equation (incompressible projection)."""
    Jb = _matvec(J, b)
    coef = 2.0 * _dot(xi, Jb) / _dot(xi, xi)
    return -Jb + coef[:, None] * xi


def ray_rhs(spec: FieldSpec):
    def rhs(t, y):
        gam, xi = y[:, G], y[:, XI]
        J = eval_jacobian(spec, t, gam)
        out = np.empty_like(y)
        out[:, G] = eval_velocity(spec, t, gam)
        out[:, XI] = -_tmatvec(J, xi)
        out[:, B] = amplitude_rhs(J, xi, y[:, B])
        out[:, BT] = amplitude_rhs(J, xi, y[:, BT])
        out[:, OM] = _matvec(J, y[:, OM])
        return out

    return rhs


def _xi_underflow(y):
    # |xi|^2 is the divisor in the amplitude equation
    return _dot(y[:, XI], y[:, XI]) < XI_UNDERFLOW


@dataclass(frozen=True)
class RaySeed:
    x0: tuple[float, float, float]
    xi0: tuple[float, float, float]
    b0: tuple[float, float, float]
    btilde0: tuple[float, float, float] | None = None
    omega0: tuple[float, float, float] | None = None

    def __post_init__(self) -> None:
        for name in ("x0", "xi0", "b0", "btilde0", "omega0"):
            val = getattr(self, name)
            if val is not None:
                arr = tuple(float(c) for c in val)
                if len(arr) != 3:
                    raise ValueError(f"{name} must have 3 components")
                object.__setattr__(self, name, arr)
        xi = np.array(self.xi0)
        if not np.linalg.norm(xi) > 0:
            raise ValueError("xi0 must be nonzero")
        scale = np.linalg.norm(xi) * max(np.linalg.norm(self.b0), 1e-300)
        if abs(np.dot(self.b0, xi)) > 1e-12 * scale:
            raise ValueError("b0 must be orthogonal to xi0")
        if self.btilde0 is not None:
            bt = np.array(self.btilde0)
            if abs(np.dot(bt, xi)) > 1e-12 * np.linalg.norm(xi) * max(np.linalg.norm(bt), 1e-300):
                raise ValueError("btilde0 must be orthogonal to xi0")
            if abs(np.linalg.det(np.column_stack([self.b0, bt, xi]))) == 0.0:
                raise ValueError("b0, btilde0, xi0 must be linearly independent")

    def is_unit(self, tol: float = 1e-12) -> bool:
        return (
            abs(np.linalg.norm(self.xi0) - 1) <= tol and abs(np.linalg.norm(self.b0) - 1) <= tol
        )

    def with_xi_scaled(self, c: float) -> "RaySeed":
        return replace(self, xi0=tuple(c * v for v in self.xi0))

    def to_dict(self) -> dict:
        return {k: (list(v) if v is not None else None) for k, v in self.__dict__.items()}


@dataclass(frozen=True)
class RayState:
    t: float
    gamma: np.ndarray
    xi: np.ndarray
    b: np.ndarray
    btilde: np.ndarray | None
    omega: np.ndarray

    @classmethod
    def unpack(cls, t: float, y: np.ndarray, has_btilde: bool) -> "RayState":
        return cls(
            t=float(t),
            gamma=y[G].copy(),
            xi=y[XI].copy(),
            b=y[B].copy(),
            btilde=y[BT].copy() if has_btilde else None,
            omega=y[OM].copy(),
        )

    def to_record(self) -> dict:
        rec = {
            "t": self.t,
            "gamma": self.gamma.tolist(),
            "xi": self.xi.tolist(),
            "b": self.b.tolist(),
        }
        if self.btilde is not None:
            rec["btilde"] = self.btilde.tolist()
        rec["omega"] = self.omega.tolist()
        return rec


def pack_seeds(spec: FieldSpec, seeds: Sequence[RaySeed]) -> np.ndarray:
    y0 = np.zeros((len(seeds), 15))
    for i, s in enumerate(seeds):
        y0[i, G] = s.x0
        y0[i, XI] = s.xi0
        y0[i, B] = s.b0
        if s.btilde0 is not None:
            y0[i, BT] = s.btilde0
        y0[i, OM] = s.omega0 if s.omega0 is not None else eval_vorticity(spec, 0.0, np.array(s.x0))
    return y0


def integrate_rays(
    spec: FieldSpec,
    y0: np.ndarray,
    t_out: Sequence[float],
    cfg: IntegratorConfig,
    t0: float = 0.0,
    record_steps: bool = False,
    horizon: float | None = None,
) -> BatchResult:
    """Integrate packed ray states (rows of ``y0``) to each time in ``t_out``."""
    return integrate_batch(
        ray_rhs(spec), y0, t0, t_out, cfg, record_steps=record_steps, check=_xi_underflow,
        horizon=horizon,
    )


def integrate_ray(
    spec: FieldSpec,
    seed: RaySeed,
    T: float,
    cfg: IntegratorConfig | None = None,
    t_eval: Sequence[float] | None = None,
) -> list[RayState]:
    """Trajectory of one ray.

    Returns the state at every accepted step ending exactly at ``t=T``, or,
    when ``t_eval`` is given, the states at those times.  Negative ``T``
    integrates backward.
    """
    cfg = cfg or IntegratorConfig()
    y0 = pack_seeds(spec, [seed])
    has_bt = seed.btilde0 is not None
    if t_eval is not None:
        res = integrate_rays(spec, y0, list(t_eval), cfg)
        _raise_failed(res)
        return [RayState.unpack(t, res.ys[k, 0], has_bt) for k, t in enumerate(res.times)]
    if T == 0:
        return [RayState.unpack(0.0, y0[0], has_bt)]
    res = integrate_rays(spec, y0, [T], cfg, record_steps=True)
    _raise_failed(res)
    return [RayState.unpack(t, y, has_bt) for t, y in res.steps[0]]


def _raise_failed(res: BatchResult) -> None:
    if res.failed.any():
        i = int(np.nonzero(res.failed)[0][0])
        raise IntegrationError(f"ray {i} aborted: {res.reasons[i]}")


def inverse_flow(
    spec: FieldSpec,
    x: np.ndarray,
    t: float,
    cfg: IntegratorConfig | None = None,
    to: float = 0.0,
    horizon: float | None = None,
) -> np.ndarray:
    """Pull points back along the flow: returns ``gamma_t^{-1}(x)``.

    Integrates ``y' = u(s, y)`` from ``s = t`` down to ``s = to`` (default 0).
    Accepts one point or a batch ``(N, 3)``.
    """
    cfg = cfg or IntegratorConfig()
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    xb = np.atleast_2d(x)
    if t == to:
        return x.copy()

    def rhs(s, y):
        return eval_velocity(spec, s, y)

    res = integrate_batch(rhs, xb, t, [to], cfg, horizon=horizon)
    if res.failed.any():
        i = int(np.nonzero(res.failed)[0][0])
        raise IntegrationError(f"inverse flow of point {i} aborted: {res.reasons[i]}")
    out = res.ys[-1]
    return out[0] if single else out


def forward_flow(spec: FieldSpec, x: np.ndarray, t: float, cfg: IntegratorConfig | None = None,
                 start: float = 0.0, horizon: float | None = None) -> np.ndarray:
    """``gamma_t(x)`` for flow started at time ``start``."""
    return inverse_flow(spec, x, start, cfg, to=t, horizon=horizon)


# -- conserved quantities -----------------------------------------------------


@dataclass(frozen=True)
class Drift:
    """Largest deviation of an invariant from its initial value.

    ``relative`` divides by the largest product of factor norms along the
    trajectory (``|omega||xi|``, ``|b||xi|``, ``|b||btilde||xi|``), the
    scale at which floating-point cancellation happens; it stays meaningful
    for invariants that start at zero.  ``relative_to_initial`` divides by
    ``|I(0)|`` and is ``None`` when that vanishes.
    """

    absolute: float
    relative: float
    initial: float
    scale: float
    relative_to_initial: float | None


@dataclass(frozen=True)
class InvariantLedger:
    """Maximum drift of each conserved ray quantity over a trajectory.

    ``det`` is ``None`` when the trajectory carries no second amplitude.
    """

    omega_xi: Drift
    b_xi: Drift
    btilde_xi: Drift | None
    det: Drift | None
    n_states: int

    def max_relative(self) -> float:
        vals = [d.relative for d in (self.omega_xi, self.b_xi, self.btilde_xi, self.det) if d]
        return max(vals)

    def to_dict(self) -> dict:
        def d(x):
            return None if x is None else x.__dict__.copy()

        return {
            "omega_xi": d(self.omega_xi),
            "b_xi": d(self.b_xi),
            "btilde_xi": d(self.btilde_xi),
            "det": d(self.det),
            "n_states": self.n_states,
        }


def _drift(series: np.ndarray, scales: np.ndarray) -> Drift:
    init = float(series[0])
    dev = float(np.max(np.abs(series - init)))
    scale = float(np.max(scales))
    return Drift(
        absolute=dev,
        relative=dev / scale if scale > 0 else dev,
        initial=init,
        scale=scale,
        relative_to_initial=dev / abs(init) if init != 0.0 else None,
    )


def invariant_scales(ys: np.ndarray) -> dict[str, np.ndarray]:
    """Products of factor norms for each invariant in :func:`invariant_series`."""
    n = {k: np.sqrt(_dot(ys[:, sl], ys[:, sl])) for k, sl in (("xi", XI), ("b", B), ("bt", BT), ("om", OM))}
    return {
        "omega_xi": n["om"] * n["xi"],
        "b_xi": n["b"] * n["xi"],
        "btilde_xi": n["bt"] * n["xi"],
        "det": n["b"] * n["bt"] * n["xi"],
    }


def invariant_series(ys: np.ndarray) -> dict[str, np.ndarray]:
    """Invariants for packed states ``ys`` of shape ``(M, 15)``."""
    xi, b, bt, om = ys[:, XI], ys[:, B], ys[:, BT], ys[:, OM]
    return {
        "omega_xi": _dot(om, xi),
        "b_xi": _dot(b, xi),
        "btilde_xi": _dot(bt, xi),
        "det": _dot(_cross(b, bt), xi),
    }


def monitor_invariants(trajectory: Sequence[RayState]) -> InvariantLedger:
    if not trajectory:
        raise ValueError("empty trajectory")
    has_bt = trajectory[0].btilde is not None
    ys = np.array(
        [
            np.concatenate(
                [s.gamma, s.xi, s.b, s.btilde if has_bt else np.zeros(3), s.omega]
            )
            for s in trajectory
        ]
    )
    ser, sc = invariant_series(ys), invariant_scales(ys)
    return InvariantLedger(
        omega_xi=_drift(ser["omega_xi"], sc["omega_xi"]),
        b_xi=_drift(ser["b_xi"], sc["b_xi"]),
        btilde_xi=_drift(ser["btilde_xi"], sc["btilde_xi"]) if has_bt else None,
        det=_drift(ser["det"], sc["det"]) if has_bt else None,
        n_states=len(trajectory),
    )


@dataclass(frozen=True)
class ScaleReport:
    c: float
    max_b_deviation: float
    max_xi_ratio_error: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_b_deviation <= self.tol and self.max_xi_ratio_error <= self.tol


def scale_xi_check(
    spec: FieldSpec,
    seed: RaySeed,
    c: float,
    T: float,
    cfg: IntegratorConfig | None = None,
    n_times: int = 50,
    tol: float = 1e-8,
) -> ScaleReport:
    """Compare rays seeded with ``xi0`` and ``c * xi0``.

    ``b`` should be unchanged and ``xi`` scaled exactly by ``c``.  Both rays
    are sampled on a common time grid.
    """
    if c == 0:
        raise ValueError("c must be nonzero")
    cfg = cfg or IntegratorConfig()
    times = np.linspace(0.0, T, n_times + 1)
    y0 = pack_seeds(spec, [seed, seed.with_xi_scaled(c)])
    res = integrate_rays(spec, y0, times, cfg)
    _raise_failed(res)
    a, s = res.ys[:, 0], res.ys[:, 1]
    bscale = max(1.0, float(np.max(np.abs(a[:, B]))))
    db = float(np.max(np.abs(a[:, B] - s[:, B]))) / bscale
    dxi = float(np.max(np.abs(s[:, XI] - c * a[:, XI]))) / max(
        float(np.max(np.abs(c * a[:, XI]))), 1e-300
    )
    return ScaleReport(c=c, max_b_deviation=db, max_xi_ratio_error=dxi, tol=tol)


def write_trajectory(states: Iterable[RayState], fh: IO[str]) -> None:
    """One JSON record per line."""
    for s in states:
        fh.write(json.dumps(s.to_record(), separators=(",", ":")) + "\n")


def read_trajectory(fh: IO[str]) -> list[RayState]:
    out = []
    for line in fh:
        if not line.strip():
            continue
        r = json.loads(line)
        out.append(
            RayState(
                t=r["t"],
                gamma=np.array(r["gamma"]),
                xi=np.array(r["xi"]),
                b=np.array(r["b"]),
                btilde=np.array(r["btilde"]) if "btilde" in r else None,
                omega=np.array(r["omega"]),
            )
        )
    return out
