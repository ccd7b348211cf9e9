"""Batched explicit Runge-Kutta integrators with per-trajectory step control.

Each row of the state batch is advanced with its own step size, so a row's
result does not depend on which other rows share the batch.  Only elementwise
array operations touch row data, which keeps results bit-identical under any
chunking of the batch.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

RHS = Callable[[np.ndarray, np.ndarray], np.ndarray]

# Dormand-Prince 5(4)
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)
# continuous extension, y(t + s h) = y + h * sum_i k_i * (P[i] . [s, s^2, s^3, s^4])
_P = np.array(
    [
        [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0, 0, 0, 0],
        [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)

METHODS = ("dp54", "rk4")


class IntegrationError(RuntimeError):
    """An integration aborted (step-size collapse or singular state)."""


@dataclass(frozen=True)
class IntegratorConfig:
    """Integrator settings.

    ``max_step``/``initial_step`` of ``None`` resolve against the horizon of
    the computation (``|T|/100`` and ``max_step/10``); the horizon defaults to
    the span being integrated.  For ``rk4`` the step is
    ``max_step``.
    """

    method: str = "dp54"
    rtol: float = 1e-10
    atol: float = 1e-10
    max_step: float | None = None
    initial_step: float | None = None
    dense_output: bool = False

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"unknown integrator method {self.method!r}")
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("rtol and atol must be positive")
        if self.max_step is not None and self.max_step <= 0:
            raise ValueError("max_step must be positive")
        if self.initial_step is not None and self.initial_step <= 0:
            raise ValueError("initial_step must be positive")

    def steps_for(self, span: float) -> tuple[float, float]:
        span = abs(span)
        hmax = self.max_step if self.max_step is not None else span / 100.0
        hmax = hmax if hmax > 0 else 1.0
        h0 = self.initial_step if self.initial_step is not None else hmax / 10.0
        return hmax, min(h0, hmax)


def _rows_sumsq(a: np.ndarray) -> np.ndarray:
    out = a[:, 0] * a[:, 0]
    for j in range(1, a.shape[1]):
        out = out + a[:, j] * a[:, j]
    return out


def _combine(y: np.ndarray, h: np.ndarray, ks: Sequence[np.ndarray], coefs) -> np.ndarray:
    acc = None
    for c, k in zip(coefs, ks):
        if c == 0.0:
            continue
        acc = c * k if acc is None else acc + c * k
    if acc is None:
        return y.copy()
    return y + h[:, None] * acc


@dataclass
class BatchResult:
    """States of every row at each requested output time.

    ``ys[m]`` has shape ``(N, d)`` and holds the state at ``times[m]``;
    ``failed`` flags rows that aborted (their entries are NaN from then on).
    ``steps`` holds, when recorded, per-row lists of (t, y) at accepted steps.
    """

    times: np.ndarray
    ys: np.ndarray
    failed: np.ndarray
    reasons: list[str | None]
    n_accepted: np.ndarray
    steps: list[list[tuple[float, np.ndarray]]] | None = None


def integrate_batch(
    rhs: RHS,
    y0: np.ndarray,
    t0: float,
    t_out: Sequence[float],
    cfg: IntegratorConfig,
    record_steps: bool = False,
    check: Callable[[np.ndarray], np.ndarray] | None = None,
    horizon: float | None = None,
) -> BatchResult:
    """Integrate ``y' = rhs(t, y)`` for every row of ``y0`` from ``t0``.

    ``t_out`` must be monotone in the direction of integration (forward when
    its last entry exceeds ``t0``).  ``rhs`` receives a time vector of shape
    ``(n,)`` and a state batch ``(n, d)``.  ``check`` returns a boolean mask of
    rows whose state is singular; those rows abort.
    """
    y0 = np.atleast_2d(np.asarray(y0, dtype=float))
    n, d = y0.shape
    t_out = np.asarray(t_out, dtype=float)
    m = len(t_out)
    ys = np.full((m, n, d), np.nan)
    failed = np.zeros(n, dtype=bool)
    reasons: list[str | None] = [None] * n
    n_acc = np.zeros(n, dtype=np.int64)
    steps = [[(t0, y0[i].copy())] for i in range(n)] if record_steps else None
    if m == 0:
        return BatchResult(t_out, ys, failed, reasons, n_acc, steps)
    span = t_out[-1] - t0
    direction = 1.0 if span >= 0 else -1.0
    if np.any(direction * np.diff(np.concatenate([[t0], t_out])) < 0):
        raise ValueError("output times must be monotone in the integration direction")
    hmax, h0 = cfg.steps_for(span if horizon is None else horizon)
    dense = cfg.dense_output and cfg.method == "dp54"
    eps_t = np.finfo(float).eps * max(abs(span), abs(t0), 1.0)
    # steps this short only creep along a singularity
    h_min = 1e3 * eps_t

    t = np.full(n, float(t0))
    y = y0.copy()
    h = np.full(n, h0)
    nxt = np.zeros(n, dtype=np.int64)  # index of next output time per row
    # outputs equal to t0
    while True:
        hit = (nxt < m) & (np.abs(t_out[np.minimum(nxt, m - 1)] - t) <= eps_t)
        if not hit.any():
            break
        idx = np.nonzero(hit)[0]
        ys[nxt[idx], idx] = y[idx]
        nxt[idx] += 1
    k1 = rhs(t, y) if cfg.method == "dp54" else None

    active = np.nonzero(nxt < m)[0]
    while active.size:
        ta, ya, ha = t[active], y[active], h[active]
        tgt_idx = np.full(active.size, m - 1) if dense else nxt[active]
        target = t_out[tgt_idx]
        remaining = direction * (target - ta)
        if cfg.method == "rk4":
            step = np.minimum(np.full(active.size, hmax), remaining)
        else:
            step = np.minimum(np.minimum(ha, hmax), remaining)
        land = step >= remaining * (1 - 1e-12)
        step = np.where(land, remaining, step)
        hs = direction * step
        if cfg.method == "rk4":
            ynew = _rk4_step(rhs, ta, ya, hs)
            accept = np.ones(active.size, dtype=bool)
            k_new = None
        else:
            ynew, k_new, err, stages = _dp_step(rhs, ta, ya, hs, k1[active], cfg)
            err = np.where(np.isfinite(err), err, np.inf)
            accept = err <= 1.0
            with np.errstate(divide="ignore"):
                fac = np.where(err == 0.0, 5.0, 0.9 * err ** -0.2)
            fac = np.clip(fac, 0.2, 5.0)
            fac = np.where(accept, fac, np.minimum(fac, 1.0))
            hnew = step * fac
            hnew = np.where(accept & land, np.maximum(hnew, ha), hnew)
            h[active] = np.minimum(hnew, hmax)
            bad = (~accept) & (h[active] < h_min)
            if bad.any():
                for i in active[bad]:
                    failed[i] = True
                    reasons[i] = "step-size collapse"
        acc_idx = active[accept]
        if acc_idx.size:
            y_acc = ynew[accept]
            t_acc = np.where(land[accept], target[accept], ta[accept] + hs[accept])
            if check is not None:
                sing = check(y_acc)
                if sing.any():
                    for i in acc_idx[sing]:
                        failed[i] = True
                        reasons[i] = "singular state"
            t[acc_idx] = t_acc
            y[acc_idx] = y_acc
            n_acc[acc_idx] += 1
            if k_new is not None:
                k1[acc_idx] = k_new[accept]
            if dense:
                _dense_fill(ys, nxt, t_out, acc_idx, ta[accept], hs[accept],
                            ya[accept], [k[accept] for k in stages], eps_t, direction)
            else:
                landed = acc_idx[land[accept]]
                ys[nxt[landed], landed] = y[landed]
                nxt[landed] += 1
            if record_steps:
                for j, i in enumerate(acc_idx):
                    steps[i].append((float(t_acc[j]), y_acc[j].copy()))
        done = failed | (nxt >= m)
        active = np.nonzero(~done)[0]
    for i in np.nonzero(failed)[0]:
        ys[nxt[i]:, i] = np.nan
    return BatchResult(t_out, ys, failed, reasons, n_acc, steps)


def _rk4_step(rhs, t, y, h):
    hc = h[:, None]
    k1 = rhs(t, y)
    k2 = rhs(t + h / 2, y + hc / 2 * k1)
    k3 = rhs(t + h / 2, y + hc / 2 * k2)
    k4 = rhs(t + h, y + hc * k3)
    return y + hc / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _dp_step(rhs, t, y, h, k1, cfg):
    ks = [k1]
    for s in range(1, 7):
        ys = _combine(y, h, ks, _A[s])
        ks.append(rhs(t + _C[s] * h, ys))
    ynew = _combine(y, h, ks[:6], _B[:6])
    ks[6] = rhs(t + h, ynew)
    errv = _combine(np.zeros_like(y), h, ks, _E)
    scale = cfg.atol + cfg.rtol * np.maximum(np.abs(y), np.abs(ynew))
    err = np.sqrt(_rows_sumsq(errv / scale) / y.shape[1])
    return ynew, ks[6], err, ks


def _dense_fill(ys, nxt, t_out, rows, t_old, hs, y_old, ks, eps_t, direction):
    m = len(t_out)
    t_new = t_old + hs
    for j, i in enumerate(rows):
        while nxt[i] < m and direction * (t_out[nxt[i]] - t_new[j]) <= eps_t:
            s = (t_out[nxt[i]] - t_old[j]) / hs[j]
            ys[nxt[i], i] = dense_eval(y_old[j], hs[j], [k[j] for k in ks], s)
            nxt[i] += 1


def dense_eval(y: np.ndarray, h: float, ks: Sequence[np.ndarray], s: float) -> np.ndarray:
    """Evaluate the Dormand-Prince continuous extension at fraction ``s`` of a step."""
    powers = np.array([s, s * s, s**3, s**4])
    w = _P @ powers
    return y + h * sum(wi * k for wi, k in zip(w, ks))
