"""Periodic 1D Burgers solver and the transport equation it linearizes to.

``u_t + (u^2/2)_x = 0`` is advanced with a first-order Godunov scheme.
``v_t + (u v)_x = 0`` is advanced in the frozen per-step ``u`` with the flux
upwinded by the Godunov interface state, so the scheme is conservative and,
for ``dt <= dx / (2 max|u|)``, positivity preserving.  Those two properties
make ``||v||_1`` exactly constant for sign-definite data.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import IO, Callable, Sequence

import numpy as np

Profile = Callable[[np.ndarray], np.ndarray] | np.ndarray

SHOCK_MULTIPLE = 10.0


class BurgersError(ValueError):
    pass


@dataclass(frozen=True)
class Grid1D:
    nx: int
    period: float = 2 * np.pi

    def __post_init__(self) -> None:
        if self.nx < 16:
            raise BurgersError(f"nx must be >= 16, got {self.nx}")
        if not self.period > 0:
            raise BurgersError("period must be positive")

    @property
    def dx(self) -> float:
        return self.period / self.nx

    def centers(self) -> np.ndarray:
        return (np.arange(self.nx) + 0.5) * self.dx

    def cell_average(self, profile: Profile, order: int = 4) -> np.ndarray:
        """Cell averages of ``profile`` by Gauss-Legendre quadrature (arrays pass through)."""
        if not callable(profile):
            arr = np.asarray(profile, dtype=float)
            if arr.shape != (self.nx,):
                raise BurgersError(f"profile array has shape {arr.shape}, expected ({self.nx},)")
            return arr.copy()
        nodes, weights = np.polynomial.legendre.leggauss(order)
        left = np.arange(self.nx) * self.dx
        x = left[:, None] + 0.5 * self.dx * (nodes[None, :] + 1)
        vals = np.asarray(profile(x), dtype=float)
        return 0.5 * vals @ weights


@dataclass
class BurgersRun:
    """Solution history.

    ``step_times``/``u_steps`` hold the state after every time step (and the
    initial state); ``times``/``u_snapshots`` the requested output times.
    ``l1_ledger`` and ``shock_indicator`` are per step.
    """

    grid: Grid1D
    cfl: float
    times: np.ndarray
    u_snapshots: np.ndarray
    step_times: np.ndarray
    u_steps: np.ndarray
    shock_indicator: np.ndarray
    v_snapshots: np.ndarray | None = None
    v_steps: np.ndarray | None = None
    l1_ledger: np.ndarray | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def mass(self) -> np.ndarray:
        return self.u_steps.sum(axis=1) * self.grid.dx

    def total_variation(self) -> np.ndarray:
        return np.abs(np.roll(self.u_steps, -1, axis=1) - self.u_steps).sum(axis=1)


def bump_profile_1d(r: np.ndarray) -> np.ndarray:
    """``exp(1/(r^2-1))`` for ``|r| < 1``, zero outside."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    inside = np.abs(r) < 1.0
    out[inside] = np.exp(1.0 / (r[inside] ** 2 - 1.0))
    return out


def flux(u: np.ndarray) -> np.ndarray:
    return 0.5 * u * u


def godunov_flux(ul: np.ndarray, ur: np.ndarray) -> np.ndarray:
    """Exact Riemann flux for the convex flux ``u^2/2``."""
    return np.maximum(flux(np.maximum(ul, 0.0)), flux(np.minimum(ur, 0.0)))


def interface_state(ul: np.ndarray, ur: np.ndarray) -> np.ndarray:
    """Value of the exact Riemann solution on the interface ``x/t = 0``."""
    s = 0.5 * (ul + ur)
    shock = ul > ur
    shock_state = np.where(s > 0, ul, np.where(s < 0, ur, 0.0))
    fan_state = np.where(ul >= 0, ul, np.where(ur <= 0, ur, 0.0))
    return np.where(shock, shock_state, fan_state)


def gradient_indicator(u: np.ndarray, dx: float) -> float:
    return float(np.max(np.abs(np.roll(u, -1) - u)) / dx)


def solve_burgers(u0: Profile, T: float, grid: Grid1D, cfl: float = 0.5,
                  times: Sequence[float] | None = None) -> BurgersRun:
    """Godunov solution of periodic Burgers on ``[0, T]``.

    Steps use ``dt = cfl dx / max|u|`` and are shortened to land on every
    requested snapshot time (default: ``T`` only).
    """
    if not 0 < cfl <= 1:
        raise BurgersError(f"cfl must lie in (0, 1], got {cfl}")
    if T < 0:
        raise BurgersError("T must be nonnegative")
    out_times = np.unique(np.append(np.asarray(times if times is not None else [], float), T))
    if out_times[0] < 0 or out_times[-1] > T:
        raise BurgersError("snapshot times must lie in [0, T]")
    u = grid.cell_average(u0)
    if not np.all(np.isfinite(u)):
        raise BurgersError("u0 must be bounded")
    dx = grid.dx
    umax = float(np.max(np.abs(u)))
    if umax == 0.0:
        # rest state: nothing moves
        n = len(out_times)
        return BurgersRun(grid, cfl, out_times, np.tile(u, (n, 1)),
                          np.concatenate([[0.0], out_times[out_times > 0]]),
                          np.tile(u, (1 + int(np.sum(out_times > 0)), 1)),
                          np.zeros(1 + int(np.sum(out_times > 0))),
                          notes=["rest state"])
    dt_nom = cfl * dx / umax
    t = 0.0
    step_t, step_u, ind = [0.0], [u.copy()], [gradient_indicator(u, dx)]
    snaps = []
    k = 0
    while k < len(out_times) and out_times[k] <= 0.0:
        snaps.append(u.copy())
        k += 1
    while k < len(out_times):
        # max|u| never grows for an entropy scheme, so dt_nom stays admissible
        dt = min(dt_nom, out_times[k] - t)
        fl = godunov_flux(u, np.roll(u, -1))
        u = u - dt / dx * (fl - np.roll(fl, 1))
        t = out_times[k] if dt == out_times[k] - t else t + dt
        step_t.append(t)
        step_u.append(u.copy())
        ind.append(gradient_indicator(u, dx))
        while k < len(out_times) and out_times[k] <= t:
            snaps.append(u.copy())
            k += 1
    return BurgersRun(grid, cfl, out_times, np.array(snaps), np.array(step_t),
                      np.array(step_u), np.array(ind))


def solve_linearized(run: BurgersRun, v0: Profile, dts: Sequence[float] | None = None) -> BurgersRun:
    """Transport ``v`` conservatively in the stored per-step ``u`` fields.

    ``dts``, when given, must match the run's step sizes.
    """
    if run.u_steps.shape[0] != len(run.step_times):
        raise BurgersError("run does not hold u at every step")
    steps = np.diff(run.step_times)
    if dts is not None:
        dts = np.asarray(dts, dtype=float)
        if dts.shape != steps.shape or not np.allclose(dts, steps, rtol=0, atol=1e-14):
            raise BurgersError("time steps do not match the Burgers run")
    grid = run.grid
    dx = grid.dx
    v = grid.cell_average(v0)
    vs = [v.copy()]
    for n, dt in enumerate(steps):
        u = run.u_steps[n]
        a = interface_state(u, np.roll(u, -1))
        fl = np.where(a > 0, a * v, a * np.roll(v, -1))
        v = v - dt / dx * (fl - np.roll(fl, 1))
        vs.append(v.copy())
    v_steps = np.array(vs)
    idx = np.searchsorted(run.step_times, run.times)
    run.v_steps = v_steps
    run.v_snapshots = v_steps[idx]
    run.l1_ledger = np.abs(v_steps).sum(axis=1) * dx
    if not any("periodic" in s for s in run.notes):
        run.notes.append("periodic discrete analogue of the L1 growth bound on the line")
    return run


def shock_time_estimate(run: BurgersRun, multiple: float = SHOCK_MULTIPLE) -> float | None:
    """First step time at which the gradient indicator exceeds ``multiple`` times its reference.

    The reference is the smaller of the initial indicator and the gradient
    scale of a sinusoid with the same oscillation, so an initial
    discontinuity registers at ``t = 0``.  ``None`` means no shock by ``T``.
    """
    u0 = run.u_steps[0]
    osc = float(u0.max() - u0.min())
    ref = min(float(run.shock_indicator[0]), 0.5 * osc * 2 * np.pi / run.grid.period)
    if ref <= 0.0:
        return None
    hit = np.nonzero(run.shock_indicator > multiple * ref)[0]
    return float(run.step_times[hit[0]]) if hit.size else None


def describe_shock(t: float | None) -> str:
    return "no shock by T" if t is None else f"shock at t={t:.6g}"


def write_snapshots_csv(run: BurgersRun, fh: IO[str]) -> None:
    """Columns ``t, x, u, v`` for every snapshot and cell centre."""
    x = run.grid.centers()
    w = csv.writer(fh)
    w.writerow(["t", "x", "u", "v"])
    for m, t in enumerate(run.times):
        v = run.v_snapshots[m] if run.v_snapshots is not None else np.full_like(x, np.nan)
        for xi, ui, vi in zip(x, run.u_snapshots[m], v):
            w.writerow([repr(float(t)), repr(float(xi)), repr(float(ui)), repr(float(vi))])


def write_ledger_csv(run: BurgersRun, fh: IO[str]) -> None:
    """Columns ``t, l1, shock_indicator`` for every step."""
    l1 = run.l1_ledger if run.l1_ledger is not None else np.full(len(run.step_times), np.nan)
    w = csv.writer(fh)
    w.writerow(["t", "l1", "shock_indicator"])
    for row in zip(run.step_times, l1, run.shock_indicator):
        w.writerow([repr(float(c)) for c in row])
