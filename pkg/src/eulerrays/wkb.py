"""Oscillatory wave packets for the linearized Euler operator.

A packet launched from ``(x0, xi0, b0)`` with bump radius ``delta`` is built
from the pulled-back coordinates ``y = gamma_t^{-1}(x)``::

    S   = y . xi0                         phase
    phi = bump((y - x0) / delta)          transported envelope
    xi, b                                 ray values at time t seeded at (y, xi0, b0)
    A   = eps (xi x b) / |xi|^2 phi exp(iS/eps)
    v   = curl A
    V   = i phi b exp(iS/eps)
    q   = -2 i eps xi^T (d_x u) V / |xi|^2

Every complex field is stored as a smooth envelope times ``exp(iS/eps)``.
With ``phase="envelope"`` (default) derivatives of the phase factor use the
exact identities ``grad S = xi`` and ``d_t S = -u . xi`` and only envelopes
are differenced, so the grid has to resolve ``delta`` but not ``eps``.  With
``phase="grid"`` the oscillatory fields are materialized and differenced
directly, which needs ``h, dt <= eps / 10``.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import IO, Any, Sequence

import numpy as np
from scipy import integrate as spi

from .fields import FieldSpec, eval_jacobian, eval_velocity
from .flowcore import B, XI, inverse_flow, forward_flow, integrate_rays
from .growth import fit_log_slope
from .integrate import IntegrationError, IntegratorConfig
from .parallel import chunk_bounds, run_chunks

log = logging.getLogger(__name__)

RAY_CHUNK = 8192
PHASE_MODES = ("envelope", "grid")


class PacketError(ValueError):
    pass


@dataclass(frozen=True)
class PacketSpec:
    x0: tuple[float, float, float]
    xi0: tuple[float, float, float]
    b0: tuple[float, float, float]
    delta: float = 0.5
    epsilons: tuple[float, ...] = (0.1, 0.03, 0.01)
    h: float = 0.025
    dt: float = 0.005
    p: float = 2.0
    T: float = 1.0
    n_times: int = 5
    phase: str = "envelope"
    pad: float = 0.2

    def __post_init__(self) -> None:
        for name in ("x0", "xi0", "b0"):
            object.__setattr__(self, name, tuple(float(c) for c in getattr(self, name)))
        object.__setattr__(self, "epsilons", tuple(float(e) for e in self.epsilons))
        xi, b = np.array(self.xi0), np.array(self.b0)
        if abs(np.linalg.norm(xi) - 1) > 1e-12 or abs(np.linalg.norm(b) - 1) > 1e-12:
            raise PacketError("xi0 and b0 must be unit vectors")
        if abs(xi @ b) > 1e-12:
            raise PacketError("b0 must be orthogonal to xi0")
        eps = self.epsilons
        if not eps or any(e <= 0 for e in eps):
            raise PacketError("epsilons must be positive")
        if any(b_ >= a for a, b_ in zip(eps, eps[1:])):
            raise PacketError("epsilons must be strictly decreasing")
        if not 1 < self.p < np.inf:
            raise PacketError("p must lie in (1, inf)")
        if self.h <= 0 or self.dt <= 0 or self.T < 0:
            raise PacketError("h and dt must be positive and T >= 0")
        if not self.delta > 4 * self.h:
            raise PacketError(f"delta={self.delta} must exceed 4h={4 * self.h}")
        if self.n_times < 2:
            raise PacketError("n_times must be >= 2")
        if self.phase not in PHASE_MODES:
            raise PacketError(f"unknown phase mode {self.phase!r}")
        if self.phase == "grid":
            lim = min(eps) / 10
            if self.h > lim:
                raise PacketError(
                    f"resolution constraint violated: h={self.h} > min(epsilons)/10={lim}"
                )
            if self.dt > lim:
                raise PacketError(
                    f"resolution constraint violated: dt={self.dt} > min(epsilons)/10={lim}"
                )

    def sample_times(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.n_times)

    def to_dict(self) -> dict[str, Any]:
        d = dict(self.__dict__)
        for k in ("x0", "xi0", "b0", "epsilons"):
            d[k] = list(d[k])
        return d


# -- bump ---------------------------------------------------------------------


def bump_profile(r: np.ndarray) -> np.ndarray:
    """``exp(1/(r^2-1))`` inside the unit ball, zero outside."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    inside = r < 1.0
    out[inside] = np.exp(1.0 / (r[inside] ** 2 - 1.0))
    return out


@lru_cache(maxsize=None)
def bump_norm(p: float) -> float:
    """L^p norm of the unit bump on R^3 (radial quadrature)."""
    val, _ = spi.quad(lambda r: np.exp(p / (r * r - 1.0)) * r * r, 0.0, 1.0, limit=200)
    return float((4 * np.pi * val) ** (1.0 / p))


def bump_scale(delta: float, p: float) -> float:
    """Factor making ``scale * bump(|x|/delta)`` unit in L^p."""
    return delta ** (-3.0 / p) / bump_norm(p)


# -- grids and norms ----------------------------------------------------------


@dataclass(frozen=True)
class Grid3D:
    origin: tuple[float, float, float]
    h: float
    shape: tuple[int, int, int]

    def axes(self) -> list[np.ndarray]:
        return [self.origin[d] + self.h * np.arange(self.shape[d]) for d in range(3)]

    def nodes(self) -> np.ndarray:
        X, Y, Z = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([X, Y, Z], axis=-1).reshape(-1, 3)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def upper(self) -> np.ndarray:
        return np.asarray(self.origin) + self.h * (np.asarray(self.shape) - 1)


def lp_norm(f: np.ndarray, p: float, h: float) -> float:
    """Midpoint-rule L^p norm of a gridded (complex) scalar or 3-vector field.

    Vector fields carry the component axis last; the pointwise magnitude is
    the Euclidean norm of the complex components.
    """
    f = np.asarray(f)
    if f.ndim == 4:
        mag = np.sqrt(np.sum(np.abs(f) ** 2, axis=-1))
    else:
        mag = np.abs(f)
    return float((np.sum(mag**p) * h**3) ** (1.0 / p))


def grad(f: np.ndarray, h: float) -> np.ndarray:
    """Second-order centered gradient of a scalar grid field; axis -1 is d/dx_j."""
    return np.stack(np.gradient(f, h, edge_order=2), axis=-1)


def jac_h(F: np.ndarray, h: float) -> np.ndarray:
    """``D[..., i, j] = d_j F_i`` for a vector grid field."""
    return np.stack([grad(F[..., i], h) for i in range(3)], axis=-2)


def curl_h(F: np.ndarray, h: float) -> np.ndarray:
    D = jac_h(F, h)
    return np.stack(
        [D[..., 2, 1] - D[..., 1, 2], D[..., 0, 2] - D[..., 2, 0], D[..., 1, 0] - D[..., 0, 1]],
        axis=-1,
    )


def div_h(F: np.ndarray, h: float) -> np.ndarray:
    return sum(np.gradient(F[..., i], h, axis=i, edge_order=2) for i in range(3))


def _mv(M, v):
    return np.einsum("...ij,...j->...i", M, v)


def _vdot(a, b):
    return np.sum(a * b, axis=-1)


# -- packet geometry ----------------------------------------------------------


def _sphere_points(n: int = 1500) -> np.ndarray:
    k = np.arange(n) + 0.5
    z = 1 - 2 * k / n
    r = np.sqrt(1 - z * z)
    th = np.pi * (1 + 5**0.5) * k
    return np.column_stack([r * np.cos(th), r * np.sin(th), z])


def support_bounds(spec: FieldSpec, pk: PacketSpec, times: Sequence[float],
                   cfg: IntegratorConfig) -> tuple[np.ndarray, np.ndarray]:
    """Bounding box of the transported packet support over ``times``."""
    pts = np.asarray(pk.x0) + pk.delta * _sphere_points()
    lo, hi = np.full(3, np.inf), np.full(3, -np.inf)
    for t in times:
        moved = forward_flow(spec, pts, t, cfg, horizon=pk.T) if t != 0 else pts
        lo = np.minimum(lo, moved.min(axis=0))
        hi = np.maximum(hi, moved.max(axis=0))
    return lo, hi


def packet_grid(spec: FieldSpec, pk: PacketSpec, times: Sequence[float],
                cfg: IntegratorConfig) -> Grid3D:
    lo, hi = support_bounds(spec, pk, times, cfg)
    if spec.domain == "free":
        blo, bhi = np.asarray(spec.box[0]), np.asarray(spec.box[1])
        if np.any(lo < blo) or np.any(hi > bhi):
            bad = _first_escape(spec, pk, cfg, blo, bhi)
            raise PacketError(f"packet support leaves the sampling box at t={bad:.6g}")
    ext = hi - lo
    lo = lo - pk.pad * ext
    hi = hi + pk.pad * ext
    start = np.floor(lo / pk.h)
    stop = np.ceil(hi / pk.h)
    shape = tuple(int(n) for n in (stop - start + 1))
    return Grid3D(tuple(float(v) for v in start * pk.h), pk.h, shape)


def _first_escape(spec, pk, cfg, blo, bhi, n: int = 200) -> float:
    for t in np.linspace(0.0, pk.T, n + 1):
        lo, hi = support_bounds(spec, pk, [t], cfg)
        if np.any(lo < blo) or np.any(hi > bhi):
            return float(t)
    return float(pk.T)


def _ray_chunk(spec, pts, xi0, b0, t, cfg, horizon):
    y0 = np.zeros((len(pts), 15))
    y0[:, 0:3] = pts
    y0[:, XI] = xi0
    y0[:, B] = b0
    res = integrate_rays(spec, y0, [t], cfg, horizon=horizon)
    if res.failed.any():
        raise IntegrationError("packet ray aborted")
    return res.ys[-1][:, XI], res.ys[-1][:, B]


def packet_fields_at(spec: FieldSpec, pk: PacketSpec, t: float, x: np.ndarray,
                     cfg: IntegratorConfig | None = None, workers: int = 1) -> dict[str, np.ndarray]:
    """Phase, unnormalized bump, xi and b of the packet at arbitrary points.

    ``xi`` and ``b`` are only integrated where the bump is nonzero; elsewhere
    they are filled with ``xi0``-transported values of ``NaN``-free zeros.
    """
    cfg = cfg or IntegratorConfig()
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = inverse_flow(spec, x, t, cfg, horizon=pk.T) if t != 0 else x.copy()
    S = y @ np.asarray(pk.xi0)
    r = np.linalg.norm(y - np.asarray(pk.x0), axis=1) / pk.delta
    bump = bump_profile(r)
    xi = np.zeros_like(x)
    b = np.zeros_like(x)
    sup = np.nonzero(bump > 0)[0]
    if t == 0:
        xi[:] = pk.xi0
        b[:] = pk.b0
    elif sup.size:
        pts = y[sup]
        bounds = chunk_bounds(len(sup), RAY_CHUNK)
        parts = run_chunks(
            _ray_chunk,
            [(spec, pts[a:c], np.asarray(pk.xi0), np.asarray(pk.b0), t, cfg, pk.T)
             for a, c in bounds],
            workers,
        )
        xi[sup] = np.concatenate([p[0] for p in parts])
        b[sup] = np.concatenate([p[1] for p in parts])
    return {"pullback": y, "S": S, "bump": bump, "xi": xi, "b": b}


@dataclass
class BaseFrame:
    """Epsilon-independent packet geometry on a grid at one time."""

    t: float
    grid: Grid3D
    S: np.ndarray
    bump: np.ndarray
    xi: np.ndarray
    b: np.ndarray
    u: np.ndarray
    J: np.ndarray

    @property
    def support(self) -> np.ndarray:
        return self.bump > 0


def base_frame(spec: FieldSpec, pk: PacketSpec, grid: Grid3D, t: float,
               cfg: IntegratorConfig, workers: int = 1) -> BaseFrame:
    nodes = grid.nodes()
    f = packet_fields_at(spec, pk, t, nodes, cfg, workers)
    sh = grid.shape
    u = eval_velocity(spec, t, nodes).reshape(*sh, 3)
    J = eval_jacobian(spec, t, nodes).reshape(*sh, 3, 3)
    xi = f["xi"].reshape(*sh, 3)
    # off-support xi only enters through zero amplitudes; keep it finite
    xi[f["bump"].reshape(sh) == 0] = pk.xi0
    return BaseFrame(
        t=float(t),
        grid=grid,
        S=f["S"].reshape(sh),
        bump=f["bump"].reshape(sh),
        xi=xi,
        b=f["b"].reshape(*sh, 3),
        u=u,
        J=J,
    )


@dataclass
class PacketFrame:
    """Packet fields at one time for one epsilon.

    ``A_env``, ``v_env`` and ``V_env`` are envelopes; the physical complex
    fields are ``env * exp(iS/eps)`` (properties ``A``, ``v``, ``V``).
    """

    t: float
    eps: float
    delta: float
    grid: Grid3D
    S: np.ndarray
    phi: np.ndarray
    xi_field: np.ndarray
    b_field: np.ndarray
    A_env: np.ndarray
    v_env: np.ndarray
    V_env: np.ndarray
    phase_resolved: bool

    @property
    def phase(self) -> np.ndarray:
        return np.exp(1j * self.S / self.eps)[..., None]

    @property
    def A(self) -> np.ndarray:
        return self.A_env * self.phase

    @property
    def v(self) -> np.ndarray:
        return self.v_env * self.phase

    @property
    def V(self) -> np.ndarray:
        return self.V_env * self.phase

    def support(self) -> np.ndarray:
        return self.phi > 0

    def div_v(self) -> np.ndarray:
        """Discrete divergence of ``v``."""
        h = self.grid.h
        if self.phase_resolved:
            return div_h(self.v, h)
        w = self.v_env
        return (1j / self.eps * _vdot(self.xi_field, w) + div_h(w, h)) * self.phase[..., 0]

    def header(self) -> dict[str, Any]:
        return {
            "origin": list(self.grid.origin),
            "spacing": self.grid.h,
            "dims": list(self.grid.shape),
            "t": self.t,
            "eps": self.eps,
            "delta": self.delta,
            "phase_resolved": self.phase_resolved,
        }


def assemble(base: BaseFrame, pk: PacketSpec, eps: float, p: float | None = None) -> PacketFrame:
    p = pk.p if p is None else p
    h = base.grid.h
    phi = base.bump * bump_scale(pk.delta, p)
    xi, b = base.xi, base.b
    a = np.cross(xi, b) / _vdot(xi, xi)[..., None] * phi[..., None]
    V_env = 1j * phi[..., None] * b
    if pk.phase == "grid":
        ph = np.exp(1j * base.S / eps)[..., None]
        v = curl_h(eps * a * ph, h)
        v_env = v / ph
    else:
        v_env = 1j * np.cross(xi, a) + eps * curl_h(a, h)
    return PacketFrame(
        t=base.t,
        eps=eps,
        delta=pk.delta,
        grid=base.grid,
        S=base.S,
        phi=phi,
        xi_field=xi,
        b_field=b,
        A_env=(eps * a).astype(complex),
        v_env=v_env,
        V_env=V_env,
        phase_resolved=pk.phase == "grid",
    )


def build_packet(spec: FieldSpec, pk: PacketSpec, t: float, cfg: IntegratorConfig | None = None,
                 eps: float | None = None, grid: Grid3D | None = None,
                 workers: int = 1) -> PacketFrame:
    """Packet frame at time ``t`` (default epsilon: the smallest in ``pk``)."""
    cfg = cfg or IntegratorConfig()
    if not -pk.dt <= t <= pk.T + pk.dt:
        raise PacketError(f"t={t} outside [0, T]")
    if grid is None:
        grid = packet_grid(spec, pk, [t], cfg)
    base = base_frame(spec, pk, grid, t, cfg, workers)
    return assemble(base, pk, pk.epsilons[-1] if eps is None else eps)


# -- residual -----------------------------------------------------------------


@dataclass
class ResidualReport:
    eps: float
    p: float
    times: list[float]
    norms: list[float]
    one_sided: bool
    phase_defect: list[float] = field(default_factory=list)

    @property
    def max_norm(self) -> float:
        return max(self.norms)

    def to_dict(self) -> dict[str, Any]:
        return {
            "eps": self.eps,
            "p": self.p,
            "times": self.times,
            "residual_norms": self.norms,
            "max_residual": self.max_norm,
            "one_sided_stencils": self.one_sided,
            "phase_transport_defect": self.phase_defect,
        }


def _pressure_env(fr: PacketFrame, J: np.ndarray) -> np.ndarray:
    """Envelope of ``q = -2 i eps xi^T J V / |xi|^2``."""
    xi = fr.xi_field
    return -2j * fr.eps * _vdot(xi, _mv(J, fr.V_env)) / _vdot(xi, xi)


def residual_field(frames: tuple[PacketFrame, PacketFrame, PacketFrame], base: BaseFrame,
                   dt: float) -> np.ndarray:
    """``d_t v + (u.grad) v + (v.grad) u + grad q`` at the middle frame.

    Returned as an envelope (the physical residual is this times the phase),
    which has the same pointwise modulus.
    """
    prev, mid, nxt = frames
    h = mid.grid.h
    u, J = base.u, base.J
    if mid.phase_resolved:
        vt = (nxt.v - prev.v) / (2 * dt)
        adv = np.einsum("...j,...ij->...i", u, jac_h(mid.v, h))
        q = _pressure_env(mid, J) * mid.phase[..., 0]
        R = vt + adv + _mv(J, mid.v) + grad(q, h)
        return R / mid.phase
    w = mid.v_env
    wt = (nxt.v_env - prev.v_env) / (2 * dt)
    adv = np.einsum("...j,...ij->...i", u, jac_h(w, h))
    Q = _pressure_env(mid, J)
    gq = 1j / mid.eps * mid.xi_field * Q[..., None] + grad(Q, h)
    return wt + adv + _mv(J, w) + gq


def _touches_edge(mask: np.ndarray) -> bool:
    return bool(
        mask[0].any() or mask[-1].any() or mask[:, 0].any() or mask[:, -1].any()
        or mask[:, :, 0].any() or mask[:, :, -1].any()
    )


class PacketRun:
    """Caches epsilon-independent frame triples ``(t - dt, t, t + dt)`` per sample time."""

    def __init__(self, spec: FieldSpec, pk: PacketSpec, cfg: IntegratorConfig | None = None,
                 workers: int = 1):
        self.spec, self.pk = spec, pk
        self.cfg = cfg or IntegratorConfig()
        self.workers = workers
        self._cache: dict[float, tuple[BaseFrame, BaseFrame, BaseFrame]] = {}

    def triple(self, t: float) -> tuple[BaseFrame, BaseFrame, BaseFrame]:
        if t not in self._cache:
            dt = self.pk.dt
            ts = (t - dt, t, t + dt)
            grid = packet_grid(self.spec, self.pk, ts, self.cfg)
            log.info("packet frames at t=%.4g on grid %s", t, grid.shape)
            self._cache[t] = tuple(
                base_frame(self.spec, self.pk, grid, s, self.cfg, self.workers) for s in ts
            )
        return self._cache[t]

    def residual(self, eps: float, p: float | None = None) -> ResidualReport:
        p = self.pk.p if p is None else p
        norms, defects, one_sided = [], [], False
        for t in self.pk.sample_times():
            bases = self.triple(float(t))
            frames = tuple(assemble(b, self.pk, eps, p) for b in bases)
            R = residual_field(frames, bases[1], self.pk.dt)
            norms.append(lp_norm(R, p, bases[1].grid.h))
            one_sided |= _touches_edge(bases[1].support)
            defects.append(self.phase_defect(bases))
        return ResidualReport(eps, p, self.pk.sample_times().tolist(), norms, one_sided, defects)

    def phase_defect(self, bases) -> float:
        """Max of ``|d_t S + u . grad S|`` on the support, by centered differences."""
        prev, mid, nxt = bases
        h = mid.grid.h
        St = (nxt.S - prev.S) / (2 * self.pk.dt)
        res = St + _vdot(mid.u, grad(mid.S, h))
        sup = mid.support
        return float(np.max(np.abs(res[sup]))) if sup.any() else 0.0

    def final_frame(self, eps: float, p: float | None = None) -> PacketFrame:
        return assemble(self.triple(float(self.pk.T))[1], self.pk, eps, p)


def linearized_residual(spec: FieldSpec, pk: PacketSpec, eps: float,
                        cfg: IntegratorConfig | None = None, workers: int = 1) -> ResidualReport:
    """L^p norms of the linearized-Euler residual of the packet at the sample times."""
    return PacketRun(spec, pk, cfg, workers).residual(eps)


@dataclass
class ScalingReport:
    p: float
    epsilons: list[float]
    residuals: list[ResidualReport]
    slope: float
    fit_residual: float
    C_fit: float
    norm_ratio: list[float]
    corrector_ratio: list[float]
    amplitude_norm: float
    gamma_lower: float
    under_resolved: bool
    anchoring: str = "bump anchored at t=0 and transported forward"

    @property
    def max_residuals(self) -> list[float]:
        return [r.max_norm for r in self.residuals]

    def to_dict(self) -> dict[str, Any]:
        return {
            "p": self.p,
            "epsilons": self.epsilons,
            "max_residuals": self.max_residuals,
            "residuals": [r.to_dict() for r in self.residuals],
            "slope": self.slope,
            "fit_residual": self.fit_residual,
            "C_fit": self.C_fit,
            "norm_ratio": self.norm_ratio,
            "corrector_ratio": self.corrector_ratio,
            "amplitude_norm_T": self.amplitude_norm,
            "gamma_lower": self.gamma_lower,
            "under_resolved": self.under_resolved,
            "anchoring": self.anchoring,
        }

    def csv_rows(self) -> list[tuple[float, float, float]]:
        return list(zip(self.epsilons, self.max_residuals, self.norm_ratio))


def sweep_from_run(run: PacketRun, p: float) -> ScalingReport:
    pk = run.pk
    if len(pk.epsilons) < 3:
        raise PacketError("an epsilon sweep needs at least 3 epsilons")
    reps = [run.residual(e, p) for e in pk.epsilons]
    eps = np.array(pk.epsilons)
    R = np.array([r.max_norm for r in reps])
    slope, icpt, fres = fit_log_slope(np.log(eps), R)
    C = float(np.exp(np.mean(np.log(R) - np.log(eps))))
    ratios, corr = [], []
    amp = None
    for e in pk.epsilons:
        fr = run.final_frame(e, p)
        if amp is None:
            amp = lp_norm(fr.phi[..., None] * fr.b_field, p, fr.grid.h)
        ratios.append(lp_norm(fr.v_env, p, fr.grid.h) / amp)
        # curl A = -V + eps exp(iS/eps) r
        corr.append(lp_norm(fr.v_env + fr.V_env, p, fr.grid.h) / e)
    under = bool(np.any(np.diff(R) >= 0))
    gamma_lower = float(max(amp - C * e for e in pk.epsilons))
    return ScalingReport(
        p=p,
        epsilons=list(pk.epsilons),
        residuals=reps,
        slope=slope,
        fit_residual=fres,
        C_fit=C,
        norm_ratio=ratios,
        corrector_ratio=corr,
        amplitude_norm=float(amp),
        gamma_lower=gamma_lower,
        under_resolved=under,
    )


def epsilon_sweep(spec: FieldSpec, pk: PacketSpec, cfg: IntegratorConfig | None = None,
                  workers: int = 1) -> ScalingReport:
    """Residual scaling in epsilon, norm ratios and the headline lower bound."""
    return sweep_from_run(PacketRun(spec, pk, cfg, workers), pk.p)


def epsilon_sweeps(spec: FieldSpec, pk: PacketSpec, ps: Sequence[float],
                   cfg: IntegratorConfig | None = None, workers: int = 1) -> list[ScalingReport]:
    """Sweeps for several exponents sharing one set of frames."""
    run = PacketRun(spec, pk, cfg, workers)
    return [sweep_from_run(run, p) for p in ps]


def write_frame(frame: PacketFrame, fh: IO[str]) -> None:
    """Text export: one JSON header line, then one record per support node.

    Record columns: ``x y z S phi xi1 xi2 xi3 b1 b2 b3`` followed by real and
    imaginary parts of ``v1 v2 v3``.
    """
    fh.write(json.dumps(frame.header(), sort_keys=True) + "\n")
    sup = frame.support().reshape(-1)
    nodes = frame.grid.nodes()[sup]
    v = frame.v.reshape(-1, 3)[sup]
    cols = [
        nodes,
        frame.S.reshape(-1)[sup][:, None],
        frame.phi.reshape(-1)[sup][:, None],
        frame.xi_field.reshape(-1, 3)[sup],
        frame.b_field.reshape(-1, 3)[sup],
        v.real,
        v.imag,
    ]
    for row in np.hstack(cols):
        fh.write(" ".join(repr(float(c)) for c in row) + "\n")


def write_scaling_csv(report: ScalingReport, fh: IO[str]) -> None:
    w = csv.writer(fh)
    w.writerow(["eps", "residual", "norm_ratio"])
    for row in report.csv_rows():
        w.writerow([repr(float(c)) for c in row])
