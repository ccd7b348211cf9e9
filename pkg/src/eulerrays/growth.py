"""Lower estimates of the amplitude-growth functional and vorticity certificates.

``beta(T)`` is the supremum of ``|b_T|`` over unit seeds ``(x0, xi0, b0)``
with ``b0 . xi0 = 0``.  It is approximated from below by random multi-start
sampling followed by local perturbation rounds around the incumbent best seed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .fields import FieldSpec, eval_vorticity
from .flowcore import B, BT, XI, RaySeed, integrate_rays, invariant_series
from .integrate import IntegratorConfig
from .parallel import DEFAULT_CHUNK, chunk_bounds, run_chunks

log = logging.getLogger(__name__)

CERT_SLACK = 1e-6


class GrowthError(RuntimeError):
    pass


@dataclass(frozen=True)
class SamplingPlan:
    """How seeds are drawn and refined.

    Perturbation radius in refinement round ``r`` is
    ``refine_scale * refine_shrink**r`` (relative to the box size for
    positions, absolute for the unit directions).
    """

    n_seeds: int = 512
    rng_seed: int = 0
    refine_rounds: int = 3
    refine_scale: float = 0.5
    refine_shrink: float = 0.25
    refine_count: int = 64
    sample_box: tuple[tuple[float, ...], tuple[float, ...]] | None = None
    time_grid: int = 20
    canonical_positions: int = 4
    chunk: int = DEFAULT_CHUNK

    def __post_init__(self) -> None:
        if self.n_seeds < 1:
            raise ValueError("n_seeds must be >= 1")
        if not 0 < self.refine_scale <= 1:
            raise ValueError("refine_scale must lie in (0, 1]")
        if not 0 < self.refine_shrink < 1:
            raise ValueError("refine_shrink must lie in (0, 1)")
        if self.refine_rounds < 0 or self.refine_count < 1:
            raise ValueError("refine_rounds must be >= 0 and refine_count >= 1")
        if self.time_grid < 1:
            raise ValueError("time_grid must be >= 1")
        if self.sample_box is not None:
            lo, hi = self.sample_box
            if len(lo) != 3 or len(hi) != 3 or any(h <= l for l, h in zip(lo, hi)):
                raise ValueError("sample_box must be a nondegenerate 3D box")

    def box_for(self, spec: FieldSpec) -> tuple[np.ndarray, np.ndarray]:
        if self.sample_box is not None and spec.domain == "free":
            return np.asarray(self.sample_box[0], float), np.asarray(self.sample_box[1], float)
        return spec.sampling_box()


def _stream(rng_seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(rng_seed, spawn_key=key))


def _perp_basis(xi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic orthonormal basis of the plane orthogonal to unit ``xi``."""
    axis = np.zeros(3)
    axis[int(np.argmin(np.abs(xi)))] = 1.0
    e1 = np.cross(xi, axis)
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(xi, e1)


def _project(x0, xi, b, lo, hi, torus):
    xi = xi / np.linalg.norm(xi)
    b = b - np.dot(b, xi) * xi
    nb = np.linalg.norm(b)
    if nb < 1e-12:
        e1, _ = _perp_basis(xi)
        b = e1
    else:
        b = b / nb
    if torus:
        x0 = np.mod(x0, 2 * np.pi)
    else:
        x0 = np.clip(x0, lo, hi)
    return x0, xi, b


def draw_seed(rng_seed: int, i: int, lo: np.ndarray, hi: np.ndarray):
    rng = _stream(rng_seed, 0, i)
    x0 = lo + (hi - lo) * rng.random(3)
    xi = rng.normal(size=3)
    xi /= np.linalg.norm(xi)
    e1, e2 = _perp_basis(xi)
    theta = 2 * np.pi * rng.random()
    b = np.cos(theta) * e1 + np.sin(theta) * e2
    return x0, xi, b


def canonical_seeds(positions: np.ndarray):
    """Axis-aligned unit frames (xi0 = e_i, b0 = e_j, j != i) at each position."""
    out = []
    eye = np.eye(3)
    for x0 in positions:
        for i in range(3):
            for j in range(3):
                if i != j:
                    out.append((x0.copy(), eye[i].copy(), eye[j].copy()))
    return out


def _chunk_norms(spec, y0, times, cfg):
    res = integrate_rays(spec, y0, times, cfg)
    b = res.ys[:, :, B]
    norms = np.sqrt(b[..., 0] ** 2 + b[..., 1] ** 2 + b[..., 2] ** 2)
    ser = invariant_series(res.ys[-1])
    return norms, res.failed, ser["det"]


def _pack(spec, seeds):
    y0 = np.zeros((len(seeds), 15))
    for k, (x0, xi, b) in enumerate(seeds):
        y0[k, 0:3] = x0
        y0[k, XI] = xi
        y0[k, B] = b
        y0[k, BT] = np.cross(xi, b)
    y0[:, 12:15] = eval_vorticity(spec, 0.0, y0[:, 0:3])
    return y0


def evaluate_seeds(spec, seeds, times, cfg, chunk=DEFAULT_CHUNK, workers=1):
    """``|b_t|`` for every seed at every time: array ``(len(times), n)``."""
    y0 = _pack(spec, seeds)
    bounds = chunk_bounds(len(seeds), chunk)
    parts = run_chunks(_chunk_norms, [(spec, y0[a:b], times, cfg) for a, b in bounds], workers)
    norms = np.concatenate([p[0] for p in parts], axis=1)
    failed = np.concatenate([p[1] for p in parts])
    return norms, failed


@dataclass
class GrowthReport:
    T: float
    beta_estimate: float
    argmax_seed: RaySeed
    sup_series: list[tuple[float, float]]
    n_evaluated: int
    n_failed: int
    box: tuple[list[float], list[float]]
    history: list[float] = field(default_factory=list)
    label: str = "lower estimate"

    def to_dict(self) -> dict[str, Any]:
        return {
            "T": self.T,
            "beta_estimate": self.beta_estimate,
            "label": self.label,
            "argmax_seed": self.argmax_seed.to_dict(),
            "sup_series": [[t, s] for t, s in self.sup_series],
            "refinement_history": list(self.history),
            "n_evaluated": self.n_evaluated,
            "n_failed": self.n_failed,
            "sample_box": [list(self.box[0]), list(self.box[1])],
        }


def estimate_beta(
    spec: FieldSpec,
    T: float,
    plan: SamplingPlan | None = None,
    cfg: IntegratorConfig | None = None,
    workers: int = 1,
) -> GrowthReport:
    """Best ``|b_T|`` over sampled and refined admissible unit seeds."""
    if not T > 0:
        raise ValueError("T must be positive")
    plan = plan or SamplingPlan()
    cfg = cfg or IntegratorConfig()
    lo, hi = plan.box_for(spec)
    torus = spec.domain == "torus"
    times = np.linspace(0.0, T, plan.time_grid + 1)

    seeds = [draw_seed(plan.rng_seed, i, lo, hi) for i in range(plan.n_seeds)]
    ncanon = min(plan.canonical_positions, plan.n_seeds)
    seeds += canonical_seeds(np.array([s[0] for s in seeds[:ncanon]]))
    norms, failed = evaluate_seeds(spec, seeds, times, cfg, plan.chunk, workers)
    if failed.all():
        raise GrowthError("every seed aborted during integration")
    for i in np.nonzero(failed)[0]:
        log.warning("seed %d aborted; skipped", i)

    all_seeds = list(seeds)
    all_norms = [norms]
    all_failed = [failed]
    final = np.where(failed, -np.inf, norms[-1])
    best_i = int(np.argmax(final))
    best_val = float(final[best_i])
    best = seeds[best_i]
    history = [best_val]

    span = hi - lo
    for r in range(plan.refine_rounds):
        scale = plan.refine_scale * plan.refine_shrink**r
        cand = []
        for j in range(plan.refine_count):
            rng = _stream(plan.rng_seed, 1, r, j)
            x0 = best[0] + scale * span * rng.normal(size=3)
            xi = best[1] + scale * rng.normal(size=3)
            b = best[2] + scale * rng.normal(size=3)
            cand.append(_project(x0, xi, b, lo, hi, torus))
        n_r, f_r = evaluate_seeds(spec, cand, times, cfg, plan.chunk, workers)
        all_seeds += cand
        all_norms.append(n_r)
        all_failed.append(f_r)
        fin = np.where(f_r, -np.inf, n_r[-1])
        j = int(np.argmax(fin))
        if fin[j] > best_val:
            best_val, best = float(fin[j]), cand[j]
        history.append(best_val)

    norms = np.concatenate(all_norms, axis=1)
    failed = np.concatenate(all_failed)
    sup = np.max(np.where(failed[None, :], -np.inf, norms), axis=1)
    x0, xi, b = best
    argmax = RaySeed(tuple(x0), tuple(xi), tuple(b), btilde0=tuple(np.cross(xi, b)))
    return GrowthReport(
        T=float(T),
        beta_estimate=best_val,
        argmax_seed=argmax,
        sup_series=[(float(t), float(s)) for t, s in zip(times, sup)],
        n_evaluated=len(all_seeds),
        n_failed=int(failed.sum()),
        box=(lo.tolist(), hi.tolist()),
        history=history,
    )


@dataclass
class SlopeReport:
    slope: float
    intercept: float
    residual: float
    t_fit: list[float]
    log_sup: list[float]
    growth: GrowthReport

    def to_dict(self) -> dict[str, Any]:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "fit_residual": self.residual,
            "fit_window": [self.t_fit[0], self.t_fit[-1]],
            "growth": self.growth.to_dict(),
        }


def fit_log_slope(times: np.ndarray, values: np.ndarray) -> tuple[float, float, float]:
    """Least-squares line through ``(t, log v)``: slope, intercept, RMS residual."""
    y = np.log(values)
    A = np.column_stack([times, np.ones_like(times)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    return float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(resid**2)))


def lyapunov_exponent(
    spec: FieldSpec,
    T_max: float,
    plan: SamplingPlan | None = None,
    cfg: IntegratorConfig | None = None,
    workers: int = 1,
) -> SlopeReport:
    """Slope of ``log sup|b_t|`` over the second half of ``[0, T_max]``."""
    plan = plan or SamplingPlan()
    if plan.time_grid < 20:
        raise ValueError("lyapunov fit needs time_grid >= 20 (>= 10 samples in the window)")
    rep = estimate_beta(spec, T_max, plan, cfg, workers)
    t = np.array([p[0] for p in rep.sup_series])
    s = np.array([p[1] for p in rep.sup_series])
    win = t >= 0.5 * T_max
    slope, icpt, res = fit_log_slope(t[win], s[win])
    return SlopeReport(slope, icpt, res, t[win].tolist(), np.log(s[win]).tolist(), rep)


# -- vorticity certificate ----------------------------------------------------


def vorticity_sup(spec: FieldSpec, t: float, n: int = 64, box=None) -> float:
    """Max of ``|omega(t, x)|`` over an ``n^3`` grid of the sampling box."""
    lo, hi = box if box is not None else spec.sampling_box()
    axes = [
        np.linspace(lo[d], hi[d], n, endpoint=spec.domain != "torus") for d in range(3)
    ]
    X, Y = np.meshgrid(axes[0], axes[1], indexing="ij")
    plane = np.column_stack([X.ravel(), Y.ravel(), np.zeros(X.size)])
    best = 0.0
    for z in axes[2]:
        plane[:, 2] = z
        w = eval_vorticity(spec, t, plane)
        best = max(best, float(np.max(np.sqrt(np.sum(w * w, axis=1)))))
    return best


@dataclass
class Certificate:
    T: float
    L: float
    omega_sup_T: float
    omega_sup_0: float
    beta_estimate: float
    verdict: bool
    vorticity_free: bool
    theorem1_ratio: float
    theorem1_bound: float
    theorem1_ok: bool
    growth: GrowthReport | None

    @property
    def gamma_lower(self) -> float:
        return self.beta_estimate

    def to_dict(self) -> dict[str, Any]:
        return {
            "T": self.T,
            "L": self.L,
            "omega_sup_T": self.omega_sup_T,
            "omega_sup_0": self.omega_sup_0,
            "beta_estimate": self.beta_estimate,
            "beta_label": "lower estimate",
            "verdict": "pass" if self.verdict else "fail",
            "vorticity_free": self.vorticity_free,
            "gamma_lower": self.gamma_lower,
            "theorem1": {
                "ratio": self.theorem1_ratio,
                "bound_beta_squared": self.theorem1_bound,
                "consistent": self.theorem1_ok,
            },
            "note": (
                "beta is a sampled lower estimate; the inequality is meaningful because "
                "the vorticity side is evaluated exactly on catalog fields"
            ),
            "growth": self.growth.to_dict() if self.growth is not None else None,
        }


def certify_vorticity_bound(
    spec: FieldSpec,
    T: float,
    plan: SamplingPlan | None = None,
    cfg: IntegratorConfig | None = None,
    workers: int = 1,
    grid: int = 64,
) -> Certificate:
    """Check ``sqrt(sup|omega(T)| / sup|omega(0)|) <= beta(T)`` on a catalog field."""
    if not T > 0:
        raise ValueError("T must be positive")
    w0 = vorticity_sup(spec, 0.0, grid)
    wT = w0 if spec.is_steady else vorticity_sup(spec, T, grid)
    rep = estimate_beta(spec, T, plan, cfg, workers)
    beta = rep.beta_estimate
    if w0 == 0.0:
        return Certificate(T, 0.0, wT, w0, beta, True, True, 0.0, beta**2, True, rep)
    ratio = wT / w0
    L = float(np.sqrt(ratio))
    verdict = L <= beta * (1 + CERT_SLACK)
    ok = ratio <= beta**2 * (1 + CERT_SLACK) ** 2
    return Certificate(T, L, wT, w0, beta, verdict, False, ratio, beta**2, ok, rep)


def full_seeds(spec: FieldSpec, n: int, rng_seed: int = 0) -> list[RaySeed]:
    """``n`` random unit seeds with a second amplitude ``xi0 x b0``."""
    lo, hi = spec.sampling_box()
    out = []
    for i in range(n):
        x0, xi, b = draw_seed(rng_seed, i, lo, hi)
        out.append(RaySeed(x0, xi, b, btilde0=np.cross(xi, b)))
    return out
