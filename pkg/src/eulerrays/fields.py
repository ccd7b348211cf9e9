"""Analytic catalog of divergence-free velocity fields.

Every evaluator is vectorized: ``t`` may be a scalar or an array of shape
``(N,)`` and ``x`` a point ``(3,)`` or a batch ``(N, 3)``.  Results follow the
batch shape of ``x``.  Jacobians use the convention ``jac[..., i, j] = d_j u_i``.

Catalog formulas::

    rotation   u = (-x2, x1, 0)
    strain     u = (l1 x1, l2 x2, l3 x3),         l1 + l2 + l3 = 0
    shear      u = (a sin x2, 0, 0)
    abc        u = (A sin x3 + C cos x2, B sin x1 + A cos x3, C sin x2 + B cos x1)
    trig_poly  u = sum_k  u_k exp(i (k.x - f_k t))   (conjugate-paired modes)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

KINDS = ("rotation", "strain", "shear", "abc", "trig_poly")
STEADY_KINDS = frozenset({"rotation", "strain", "shear", "abc"})
TWO_PI = 2.0 * np.pi

# name -> (defaults, default domain, steady_euler available)
CATALOG: dict[str, tuple[dict[str, float], str, bool]] = {
    "rotation": ({}, "free", True),
    "strain": ({"l1": -1.0, "l2": 0.0, "l3": 1.0}, "free", True),
    "shear": ({"a": 1.0}, "torus", True),
    "abc": ({"A": 1.0, "B": 1.0, "C": 1.0}, "torus", True),
    "trig_poly": ({}, "torus", False),
}

DEFAULT_BOX = ((-1.0, -1.0, -1.0), (1.0, 1.0, 1.0))


class FieldError(ValueError):
    """Invalid field specification."""


@dataclass(frozen=True)
class Mode:
    """One Fourier mode ``amp * exp(i (k.x - freq t))`` of a trig_poly field."""

    k: tuple[int, int, int]
    amp: tuple[complex, complex, complex]
    freq: float = 0.0


@dataclass(frozen=True)
class FieldSpec:
    kind: str
    params: Mapping[str, float] = field(default_factory=dict)
    modes: tuple[Mode, ...] = ()
    domain: str = ""
    box: tuple[tuple[float, float, float], tuple[float, float, float]] = DEFAULT_BOX
    steady_euler: bool = False

    def __post_init__(self) -> None:
        if self.kind not in CATALOG:
            raise FieldError(f"unknown field kind {self.kind!r}")
        defaults, default_domain, _ = CATALOG[self.kind]
        unknown = set(self.params) - set(defaults)
        if unknown:
            raise FieldError(f"unknown parameters for {self.kind}: {sorted(unknown)}")
        merged = {**defaults, **{k: float(v) for k, v in self.params.items()}}
        object.__setattr__(self, "params", merged)
        if not self.domain:
            object.__setattr__(self, "domain", default_domain)
        if self.domain not in ("torus", "free"):
            raise FieldError(f"unknown domain {self.domain!r}")
        lo, hi = (tuple(float(c) for c in corner) for corner in self.box)
        if any(h <= l for l, h in zip(lo, hi)):
            raise FieldError("sampling box must be nondegenerate")
        object.__setattr__(self, "box", (lo, hi))
        if self.steady_euler and self.kind not in STEADY_KINDS:
            raise FieldError(f"steady_euler cannot be set for kind {self.kind!r}")
        if self.kind == "strain":
            total = merged["l1"] + merged["l2"] + merged["l3"]
            if abs(total) > 1e-12:
                raise FieldError("strain eigenvalues must sum to zero")
        if self.kind == "trig_poly":
            object.__setattr__(self, "modes", _validate_modes(self.modes))
        elif self.modes:
            raise FieldError(f"modes are only allowed for trig_poly, not {self.kind}")

    @property
    def is_steady(self) -> bool:
        if self.kind != "trig_poly":
            return True
        return all(m.freq == 0.0 for m in self.modes)

    def sampling_box(self) -> tuple[np.ndarray, np.ndarray]:
        """Region over which seeds and sup-norms are sampled."""
        if self.domain == "torus":
            return np.zeros(3), np.full(3, TWO_PI)
        return np.asarray(self.box[0]), np.asarray(self.box[1])

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "kind": self.kind,
            "params": dict(self.params),
            "domain": self.domain,
            "steady_euler": self.steady_euler,
        }
        if self.domain == "free":
            out["box"] = [list(self.box[0]), list(self.box[1])]
        if self.modes:
            out["modes"] = [
                {
                    "k": list(m.k),
                    "amp": [[c.real, c.imag] for c in m.amp],
                    "freq": m.freq,
                }
                for m in self.modes
            ]
        return out


def _validate_modes(modes: Sequence[Mode]) -> tuple[Mode, ...]:
    clean = []
    for m in modes:
        k = tuple(int(c) for c in m.k)
        amp = tuple(complex(c) for c in m.amp)
        if len(k) != 3 or len(amp) != 3:
            raise FieldError("trig_poly modes need a 3-component k and amplitude")
        clean.append(Mode(k, amp, float(m.freq)))
    table = {m.k: m for m in clean}
    if len(table) != len(clean):
        raise FieldError("duplicate wavevector in trig_poly modes")
    for m in clean:
        kdotu = sum(kc * ac for kc, ac in zip(m.k, m.amp))
        scale = max(1.0, np.linalg.norm(m.k) * np.linalg.norm(m.amp))
        if abs(kdotu) > 1e-12 * scale:
            raise FieldError(f"mode k={m.k} is not divergence-free (k.u_k != 0)")
        partner = table.get(tuple(-c for c in m.k))
        if partner is None:
            raise FieldError(f"mode k={m.k} has no conjugate partner -k")
        if any(abs(a - b.conjugate()) > 1e-12 for a, b in zip(partner.amp, m.amp)):
            raise FieldError(f"mode -k of k={m.k} must carry the conjugate amplitude")
        if partner.freq != -m.freq:
            raise FieldError(f"mode -k of k={m.k} must carry the negated frequency")
    return tuple(sorted(clean, key=lambda m: m.k))


def random_trig_poly(
    rng_seed: int,
    n_pairs: int = 4,
    kmax: int = 2,
    amplitude: float = 1.0,
    time_dependent: bool = True,
) -> FieldSpec:
    """Random real divergence-free trigonometric polynomial on the torus."""
    rng = np.random.default_rng(rng_seed)
    chosen: dict[tuple[int, int, int], Mode] = {}
    while len(chosen) < 2 * n_pairs:
        k = tuple(int(c) for c in rng.integers(-kmax, kmax + 1, size=3))
        if k == (0, 0, 0) or k in chosen:
            continue
        kv = np.array(k, dtype=float)
        raw = rng.normal(size=3) + 1j * rng.normal(size=3)
        raw -= kv * (kv @ raw) / (kv @ kv)
        raw *= amplitude / (np.linalg.norm(raw) * np.sqrt(2 * n_pairs))
        freq = float(rng.normal()) if time_dependent else 0.0
        mk = tuple(-c for c in k)
        chosen[k] = Mode(k, tuple(complex(c) for c in raw), freq)
        chosen[mk] = Mode(mk, tuple(complex(c) for c in raw.conj()), -freq)
    return FieldSpec("trig_poly", modes=tuple(chosen.values()))


# -- evaluation ---------------------------------------------------------------


def _prep(t, x):
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    xb = np.atleast_2d(x)
    tb = np.broadcast_to(np.asarray(t, dtype=float), xb.shape[:1])
    return tb, xb, single


def _finish(arr, single):
    return arr[0] if single else arr


def _trig_terms(spec: FieldSpec, t, x):
    """Yield (k, amp, freq, phase factor) for each mode at the batch points."""
    for m in spec.modes:
        arg = m.k[0] * x[:, 0] + m.k[1] * x[:, 1] + m.k[2] * x[:, 2] - m.freq * t
        yield np.array(m.k, dtype=float), np.array(m.amp), m.freq, np.exp(1j * arg)


def eval_velocity(spec: FieldSpec, t, x) -> np.ndarray:
    tb, xb, single = _prep(t, x)
    x1, x2, x3 = xb[:, 0], xb[:, 1], xb[:, 2]
    p = spec.params
    u = np.zeros_like(xb)
    if spec.kind == "rotation":
        u[:, 0] = -x2
        u[:, 1] = x1
    elif spec.kind == "strain":
        u[:, 0] = p["l1"] * x1
        u[:, 1] = p["l2"] * x2
        u[:, 2] = p["l3"] * x3
    elif spec.kind == "shear":
        u[:, 0] = p["a"] * np.sin(x2)
    elif spec.kind == "abc":
        A, B, C = p["A"], p["B"], p["C"]
        u[:, 0] = A * np.sin(x3) + C * np.cos(x2)
        u[:, 1] = B * np.sin(x1) + A * np.cos(x3)
        u[:, 2] = C * np.sin(x2) + B * np.cos(x1)
    else:
        acc = np.zeros(xb.shape, dtype=complex)
        for _, amp, _, e in _trig_terms(spec, tb, xb):
            for i in range(3):
                acc[:, i] += amp[i] * e
        u = acc.real.copy()
    return _finish(u, single)


def eval_jacobian(spec: FieldSpec, t, x) -> np.ndarray:
    tb, xb, single = _prep(t, x)
    x1, x2, x3 = xb[:, 0], xb[:, 1], xb[:, 2]
    p = spec.params
    J = np.zeros((xb.shape[0], 3, 3))
    if spec.kind == "rotation":
        J[:, 0, 1] = -1.0
        J[:, 1, 0] = 1.0
    elif spec.kind == "strain":
        J[:, 0, 0] = p["l1"]
        J[:, 1, 1] = p["l2"]
        J[:, 2, 2] = p["l3"]
    elif spec.kind == "shear":
        J[:, 0, 1] = p["a"] * np.cos(x2)
    elif spec.kind == "abc":
        A, B, C = p["A"], p["B"], p["C"]
        J[:, 0, 1] = -C * np.sin(x2)
        J[:, 0, 2] = A * np.cos(x3)
        J[:, 1, 0] = B * np.cos(x1)
        J[:, 1, 2] = -A * np.sin(x3)
        J[:, 2, 0] = -B * np.sin(x1)
        J[:, 2, 1] = C * np.cos(x2)
    else:
        acc = np.zeros(J.shape, dtype=complex)
        for k, amp, _, e in _trig_terms(spec, tb, xb):
            for i in range(3):
                for j in range(3):
                    if k[j] != 0.0:
                        acc[:, i, j] += 1j * k[j] * amp[i] * e
        J = acc.real.copy()
    return _finish(J, single)


def eval_hessian(spec: FieldSpec, t, x) -> np.ndarray:
    """Second derivatives ``H[..., i, j, k] = d_k d_j u_i``."""
    tb, xb, single = _prep(t, x)
    x1, x2, x3 = xb[:, 0], xb[:, 1], xb[:, 2]
    p = spec.params
    H = np.zeros((xb.shape[0], 3, 3, 3))
    if spec.kind == "shear":
        H[:, 0, 1, 1] = -p["a"] * np.sin(x2)
    elif spec.kind == "abc":
        A, B, C = p["A"], p["B"], p["C"]
        H[:, 0, 1, 1] = -C * np.cos(x2)
        H[:, 0, 2, 2] = -A * np.sin(x3)
        H[:, 1, 0, 0] = -B * np.sin(x1)
        H[:, 1, 2, 2] = -A * np.cos(x3)
        H[:, 2, 0, 0] = -B * np.cos(x1)
        H[:, 2, 1, 1] = -C * np.sin(x2)
    elif spec.kind == "trig_poly":
        acc = np.zeros(H.shape, dtype=complex)
        for k, amp, _, e in _trig_terms(spec, tb, xb):
            kk = -np.outer(k, k)
            for i in range(3):
                acc[:, i] += amp[i] * kk[None, :, :] * e[:, None, None]
        H = acc.real.copy()
    return _finish(H, single)


def eval_time_jacobian(spec: FieldSpec, t, x) -> np.ndarray:
    """``d_t`` of the Jacobian; zero for steady kinds."""
    tb, xb, single = _prep(t, x)
    out = np.zeros((xb.shape[0], 3, 3))
    if spec.kind == "trig_poly" and not spec.is_steady:
        acc = np.zeros(out.shape, dtype=complex)
        for k, amp, f, e in _trig_terms(spec, tb, xb):
            if f == 0.0:
                continue
            acc += (f * np.outer(amp, k))[None, :, :] * e[:, None, None]
        out = acc.real.copy()
    return _finish(out, single)


def axial(M: np.ndarray) -> np.ndarray:
    """Curl read off a gradient matrix ``M[..., i, j] = d_j g_i``."""
    return np.stack(
        [
            M[..., 2, 1] - M[..., 1, 2],
            M[..., 0, 2] - M[..., 2, 0],
            M[..., 1, 0] - M[..., 0, 1],
        ],
        axis=-1,
    )


def eval_vorticity(spec: FieldSpec, t, x) -> np.ndarray:
    tb, xb, single = _prep(t, x)
    x1, x2, x3 = xb[:, 0], xb[:, 1], xb[:, 2]
    p = spec.params
    w = np.zeros_like(xb)
    if spec.kind == "rotation":
        w[:, 2] = 2.0
    elif spec.kind == "strain":
        pass
    elif spec.kind == "shear":
        w[:, 2] = -p["a"] * np.cos(x2)
    elif spec.kind == "abc":
        # Beltrami: curl u = u
        return eval_velocity(spec, t, x)
    else:
        acc = np.zeros(xb.shape, dtype=complex)
        for k, amp, _, e in _trig_terms(spec, tb, xb):
            c = np.cross(k, amp)
            for i in range(3):
                acc[:, i] += 1j * c[i] * e
        w = acc.real.copy()
    return _finish(w, single)


def eval_divergence(spec: FieldSpec, t, x) -> np.ndarray:
    J = eval_jacobian(spec, t, x)
    return J[..., 0, 0] + J[..., 1, 1] + J[..., 2, 2]


def sample(spec: FieldSpec, t, x) -> "FieldSample":
    J = eval_jacobian(spec, t, x)
    return FieldSample(
        u=eval_velocity(spec, t, x),
        jac=J,
        vort=eval_vorticity(spec, t, x),
        div=J[..., 0, 0] + J[..., 1, 1] + J[..., 2, 2],
    )


@dataclass(frozen=True)
class FieldSample:
    u: np.ndarray
    jac: np.ndarray
    vort: np.ndarray
    div: np.ndarray


# -- verification -------------------------------------------------------------


@dataclass(frozen=True)
class FieldReport:
    kind: str
    n_samples: int
    max_div: float
    max_stretch_identity: float
    max_steady_defect: float | None
    tol: float = 1e-8

    @property
    def passed(self) -> bool:
        vals = [self.max_div, self.max_stretch_identity]
        if self.max_steady_defect is not None:
            vals.append(self.max_steady_defect)
        return all(v <= self.tol for v in vals)

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "n_samples": self.n_samples,
            "max_div": self.max_div,
            "max_stretch_identity": self.max_stretch_identity,
            "max_steady_defect": self.max_steady_defect,
            "tol": self.tol,
            "passed": self.passed,
        }


def sample_points(spec: FieldSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    lo, hi = spec.sampling_box()
    return lo + (hi - lo) * rng.random((n, 3))


def steady_defect(spec: FieldSpec, t, x) -> np.ndarray:
    """``curl(d_t u + (u.grad) u)``; zero iff a pressure balances the flow."""
    u = eval_velocity(spec, t, x)
    J = eval_jacobian(spec, t, x)
    H = eval_hessian(spec, t, x)
    # d_k [(u.grad)u]_i = sum_j H[i,j,k] u_j + sum_j J[i,j] J[j,k]
    D = np.einsum("...ijk,...j->...ik", H, u) + np.einsum("...ij,...jk->...ik", J, J)
    D = D + eval_time_jacobian(spec, t, x)
    return axial(D)


def verify_field(
    spec: FieldSpec,
    n_samples: int = 1000,
    rng_seed: int = 0,
    check_steady: bool | None = None,
    tol: float = 1e-8,
) -> FieldReport:
    """Sample the structural identities of a field.

    ``check_steady`` defaults to ``spec.steady_euler``; passing ``True`` forces
    the steady-Euler test on any field.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(rng_seed)
    x = sample_points(spec, n_samples, rng)
    t = TWO_PI * rng.random(n_samples)
    s = sample(spec, t, x)
    skew = s.jac - np.swapaxes(s.jac, -1, -2)
    ident = np.einsum("nij,nj->ni", skew, s.vort)
    if check_steady is None:
        check_steady = spec.steady_euler
    steady = None
    if check_steady:
        steady = float(np.max(np.linalg.norm(steady_defect(spec, t, x), axis=-1)))
    return FieldReport(
        kind=spec.kind,
        n_samples=n_samples,
        max_div=float(np.max(np.abs(s.div))),
        max_stretch_identity=float(np.max(np.linalg.norm(ident, axis=-1))),
        max_steady_defect=steady,
        tol=tol,
    )


def field_from_dict(data: Mapping[str, Any]) -> FieldSpec:
    """Build a FieldSpec from its tagged-record form (see ``FieldSpec.to_dict``)."""
    modes = tuple(
        Mode(
            tuple(m["k"]),
            tuple(complex(c[0], c[1]) if isinstance(c, (list, tuple)) else complex(c) for c in m["amp"]),
            float(m.get("freq", 0.0)),
        )
        for m in data.get("modes", ())
    )
    kwargs: dict[str, Any] = {}
    if "box" in data:
        kwargs["box"] = (tuple(data["box"][0]), tuple(data["box"][1]))
    return FieldSpec(
        kind=data["kind"],
        params=dict(data.get("params", {})),
        modes=modes,
        domain=data.get("domain", ""),
        steady_euler=bool(data.get("steady_euler", False)),
        **kwargs,
    )
