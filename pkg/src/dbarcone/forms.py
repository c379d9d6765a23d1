"""(0,1)-forms lambda = sum_k f_k dzbar_k with compact support.

Coefficient functions are vectorized: they accept an (N, n) complex array
of points and return an (N,) complex array.  The support cutoff |z| < R is
enforced by the form itself, so coefficients may be defined ambiently.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .variety import SparsePolynomial

CoeffFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ZeroOneForm:
    n: int
    coefficients: tuple[CoeffFn, ...]
    support_radius: float
    sup_bound: float
    dbar_closed: bool

    def __post_init__(self):
        if len(self.coefficients) != self.n:
            raise ValueError("need one coefficient function per coordinate")
        if self.support_radius <= 0:
            raise ValueError("support_radius must be positive")

    def coeff_matrix(self, pts) -> np.ndarray:
        """All coefficients at a batch of points: (N, n) -> (N, n), with the
        support cutoff applied."""
        P = np.asarray(pts, dtype=np.complex128).reshape(-1, self.n)
        inside = np.linalg.norm(P, axis=1) < self.support_radius
        out = np.zeros_like(P)
        if inside.any():
            Q = P[inside]
            for k, f in enumerate(self.coefficients):
                out[inside, k] = np.asarray(f(Q), dtype=np.complex128)
        return out

    def coeff(self, k: int, pts) -> np.ndarray:
        return self.coeff_matrix(pts)[:, k]


def _smoothstep(t: np.ndarray, a: float, b: float) -> np.ndarray:
    # 7th-order variant: C^3 across the transition, which keeps high-order
    # panel quadrature of the solver kernels cheap
    u = np.clip((t - a) / (b - a), 0.0, 1.0)
    return u ** 4 * (35.0 + u * (-84.0 + u * (70.0 - 20.0 * u)))


def _smoothstep_deriv(t: np.ndarray, a: float, b: float) -> np.ndarray:
    u = np.clip((t - a) / (b - a), 0.0, 1.0)
    return 140.0 * u ** 3 * (1.0 - u) ** 3 / (b - a)


def radial_cutoff(pts: np.ndarray, r0: float, R: float) -> np.ndarray:
    """Smooth plateau: 1 inside |z| <= r0, 0 outside |z| >= R."""
    t = np.sum(np.abs(pts) ** 2, axis=-1)
    return 1.0 - _smoothstep(t, r0 * r0, R * R)


def radial_cutoff_deriv(pts: np.ndarray, r0: float, R: float) -> np.ndarray:
    """d/dt of the plateau as a function of t = |z|^2."""
    t = np.sum(np.abs(pts) ** 2, axis=-1)
    return -_smoothstep_deriv(t, r0 * r0, R * R)


def estimate_sup_bound(
    coefficients: Sequence[CoeffFn], n: int, radius: float, samples: int = 4096
) -> float:
    """Deterministic upper proxy for sup |lambda|: max of the coefficient
    vector 2-norm over a seeded ambient sample of the support ball."""
    rng = np.random.default_rng(0x5EED)
    dirs = rng.standard_normal((samples, n)) + 1j * rng.standard_normal((samples, n))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    radii = radius * (np.arange(samples) + 0.5) / samples
    pts = radii[:, None] * dirs
    vals = np.stack([np.asarray(f(pts), dtype=np.complex128) for f in coefficients], axis=1)
    return float(np.max(np.linalg.norm(vals, axis=1)))


def zero_form(n: int, support_radius: float = 1.0) -> ZeroOneForm:
    coeffs = tuple(
        (lambda P: np.zeros(P.shape[0], dtype=np.complex128)) for _ in range(n)
    )
    return ZeroOneForm(n, coeffs, support_radius, 0.0, True)


def bump_dbar_form(
    h: SparsePolynomial, r0: float, R: float
) -> ZeroOneForm:
    """Exactly dbar-closed test form: lambda = dbar(h * chi) with h a
    holomorphic polynomial and chi the C^1 radial plateau.

    Since h is holomorphic, lambda = h * chi'(|z|^2) * sum_k z_k dzbar_k.
    """
    if not (0 < r0 < R):
        raise ValueError("need 0 < r0 < R")
    n = h.n

    def make(k: int) -> CoeffFn:
        def f(P: np.ndarray) -> np.ndarray:
            return h.eval(P) * radial_cutoff_deriv(P, r0, R) * P[:, k]

        return f

    coeffs = tuple(make(k) for k in range(n))
    sup = estimate_sup_bound(coeffs, n, R)
    return ZeroOneForm(n, coeffs, R, sup, True)


def raw_bump_form(n: int, r0: float, R: float) -> ZeroOneForm:
    """Radial plateau in every coefficient; bounded and compactly supported
    but NOT dbar-closed.  Useful only for well-definedness checks."""
    if not (0 < r0 < R):
        raise ValueError("need 0 < r0 < R")

    def make() -> CoeffFn:
        def f(P: np.ndarray) -> np.ndarray:
            return radial_cutoff(P, r0, R).astype(np.complex128)

        return f

    coeffs = tuple(make() for _ in range(n))
    sup = estimate_sup_bound(coeffs, n, R)
    return ZeroOneForm(n, coeffs, R, sup, False)


def combine_forms(a: complex, fa: ZeroOneForm, b: complex, fb: ZeroOneForm) -> ZeroOneForm:
    """a * fa + b * fb, coefficientwise."""
    if fa.n != fb.n:
        raise ValueError("dimension mismatch")
    R = max(fa.support_radius, fb.support_radius)

    def make(k: int) -> CoeffFn:
        ca, cb = fa.coefficients[k], fb.coefficients[k]
        ra, rb = fa.support_radius, fb.support_radius

        def f(P: np.ndarray) -> np.ndarray:
            norms = np.linalg.norm(P, axis=1)
            va = np.where(norms < ra, np.asarray(ca(P), dtype=np.complex128), 0.0)
            vb = np.where(norms < rb, np.asarray(cb(P), dtype=np.complex128), 0.0)
            return a * va + b * vb

        return f

    coeffs = tuple(make(k) for k in range(fa.n))
    sup = abs(a) * fa.sup_bound + abs(b) * fb.sup_bound
    return ZeroOneForm(fa.n, coeffs, R, sup, fa.dbar_closed and fb.dbar_closed)


def scale_form(c: complex, form: ZeroOneForm) -> ZeroOneForm:
    def make(k: int) -> CoeffFn:
        ck = form.coefficients[k]

        def f(P: np.ndarray) -> np.ndarray:
            return c * np.asarray(ck(P), dtype=np.complex128)

        return f

    coeffs = tuple(make(k) for k in range(form.n))
    return ZeroOneForm(
        form.n, coeffs, form.support_radius, abs(c) * form.sup_bound, form.dbar_closed
    )
