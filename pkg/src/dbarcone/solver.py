"""Explicit integral-formula solution operators for the dbar-equation.

The core operator, for a weighted homogeneous variety with weights beta and
a bounded compactly supported form lambda = sum_k f_k dzbar_k, is

    g(z) = sum_k (beta_k / 2 pi i) *
           integral over C of f_k(w^beta * z) conj(w^{beta_k} z_k)
                              / (wbar (w - 1)) dw ^ dwbar.

Before quadrature the kernel is simplified algebraically:
conj(w^{beta_k} z_k) / wbar = conj(w)^{beta_k - 1} conj(z_k), which removes
the w = 0 singularity entirely; only w = 1 remains.  Everything downstream
shares the single orientation convention dw ^ dwbar = -2i dA from
`quadrature`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotACone, NotOnVariety, ZeroScaleWithWeight
from .forms import ZeroOneForm, estimate_sup_bound
from .quadrature import PlanarIntegrand, QuadratureParams, integrate_plane
from .variety import Variety, Weights, contains

_TWO_PI_I = 2j * math.pi


@dataclass(frozen=True)
class SolveResult:
    value: complex
    quadrature_error: float
    truncation_radius_used: float


def truncation_radius(weights: Weights, z: np.ndarray, support_radius: float) -> float:
    """Smallest W with sum_k W^(2 beta_k) |z_k|^2 >= support_radius^2.

    The kernel coefficients vanish for |w| > W because the form is supported
    in the ball of `support_radius`.  Monotone in W, so bisection suffices;
    closed form W = R/|z| for unit weights.  Returns 0 for z = 0.
    """
    z = np.asarray(z, dtype=np.complex128)
    nrm2 = float(np.sum(np.abs(z) ** 2))
    if nrm2 == 0.0:
        return 0.0
    if weights.is_unit:
        return support_radius / math.sqrt(nrm2) * (1.0 + 1e-9)
    b = 2.0 * weights.as_array().astype(np.float64)
    amp = np.abs(z) ** 2
    target = support_radius ** 2

    def total(W: float) -> float:
        return float(np.sum(W ** b * amp))

    hi = 1.0
    while total(hi) < target:
        hi *= 2.0
        if hi > 1e18:
            raise OverflowError("truncation radius search diverged")
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if total(mid) >= target:
            hi = mid
        else:
            lo = mid
    return hi * (1.0 + 1e-9)


def _check_point(variety: Variety, form: ZeroOneForm, z, contains_tol: float) -> np.ndarray:
    z = np.asarray(z, dtype=np.complex128)
    if z.shape != (variety.ambient_dim,):
        raise ValueError("point dimension mismatch")
    if form.n != variety.ambient_dim:
        raise ValueError("form dimension mismatch")
    if not contains(variety, z, contains_tol):
        raise NotOnVariety(f"solve point {z} is not on the variety")
    return z


def _scaling_kernel(variety: Variety, form: ZeroOneForm, z: np.ndarray, pole: complex):
    """Vectorized K(w) = sum_k beta_k f_k(w^beta*z) conj(w)^(beta_k-1) conj(z_k) / (w - pole)."""
    beta = variety.weights.as_array()
    live = [k for k in range(variety.ambient_dim) if z[k] != 0]

    def K(w: np.ndarray) -> np.ndarray:
        pts = (w[:, None] ** beta[None, :]) * z[None, :]
        F = form.coeff_matrix(pts)
        wc = np.conj(w)
        acc = np.zeros(w.shape, dtype=np.complex128)
        for k in live:
            acc += beta[k] * F[:, k] * wc ** (beta[k] - 1) * np.conj(z[k])
        return acc / (w - pole)

    return K


def solve(
    variety: Variety,
    form: ZeroOneForm,
    z,
    params: QuadratureParams = QuadratureParams(),
    contains_tol: float = 1e-8,
) -> SolveResult:
    """Evaluate the solution operator at a point of the variety.

    g(0) = 0 exactly; elsewhere one adaptive planar quadrature with the
    single singular point w = 1 (inside the truncation disk only when the
    orbit through z meets the support of the form there).
    """
    z = _check_point(variety, form, z, contains_tol)
    W = truncation_radius(variety.weights, z, form.support_radius)
    if W == 0.0:
        return SolveResult(0j, 0.0, 0.0)
    integrand = PlanarIntegrand(
        evaluate=_scaling_kernel(variety, form, z, 1.0 + 0j),
        singular_points=(1.0 + 0j,),
        truncation_radius=W,
    )
    raw, est = integrate_plane(integrand, params)
    return SolveResult(raw / _TWO_PI_I, est / (2 * math.pi), W)


def solve_scaled(
    variety: Variety,
    form: ZeroOneForm,
    z,
    s: complex,
    params: QuadratureParams = QuadratureParams(),
    contains_tol: float = 1e-8,
) -> SolveResult:
    """g(s^beta * z) through the change of variables u = w s: same kernel in
    the original orbit coordinate but with the singular point moved to u = s.

    The substitution degenerates at s = 0, where g(0) = 0 is returned
    directly.
    """
    z = _check_point(variety, form, z, contains_tol)
    s = complex(s)
    if s == 0:
        return SolveResult(0j, 0.0, 0.0)
    W = truncation_radius(variety.weights, z, form.support_radius)
    if W == 0.0:
        return SolveResult(0j, 0.0, 0.0)
    integrand = PlanarIntegrand(
        evaluate=_scaling_kernel(variety, form, z, s),
        singular_points=(s,),
        truncation_radius=W,
    )
    raw, est = integrate_plane(integrand, params)
    return SolveResult(raw / _TWO_PI_I, est / (2 * math.pi), W)


def solve_l2(
    variety: Variety,
    form: ZeroOneForm,
    z,
    params: QuadratureParams = QuadratureParams(),
    contains_tol: float = 1e-8,
) -> SolveResult:
    """L2 variant on pure d-dimensional cones:

    g(z) = sum_k (1/2 pi i) * integral of f_k(w z) w^(d-1) conj(z_k) / (w-1).

    Truncated to |w| <= R/|z|; the only singular point is w = 1.
    """
    if not variety.weights.is_unit:
        raise NotACone("solve_l2 requires unit weights")
    if variety.pure_dim is None:
        raise ValueError("solve_l2 requires pure_dim")
    z = _check_point(variety, form, z, contains_tol)
    nrm = float(np.linalg.norm(z))
    if nrm == 0.0:
        return SolveResult(0j, 0.0, 0.0)
    W = form.support_radius / nrm * (1.0 + 1e-9)
    d = variety.pure_dim
    zc = np.conj(z)
    live = [k for k in range(variety.ambient_dim) if z[k] != 0]

    def K(w: np.ndarray) -> np.ndarray:
        pts = w[:, None] * z[None, :]
        F = form.coeff_matrix(pts)
        acc = np.zeros(w.shape, dtype=np.complex128)
        for k in live:
            acc += F[:, k] * zc[k]
        return acc * w ** (d - 1) / (w - 1.0)

    integrand = PlanarIntegrand(
        evaluate=K, singular_points=(1.0 + 0j,), truncation_radius=W
    )
    raw, est = integrate_plane(integrand, params)
    return SolveResult(raw / _TWO_PI_I, est / (2 * math.pi), W)


def weighted_cauchy_pompeiu(
    F0_slice,
    m: int,
    s: complex,
    support_radius: float,
    params: QuadratureParams = QuadratureParams(),
) -> complex:
    """(1/2 pi i) s^(-m) * integral of u^m F0(u) / (u - s) du ^ dubar.

    The weight u^m / s^m makes the slice transform match the L2 operator on
    d-dimensional cones (m = d - 1); m = 0 is the plain Cauchy transform.
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    s = complex(s)
    if s == 0 and m > 0:
        raise ZeroScaleWithWeight("s = 0 is not allowed when m > 0")

    def K(u: np.ndarray) -> np.ndarray:
        return (u ** m) * np.asarray(F0_slice(u), dtype=np.complex128) / (u - s)

    integrand = PlanarIntegrand(
        evaluate=K, singular_points=(s,), truncation_radius=float(support_radius)
    )
    raw, _ = integrate_plane(integrand, params)
    return raw / _TWO_PI_I / (s ** m if m > 0 else 1.0)


def theta_map(weights: Weights, z) -> np.ndarray:
    """Coordinatewise power map (z_1^beta_1, ..., z_n^beta_n); intertwines
    the scaling actions: theta(w z) = w^beta * theta(z)."""
    z = np.asarray(z, dtype=np.complex128)
    b = weights.as_array()
    return z ** b


def theta_cone(variety: Variety) -> Variety:
    """The cone associated to a weighted variety: zero locus of Q_k composed
    with the power map, which multiplies exponents by the weights."""
    polys = [q.scale_exponents(variety.weights) for q in variety.polynomials]
    return Variety.build(
        Weights((1,) * variety.ambient_dim), polys, pure_dim=variety.pure_dim
    )


def theta_pullback_form(form: ZeroOneForm, weights: Weights) -> ZeroOneForm:
    """Pullback of the form through the power map: coefficient k becomes
    f_k(theta(z)) * beta_k * conj(z_k)^(beta_k - 1)."""
    b = weights.as_array()
    n = form.n

    def make(k: int):
        def f(P: np.ndarray) -> np.ndarray:
            img = P ** b[None, :]
            return form.coeff_matrix(img)[:, k] * b[k] * np.conj(P[:, k]) ** (b[k] - 1)

        return f

    coeffs = tuple(make(k) for k in range(n))
    # |theta(z)| < R forces |z_k| < R^(1/beta_k); the enclosing ball radius
    radius = float(math.sqrt(sum(form.support_radius ** (2.0 / bk) for bk in b)))
    sup = estimate_sup_bound(coeffs, n, radius)
    return ZeroOneForm(n, coeffs, radius, sup, form.dbar_closed)


@dataclass(frozen=True)
class ThetaTransfer:
    direct: SolveResult  # h at x, solved on the weighted variety
    via_cone: SolveResult  # g at z with theta(z) = x, solved on the cone
    cone_point: np.ndarray


def solve_weighted_via_cone(
    X: Variety,
    form: ZeroOneForm,
    x,
    params: QuadratureParams = QuadratureParams(),
    cone_point=None,
) -> ThetaTransfer:
    """Solve on the weighted variety directly and, as a cross-check, on the
    associated cone with the pulled-back form; the two values agree.

    `cone_point` may supply a specific z with theta(z) = x; by default the
    principal branch roots are used (any branch gives the same value).
    """
    x = np.asarray(x, dtype=np.complex128)
    direct = solve(X, form, x, params)
    cone = theta_cone(X)
    pulled = theta_pullback_form(form, X.weights)
    if cone_point is None:
        b = X.weights.as_array().astype(np.float64)
        z = x ** (1.0 / b)
    else:
        z = np.asarray(cone_point, dtype=np.complex128)
        if not np.allclose(theta_map(X.weights, z), x, rtol=1e-9, atol=1e-12):
            raise ValueError("cone_point does not map to x under the power map")
    via = solve(cone, pulled, z, params)
    return ThetaTransfer(direct, via, z)
