"""Generalized-cone parametrizations around regular points.

A chart anchored at a regular point xi with |xi_pivot| >= 1 parametrizes a
neighborhood of the orbit through xi as

    Pi(s, x) = s^beta * y(x),    y(x) on the slice {z_pivot = xi_pivot},

where the slice point y(x) fixes the pivot coordinate, carries m = d - 1
free coordinates x (chosen by pivoted QR on the slice Jacobian), and solves
the remaining coordinates by Newton's method.  Charts also provide the
pullback coefficients of a (0,1)-form through Pi and the implicit-function
Jacobian used for tangent frames and surface measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import (
    ImplicitFunctionFailure,
    NewtonDivergence,
    NotInChart,
    OutsideChartDomain,
    PivotTooSmall,
    SingularAnchor,
)
from .forms import ZeroOneForm
from .variety import Variety, _membership_scales, act, contains, is_regular

_NEWTON_MAX = 40
_NEWTON_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Chart:
    variety: Variety
    anchor: np.ndarray  # (n,), regular point with |anchor[pivot]| >= 1
    pivot: int
    free: tuple[int, ...]  # ambient indices of the m free slice coordinates
    dep: tuple[int, ...]  # ambient indices of the solved slice coordinates
    x_anchor: np.ndarray  # (m,) free coordinates of the anchor
    slice_dim: int  # m = d - 1
    domain_radius: float

    # -- slice solving ---------------------------------------------------

    def slice_batch(
        self, X: np.ndarray, warm: Optional[np.ndarray] = None
    ) -> tuple[np.ndarray, np.ndarray]:
        """Solve the dependent coordinates for a batch of free coordinates.

        X: (N, m) -> (Y, ok) with Y: (N, n) slice points (pivot fixed) and a
        convergence mask.  `warm` optionally seeds the dependent coordinates.
        """
        X = np.asarray(X, dtype=np.complex128)
        if self.slice_dim == 0:
            N = X.shape[0] if X.ndim == 2 else 1
            X = np.zeros((N, 0), dtype=np.complex128)
        else:
            X = X.reshape(-1, self.slice_dim)
            N = X.shape[0]
        Y = np.tile(self.anchor, (N, 1))
        if self.slice_dim:
            Y[:, list(self.free)] = X
        if warm is not None:
            Y[:, list(self.dep)] = warm
        dep = list(self.dep)
        if not dep:
            res = self.variety.residuals(Y)
            ok = np.all(
                np.abs(res) <= 1e-9 * _membership_scales(self.variety, Y), axis=1
            )
            return Y, ok
        ok = np.zeros(N, dtype=bool)
        for _ in range(_NEWTON_MAX):
            res = self.variety.residuals(Y)  # (N, K)
            scale = _membership_scales(self.variety, Y)
            ok = np.all(np.abs(res) <= _NEWTON_TOL * scale, axis=1)
            active = ~ok
            if not active.any():
                break
            J = self.variety.jacobian(Y[active])[:, :, dep]  # (M, K, r)
            R = res[active]
            if J.shape[1] == J.shape[2]:
                try:
                    step = -np.linalg.solve(J, R[:, :, None])[:, :, 0]
                except np.linalg.LinAlgError:
                    break
            else:
                step = np.stack(
                    [-np.linalg.lstsq(J[i], R[i], rcond=None)[0] for i in range(J.shape[0])]
                )
            bad = ~np.isfinite(step).all(axis=1)
            step[bad] = 0.0
            cur = Y[active][:, dep]
            base = np.sum(np.abs(R) ** 2, axis=1)
            alpha = np.ones(step.shape[0])
            trial = cur + step
            for _ in range(15):
                Yt = Y[active].copy()
                Yt[:, dep] = trial
                cost = np.sum(np.abs(self.variety.residuals(Yt)) ** 2, axis=1)
                worse = cost > base * (1 + 1e-12)
                if not worse.any():
                    break
                alpha[worse] *= 0.5
                trial[worse] = cur[worse] + alpha[worse, None] * step[worse]
            Ya = Y[active]
            Ya[:, dep] = trial
            Y[active] = Ya
        res = self.variety.residuals(Y)
        ok = np.all(
            np.abs(res) <= 1e-10 * _membership_scales(self.variety, Y), axis=1
        )
        return Y, ok

    def slice_point(self, x) -> np.ndarray:
        """One slice point y(x); raises NewtonDivergence on failure."""
        X = np.asarray(x, dtype=np.complex128).reshape(1, -1)
        Y, ok = self.slice_batch(X)
        if not ok[0]:
            raise NewtonDivergence(f"slice Newton failed at x = {x}")
        return Y[0]

    def _check_domain(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=np.complex128))
        if self.slice_dim == 0:
            return x
        if np.linalg.norm(x - self.x_anchor) > self.domain_radius:
            raise OutsideChartDomain(
                f"|x - x_anchor| = {np.linalg.norm(x - self.x_anchor):.3g} exceeds "
                f"domain radius {self.domain_radius:.3g}"
            )
        return x

    # -- evaluation ------------------------------------------------------

    def eval(self, s: complex, x=()) -> np.ndarray:
        """Pi(s, x) = s^beta * y(x); Pi(0, x) = 0."""
        x = self._check_domain(x)
        y = self.slice_point(x) if self.slice_dim else self.slice_point(self.x_anchor)
        return act(complex(s), self.variety.weights, y)

    def eval_batch(self, S: np.ndarray, X: np.ndarray):
        Y, ok = self.slice_batch(X)
        return act(np.asarray(S, dtype=np.complex128), self.variety.weights, Y), ok

    def slice_jacobian(self, x, y: Optional[np.ndarray] = None) -> np.ndarray:
        """Ambient derivative dy/dx: (n, m); pivot row zero, free rows are
        unit vectors, dependent rows solve the linearized constraints."""
        if self.slice_dim == 0:
            return np.zeros((self.variety.ambient_dim, 0), dtype=np.complex128)
        if y is None:
            y = self.slice_point(x)
        J = self.variety.jacobian(y)  # (K, n)
        A = J[:, list(self.dep)]  # (K, r)
        B = J[:, list(self.free)]  # (K, m)
        if A.shape[0] == A.shape[1]:
            D = -np.linalg.solve(A, B)
        else:
            D = -np.linalg.lstsq(A, B, rcond=None)[0]
        out = np.zeros((self.variety.ambient_dim, self.slice_dim), dtype=np.complex128)
        for j, idx in enumerate(self.free):
            out[idx, j] = 1.0
        out[list(self.dep), :] = D
        return out

    def tangent_basis(self, s: complex, x=()) -> np.ndarray:
        """Columns span the complex tangent space at Pi(s, x):
        dPi/ds and dPi/dx_j; shape (n, d)."""
        x = np.atleast_1d(np.asarray(x, dtype=np.complex128))
        y = self.slice_point(x) if self.slice_dim else self.slice_point(self.x_anchor)
        beta = self.variety.weights.as_array()
        s = complex(s)
        d_ds = beta * s ** (beta - 1) * y
        Dy = self.slice_jacobian(x, y)
        d_dx = (s ** beta)[:, None] * Dy
        return np.column_stack([d_ds, d_dx])

    # -- inversion -------------------------------------------------------

    def invert(self, z, tol: float = 1e-8) -> tuple[complex, np.ndarray]:
        """Local inverse of Pi for z != 0 in the chart image.

        For unit weights s = z_pivot / anchor_pivot exactly; general weights
        try all beta_pivot-th roots and keep the one whose slice coordinates
        land in the domain.
        """
        z = np.asarray(z, dtype=np.complex128)
        zp = z[self.pivot]
        if zp == 0:
            raise NotInChart("pivot coordinate vanishes")
        beta = self.variety.weights.as_array()
        bp = int(beta[self.pivot])
        ratio = zp / self.anchor[self.pivot]
        s0 = ratio ** (1.0 / bp)
        candidates = [s0 * np.exp(2j * math.pi * k / bp) for k in range(bp)]
        best = None
        for s in candidates:
            y = z * s ** (-beta.astype(np.float64))
            x = y[list(self.free)] if self.slice_dim else np.zeros(0, complex)
            if self.slice_dim and np.linalg.norm(x - self.x_anchor) > self.domain_radius:
                continue
            try:
                y_solved = self.slice_point(x)
            except NewtonDivergence:
                continue
            if np.linalg.norm(y_solved - y) <= tol * (1.0 + np.linalg.norm(y)):
                dist = np.linalg.norm(x - self.x_anchor) if self.slice_dim else 0.0
                if best is None or dist < best[0]:
                    best = (dist, complex(s), x)
        if best is None:
            raise NotInChart(f"point {z} is not in the image of this chart")
        return best[1], best[2]

    # -- form pullback ---------------------------------------------------

    def pullback_form(
        self, form: ZeroOneForm, s: complex, x=()
    ) -> tuple[complex, np.ndarray]:
        """Coefficients (F0, F_j) of the pullback of the form through Pi:

        F0  = sum_k f_k(Pi) beta_k conj(s^(beta_k - 1) y_k)
        F_j = sum_{k != pivot} f_k(Pi) conj(s^beta_k dy_k/dx_j)
        """
        x = self._check_domain(x)
        y = self.slice_point(x) if self.slice_dim else self.slice_point(self.x_anchor)
        s = complex(s)
        beta = self.variety.weights.as_array()
        z = act(s, self.variety.weights, y)
        f = form.coeff_matrix(z.reshape(1, -1))[0]  # (n,)
        F0 = complex(np.sum(f * beta * np.conj(s ** (beta - 1) * y)))
        if self.slice_dim == 0:
            return F0, np.zeros(0, dtype=np.complex128)
        Dy = self.slice_jacobian(x, y)
        FJ = np.array(
            [
                complex(np.sum(f * np.conj(s ** beta * Dy[:, j])))
                for j in range(self.slice_dim)
            ],
            dtype=np.complex128,
        )
        return F0, FJ


def _probe_domain_radius(chart_args: dict, x_anchor: np.ndarray) -> float:
    """Half the distance at which the slice Newton first fails along random
    rays from the anchor; cheap honest estimate of the implicit-function
    neighborhood."""
    m = len(x_anchor)
    if m == 0:
        return math.inf
    probe = Chart(domain_radius=math.inf, **chart_args)
    rng = np.random.default_rng(0x271828)
    n_rays = 2 * m + 4
    dirs = rng.standard_normal((n_rays, m)) + 1j * rng.standard_normal((n_rays, m))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    base = 0.05 * (1.0 + np.linalg.norm(x_anchor))
    fail_at = []
    for v in dirs:
        t = base
        last_ok = 0.0
        for _ in range(14):
            X = (x_anchor + t * v).reshape(1, -1)
            _, ok = probe.slice_batch(X)
            if not ok[0]:
                break
            last_ok = t
            t *= 1.6
        fail_at.append(t if last_ok < t else t * 1.6)
    return 0.5 * float(min(fail_at))


@dataclass(frozen=True)
class PulledBackForm:
    """Pullback of a (0,1)-form through a chart, as coefficient functions of
    (s, x): F0 multiplies dsbar, Fj the slice differentials dxbar_j."""

    chart: Chart
    form: ZeroOneForm

    def F0(self, s: complex, x=()) -> complex:
        return self.chart.pullback_form(self.form, s, x)[0]

    def Fj(self, s: complex, x=()) -> np.ndarray:
        return self.chart.pullback_form(self.form, s, x)[1]


def chart_eval(chart: Chart, s: complex, x=()) -> np.ndarray:
    return chart.eval(s, x)


def chart_invert(chart: Chart, z, tol: float = 1e-8) -> tuple[complex, np.ndarray]:
    return chart.invert(z, tol)


def pullback_form(chart: Chart, form: ZeroOneForm, s: complex, x=()):
    return chart.pullback_form(form, s, x)


def build_chart(
    variety: Variety,
    anchor,
    tol: float = 1e-9,
) -> Chart:
    """Construct the generalized-cone chart anchored at a regular point.

    The pivot maximizes |anchor_k| (requires max >= 1: rescale to the link
    first); free slice coordinates are chosen by pivoted QR on the slice
    Jacobian; the trusted domain radius is probed at construction.
    """
    anchor = np.asarray(anchor, dtype=np.complex128)
    if variety.pure_dim is None:
        raise ValueError("build_chart requires pure_dim")
    if np.linalg.norm(anchor) == 0.0 or not is_regular(
        variety, anchor, contains_tol=max(tol, 1e-9)
    ):
        raise SingularAnchor(f"anchor {anchor} is not a regular point")
    pivot = int(np.argmax(np.abs(anchor)))
    if abs(anchor[pivot]) < 1.0 - 1e-9:
        raise PivotTooSmall(
            f"max |anchor_k| = {abs(anchor[pivot]):.3g} < 1; rescale to the link first"
        )
    n = variety.ambient_dim
    d = variety.pure_dim
    others = [k for k in range(n) if k != pivot]
    A = variety.jacobian(anchor)[:, others]  # (K, n-1)
    corank = n - d
    m = d - 1
    _, R, perm = scipy.linalg.qr(A, pivoting=True, mode="economic")
    diag = np.abs(np.diag(R))
    rank = int(np.sum(diag > 1e-10 * (diag[0] if diag.size else 1.0)))
    if rank != corank:
        raise ImplicitFunctionFailure(
            f"slice Jacobian rank {rank} != expected corank {corank} at the anchor"
        )
    dep = tuple(others[perm[i]] for i in range(corank))
    free = tuple(others[perm[i]] for i in range(corank, n - 1))
    x_anchor = anchor[list(free)].copy()
    args = dict(
        variety=variety,
        anchor=anchor,
        pivot=pivot,
        free=free,
        dep=dep,
        x_anchor=x_anchor,
        slice_dim=m,
    )
    radius = _probe_domain_radius(args, x_anchor)
    return Chart(domain_radius=radius, **args)
