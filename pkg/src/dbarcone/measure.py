"""Surface-measure integration over cone varieties, link sampling, and a
computable upper-bound proxy for the intrinsic distance on the variety.

The cone Monte Carlo parametrizes the link K = Sigma intersect {|z| = 1}
through charts as psi(phi, x) = e^{i phi} Y(x)/|Y(x)| and integrates

    integral over Sigma cap B_rho = integral over K [ integral_0^rho
        f(r k) r^(2d-1) dr ] dsigma(k),

sampling (phi, x) uniformly in per-chart boxes, weighting by the Gram
volume factor of the link parametrization, sampling the radius with the
cone density r^(2d-1), and resolving chart overlaps by assigning every
link point to the nearest anchor whose chart covers it (so each point is
counted exactly once)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .charts import Chart, build_chart
from .errors import (
    InsufficientSamples,
    NotACone,
    ProjectionFailure,
)
from .forms import ZeroOneForm
from .variety import Variety, act, contains_batch, is_regular, project_batch

__all__ = [
    "LinkSample",
    "PathApprox",
    "SurfaceEstimate",
    "ConeAtlas",
    "sample_link",
    "surface_integral",
    "l2_norm_function",
    "l2_norm_form",
    "dist_sigma",
    "dist_sigma_path",
]


@dataclass(frozen=True)
class LinkSample:
    """Points on the link Sigma intersect {|z| = sqrt(n)}; every point has a
    coordinate of modulus >= 1."""

    points: np.ndarray  # (N, n)
    seeds_used: int


@dataclass(frozen=True)
class SurfaceEstimate:
    value: float
    std_error: float
    n_samples: int
    newton_failures: int
    coverage_gaps: int


@dataclass(frozen=True)
class PathApprox:
    """Piecewise-linear path on the variety; its length upper-bounds the
    intrinsic distance between the endpoints."""

    waypoints: np.ndarray  # (P, n)
    length: float
    near_singular: bool  # some interior waypoint dipped toward the origin


def _rescale_to_norm(variety: Variety, pts: np.ndarray, target: float) -> np.ndarray:
    """Move each point along its scaling orbit to the requested norm
    (closed form for cones, bisection in the real scale otherwise)."""
    pts = np.asarray(pts, dtype=np.complex128)
    norms = np.linalg.norm(pts, axis=1)
    if variety.weights.is_unit:
        return pts * (target / norms)[:, None]
    beta = variety.weights.as_array().astype(np.float64)
    out = np.empty_like(pts)
    for i, z in enumerate(pts):
        amp = np.abs(z) ** 2

        def nrm2(t: float) -> float:
            return float(np.sum(t ** (2 * beta) * amp))

        lo, hi = 0.0, 1.0
        while nrm2(hi) < target ** 2:
            hi *= 2.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if nrm2(mid) >= target ** 2:
                hi = mid
            else:
                lo = mid
        out[i] = act(hi, variety.weights, z)
    return out


def sample_link(
    variety: Variety, count: int, rng_seed: int, max_batches: int = 50
) -> LinkSample:
    """Project random ambient Gaussians onto the variety, then rescale along
    the scaling orbit to the sphere of radius sqrt(n)."""
    rng = np.random.default_rng(rng_seed)
    n = variety.ambient_dim
    target = math.sqrt(n)
    kept: list[np.ndarray] = []
    used = 0
    attempted = 0
    while sum(len(k) for k in kept) < count and used < max_batches:
        used += 1
        m = max(2 * count, 32)
        attempted += m
        seeds = (rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))) / math.sqrt(2)
        Z, ok = project_batch(variety, seeds)
        Z = Z[ok & (np.linalg.norm(Z, axis=1) > 1e-8)]
        if Z.shape[0] == 0:
            continue
        # rescaling multiplies residuals by s^degree, so polish and rescale
        # once more to land on the sphere at full precision
        Z = _rescale_to_norm(variety, Z, target)
        Z, ok = project_batch(variety, Z, tol=1e-13)
        Z = Z[ok]
        if Z.shape[0] == 0:
            continue
        Z = _rescale_to_norm(variety, Z, target)
        Z = Z[contains_batch(variety, Z, tol=1e-9)]
        if variety.pure_dim is not None and Z.shape[0]:
            reg = np.array([is_regular(variety, z) for z in Z])
            Z = Z[reg]
        kept.append(Z)
    pts = np.concatenate(kept, axis=0) if kept else np.zeros((0, n), complex)
    if pts.shape[0] < count:
        rate = 1.0 - pts.shape[0] / max(attempted, 1)
        raise InsufficientSamples(
            f"projection failure rate {rate:.0%}: got {pts.shape[0]} of {count}"
        )
    return LinkSample(points=pts[:count], seeds_used=used)


# ---------------------------------------------------------------------------
# stratified cone Monte Carlo


class ConeAtlas:
    """Charts anchored at sampled link points, with parameter boxes sized to
    tile the link; every link point is assigned to the nearest covering
    chart so strata never double count."""

    def __init__(self, variety: Variety, n_anchors: int, rng_seed: int):
        if not variety.weights.is_unit:
            raise NotACone("surface integration requires unit weights")
        if variety.pure_dim is None:
            raise ValueError("surface integration requires pure_dim")
        self.variety = variety
        self.d = variety.pure_dim
        self.m = self.d - 1
        link = sample_link(variety, n_anchors, rng_seed)
        charts: list[Chart] = []
        for xi in link.points:
            try:
                charts.append(build_chart(variety, xi))
            except Exception:
                continue
        if not charts:
            raise InsufficientSamples("no usable chart anchors")
        self.charts = charts
        self.unit_anchors = np.stack([c.anchor / np.linalg.norm(c.anchor) for c in charts])
        if self.m:
            spacing = []
            for i in range(len(charts)):
                dd = np.linalg.norm(self.unit_anchors - self.unit_anchors[i], axis=1)
                dd[i] = np.inf
                spacing.append(dd.min())
            cap = 2.5 * float(np.median(spacing))
            self.deltas = np.array(
                [
                    min(0.9 * c.domain_radius / math.sqrt(2 * self.m), cap)
                    for c in charts
                ]
            )
        else:
            self.deltas = np.zeros(len(charts))
        # box volume: phases times the real-coordinate box of the slice params
        self.volumes = np.array(
            [2.0 * math.pi * (2.0 * delta) ** (2 * self.m) for delta in self.deltas]
        )

    def covers(self, chart_idx: int, pts: np.ndarray) -> np.ndarray:
        """Which unit link points lie in the box image of this chart."""
        c = self.charts[chart_idx]
        s = pts[:, c.pivot] / c.anchor[c.pivot]
        good = np.abs(s) > 1e-12
        out = np.zeros(pts.shape[0], dtype=bool)
        if not good.any():
            return out
        Y = np.zeros_like(pts)
        Y[good] = pts[good] / s[good, None]
        if self.m:
            X = Y[:, list(c.free)]
            diff = X - c.x_anchor[None, :]
            inbox = good & np.all(
                (np.abs(diff.real) <= self.deltas[chart_idx])
                & (np.abs(diff.imag) <= self.deltas[chart_idx]),
                axis=1,
            )
        else:
            X = np.zeros((pts.shape[0], 0), complex)
            inbox = good
        if not inbox.any():
            return out
        Ysol, ok = c.slice_batch(X[inbox])
        match = ok & (
            np.linalg.norm(Ysol - Y[inbox], axis=1)
            <= 1e-6 * (1.0 + np.linalg.norm(Y[inbox], axis=1))
        )
        out[np.flatnonzero(inbox)] = match
        return out

    def assign(self, pts: np.ndarray) -> np.ndarray:
        """Index of the nearest covering chart per unit link point; -1 when
        no chart covers a point (a coverage gap)."""
        N = pts.shape[0]
        A = len(self.charts)
        dists = np.linalg.norm(pts[:, None, :] - self.unit_anchors[None, :, :], axis=2)
        order = np.argsort(dists, axis=1)
        result = np.full(N, -1, dtype=int)
        undecided = np.ones(N, dtype=bool)
        for rank in range(A):
            if not undecided.any():
                break
            cand = order[:, rank]
            for j in range(A):
                sel = undecided & (cand == j)
                if not sel.any():
                    continue
                hit = self.covers(j, pts[sel])
                idx = np.flatnonzero(sel)[hit]
                result[idx] = j
                undecided[idx] = False
        return result

    def link_gram(self, chart_idx: int, Y: np.ndarray) -> np.ndarray:
        """sqrt det of the real Gram matrix of the link parametrization
        psi(phi, x) = e^{i phi} Y(x)/|Y(x)| at a batch of slice points."""
        c = self.charts[chart_idx]
        M, n = Y.shape
        nrm = np.linalg.norm(Y, axis=1)
        yh = Y / nrm[:, None]
        m = self.m
        k = 1 + 2 * m
        tangents = np.empty((M, k, n), dtype=np.complex128)
        tangents[:, 0, :] = 1j * yh
        if m:
            J = self.variety.jacobian(Y)  # (M, K, n)
            Adep = J[:, :, list(c.dep)]
            B = J[:, :, list(c.free)]
            if Adep.shape[1] == Adep.shape[2]:
                D = -np.linalg.solve(Adep, B)  # (M, r, m)
            else:
                D = np.stack(
                    [-np.linalg.lstsq(Adep[i], B[i], rcond=None)[0] for i in range(M)]
                )
            Yp = np.zeros((M, n, m), dtype=np.complex128)
            for j, idx in enumerate(c.free):
                Yp[:, idx, j] = 1.0
            Yp[:, list(c.dep), :] = D
            for j in range(m):
                v = Yp[:, :, j]
                for which, vv in enumerate((v, 1j * v)):
                    proj = np.real(np.sum(vv * np.conj(yh), axis=1))
                    tangents[:, 1 + 2 * j + which, :] = (
                        vv - yh * proj[:, None]
                    ) / nrm[:, None]
        V = np.concatenate([tangents.real, tangents.imag], axis=2)  # (M, k, 2n)
        G = V @ V.transpose(0, 2, 1)
        det = np.linalg.det(G)
        return np.sqrt(np.maximum(det, 0.0))

    def form_norm_sq(self, chart_idx: int, Y: np.ndarray, Z: np.ndarray, form: ZeroOneForm) -> np.ndarray:
        """|lambda|_Sigma^2 at sample points Z = r e^{i phi} Y/|Y|: express the
        form in an orthonormal frame of the antiholomorphic cotangent space
        built from the chart differential."""
        c = self.charts[chart_idx]
        M, n = Y.shape
        m = self.m
        cols = np.empty((M, n, self.d), dtype=np.complex128)
        cols[:, :, 0] = Y
        if m:
            J = self.variety.jacobian(Y)
            Adep = J[:, :, list(c.dep)]
            B = J[:, :, list(c.free)]
            if Adep.shape[1] == Adep.shape[2]:
                D = -np.linalg.solve(Adep, B)
            else:
                D = np.stack(
                    [-np.linalg.lstsq(Adep[i], B[i], rcond=None)[0] for i in range(M)]
                )
            Yp = np.zeros((M, n, m), dtype=np.complex128)
            for j, idx in enumerate(c.free):
                Yp[:, idx, j] = 1.0
            Yp[:, list(c.dep), :] = D
            cols[:, :, 1:] = Yp
        E = np.linalg.qr(cols)[0]  # (M, n, d), orthonormal columns
        F = form.coeff_matrix(Z)  # (M, n)
        coeff = np.einsum("mnd,mn->md", np.conj(E), F)
        return np.sum(np.abs(coeff) ** 2, axis=1).real


def _cone_mc(
    variety: Variety,
    rho: float,
    n_samples: int,
    rng_seed: int,
    n_anchors: int,
    point_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    form: Optional[ZeroOneForm] = None,
    atlas: Optional[ConeAtlas] = None,
) -> SurfaceEstimate:
    """Shared stratified estimator; integrand is point_fn(Z) or, when `form`
    is given, the squared induced norm of the form."""
    if atlas is None:
        atlas = ConeAtlas(variety, n_anchors, rng_seed)
    rng = np.random.default_rng((rng_seed, 0xA7145))
    d = atlas.d
    m = atlas.m
    A = len(atlas.charts)
    per = max(16, n_samples // A)
    total = 0.0
    var_total = 0.0
    newton_failures = 0
    n_used = 0
    for i, chart in enumerate(atlas.charts):
        phi = rng.uniform(0.0, 2.0 * math.pi, per)
        if m:
            re = rng.uniform(-atlas.deltas[i], atlas.deltas[i], (per, m))
            im = rng.uniform(-atlas.deltas[i], atlas.deltas[i], (per, m))
            X = chart.x_anchor[None, :] + re + 1j * im
        else:
            X = np.zeros((per, 0), complex)
        Y, ok = chart.slice_batch(X)
        newton_failures += int(per - ok.sum())
        contrib = np.zeros(per)
        if ok.any():
            Yk = Y[ok]
            nrm = np.linalg.norm(Yk, axis=1)
            P = np.exp(1j * phi[ok])[:, None] * Yk / nrm[:, None]
            assigned = atlas.assign(P) == i
            if assigned.any():
                sqrtG = atlas.link_gram(i, Yk[assigned])
                r = rho * rng.uniform(0.0, 1.0, int(assigned.sum())) ** (1.0 / (2 * d))
                Z = r[:, None] * P[assigned]
                if form is not None:
                    fv = atlas.form_norm_sq(i, Yk[assigned], Z, form)
                else:
                    fv = np.asarray(point_fn(Z), dtype=np.float64)
                vals = sqrtG * fv * (rho ** (2 * d)) / (2 * d)
                tmp = np.zeros(per)
                okidx = np.flatnonzero(ok)
                tmp[okidx[assigned]] = vals
                contrib = tmp
        est = atlas.volumes[i] * contrib.mean()
        var = atlas.volumes[i] ** 2 * contrib.var(ddof=1) / per
        total += est
        var_total += var
        n_used += per
    # coverage diagnostic: independently sampled link points must all be
    # covered by some chart box
    pilot = sample_link(variety, min(256, max(32, n_samples // 10)), (rng_seed ^ 0x9E3779B9) & 0x7FFFFFFF)
    unit = pilot.points / np.linalg.norm(pilot.points, axis=1)[:, None]
    gaps = int(np.sum(atlas.assign(unit) < 0))
    return SurfaceEstimate(
        value=float(total),
        std_error=float(math.sqrt(var_total)),
        n_samples=n_used,
        newton_failures=newton_failures,
        coverage_gaps=gaps,
    )


def surface_integral(
    variety: Variety,
    integrand: Callable[[np.ndarray], np.ndarray],
    rho: float,
    n_samples: int,
    rng_seed: int,
    n_anchors: int = 24,
    atlas: Optional[ConeAtlas] = None,
) -> SurfaceEstimate:
    """Monte Carlo estimate of the surface integral of a real integrand over
    Sigma intersect B_rho; `integrand` maps an (N, n) batch to (N,) reals."""
    return _cone_mc(
        variety, rho, n_samples, rng_seed, n_anchors, point_fn=integrand, atlas=atlas
    )


def l2_norm_function(
    variety: Variety,
    h: Callable[[np.ndarray], np.ndarray],
    rho: float,
    n_samples: int,
    rng_seed: int,
    n_anchors: int = 24,
    atlas: Optional[ConeAtlas] = None,
) -> SurfaceEstimate:
    """sqrt of the surface integral of |h|^2; std_error propagated through
    the square root."""

    def sq(Z: np.ndarray) -> np.ndarray:
        return np.abs(np.asarray(h(Z), dtype=np.complex128)) ** 2

    est = _cone_mc(variety, rho, n_samples, rng_seed, n_anchors, point_fn=sq, atlas=atlas)
    val = math.sqrt(max(est.value, 0.0))
    err = est.std_error / (2.0 * val) if val > 0 else est.std_error
    return SurfaceEstimate(val, err, est.n_samples, est.newton_failures, est.coverage_gaps)


def l2_norm_form(
    variety: Variety,
    form: ZeroOneForm,
    rho: float,
    n_samples: int,
    rng_seed: int,
    n_anchors: int = 24,
    atlas: Optional[ConeAtlas] = None,
) -> SurfaceEstimate:
    """L2 norm of a (0,1)-form over Sigma intersect B_rho using the induced
    pointwise norm (orthonormalized chart frame), so the value is invariant
    under coefficient representations that agree on the tangent space."""
    est = _cone_mc(variety, rho, n_samples, rng_seed, n_anchors, form=form, atlas=atlas)
    val = math.sqrt(max(est.value, 0.0))
    err = est.std_error / (2.0 * val) if val > 0 else est.std_error
    return SurfaceEstimate(val, err, est.n_samples, est.newton_failures, est.coverage_gaps)


# ---------------------------------------------------------------------------
# intrinsic distance upper bound


def _polyline_length(pts: np.ndarray) -> float:
    return float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1)))


def _project_polyline(variety: Variety, a: np.ndarray, b: np.ndarray, steps: int):
    ts = np.linspace(0.0, 1.0, steps + 1)
    nodes = a[None, :] * (1 - ts)[:, None] + b[None, :] * ts[:, None]
    proj, ok = project_batch(variety, nodes)
    if not ok.all():
        return None
    proj[0], proj[-1] = a, b
    return proj


def _radial_leg(variety: Variety, z: np.ndarray, target_norm: float, steps: int = 12):
    """Orbit segment from z to the orbit point of the requested norm."""
    nz = float(np.linalg.norm(z))
    if nz == 0.0:
        raise ProjectionFailure("radial leg from the origin is undefined")
    if variety.weights.is_unit:
        t_star = target_norm / nz
    else:
        end = _rescale_to_norm(variety, z.reshape(1, -1), target_norm)[0]
        beta = variety.weights.as_array().astype(np.float64)
        # recover the real orbit parameter from any nonzero coordinate
        k = int(np.argmax(np.abs(z)))
        t_star = float(np.abs(end[k] / z[k]) ** (1.0 / beta[k]))
    ts = np.linspace(1.0, t_star, steps + 1)
    return np.stack([act(t, variety.weights, z) for t in ts])


def dist_sigma_path(
    variety: Variety, z, w, steps: int = 24
) -> PathApprox:
    """Upper bound on the intrinsic distance: the best of (a) the ambient
    segment projected pointwise onto the variety and (b) two-leg routes that
    first move radially along the scaling orbit and then walk between the
    projected points at fixed norm.  Always >= the chordal distance."""
    z = np.asarray(z, dtype=np.complex128)
    w = np.asarray(w, dtype=np.complex128)
    nz, nw = float(np.linalg.norm(z)), float(np.linalg.norm(w))
    candidates: list[np.ndarray] = []
    if nz == 0.0 and nw == 0.0:
        return PathApprox(np.stack([z, w]), 0.0, False)
    if nz == 0.0 or nw == 0.0:
        # the scaling orbit ends at the origin, so the radial leg is a path
        outer = w if nz == 0.0 else z
        leg = _radial_leg(variety, outer, 1e-9 * float(np.linalg.norm(outer)), steps)
        path = np.concatenate([leg, np.zeros((1, len(z)), complex)])  # outer -> 0
        if nz == 0.0:
            path = path[::-1]
        candidates.append(path)
    else:
        seg = _project_polyline(variety, z, w, steps)
        if seg is not None:
            candidates.append(seg)
        for a, b in ((z, w), (w, z)):
            try:
                leg1 = _radial_leg(variety, a, float(np.linalg.norm(b)), max(6, steps // 2))
            except ProjectionFailure:
                continue
            seg2 = _project_polyline(variety, leg1[-1], b, steps)
            if seg2 is None:
                continue
            nb = float(np.linalg.norm(b))
            mid = seg2[1:-1]
            # nodes projected onto the singular origin cannot be rescaled to
            # the walking norm; dropping them keeps the polyline connected
            mid = mid[np.linalg.norm(mid, axis=1) > 1e-9 * nb]
            mid = _rescale_to_norm(variety, mid, nb) if mid.shape[0] else mid
            walk = np.concatenate([seg2[:1], mid, seg2[-1:]])
            path = np.concatenate([leg1, walk[1:]])
            if np.array_equal(a, w):
                path = path[::-1]
            candidates.append(path)
    if not candidates:
        raise ProjectionFailure(
            "no candidate path could be projected onto the variety; increase steps"
        )
    lengths = [_polyline_length(p) for p in candidates]
    best = int(np.argmin(lengths))
    path = candidates[best]
    length = max(lengths[best], float(np.linalg.norm(z - w)))
    interior = path[1:-1]
    floor = 0.1 * min(nz, nw) if min(nz, nw) > 0 else 0.0
    near_sing = bool(
        interior.shape[0] and floor > 0 and np.linalg.norm(interior, axis=1).min() < floor
    )
    return PathApprox(path, length, near_sing)


def dist_sigma(variety: Variety, z, w, steps: int = 24) -> float:
    return dist_sigma_path(variety, z, w, steps).length
