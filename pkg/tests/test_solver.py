import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dbarcone.errors import NotACone, NotOnVariety, ZeroScaleWithWeight
from dbarcone.fixtures import cone6, cusp, line2, make_form, quadric_cone
from dbarcone.forms import combine_forms, radial_cutoff, scale_form
from dbarcone.quadrature import QuadratureParams
from dbarcone.solver import (
    solve,
    solve_l2,
    solve_scaled,
    solve_weighted_via_cone,
    theta_cone,
    theta_map,
    theta_pullback_form,
    truncation_radius,
    weighted_cauchy_pompeiu,
)
from dbarcone.variety import Weights, act, project_batch

from oracles import grid_cauchy_transform, grid_weighted_transform

PARAMS = QuadratureParams(rel_tol=1e-8, abs_tol=1e-11)


@pytest.fixture(scope="module")
def bump2():
    return make_form("bump-dbar", 2, h_terms=[((0, 0), 1.0), ((1, 0), 0.5)],
                     r0=0.3, radius=1.0)


@pytest.fixture(scope="module")
def bump3():
    return make_form("bump-dbar", 3, h_terms=[((0, 0, 0), 1.0), ((1, 0, 0), 0.5)],
                     r0=0.3, radius=1.0)


def test_solve_zero_point_and_zero_form(bump3):
    V = quadric_cone()
    assert solve(V, bump3, np.zeros(3), PARAMS).value == 0
    zform = make_form("zero", 3)
    r = solve(V, zform, np.array([1.0, 1.0, 1.0]), PARAMS)
    assert r.value == 0


def test_solve_rejects_off_variety(bump3):
    with pytest.raises(NotOnVariety):
        solve(quadric_cone(), bump3, np.array([1.0, 1.0, 0.5]), PARAMS)


def test_truncation_radius():
    w = Weights((1, 1))
    assert truncation_radius(w, np.zeros(2), 1.0) == 0.0
    W = truncation_radius(w, np.array([0.5, 0.0]), 1.0)
    assert abs(W - 2.0) < 1e-6
    # weighted: sum W^(2 beta_k) |z_k|^2 = R^2, monotone bisection
    w32 = Weights((3, 2))
    z = np.array([0.1, 0.2])
    W = truncation_radius(w32, z, 1.0)
    total = W ** 6 * 0.01 + W ** 4 * 0.04
    assert abs(total - 1.0) < 1e-6


def test_line_reduction_matches_classical_transform(bump2):
    # on {z2 = 0} the operator reduces exactly to the planar Cauchy-Pompeiu
    # transform of f1; oracle = independent midpoint grid
    L = line2()

    def f1(u):
        pts = np.stack([u, np.zeros_like(u)], axis=-1)
        return bump2.coeff_matrix(pts.reshape(-1, 2))[:, 0]

    rng = np.random.default_rng(11)
    for _ in range(5):
        z1 = complex(*rng.uniform(-0.55, 0.55, 2))
        if abs(z1) < 0.05:
            continue
        mine = solve(L, bump2, np.array([z1, 0.0]), PARAMS).value
        oracle = grid_cauchy_transform(f1, 1.0, z1, N=1200)
        assert abs(mine - oracle) <= 1e-5 * max(abs(oracle), 1e-3)


def test_line_solution_is_pompeiu_identity(bump2):
    # lambda = dbar(h chi) on the line, so g = h chi away from the origin
    L = line2()
    z1 = 0.42 - 0.17j
    mine = solve(L, bump2, np.array([z1, 0.0]), PARAMS).value
    exact = (1.0 + 0.5 * z1) * radial_cutoff(np.array([[z1, 0.0]]), 0.3, 1.0)[0]
    assert abs(mine - exact) < 1e-9


def test_solve_scaled_consistency(bump3):
    V = quadric_cone()
    rng = np.random.default_rng(3)
    seeds = (rng.standard_normal((10, 3)) + 1j * rng.standard_normal((10, 3))) / np.sqrt(2)
    Z, ok = project_batch(V, seeds)
    Z = Z[ok][:5]
    for i, z in enumerate(Z):
        z = z / np.linalg.norm(z) * 0.5
        s = 0.7 + 0.2j if i % 2 == 0 else -0.4 + 0.55j
        a = solve_scaled(V, bump3, z, s, PARAMS).value
        b = solve(V, bump3, act(s, V.weights, z), PARAMS).value
        assert abs(a - b) <= 1e-5 * (1 + abs(b))


def test_solve_scaled_trivials(bump3):
    V = quadric_cone()
    z = np.array([1.0, 1.0, 1.0]) * 0.3
    assert solve_scaled(V, bump3, z, 0.0, PARAMS).value == 0
    a = solve_scaled(V, bump3, z, 1.0, PARAMS).value
    b = solve(V, bump3, z, PARAMS).value
    assert abs(a - b) <= 1e-8 * (1 + abs(b))


def test_solve_l2_requires_cone(bump2):
    with pytest.raises(NotACone):
        solve_l2(cusp(), bump2, np.array([1.0, 1.0]), PARAMS)


def test_solve_l2_equals_solve_on_line(bump2):
    # d = 1 makes the radial weight w^(d-1) trivial: both operators coincide
    L = line2()
    for z1 in (0.25 + 0.1j, 0.6 - 0.2j):
        a = solve(L, bump2, np.array([z1, 0.0]), PARAMS).value
        b = solve_l2(L, bump2, np.array([z1, 0.0]), PARAMS).value
        assert abs(a - b) < 1e-9
    assert solve_l2(L, bump2, np.zeros(2), PARAMS).value == 0


def test_weighted_cauchy_pompeiu_m0_is_cauchy_transform():
    disk = lambda u: (np.abs(u) < 1.0).astype(complex)  # noqa: E731
    z = 0.3 + 0.4j
    v = weighted_cauchy_pompeiu(disk, 0, z, 1.0, PARAMS)
    assert abs(v - np.conj(z)) < 1e-8


def test_weighted_cauchy_pompeiu_zero_form():
    v = weighted_cauchy_pompeiu(lambda u: np.zeros_like(u), 2, 0.5, 1.0, PARAMS)
    assert abs(v) < 1e-12


def test_weighted_cauchy_pompeiu_m1_disk():
    # analytic value for the unit-disk indicator at s = 0.5:
    # (1/s) * (-1/pi) * integral u/(u-s) dA = -(1 - |s|^2)/s = -1.5
    disk = lambda u: (np.abs(u) < 1.0).astype(complex)  # noqa: E731
    v = weighted_cauchy_pompeiu(disk, 1, 0.5, 1.0, PARAMS)
    assert abs(v - (-1.5)) < 1e-7
    # midpoint grid is limited to ~1e-4 for a discontinuous indicator
    oracle = grid_weighted_transform(disk, 1, 0.5, 1.0, N=1200)
    assert abs(v - oracle) < 2e-4


def test_weighted_cauchy_pompeiu_rejects_zero_scale():
    with pytest.raises(ZeroScaleWithWeight):
        weighted_cauchy_pompeiu(lambda u: np.ones_like(u), 1, 0.0, 1.0, PARAMS)


def test_theta_map_basics():
    assert np.allclose(theta_map(Weights((1, 1)), [0.3, 0.7j]), [0.3, 0.7j])
    assert np.allclose(theta_map(Weights((3, 2)), [2.0, 3.0]), [8.0, 9.0])


@settings(max_examples=50, deadline=None)
@given(
    w=st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False),
    a=st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False),
    b=st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False),
)
def test_theta_intertwines_actions(w, a, b):
    weights = Weights((3, 2))
    z = np.array([a, b])
    lhs = act(w, weights, theta_map(weights, z))
    rhs = theta_map(weights, w * z)
    assert np.allclose(lhs, rhs, rtol=1e-11, atol=1e-11)


def test_theta_pullback_coefficients(bump2):
    w = Weights((3, 2))
    pulled = theta_pullback_form(bump2, w)
    rng = np.random.default_rng(4)
    P = 0.4 * (rng.standard_normal((8, 2)) + 1j * rng.standard_normal((8, 2)))
    got = pulled.coeff_matrix(P)
    img = theta_map(w, P)
    base = bump2.coeff_matrix(img)
    expect0 = base[:, 0] * 3 * np.conj(P[:, 0]) ** 2
    expect1 = base[:, 1] * 2 * np.conj(P[:, 1]) ** 1
    assert np.allclose(got[:, 0], expect0, atol=1e-12)
    assert np.allclose(got[:, 1], expect1, atol=1e-12)


def test_theta_cone_of_cusp_is_cone6():
    cone = theta_cone(cusp())
    ref = cone6()
    assert cone.weights.is_unit
    assert cone.polynomials == ref.polynomials


def test_theta_transfer_identity(bump2):
    X = cusp()
    rng = np.random.default_rng(9)
    for _ in range(3):
        zeta = np.exp(2j * np.pi * rng.integers(0, 6) / 6)
        t = 0.25 * (rng.standard_normal() + 1j * rng.standard_normal())
        z = np.array([t, zeta * t])  # on the cone z1^6 = z2^6
        x = theta_map(X.weights, z)
        rep = solve_weighted_via_cone(X, bump2, x, PARAMS, cone_point=z)
        diff = abs(rep.direct.value - rep.via_cone.value)
        assert diff <= 1e-5 * (1 + abs(rep.via_cone.value))


def test_theta_transfer_trivials(bump2):
    X = cusp()
    rep = solve_weighted_via_cone(X, bump2, np.zeros(2), PARAMS)
    assert rep.direct.value == 0 and rep.via_cone.value == 0
    zform = make_form("zero", 2)
    rep = solve_weighted_via_cone(X, zform, np.array([1.0, 1.0]), PARAMS)
    assert rep.direct.value == 0 and rep.via_cone.value == 0


def test_solver_linearity(bump3):
    V = quadric_cone()
    other = make_form("bump-dbar", 3, h_terms=[((0, 1, 0), 1.0)], r0=0.25, radius=0.9)
    combo = combine_forms(2.0, bump3, -0.5j, other)
    z = np.array([1.0, 1.0, 1.0]) * 0.4
    va = solve(V, bump3, z, PARAMS).value
    vb = solve(V, other, z, PARAMS).value
    vc = solve(V, combo, z, PARAMS).value
    assert abs(vc - (2.0 * va - 0.5j * vb)) < 1e-7


def test_scale_form_halves(bump3):
    V = quadric_cone()
    z = np.array([1.0, 1.0, 1.0]) * 0.4
    v1 = solve(V, bump3, z, PARAMS).value
    v2 = solve(V, scale_form(2.0, bump3), z, PARAMS).value
    assert abs(v2 - 2 * v1) < 1e-8 * (1 + abs(v1))


def test_g_zero_on_all_fixtures(bump2, bump3):
    fixtures = [(line2(), bump2), (quadric_cone(), bump3), (cusp(), bump2), (cone6(), bump2)]
    for V, form in fixtures:
        assert solve(V, form, np.zeros(V.ambient_dim), PARAMS).value == 0
