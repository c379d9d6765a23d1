import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dbarcone.errors import NonHomogeneous, NotOnVariety, ZeroPolynomial
from dbarcone.fixtures import cone6, cusp, line2, quadric_cone
from dbarcone.variety import (
    SparsePolynomial,
    Variety,
    Weights,
    act,
    contains,
    is_regular,
    project_batch,
    project_to_variety,
    weighted_degree,
)


def test_weighted_degree_examples():
    # z1^2 - z2^3 with weights (3, 2): both monomials weigh 6
    q = SparsePolynomial.from_terms(2, [((2, 0), 1.0), ((0, 3), -1.0)])
    assert weighted_degree(q, Weights((3, 2))) == 6
    # z1 z2 - z3^2, plain degrees
    q = SparsePolynomial.from_terms(3, [((1, 1, 0), 1.0), ((0, 0, 2), -1.0)])
    assert weighted_degree(q, Weights((1, 1, 1))) == 2


def test_weighted_degree_rejects_inhomogeneous():
    q = SparsePolynomial.from_terms(2, [((1, 0), 1.0), ((0, 2), 1.0)])
    with pytest.raises(NonHomogeneous):
        weighted_degree(q, Weights((1, 1)))


def test_weighted_degree_rejects_zero():
    with pytest.raises(ZeroPolynomial):
        weighted_degree(SparsePolynomial.from_terms(2, []), Weights((1, 1)))


def test_act_examples():
    w = Weights((3, 2))
    assert np.allclose(act(1.0, w, [2.0, 3.0]), [2.0, 3.0])
    assert np.allclose(act(0.0, w, [2.0, 3.0]), [0.0, 0.0])
    assert np.allclose(act(2.0, w, [1.0, 1.0]), [8.0, 4.0])


def test_contains_examples():
    V = quadric_cone()
    assert contains(V, [0, 0, 0])
    assert contains(V, [1, 1, 1])
    assert not contains(V, [1, 1, 0], tol=1e-9)


def test_is_regular_examples():
    V = quadric_cone()
    assert is_regular(V, [1, 1, 1])
    assert not is_regular(V, [0, 0, 0])
    L = line2()
    assert is_regular(L, [1, 0])
    with pytest.raises(NotOnVariety):
        is_regular(V, [1, 1, 0.5])


def test_is_regular_rank_matches_svd():
    # direct SVD cross-check at a smooth point of the quadric cone
    V = quadric_cone()
    J = V.jacobian(np.array([1.0, 1.0, 1.0], dtype=complex))
    sv = np.linalg.svd(J, compute_uv=False)
    assert np.sum(sv > 1e-8 * sv[0]) == 1 == V.ambient_dim - V.pure_dim


def test_projection_fixed_point_and_origin():
    V = quadric_cone()
    z = np.array([1.0, 1.0, 1.0], dtype=complex)
    assert np.allclose(project_to_variety(V, z), z)
    assert np.allclose(project_to_variety(V, np.zeros(3, complex)), 0.0)


def test_projection_near_point():
    V = quadric_cone()
    eps = 1e-3
    z0 = np.array([1.0, 1.0, 1.0 + eps], dtype=complex)
    z = project_to_variety(V, z0)
    assert np.abs(V.residuals(z)).max() <= 1e-11
    assert np.linalg.norm(z - z0) <= 5 * eps


def test_projection_away_from_singularity_flags():
    # seeds collapsing onto the singular origin raise rather than return junk
    V = quadric_cone()
    z = project_to_variety(V, np.array([1e-14, 1e-14, 0], dtype=complex))
    assert np.linalg.norm(z) < 1e-10  # origin is on the variety: fixed point


complex_moderate = st.complex_numbers(
    max_magnitude=3.0, allow_nan=False, allow_infinity=False
)


@st.composite
def weights_strategy(draw):
    entries = draw(st.lists(st.integers(1, 4), min_size=2, max_size=4))
    return Weights(tuple(entries))


@st.composite
def homogeneous_poly(draw, weights: Weights):
    """Random weighted homogeneous polynomial: random base monomial fixes the
    degree, further monomials are rejection-sampled to match it."""
    n = weights.n
    b = weights.as_array()
    base = tuple(draw(st.integers(0, 3)) for _ in range(n))
    if sum(base) == 0:
        base = tuple(1 if i == 0 else 0 for i in range(n))
    degree = int(np.dot(base, b))
    terms = [(base, draw(complex_moderate) + 1.0)]
    for _ in range(draw(st.integers(0, 3))):
        cand = tuple(draw(st.integers(0, 6)) for _ in range(n))
        if int(np.dot(cand, b)) == degree and sum(cand) > 0:
            terms.append((cand, draw(complex_moderate)))
    return SparsePolynomial.from_terms(n, terms), degree


@settings(max_examples=40, deadline=None)
@given(data=st.data(), s=complex_moderate)
def test_homogeneity_identity_ambient(data, s):
    w = data.draw(weights_strategy())
    poly, degree = data.draw(homogeneous_poly(w))
    if poly.is_zero:
        return
    assert weighted_degree(poly, w) == degree
    z = np.array([data.draw(complex_moderate) for _ in range(w.n)])
    lhs = poly.eval(act(s, w, z).reshape(1, -1))[0]
    rhs = s ** degree * poly.eval(z.reshape(1, -1))[0]
    scale = (1 + abs(s) ** degree) * (1 + np.linalg.norm(z) ** poly.max_exponent())
    assert abs(lhs - rhs) <= 1e-10 * max(scale, 1.0)


@settings(max_examples=40, deadline=None)
@given(s=complex_moderate, t=complex_moderate)
def test_act_group_law(s, t):
    w = Weights((3, 2, 1))
    z = np.array([0.5 + 0.25j, -1.0 + 0.5j, 2.0])
    a = act(s, w, act(t, w, z))
    b = act(s * t, w, z)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(s=st.complex_numbers(min_magnitude=0.01, max_magnitude=3.0,
                            allow_nan=False, allow_infinity=False),
       seed=st.integers(0, 10_000))
def test_orbit_closure_on_fixtures(s, seed):
    rng = np.random.default_rng(seed)
    for V in (quadric_cone(), cusp(), cone6()):
        raw = rng.standard_normal(V.ambient_dim) + 1j * rng.standard_normal(V.ambient_dim)
        z, ok = project_batch(V, raw.reshape(1, -1))
        if not ok[0]:
            continue
        assert contains(V, act(s, V.weights, z[0]), tol=1e-7)


@settings(max_examples=25, deadline=None)
@given(s=st.complex_numbers(min_magnitude=0.5, max_magnitude=2.0,
                            allow_nan=False, allow_infinity=False))
def test_is_regular_scale_invariant_on_cones(s):
    V = quadric_cone()
    z = np.array([1.0, 4.0, 2.0], dtype=complex)  # on z1 z2 = z3^2
    assert is_regular(V, z) == is_regular(V, act(s, V.weights, z))


def test_homogeneity_identity_on_variety_samples():
    # the same identity with points produced by projection onto the variety
    rng = np.random.default_rng(1234)
    V = cusp()
    b = V.weights
    raw = rng.standard_normal((100, 2)) + 1j * rng.standard_normal((100, 2))
    Z, ok = project_batch(V, raw)
    Z = Z[ok]
    s_vals = 0.3 + rng.standard_normal(len(Z)) * 0.5 + 1j * rng.standard_normal(len(Z)) * 0.5
    q = V.polynomials[0]
    d = V.degrees[0]
    for z, s in zip(Z, s_vals):
        lhs = q.eval(act(s, b, z).reshape(1, -1))[0]
        rhs = s ** d * q.eval(z.reshape(1, -1))[0]
        scale = (1 + abs(s) ** d) * (1 + np.linalg.norm(z) ** q.max_exponent())
        assert abs(lhs - rhs) <= 1e-10 * scale


def test_variety_build_validates():
    q_bad = SparsePolynomial.from_terms(2, [((1, 0), 1.0), ((0, 2), 1.0)])
    with pytest.raises(NonHomogeneous):
        Variety.build(Weights((1, 1)), [q_bad])


def test_sparse_polynomial_gradients():
    q = SparsePolynomial.from_terms(3, [((1, 1, 0), 1.0), ((0, 0, 2), -1.0)])
    z = np.array([[1.0 + 1j, 2.0, 0.5j]])
    g1 = q.partial(0).eval(z)[0]
    g3 = q.partial(2).eval(z)[0]
    assert g1 == 2.0  # d/dz1 (z1 z2) = z2
    assert g3 == -2 * 0.5j


def test_projection_no_convergence_budget():
    from dbarcone.errors import NoConvergence

    with pytest.raises(NoConvergence):
        project_to_variety(
            quadric_cone(), np.array([5.0, -3.0, 9.0], dtype=complex), max_iter=1
        )
