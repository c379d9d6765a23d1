import numpy as np
import pytest

from dbarcone.fixtures import make_form
from dbarcone.forms import (
    bump_dbar_form,
    combine_forms,
    radial_cutoff,
    raw_bump_form,
    scale_form,
    zero_form,
)
from dbarcone.variety import SparsePolynomial


def test_support_mask_enforced():
    form = make_form("bump-dbar", 2, r0=0.3, radius=1.0)
    outside = np.array([[1.5, 0.0], [0.0, 2.0 + 1.0j]])
    assert np.all(form.coeff_matrix(outside) == 0)
    raw = make_form("raw-bump", 2, r0=0.3, radius=1.0)
    assert np.all(raw.coeff_matrix(outside) == 0)


def test_cutoff_plateau_values():
    pts = np.array([[0.1, 0.0], [0.2, 0.1], [3.0, 0.0]])
    chi = radial_cutoff(pts, 0.3, 1.0)
    assert chi[0] == 1.0 and chi[1] == 1.0 and chi[2] == 0.0
    mid = radial_cutoff(np.array([[0.7, 0.0]]), 0.3, 1.0)[0]
    assert 0.0 < mid < 1.0


def test_sup_bound_dominates_fresh_samples():
    form = make_form("bump-dbar", 3, h_terms=[((1, 0, 0), 1.0)], r0=0.2, radius=0.8)
    rng = np.random.default_rng(99)
    pts = rng.standard_normal((2000, 3)) + 1j * rng.standard_normal((2000, 3))
    pts *= (rng.uniform(0, 0.8, 2000) / np.linalg.norm(pts, axis=1))[:, None]
    vals = np.abs(form.coeff_matrix(pts))
    assert vals.max() <= form.sup_bound * 1.05  # estimate is a near-sup proxy


def test_bump_dbar_is_gradient_of_plateau():
    # f_k = h * chi'(|z|^2) * z_k by construction
    h = SparsePolynomial.from_terms(2, [((0, 0), 2.0)])
    form = bump_dbar_form(h, 0.3, 1.0)
    z = np.array([[0.5 + 0.1j, 0.3 - 0.2j]])
    vals = form.coeff_matrix(z)
    ratio = vals[0, 0] / z[0, 0], vals[0, 1] / z[0, 1]
    assert abs(ratio[0] - ratio[1]) < 1e-14  # shared radial factor


def test_zero_form_and_flags():
    z = zero_form(3)
    assert z.dbar_closed and z.sup_bound == 0.0
    raw = raw_bump_form(2, 0.3, 1.0)
    assert not raw.dbar_closed
    bump = make_form("bump-dbar", 2)
    assert bump.dbar_closed


def test_combine_and_scale():
    a = make_form("bump-dbar", 2, r0=0.3, radius=1.0)
    b = make_form("raw-bump", 2, r0=0.2, radius=0.8)
    c = combine_forms(2.0, a, 1.0j, b)
    pts = np.array([[0.4, 0.1], [0.05, 0.0]])
    got = c.coeff_matrix(pts)
    expect = 2.0 * a.coeff_matrix(pts) + 1.0j * b.coeff_matrix(pts)
    assert np.allclose(got, expect)
    assert not c.dbar_closed  # raw-bump is not closed
    s = scale_form(3.0, a)
    assert np.allclose(s.coeff_matrix(pts), 3.0 * a.coeff_matrix(pts))
    assert s.sup_bound == 3.0 * a.sup_bound


def test_make_form_validation():
    with pytest.raises(ValueError):
        make_form("bump-dbar", 2, r0=1.5, radius=1.0)
    with pytest.raises(KeyError):
        make_form("nope", 2)
