"""Shared builtin varieties and test forms, addressable by name from the CLI
and the test suite."""

from __future__ import annotations

from typing import Optional

from .forms import ZeroOneForm, bump_dbar_form, raw_bump_form, zero_form
from .variety import SparsePolynomial, Variety, Weights


def line2() -> Variety:
    """The line {z2 = 0} in C^2; smooth cone, d = 1."""
    q = SparsePolynomial.from_terms(2, [((0, 1), 1.0)])
    return Variety.build(Weights((1, 1)), [q], pure_dim=1)


def quadric_cone() -> Variety:
    """{z1 z2 = z3^2} in C^3; cone with an isolated singularity, d = 2."""
    q = SparsePolynomial.from_terms(3, [((1, 1, 0), 1.0), ((0, 0, 2), -1.0)])
    return Variety.build(Weights((1, 1, 1)), [q], pure_dim=2)


def cusp() -> Variety:
    """{x1^2 = x2^3} in C^2, weights (3, 2); weighted homogeneous, d = 1."""
    q = SparsePolynomial.from_terms(2, [((2, 0), 1.0), ((0, 3), -1.0)])
    return Variety.build(Weights((3, 2)), [q], pure_dim=1)


def cone6() -> Variety:
    """{z1^6 = z2^6} in C^2: the six lines that the cusp maps onto under
    z -> (z1^3, z2^2); cone, d = 1."""
    q = SparsePolynomial.from_terms(2, [((6, 0), 1.0), ((0, 6), -1.0)])
    return Variety.build(Weights((1, 1)), [q], pure_dim=1)


VARIETY_FIXTURES = {
    "line2": line2,
    "quadric-cone": quadric_cone,
    "cusp": cusp,
    "cone6": cone6,
}


def make_variety(name: str) -> Variety:
    try:
        return VARIETY_FIXTURES[name]()
    except KeyError:
        raise KeyError(
            f"unknown variety fixture {name!r}; available: {sorted(VARIETY_FIXTURES)}"
        ) from None


FORM_BUILTINS = ("zero", "bump-dbar", "raw-bump")


def make_form(
    name: str,
    n: int,
    h_terms: Optional[list] = None,
    r0: float = 0.3,
    radius: float = 1.0,
) -> ZeroOneForm:
    """Builtin form family.  `h_terms` is a term list [(exponents, coeff), ...]
    for the holomorphic factor of `bump-dbar` (default: the constant 1)."""
    if name == "zero":
        return zero_form(n, support_radius=radius)
    if name == "bump-dbar":
        if h_terms is None:
            h_terms = [((0,) * n, 1.0)]
        h = SparsePolynomial.from_terms(n, h_terms)
        return bump_dbar_form(h, r0, radius)
    if name == "raw-bump":
        return raw_bump_form(n, r0, radius)
    raise KeyError(f"unknown form builtin {name!r}; available: {FORM_BUILTINS}")
