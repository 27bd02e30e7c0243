"""Scalars, truncated series, domination and majorant norms."""

from __future__ import annotations

import math

import pytest
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st

from cartannf.errors import DimensionMismatch, InvalidBound
from cartannf.scalars import EXACT, Arith, GaussianRational
from cartannf.series import (
    FormalSeries,
    PolyradiusSpec,
    bar,
    dominates,
    grlex_key,
    inverse_bound,
    majorant_norm,
    monomial_inverse_norm,
    multi_indices,
)

from conftest import series

FLOAT = Arith(False, 1e-12)


def x(i, n=2, N=5, arith=EXACT):
    return FormalSeries.variable(i, n, N, arith)


# -- scalars ----------------------------------------------------------------------


def test_gaussian_rational_arithmetic_is_exact():
    z = GaussianRational(1, 2)
    w = GaussianRational(mpq(1, 3), -1)
    assert z * w == GaussianRational(mpq(7, 3), mpq(-1, 3))
    assert (z / w) * w == z
    assert z - z == 0
    assert isinstance(z * z.conjugate(), type(mpq(0)))


def test_coerce_reads_rational_strings_and_decimals():
    assert EXACT.coerce("3/4") == mpq(3, 4)
    assert EXACT.coerce(0.1) == mpq(1, 10)
    assert EXACT.coerce({"re": "1/2", "im": "-1"}) == GaussianRational(mpq(1, 2), -1)
    assert EXACT.to_json(mpq(-5, 3)) == {"re": "-5/3", "im": "0"}


def test_float_zero_test_uses_tolerance():
    assert FLOAT.is_zero(1e-13)
    assert not FLOAT.is_zero(1e-11)
    with pytest.raises(ValueError):
        Arith(False, 0.0)


# -- series arithmetic ------------------------------------------------------------


def test_additive_inverse_is_zero():
    assert (x(0) + (-x(0))).is_zero()


def test_add_collects_terms():
    f = (x(0) + x(1)) + x(1)
    assert f.terms == {(1, 0): 1, (0, 1): 2}


def test_binomial_square():
    f = (x(0) + x(1)) ** 2
    assert f.terms == {(2, 0): 1, (1, 1): 2, (0, 2): 1}


def test_multiplication_truncates_at_cap():
    f = FormalSeries.monomial((3, 0), 1, 5)
    assert (f * f).is_zero()
    assert (f * x(0)).terms == {(4, 0): 1}


def test_mixed_caps_are_rejected():
    with pytest.raises(DimensionMismatch):
        x(0, N=4) + x(0, N=5)
    with pytest.raises(DimensionMismatch):
        x(0, n=2) * FormalSeries.variable(0, 3, 5)


def test_monomials_above_cap_are_discarded_on_construction():
    f = FormalSeries(2, 3, {(2, 2): 1, (1, 0): 2})
    assert f.terms == {(1, 0): 2}
    assert f.valuation == 1


def test_grlex_order_of_items():
    f = FormalSeries(2, 4, {(0, 2): 1, (2, 0): 1, (1, 0): 1, (1, 1): 1})
    assert [q for q, _ in f.items()] == [(1, 0), (2, 0), (1, 1), (0, 2)]
    assert sorted([(0, 1), (1, 0)], key=grlex_key) == [(1, 0), (0, 1)]


def test_multi_indices_counts():
    for n, d in [(2, 3), (3, 4), (4, 2)]:
        got = list(multi_indices(n, d))
        assert len(got) == math.comb(d + n - 1, n - 1)
        assert len(set(got)) == len(got)
        assert all(sum(q) == d for q in got)


def test_json_round_trip():
    f = FormalSeries(2, 4, {(1, 0): mpq(1, 3), (0, 2): GaussianRational(1, -2)})
    assert FormalSeries.from_json(f.to_json()) == f


@given(series(), series())
def test_addition_commutes(f, g):
    assert f + g == g + f


@given(series(), series(), series())
def test_ring_axioms(f, g, h):
    assert (f * g) * h == f * (g * h)
    assert f * (g + h) == f * g + f * h
    assert f * g == g * f


@given(series(lo=1, hi=3), series(lo=1, hi=3))
def test_order_of_product_is_additive(f, g):
    if f.is_zero() or g.is_zero():
        return
    d = f.valuation + g.valuation
    if d <= f.order:
        assert (f * g).valuation == d


@given(series())
def test_identity_element(f):
    assert f * FormalSeries.constant(1, 2, 5) == f


# -- norms and domination ----------------------------------------------------------


def test_norm_of_linear_form():
    R = (0.3, 0.7)
    assert majorant_norm(x(0) + x(1), R) == pytest.approx(1.0)


def test_polyradius_effective_radii():
    P = PolyradiusSpec(0.8, (1.0, 2.0), 0.5)
    assert P.radii == pytest.approx((0.4, 0.2))
    with pytest.raises(ValueError):
        PolyradiusSpec(1.0, (1.0,), 0.0)


@given(series(), series())
def test_norm_is_submultiplicative(f, g):
    R = (0.6, 0.9)
    assert majorant_norm(f * g, R) <= majorant_norm(f, R) * majorant_norm(g, R) + 1e-12


@given(series(), series())
def test_domination_of_product_by_bars(f, g):
    assert dominates(bar(f).with_order(5) * bar(g).with_order(5), f * g)


@given(series(lo=2), st.floats(0.1, 0.9), st.floats(0.1, 0.9))
def test_norm_scales_with_radius(f, a, b):
    rho, rho2 = min(a, b), max(a, b)
    v = (1.0, 0.5)
    lhs = majorant_norm(f, [rho * t for t in v])
    rhs = (rho / rho2) ** 2 * majorant_norm(f, [rho2 * t for t in v])
    assert lhs <= rhs + 1e-12


@given(series(), st.floats(0.1, 1.0), st.floats(0.1, 1.0))
def test_norm_is_monotone_in_radius(f, r, s):
    assert majorant_norm(f, (r, s)) <= majorant_norm(f, (max(r, s), 1.0)) + 1e-12


@given(series(hi=4), st.integers(0, 1))
def test_derivative_norm_bound(f, i):
    # degree <= d polynomial: |df/dx_i|_R <= d / R_i |f|_R
    R = (0.5, 0.8)
    d = max(f.max_degree(), 1)
    assert majorant_norm(f.diff(i), R) <= d / R[i] * majorant_norm(f, R) + 1e-12


def test_inverse_bound_trivial_cases():
    R = PolyradiusSpec(0.5, (1.0, 1.0))
    T = (2, 1)
    inv = monomial_inverse_norm(1, T, R)
    assert inverse_bound(inv, 0.0) == pytest.approx(1 / 0.5**3)
    assert inverse_bound(1.0, 0.5) == pytest.approx(2.0)
    with pytest.raises(InvalidBound):
        inverse_bound(1.0, 1.0)


def test_inverse_bound_dominates_geometric_expansion():
    # 1/(1 + g) = sum (-g)^k for g of positive order; compare norms at cap 12
    N = 12
    R = (0.4, 0.3)
    g = FormalSeries(2, N, {(1, 0): mpq(1, 2), (1, 1): mpq(-1, 3), (0, 2): mpq(1, 4)})
    total = FormalSeries.constant(1, 2, N)
    term = FormalSeries.constant(1, 2, N)
    for _ in range(N):
        term = term * (-g)
        total = total + term
    bound = inverse_bound(1.0, majorant_norm(g, R))
    assert majorant_norm(total, R) <= bound
