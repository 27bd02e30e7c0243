"""Poincare-Dulac normalization, the Newton step and the family driver."""

from __future__ import annotations

import math
import random
from math import factorial

import pytest
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st

from cartannf.cartan import NormalFormDecomposition, decompose_over_module
from cartannf.errors import CartanViolation, CommutationFailure, SolveInconsistent
from cartannf.families import FamilyConfig, module_field, random_cartan_family, random_ring_element, standard_morphisms
from cartannf.fields import JetDiffeo, VectorField, compose, invert, lie_bracket, pullback
from cartannf.hamiltonian import build_ito_morphism
from cartannf.normalizer import (
    Gauge,
    Mode,
    NewtonState,
    NotRegular,
    exact_divide,
    newton_step,
    normalize_family,
    poincare_dulac_normalize,
    stepwise_step,
    tilde_D,
)
from cartannf.scalars import Arith
from cartannf.series import FormalSeries
from cartannf.torus import LieMorphism, nonzero_weight_part, zero_weight_projection

from conftest import fields, series

MORPH = standard_morphisms()
FLOAT = Arith(False, 1e-12)


def jet_map(phi: JetDiffeo, k: int) -> list:
    return [c.truncate(k) for c in phi.components]


# -- polynomial division ------------------------------------------------------------


@given(series(lo=0, hi=2, max_terms=3), series(lo=0, hi=2, max_terms=3))
def test_exact_divide_recovers_factor(g, h):
    if g.is_zero():
        return
    g8, h8 = g.with_order(8), h.with_order(8)
    assert exact_divide(g8 * h8, g8) == h8


def test_exact_divide_rejects_remainder():
    x = FormalSeries.variable(0, 2, 4)
    y = FormalSeries.variable(1, 2, 4)
    with pytest.raises(SolveInconsistent):
        exact_divide(x + y * y, x)


# -- the D~ operators ----------------------------------------------------------------


def random_decomposition(S, seed, order=6):
    rng = random.Random(seed)
    A = [[random_ring_element(S, order, order, rng, 3, min_degree=0) for _ in range(S.l)] for _ in range(S.l)]
    return NormalFormDecomposition(A, S.basis_fields(order), [1] * S.l, S)


@given(st.integers(0, 10**6), fields(n=4, order=6, lo=1, hi=4, max_terms=2), st.integers(0, 1))
def test_tilde_D_is_nilpotent(seed, V, i):
    dec = random_decomposition(MORPH["ito2"], seed)
    assert tilde_D(dec, i, tilde_D(dec, i, V)).is_zero()


# -- single-field normal form -------------------------------------------------------


def test_normal_field_is_left_alone():
    S = MORPH["saddle"]
    X = S.basis_fields(8)[0].times(FormalSeries(2, 8, {(0, 0): 1, (1, 1): 2}))
    NF, phi = poincare_dulac_normalize(X)
    assert NF == X and phi.is_identity()


def test_diagonalized_example_coefficients():
    # x^2 d/dx + (x + y) d/dy in u = x, v = x + y
    N = 12
    X = VectorField.from_terms({((2, 0), 0): 1, ((2, 0), 1): 1, ((0, 1), 1): 1}, 2, N)
    NF, phi = poincare_dulac_normalize(X, gauge=Gauge.ZERO_ON_KERNEL)
    assert NF == VectorField.from_terms({((2, 0), 0): 1, ((0, 1), 1): 1}, 2, N)
    assert pullback(phi, X) == NF
    v = phi.components[1]
    for k in range(2, 11):
        assert v.coeff((k, 0)) == factorial(k - 1)


def test_nonresonant_float_field_is_linearized():
    lam = [1.0, math.sqrt(2)]
    N = 6
    s = VectorField.diagonal(lam, N, FLOAT)
    X = s + VectorField.from_terms({((2, 0), 0): 0.5, ((1, 1), 1): -1.0, ((0, 3), 0): 0.25}, 2, N, FLOAT)
    NF, _ = poincare_dulac_normalize(X, s)
    assert (NF - s).is_zero()


def test_linear_part_mismatch_is_rejected():
    X = VectorField.diagonal([1, -1], 4)
    with pytest.raises(ValueError):
        poincare_dulac_normalize(X, VectorField.diagonal([1, 2], 4))


# -- Newton step --------------------------------------------------------------------


def initial_state(fam, m):
    S = fam.S
    d = [int(X.valuation) for X in fam.fields]
    st_ = NewtonState(list(fam.fields), d, 1, JetDiffeo.identity(S.n, fam.cap), S, fam.g0)
    while st_.m < m:
        st_ = stepwise_step(st_)
    return st_


@pytest.mark.parametrize("name,orders", [("saddle", (1,)), ("ito2", (1, 1)), ("ito2", (1, 3)), ("resonant3", (1,))])
@pytest.mark.parametrize("seed", range(3))
def test_one_newton_step_doubles(name, orders, seed):
    fam = random_cartan_family(MORPH[name], FamilyConfig(N=8, orders=orders), seed)
    m = 4 if max(orders) > 2 else 2
    state = initial_state(fam, m)
    new = newton_step(state)
    rec = new.history[-1]
    assert new.m == 2 * m
    assert rec.normal_ok and rec.residual_ok and rec.rest_t_ok
    for i, X in enumerate(new.fields):
        assert nonzero_weight_part(X.jet(2 * m + new.orders[i] - 1), fam.S).is_zero()
    for b in rec.buckets:
        for i in range(len(new.fields)):
            F = b.F[i] if b.F[i] is not None else VectorField.zero(fam.S.n, fam.cap)
            assert (F + lie_bracket(b.U, rec.NF[i])).jet(2 * m + new.orders[i] - 1).is_zero()
        # the generator lives in its own weight space
        assert zero_weight_projection(b.U, fam.S).is_zero()
    for X0, X in zip(fam.fields, new.fields):
        assert pullback(new.psi, X0) == X


def test_normal_family_gives_zero_generator():
    fam = random_cartan_family(MORPH["ito2"], FamilyConfig(N=8, orders=(1, 1)), 0)
    state = NewtonState(list(fam.normal), [1, 1], 2, JetDiffeo.identity(4, fam.cap), fam.S, fam.g0)
    new = newton_step(state)
    assert new.psi.is_identity()
    assert all(b.U.is_zero() for b in new.history[-1].buckets)


def test_ito_single_field_matches_stepwise_gauge():
    N = 9
    S = build_ito_morphism(1)
    x, y = (FormalSeries.variable(k, 2, N) for k in range(2))
    normal = S.basis_fields(N)[0].times(FormalSeries.constant(1, 2, N) + x * y)
    X = pullback(JetDiffeo([x + x * x * y * y, y]), normal)
    state = NewtonState([X], [1], 1, JetDiffeo.identity(2, N), S, [1])
    state = stepwise_step(state)
    newton = newton_step(state)
    ref = stepwise_step(stepwise_step(state))
    m2 = newton.m
    assert jet_map(newton.psi, m2) == jet_map(ref.psi, m2)
    assert newton.fields[0].jet(m2) == ref.fields[0].jet(m2)
    _, psi_pd = poincare_dulac_normalize(X)
    assert jet_map(newton.psi, m2) == jet_map(psi_pd, m2)


def test_newton_step_needs_cartan_family():
    S = MORPH["ito2"]
    order = 8
    xy = FormalSeries(4, order, {(1, 0, 1, 0): 1})
    X1 = S.basis_fields(order)[0] + S.basis_fields(order)[1].scale(mpq(7, 23))
    X2 = X1.times(xy)
    state = NewtonState([X1, X2], [1, 3], 2, JetDiffeo.identity(4, order), S, [1, mpq(7, 23)])
    with pytest.raises(CartanViolation):
        newton_step(state)


# -- driver -------------------------------------------------------------------------


def test_linear_family_needs_no_change():
    S = MORPH["ito2"]
    fields_ = [S.basis_fields(6)[0] + S.basis_fields(6)[1].scale(mpq(2, 7)), S.basis_fields(6)[1]]
    for mode in Mode:
        NF, psi, rep = normalize_family(fields_, S, 6, mode)
        assert psi.is_identity() and NF == fields_


@pytest.mark.parametrize("seed", range(3))
@pytest.mark.parametrize("orders", [(1, 1), (1, 3)])
def test_stepwise_and_newton_agree_on_normality(seed, orders):
    fam = random_cartan_family(MORPH["ito2"], FamilyConfig(N=8, orders=orders), seed)
    out = {}
    for mode in Mode:
        NF, psi, rep = normalize_family(fam.fields, fam.S, 8, mode)
        assert rep.master_invariant and rep.normalized
        assert all(nonzero_weight_part(P, fam.S).is_zero() for P in NF)
        out[mode] = (NF, psi)
    for X, P in zip(fam.fields, out[Mode.NEWTON][0]):
        assert pullback(out[Mode.NEWTON][1], X.with_order(P.order)).jet(P.max_degree()) == P.jet(P.max_degree())


def test_report_records_certificate_and_radii():
    fam = random_cartan_family(MORPH["ito2"], FamilyConfig(N=8, orders=(1, 3)), 1)
    _, _, rep = normalize_family(fam.fields, fam.S, 8, Mode.NEWTON, seed=5)
    data = rep.to_json(fam.S.arith)
    assert data["cartan"]["cartan"] is True
    assert data["p0"] == 1
    assert data["seed"] == 5
    assert [s["kind"] for s in data["steps"]].count("newton") >= 1
    assert all(e["rho"] <= e["r"] for e in data["radius_ledger"])


def test_commutation_failure_is_reported():
    S = MORPH["ito2"]
    X1 = S.basis_fields(6)[0] + S.basis_fields(6)[1].scale(mpq(7, 23))
    X2 = S.basis_fields(6)[1] + VectorField.from_terms({((0, 2, 0, 0), 0): 1}, 4, 6)
    with pytest.raises(CommutationFailure):
        normalize_family([X1, X2], S, 6)


def test_non_regular_linear_part_is_rejected():
    S = MORPH["ito2"]
    X1 = S.basis_fields(6)[0] + S.basis_fields(6)[1]  # x1 + x2 - y1 - y2 resonates: x1 y2 d/dx1 ...
    with pytest.raises(NotRegular):
        normalize_family([X1, S.basis_fields(6)[1]], S, 6)
    X1 = VectorField.diagonal([1, 2, -1, -2], 6)
    with pytest.raises(NotRegular):
        normalize_family([X1, S.basis_fields(6)[1]], S, 6)


def test_stepwise_mode_accepts_non_module_normal_forms():
    # the two-dimensional example, diagonalized: its normal form is not a multiple of v d/dv
    N = 10
    X = VectorField.from_terms({((2, 0), 0): 1, ((2, 0), 1): 1, ((0, 1), 1): 1}, 2, N)
    S = LieMorphism([[0, 1]])
    NF, psi, rep = normalize_family([X], S, N, Mode.STEPWISE)
    assert rep.certificate is None and rep.normalized and rep.master_invariant
    assert NF[0] == VectorField.from_terms({((2, 0), 0): 1, ((0, 1), 1): 1}, 2, N)
