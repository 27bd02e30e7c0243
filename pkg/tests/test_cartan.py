"""Module decomposition, cofactor identities, Cartan certificates and the auto-normalization lemma."""

from __future__ import annotations

import random

import pytest
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st

from cartannf.cartan import (
    certify_cartan,
    check_auto_normalization,
    cofactor_transpose,
    decompose_over_module,
    det,
    matmul,
    normalized_order,
    single_field_morphism,
)
from cartannf.errors import CommutationFailure, NotInModule
from cartannf.families import FamilyConfig, module_field, random_cartan_family, random_ring_element, standard_morphisms
from cartannf.fields import VectorField, lie_bracket
from cartannf.hamiltonian import build_ito_morphism
from cartannf.series import FormalSeries

MORPH = standard_morphisms()
SADDLE = MORPH["saddle"]
ITO2 = MORPH["ito2"]


def ring_matrix(S, l, order, seed):
    rng = random.Random(seed)
    A = []
    for i in range(l):
        row = []
        for j in range(l):
            a = random_ring_element(S, order, order, rng, 3, min_degree=1)
            if i == j:
                a = a + FormalSeries.constant(rng.randint(1, 3), S.n, order)
            row.append(a)
        A.append(row)
    return A


def test_basis_fields_decompose_to_identity():
    dec = decompose_over_module(ITO2.basis_fields(6), ITO2)
    for i in range(2):
        for j in range(2):
            expected = FormalSeries.constant(1 if i == j else 0, 4, 6)
            assert dec.A[i][j] == expected
    cert = certify_cartan(dec)
    assert cert.cartan and cert.ord_detA == 0 and cert.p0 == 1


def test_saddle_decomposition_round_trip():
    S = build_ito_morphism(1)
    a = FormalSeries(2, 6, {(0, 0): 1, (1, 1): 1})
    NF = S.basis_fields(6)[0].times(a)
    dec = decompose_over_module([NF], S)
    assert dec.A[0][0] == a
    assert dec.recombine(0) == NF


def test_non_resonant_term_is_not_in_module():
    NF = SADDLE.basis_fields(5)[0] + VectorField.from_terms({((0, 2), 0): 1}, 2, 5)
    with pytest.raises(NotInModule):
        decompose_over_module([NF], SADDLE)


def test_resonant_term_outside_the_module():
    # x^2 y d/dx is resonant for the saddle but x^2 y d/dx alone is not a multiple of x d/dx - y d/dy
    NF = VectorField.from_terms({((1, 0), 0): 1, ((0, 1), 1): -1, ((2, 1), 0): 1}, 2, 5)
    with pytest.raises(NotInModule):
        decompose_over_module([NF], SADDLE)


@given(st.integers(0, 10**6), st.sampled_from(["ito2", "plane3"]))
def test_cofactor_identity(seed, name):
    S = MORPH[name]
    A = ring_matrix(S, 2, 6, seed)
    C = cofactor_transpose(A)
    d = det(A)
    for M in (matmul(C, A), matmul(A, C)):
        for i in range(2):
            for j in range(2):
                assert M[i][j] == (d if i == j else FormalSeries.zero(S.n, 6))


@given(st.integers(0, 10**6))
def test_decomposition_round_trip_random(seed):
    A = ring_matrix(ITO2, 2, 6, seed)
    NF = [module_field(row, ITO2, 6) for row in A]
    dec = decompose_over_module(NF, ITO2)
    # a_ij S_j has degree deg(a_ij) + 1, so A is recovered through degree N - 1
    assert [[a.truncate(5) for a in row] for row in dec.A] == [[a.truncate(5) for a in row] for row in A]
    assert all(dec.recombine(i) == NF[i] for i in range(2))


def test_dependent_juniors_fail_the_certificate():
    # X_2 = (x1 y1) X_1: rows proportional, det of juniors vanishes
    order = 6
    xy = FormalSeries(4, order, {(1, 0, 1, 0): 1})
    X1 = ITO2.basis_fields(order)[0] + ITO2.basis_fields(order)[1].scale(mpq(1, 3))
    X2 = X1.times(xy)
    cert = certify_cartan(decompose_over_module([X1, X2], ITO2))
    assert not cert.cartan


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("orders", [(1, 1), (1, 3), (1, 5)])
def test_order_of_det_matches_sum_of_orders(seed, orders):
    fam = random_cartan_family(ITO2, FamilyConfig(N=8, orders=orders), seed)
    dec = decompose_over_module(fam.normal, ITO2)
    cert = certify_cartan(dec)
    assert cert.cartan
    assert cert.ord_detA == sum(d - 1 for d in orders) == cert.predicted_ord


def test_single_field_morphism_reads_diagonal():
    s = VectorField.diagonal([2, -3], 4)
    S = single_field_morphism(s)
    assert S.Lambda == ((2, -3),)
    with pytest.raises(ValueError):
        single_field_morphism(VectorField.linear([[1, 1], [0, 2]], 4))


# -- auto-normalization -----------------------------------------------------------


def commuting_pair(k, seed):
    """Regular X normalized to order k and a commuting Y (Ord(Y) = 3)."""
    cfg = FamilyConfig(N=k + 6, orders=(1, 3), jet_min_degree=k + 1, jet_degree=k + 3)
    fam = random_cartan_family(ITO2, cfg, seed)
    return fam


@pytest.mark.parametrize("k", [1, 2, 4, 8])
@pytest.mark.parametrize("seed", range(3))
def test_lemma_on_constructed_pairs(k, seed):
    fam = commuting_pair(k, seed)
    X, Y = fam.fields
    s_morph = single_field_morphism(X.jet(1))
    assert normalized_order(X, s_morph) >= k
    holds, target = check_auto_normalization(X, Y, s_morph, k)
    assert holds
    assert target == int(Y.valuation) + k - 1


def test_lemma_with_y_equal_x():
    fam = commuting_pair(2, 0)
    X = fam.fields[0]
    s_morph = single_field_morphism(X.jet(1))
    holds, target = check_auto_normalization(X, X, s_morph, 2)
    assert holds and target == 2


def test_lemma_at_k_one_junior_part_commutes():
    fam = commuting_pair(1, 4)
    X, Y = fam.fields
    s_morph = single_field_morphism(X.jet(1))
    holds, target = check_auto_normalization(X, Y, s_morph, 1)
    assert holds and target == int(Y.valuation)
    s = X.jet(1)
    assert lie_bracket(s, Y.junior()).is_zero()


def test_lemma_requires_commutation():
    X = SADDLE.basis_fields(5)[0]
    Y = VectorField.from_terms({((0, 2), 0): 1}, 2, 5)
    with pytest.raises(CommutationFailure):
        check_auto_normalization(X, Y, single_field_morphism(X), 1)
