"""Constructors for commuting families with a known normal form.

A family ``NF_i = sum_j a_ij S_j`` with every ``a_ij`` in the first-integral
ring commutes, since ``S_j(a) = 0``.  Pulling it back by a polynomial jet
diffeomorphism gives a non-normal commuting family whose normal form is known
up to the zero-weight gauge.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Sequence

from gmpy2 import mpq

from .fields import JetDiffeo, VectorField, pullback
from .scalars import EXACT, Arith
from .series import FormalSeries, multi_indices
from .torus import LieMorphism, first_integral_monomials, find_regular_element


@dataclass(frozen=True)
class FamilyConfig:
    """Knobs for :func:`random_cartan_family`.

    ``orders`` lists d_i (d_1 must be 1); ``extra_ring_terms`` is the number
    of random higher ring monomials per a_ij; ``jet_degree`` bounds the degree
    of the random conjugating jet and ``jet_terms`` its size per component.
    """

    N: int = 8
    orders: tuple = (1,)
    extra_ring_terms: int = 2
    jet_min_degree: int = 2
    jet_degree: int = 4
    jet_terms: int = 2
    coeff_range: int = 3
    scale: object = 1


@dataclass
class CartanFamily:
    S: LieMorphism
    g0: list
    A: list
    normal: list
    fields: list
    jet: JetDiffeo
    config: FamilyConfig = field(default_factory=FamilyConfig)

    @property
    def cap(self) -> int:
        return self.fields[0].order


def _rand_coeff(rng: random.Random, bound: int, arith: Arith):
    num = rng.choice([v for v in range(-bound, bound + 1) if v])
    den = rng.randint(1, bound)
    return arith.coerce(mpq(num, den)) if arith.exact else complex(num / den)


def random_ring_element(
    S: LieMorphism,
    order: int,
    cap: int,
    rng: random.Random,
    terms: int,
    coeff_range: int = 3,
    *,
    min_degree: int = 1,
    scale=1,
) -> FormalSeries:
    """Random polynomial supported on first-integral monomials of degree in [min_degree, cap]."""
    arith = S.arith
    pool = [q for q in first_integral_monomials(S, cap) if sum(q) >= min_degree]
    out = {}
    for q in rng.sample(pool, min(terms, len(pool))) if pool else []:
        out[q] = _rand_coeff(rng, coeff_range, arith) * arith.coerce(scale)
    return FormalSeries(S.n, order, out, arith)


def random_jet(
    n: int,
    order: int,
    rng: random.Random,
    arith: Arith = EXACT,
    *,
    min_degree: int = 2,
    max_degree: int = 4,
    terms: int = 2,
    coeff_range: int = 3,
    scale=1,
) -> JetDiffeo:
    """Id + V with V a random polynomial of degrees in [min_degree, max_degree]."""
    comps = []
    for k in range(n):
        t = {}
        for _ in range(terms):
            deg = rng.randint(min_degree, max_degree)
            q = rng.choice(list(multi_indices(n, deg)))
            t[q] = _rand_coeff(rng, coeff_range, arith) * arith.coerce(scale)
        comps.append(FormalSeries(n, order, t, arith))
    return JetDiffeo.from_field(VectorField(comps))


def module_field(A_row: Sequence[FormalSeries], S: LieMorphism, order: int) -> VectorField:
    out = VectorField.zero(S.n, order, S.arith)
    for a, Sj in zip(A_row, S.basis_fields(order)):
        if not a.is_zero():
            out = out + Sj.times(a)
    return out


def random_cartan_family(S: LieMorphism, config: FamilyConfig = FamilyConfig(), seed: int = 0) -> CartanFamily:
    """Commuting family with orders ``config.orders`` and free junior parts.

    The matrix A has ``A(0)`` diagonal on the members with d_i = 1 (first row
    equal to a regular g0); a member with d_i > 1 gets ``a_ii`` of order
    d_i - 1 built from a ring monomial, so det of the junior matrix is a
    nonzero monomial product.  The working cap is ``N + max(d_i) - 1``.
    """
    rng = random.Random(seed)
    arith = S.arith
    l = S.l
    orders = tuple(config.orders) + (1,) * (l - len(config.orders))
    if orders[0] != 1:
        raise ValueError("the first member must have order 1")
    cap = config.N + max(orders) - 1
    g0 = find_regular_element(S, cap, seed=seed)
    ring = first_integral_monomials(S, cap)
    A = []
    for i in range(l):
        row = []
        d = orders[i]
        for j in range(l):
            if i == 0:
                base = FormalSeries.constant(g0[j], S.n, cap, arith) if not arith.is_zero(g0[j]) else FormalSeries.zero(S.n, cap, arith)
            elif d == 1:
                base = FormalSeries.constant(arith.one if i == j else arith.zero, S.n, cap, arith)
            else:
                base = FormalSeries.zero(S.n, cap, arith)
                if i == j:
                    juniors = [q for q in ring if sum(q) == d - 1]
                    if not juniors:
                        raise ValueError(f"no first integral of degree {d - 1} for member {i + 1}")
                    base = FormalSeries.monomial(rng.choice(juniors), _rand_coeff(rng, config.coeff_range, arith), cap, arith)
            low = 1 if d == 1 else d
            extra = random_ring_element(
                S, cap, max(low, 1) + 3, rng, config.extra_ring_terms, config.coeff_range,
                min_degree=low, scale=config.scale,
            )
            row.append(base + extra)
        A.append(row)
    normal = [module_field(A[i], S, cap) for i in range(l)]
    jet = random_jet(
        S.n, cap, rng, arith,
        min_degree=config.jet_min_degree, max_degree=config.jet_degree,
        terms=config.jet_terms, coeff_range=config.coeff_range, scale=config.scale,
    )
    fields = [pullback(jet, Y) for Y in normal]
    return CartanFamily(S, g0, A, normal, fields, jet, config)


def standard_morphisms(arith: Arith = EXACT) -> dict:
    """A few diagonal morphisms with nontrivial first-integral rings."""
    return {
        "saddle": LieMorphism([[1, -1]], arith),
        "ito2": LieMorphism([[1, 0, -1, 0], [0, 1, 0, -1]], arith),
        "resonant3": LieMorphism([[1, 1, -2]], arith),
        "plane3": LieMorphism([[1, 0, -1], [0, 1, -1]], arith),
    }
