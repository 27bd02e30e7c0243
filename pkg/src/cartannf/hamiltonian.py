"""Hamiltonian front-end: fields of Hamiltonians, the action-variable morphism, and checks.

Variables are ordered ``(x_1, ..., x_n, y_1, ..., y_n)`` and the field of H is
``x' = dH/dy, y' = -dH/dx``, so ``H = sum lambda_k x_k y_k`` gives the linear
field ``sum lambda_k (x_k d/dx_k - y_k d/dy_k)``.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from math import factorial
from typing import Sequence

from .errors import NotInModule
from .fields import VectorField
from .scalars import EXACT, Arith
from .series import FormalSeries, multi_indices
from .torus import LieMorphism
from .cartan import decompose_over_module


@dataclass
class Hamiltonian:
    """A series H in 2 n_pairs variables with diagonal quadratic part sum lambda_k x_k y_k."""

    H: FormalSeries

    def __post_init__(self):
        if self.H.n % 2:
            raise ValueError("a Hamiltonian needs an even number of variables")
        if self.H.valuation < 2:
            raise ValueError("H must have order >= 2")
        np_ = self.n_pairs
        for q in self.H.homogeneous(2).terms:
            ok = any(q[k] == 1 and q[k + np_] == 1 for k in range(np_))
            if not ok:
                raise ValueError(f"quadratic part is not diagonal in the x_k y_k pairing (term x^{q})")

    @property
    def n_pairs(self) -> int:
        return self.H.n // 2

    @property
    def lambdas(self) -> list:
        np_ = self.n_pairs
        out = []
        for k in range(np_):
            q = [0] * (2 * np_)
            q[k] = q[k + np_] = 1
            out.append(self.H.coeff(tuple(q)))
        return out


def _as_series(H) -> FormalSeries:
    return H.H if isinstance(H, Hamiltonian) else H


def hamiltonian_vector_field(H) -> VectorField:
    """x_k' = dH/dy_k, y_k' = -dH/dx_k, at the truncation order of H.

    Differentiation loses the top degree, so H is read as the polynomial it
    stores: build H one order higher than the field you need.
    """
    f = _as_series(H)
    np_ = f.n // 2
    comps = [f.diff(k + np_) for k in range(np_)] + [-f.diff(k) for k in range(np_)]
    return VectorField(comps)


def poisson_bracket(F: FormalSeries, G: FormalSeries) -> FormalSeries:
    """{F, G} = sum_k dF/dx_k dG/dy_k - dF/dy_k dG/dx_k, so that X_G(F) = {F, G}."""
    np_ = F.n // 2
    out = FormalSeries.zero(F.n, F.order, F.arith)
    for k in range(np_):
        out = out + F.diff(k) * G.diff(k + np_) - F.diff(k + np_) * G.diff(k)
    return out


def lie_transform(H: FormalSeries, G: FormalSeries) -> FormalSeries:
    """exp(L_{X_G}) H = H + {H, G} + {{H, G}, G}/2 + ... for G of order >= 3.

    This is H composed with the time-one map of X_G, a symplectic jet, so
    Poisson-commuting inputs stay Poisson-commuting.
    """
    if not G.is_zero() and G.valuation < 3:
        raise ValueError("the generating function must have order >= 3")
    total, term, k = H, H, 0
    while True:
        k += 1
        term = poisson_bracket(term, G)
        if term.is_zero():
            return total
        inv = H.arith.coerce(1) / factorial(k) if H.arith.exact else 1.0 / factorial(k)
        total = total + term.scale(inv)


def build_ito_morphism(n_pairs: int, arith: Arith = EXACT) -> LieMorphism:
    """S(g_i) = x_i d/dx_i - y_i d/dy_i, i = 1..n_pairs."""
    if n_pairs < 1:
        raise ValueError("n_pairs must be >= 1")
    n = 2 * n_pairs
    rows = []
    for i in range(n_pairs):
        row = [0] * n
        row[i] = 1
        row[i + n_pairs] = -1
        rows.append(row)
    return LieMorphism(rows, arith)


@dataclass
class StarCertificate:
    """Outcome of the nonresonance scan; truthy iff no relation was found."""

    holds: bool
    bound: int
    witness: tuple | None = None

    def __bool__(self) -> bool:
        return self.holds

    def to_json(self) -> dict:
        return {"holds": self.holds, "bound": self.bound, "witness": None if self.witness is None else list(self.witness)}


def check_star_condition(lam: Sequence, bound: int, arith: Arith = EXACT) -> StarCertificate:
    """Scan every nonzero integer vector m with |m_k| <= bound for sum lambda_k m_k = 0.

    The witness reported is the one of smallest sup-norm whose first nonzero
    entry is positive (lexicographically first among those).
    """
    if bound < 1:
        raise ValueError("bound must be >= 1")
    lam = [arith.coerce(v) for v in lam]
    n = len(lam)
    for size in range(1, bound + 1):
        for m in itertools.product(range(size, -size - 1, -1), repeat=n):
            if max(abs(v) for v in m) != size:
                continue
            first = next(v for v in m if v)
            if first < 0:
                continue
            total = sum((v * c for v, c in zip(m, lam) if v), arith.zero)
            if arith.is_zero(total):
                return StarCertificate(False, bound, m)
    return StarCertificate(True, bound)


def is_action_monomial(q: Sequence[int]) -> bool:
    np_ = len(q) // 2
    return all(q[k] == q[k + np_] for k in range(np_))


def action_monomials(n_pairs: int, max_degree: int) -> list:
    """(xy)^P with 1 <= 2|P| <= max_degree."""
    out = []
    for half in range(1, max_degree // 2 + 1):
        for p in multi_indices(n_pairs, half):
            out.append(tuple(p) + tuple(p))
    return out


def verify_action_normal_form(NF: Sequence[VectorField], S: LieMorphism) -> bool:
    """True iff NF_i = sum_j a_ij S_j with every a_ij a series in the actions x_k y_k."""
    try:
        dec = decompose_over_module(NF, S)
    except NotInModule:
        return False
    return all(is_action_monomial(q) for row in dec.A for a in row for q in a.terms)


# -- test families --------------------------------------------------------------


def action_series(n_pairs: int, order: int, rng: random.Random, lam: Sequence, terms: int = 3, arith: Arith = EXACT,
                  coeff_range: int = 3) -> FormalSeries:
    """sum lambda_k x_k y_k plus random higher terms in the actions."""
    n = 2 * n_pairs
    out = {}
    for k, v in enumerate(lam):
        if v != 0:
            q = [0] * n
            q[k] = q[k + n_pairs] = 1
            out[tuple(q)] = arith.coerce(v)
    pool = [q for q in action_monomials(n_pairs, order) if sum(q) >= 4]
    for q in rng.sample(pool, min(terms, len(pool))):
        num = rng.choice([v for v in range(-coeff_range, coeff_range + 1) if v])
        out[q] = arith.coerce(f"{num}/{rng.randint(1, coeff_range)}")
    return FormalSeries(n, order, out, arith)


def random_generating_function(n: int, order: int, rng: random.Random, terms: int = 3, max_degree: int = 4,
                               arith: Arith = EXACT, coeff_range: int = 3) -> FormalSeries:
    out = {}
    for _ in range(terms):
        q = rng.choice(list(multi_indices(n, rng.randint(3, max_degree))))
        num = rng.choice([v for v in range(-coeff_range, coeff_range + 1) if v])
        out[q] = arith.coerce(f"{num}/{rng.randint(1, coeff_range)}")
    return FormalSeries(n, order, out, arith)


def integrable_family(lams: Sequence[Sequence], N: int, seed: int = 0, arith: Arith = EXACT,
                      action_terms: int = 3, generator_terms: int = 3):
    """Poisson-commuting Hamiltonians (action series moved by a symplectic jet) and their fields.

    Returns ``(hamiltonians, fields)``; the Hamiltonians are built at order
    N + 1 so the fields are exact at order N.
    """
    n_pairs = len(lams[0])
    rng = random.Random(seed)
    Hs = [action_series(n_pairs, N + 1, rng, lam, action_terms, arith) for lam in lams]
    G = random_generating_function(2 * n_pairs, N + 1, rng, generator_terms, arith=arith)
    moved = [lie_transform(H, G) for H in Hs]
    fields = [hamiltonian_vector_field(H).with_order(N) for H in moved]
    return [Hamiltonian(H) for H in moved], fields
