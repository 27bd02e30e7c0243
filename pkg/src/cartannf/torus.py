"""Diagonal Lie morphisms S(g) = sum_i lambda_i(g) x_i d/dx_i and their weights.

The morphism is stored as the l x n matrix ``Lambda`` with
``Lambda[j][i] = lambda_i(g_j)`` for a fixed basis g_1..g_l.  The weight of
the monomial field ``x^Q d_i`` is the vector ``Lambda Q - Lambda e_i``.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping, Sequence

from gmpy2 import mpq

from .errors import BudgetExceeded, RankDeficient
from .fields import VectorField
from .scalars import EXACT, Arith, magnitude
from .series import FormalSeries, multi_indices

DEFAULT_ENUM_BUDGET = 2_000_000


def _solve_square(M: list, arith: Arith) -> list | None:
    """Inverse of a small square matrix by Gauss-Jordan; None if singular."""
    k = len(M)
    aug = [list(row) + [arith.one if i == j else arith.zero for j in range(k)] for i, row in enumerate(M)]
    for col in range(k):
        piv = max(range(col, k), key=lambda r: magnitude(aug[r][col]))
        if arith.is_zero(aug[piv][col]):
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        aug[col] = [v / p for v in aug[col]]
        for r in range(k):
            if r != col and not arith.is_zero(aug[r][col]):
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [row[k:] for row in aug]


@dataclass(frozen=True)
class Weight:
    """Linear form on g given by its values on the basis, plus one source monomial."""

    coefficients: tuple
    source: tuple | None = None

    def norm(self) -> float:
        return max((magnitude(c) for c in self.coefficients), default=0.0)

    def at(self, g0: Sequence):
        total = 0
        for c, g in zip(self.coefficients, g0):
            total = total + c * g
        return total


class LieMorphism:
    """Injective diagonal morphism from an l-dimensional commutative algebra.

    Parameters
    ----------
    Lambda : sequence of rows
        ``Lambda[j][i] = lambda_i(g_j)``; shape l x n.
    arith : Arith
        Scalar mode; exact mode needs Gaussian-rational entries.
    """

    def __init__(self, Lambda: Sequence[Sequence], arith: Arith = EXACT):
        rows = [[arith.coerce(v) for v in row] for row in Lambda]
        if not rows or not rows[0]:
            raise RankDeficient("empty eigenvalue matrix")
        n = len(rows[0])
        if any(len(r) != n for r in rows):
            raise RankDeficient("ragged eigenvalue matrix")
        self.arith = arith
        self.Lambda = tuple(tuple(r) for r in rows)
        self.l = len(rows)
        self.n = n
        if self.l > n:
            raise RankDeficient(f"l={self.l} exceeds n={n}; S cannot be injective")
        # first column set (lexicographic) giving an invertible l x l block
        for cols in combinations(range(n), self.l):
            L = [[rows[j][c] for j in range(self.l)] for c in cols]  # L[k][j] = lambda_{cols[k]}(g_j)
            inv = _solve_square(L, arith)
            if inv is not None:
                self.cols = cols
                self.L = L
                self.L_inv = inv
                break
        else:
            raise RankDeficient("eigenvalue matrix has rank < l: S is not injective")

    def __repr__(self):
        return f"LieMorphism(l={self.l}, n={self.n}, Lambda={[list(map(str, r)) for r in self.Lambda]})"

    # -- basis fields -------------------------------------------------------
    def eigenvalues_at(self, g0: Sequence) -> list:
        """lambda_i(g0) for the element g0 = sum_j g0_j g_j."""
        return [sum((g0[j] * self.Lambda[j][i] for j in range(self.l)), self.arith.zero) for i in range(self.n)]

    def field(self, g0: Sequence, order: int) -> VectorField:
        return VectorField.diagonal(self.eigenvalues_at(g0), order, self.arith)

    def basis_fields(self, order: int) -> list:
        return [VectorField.diagonal(list(self.Lambda[j]), order, self.arith) for j in range(self.l)]

    def coordinates_of(self, eigenvalues: Sequence) -> list | None:
        """g0 with lambda(g0) = eigenvalues, or None if the diagonal field is not in S(g)."""
        ev = [self.arith.coerce(v) for v in eigenvalues]
        g0 = [sum((self.L_inv[j][k] * ev[c] for k, c in enumerate(self.cols)), self.arith.zero) for j in range(self.l)]
        back = self.eigenvalues_at(g0)
        if all(self.arith.eq(a, b) for a, b in zip(back, ev)):
            return g0
        return None

    # -- weights ------------------------------------------------------------
    def weight_vector(self, q: Sequence[int], i: int) -> tuple:
        lam = self.Lambda
        return tuple(
            sum((e * lam[j][k] for k, e in enumerate(q) if e), self.arith.zero) - lam[j][i] for j in range(self.l)
        )

    def weight_key(self, coeffs: Sequence) -> tuple:
        return tuple(self.arith.key(c) for c in coeffs)

    def is_zero_weight(self, coeffs: Sequence) -> bool:
        return all(self.arith.is_zero(c) for c in coeffs)

    def annihilates(self, q: Sequence[int]) -> bool:
        """x^Q is a first integral: Lambda Q = 0."""
        return all(
            self.arith.is_zero(sum((e * self.Lambda[j][k] for k, e in enumerate(q) if e), self.arith.zero))
            for j in range(self.l)
        )


def weight_of(S: LieMorphism, Q: Sequence[int], i: int) -> Weight:
    if not 0 <= i < S.n:
        raise IndexError(f"component index {i} out of range for n={S.n}")
    return Weight(S.weight_vector(tuple(Q), i), (tuple(Q), i))


@dataclass
class WeightBucket:
    weight: Weight
    field: VectorField


def weight_decompose(P: VectorField, S: LieMorphism) -> dict:
    """Split P into weight spaces; returns {weight key: WeightBucket}.

    The buckets sum to P, and each satisfies [S_j, B] = alpha(g_j) B.
    """
    per: dict = {}
    coeffs_of: dict = {}
    for q, i, c in P.monomials():
        w = S.weight_vector(q, i)
        key = S.weight_key(w)
        if key not in per:
            per[key] = [dict() for _ in range(P.n)]
            coeffs_of[key] = Weight(w, (q, i))
        per[key][i][q] = c
    out = {}
    for key, comps in per.items():
        fld = VectorField([FormalSeries(P.n, P.order, comps[k], P.arith, _trusted=True) for k in range(P.n)])
        out[key] = WeightBucket(coeffs_of[key], fld)
    return out


def zero_weight_projection(P: VectorField, S: LieMorphism) -> VectorField:
    comps = [dict() for _ in range(P.n)]
    for q, i, c in P.monomials():
        if S.is_zero_weight(S.weight_vector(q, i)):
            comps[i][q] = c
    return VectorField([FormalSeries(P.n, P.order, comps[k], P.arith, _trusted=True) for k in range(P.n)])


def nonzero_weight_part(P: VectorField, S: LieMorphism) -> VectorField:
    return P - zero_weight_projection(P, S)


# -- small divisors ------------------------------------------------------------


@dataclass
class DiophantineReport:
    k_max: int
    omega: list
    bruno_partial: float
    resonant_set: list
    tolerance: float | None = None
    shell_minima: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "k_max": self.k_max,
            "omega": self.omega,
            "bruno_partial": self.bruno_partial,
            "resonant_set": [{"q": list(q), "i": i} for q, i in self.resonant_set],
            "tolerance": self.tolerance,
        }

    def table(self) -> str:
        lines = [f"{'k':>3}  {'|Q| range':>12}  {'omega_k':>14}  {'-ln(omega_k)/2^k':>18}"]
        for k, w in enumerate(self.omega):
            rng = "(empty)" if k == 0 else f"2..{2 ** k}"
            lines.append(f"{k:>3}  {rng:>12}  {w:>14.8g}  {-math.log(w) / 2 ** k + 0.0:>18.8g}")
        lines.append(f"Bruno partial sum: {self.bruno_partial:.12g}")
        lines.append(f"resonant (Q, i) with 2 <= |Q| <= {2 ** self.k_max}: {len(self.resonant_set)}")
        return "\n".join(lines)


def count_indices(n: int, lo: int, hi: int) -> int:
    return sum(math.comb(d + n - 1, n - 1) for d in range(lo, hi + 1))


def omega_sequence(S: LieMorphism, k_max: int, budget: int = DEFAULT_ENUM_BUDGET) -> DiophantineReport:
    """omega_k = min nonzero ||alpha_{Q,i}|| over 2 <= |Q| <= 2^k, k = 0..k_max.

    omega_0 ranges over an empty set and is defined as 1.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    top = 2**k_max
    total = count_indices(S.n, 2, top) * S.n
    if total > budget:
        raise BudgetExceeded(f"{total} weights to enumerate exceeds budget {budget}")
    shells = [math.inf] * (k_max + 1)
    resonant = []
    for deg in range(2, top + 1):
        k = max(1, math.ceil(math.log2(deg)))
        for q in multi_indices(S.n, deg):
            for i in range(S.n):
                w = S.weight_vector(q, i)
                if S.is_zero_weight(w):
                    resonant.append((q, i))
                    continue
                nrm = max(magnitude(c) for c in w)
                if nrm < shells[k]:
                    shells[k] = nrm
    omega = [1.0]
    cur = math.inf
    for k in range(1, k_max + 1):
        cur = min(cur, shells[k])
        omega.append(1.0 if cur == math.inf else float(cur))
    bruno = sum(-math.log(w) / 2**k for k, w in enumerate(omega))
    tol = None if S.arith.exact else S.arith.tol
    return DiophantineReport(k_max, omega, bruno, resonant, tol, shells)


def brute_force_omega(S: LieMorphism, k: int) -> float:
    """Reference: omega_k straight from the definition (no shells)."""
    best = math.inf
    for deg in range(2, 2**k + 1):
        for q in multi_indices(S.n, deg):
            for i in range(S.n):
                w = S.weight_vector(q, i)
                if not S.is_zero_weight(w):
                    best = min(best, max(magnitude(c) for c in w))
    return 1.0 if best == math.inf else best


# -- regular elements ----------------------------------------------------------


def nonzero_weights(S: LieMorphism, max_degree: int, min_degree: int = 1) -> dict:
    """Distinct nonzero weights of monomial fields with min_degree <= |Q| <= max_degree."""
    out = {}
    for deg in range(min_degree, max_degree + 1):
        for q in multi_indices(S.n, deg):
            for i in range(S.n):
                w = S.weight_vector(q, i)
                if S.is_zero_weight(w):
                    continue
                key = S.weight_key(w)
                if key not in out:
                    out[key] = Weight(w, (q, i))
    return out


def is_regular_element(g0: Sequence, S: LieMorphism, N: int, weights: Mapping | None = None) -> bool:
    """True iff no nonzero weight of degree <= N vanishes on g0."""
    g0 = [S.arith.coerce(v) for v in g0]
    if all(S.arith.is_zero(v) for v in g0):
        return False
    if weights is None:
        weights = nonzero_weights(S, N)
    return all(not S.arith.is_zero(w.at(g0)) for w in weights.values())


def _next_prime(k: int) -> int:
    def prime(p):
        return p > 1 and all(p % d for d in range(2, int(p**0.5) + 1))

    while not prime(k):
        k += 1
    return k


def find_regular_element(S: LieMorphism, N: int, seed: int = 0, budget: int = 200) -> list:
    """Random rational g0 verified regular up to degree N.

    Denominators are primes larger than the largest weight entry, which makes
    exact-mode failures rare; failures are retried until ``budget`` runs out.
    """
    rng = random.Random(seed)
    weights = nonzero_weights(S, N)
    if S.l == 1:
        g0 = [S.arith.one]
        if is_regular_element(g0, S, N, weights):
            return g0
    base = _next_prime(N + 2)
    for attempt in range(budget):
        if S.arith.exact:
            g0 = [mpq(1)] + [mpq(rng.randint(1, 4 * base), _next_prime(base + rng.randint(0, 50))) for _ in range(S.l - 1)]
            if attempt % 2:
                g0 = [mpq(rng.choice([-1, 1]) * rng.randint(1, 9), 1)] + g0[1:]
        else:
            g0 = [1.0 + 0j] + [complex(rng.uniform(-2, 2), 0.0) for _ in range(S.l - 1)]
        g0 = [S.arith.coerce(v) for v in g0]
        if is_regular_element(g0, S, N, weights):
            return g0
    raise BudgetExceeded(f"no regular element found in {budget} samples")


def first_integral_monomials(S: LieMorphism, N: int) -> list:
    """Monomials x^Q (1 <= |Q| <= N) with Lambda Q = 0, in grlex order."""
    out = []
    for deg in range(1, N + 1):
        for q in multi_indices(S.n, deg):
            if S.annihilates(q):
                out.append(q)
    return out


def in_first_integral_ring(f: FormalSeries, S: LieMorphism) -> bool:
    return all(S.annihilates(q) for q in f.terms)
