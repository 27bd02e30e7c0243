"""Decomposition of normal forms over the first-integral ring and Cartan-type checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations
from typing import Sequence

from .errors import CommutationFailure, NotInModule
from .fields import VectorField, lie_bracket
from .series import FormalSeries
from .torus import LieMorphism, in_first_integral_ring, nonzero_weight_part


def _sign(perm) -> int:
    sign, seen = 1, set()
    for i in range(len(perm)):
        if i in seen:
            continue
        j, length = i, 0
        while j not in seen:
            seen.add(j)
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def det(A: Sequence[Sequence[FormalSeries]]) -> FormalSeries:
    """Leibniz expansion; fine for the small l used here."""
    l = len(A)
    ref = A[0][0]
    total = FormalSeries.zero(ref.n, ref.order, ref.arith)
    for perm in permutations(range(l)):
        prod = None
        for i in range(l):
            a = A[i][perm[i]]
            if a.is_zero():
                prod = None
                break
            prod = a if prod is None else prod * a
        else:
            total = total + prod if _sign(perm) > 0 else total - prod
    return total


def cofactor_transpose(A: Sequence[Sequence[FormalSeries]]) -> list:
    """C with C A = A C = det(A) Id."""
    l = len(A)
    ref = A[0][0]
    if l == 1:
        return [[FormalSeries.constant(1, ref.n, ref.order, ref.arith)]]
    C = [[None] * l for _ in range(l)]
    for i in range(l):
        for j in range(l):
            minor = [[A[r][c] for c in range(l) if c != i] for r in range(l) if r != j]
            m = det(minor)
            C[i][j] = m if (i + j) % 2 == 0 else -m
    return C


def matmul(A, B) -> list:
    l, k, p = len(A), len(B), len(B[0])
    ref = A[0][0]
    out = []
    for i in range(l):
        row = []
        for j in range(p):
            s = FormalSeries.zero(ref.n, ref.order, ref.arith)
            for t in range(k):
                if not A[i][t].is_zero() and not B[t][j].is_zero():
                    s = s + A[i][t] * B[t][j]
            row.append(s)
        out.append(row)
    return out


@dataclass
class NormalFormDecomposition:
    """NF_i = sum_j a_ij S_j with a_ij in the first-integral ring."""

    A: list
    basis_fields: list
    orders: list
    S: LieMorphism
    _det: FormalSeries | None = field(default=None, repr=False)
    _C: list | None = field(default=None, repr=False)

    @property
    def l(self) -> int:
        return len(self.A)

    @property
    def detA(self) -> FormalSeries:
        if self._det is None:
            self._det = det(self.A)
        return self._det

    @property
    def C(self) -> list:
        if self._C is None:
            self._C = cofactor_transpose(self.A)
        return self._C

    def truncated(self, p: int) -> list:
        """A_p = (J^{p + d_i - 2}(a_ij))."""
        return [[a.truncate(p + self.orders[i] - 2) for a in row] for i, row in enumerate(self.A)]

    @property
    def junior(self) -> list:
        return self.truncated(1)

    def recombine(self, i: int) -> VectorField:
        out = VectorField.zero(self.S.n, self.A[0][0].order, self.S.arith)
        for a, Sj in zip(self.A[i], self.basis_fields):
            if not a.is_zero():
                out = out + Sj.times(a)
        return out

    def p0(self, p_max: int | None = None) -> int | None:
        """Least p with det A_p not identically zero."""
        cap = self.A[0][0].order if p_max is None else p_max
        for p in range(1, cap + 2):
            if not det(self.truncated(p)).is_zero():
                return p
        return None

    def with_order(self, order: int) -> NormalFormDecomposition:
        A = [[a.with_order(order) for a in row] for row in self.A]
        return NormalFormDecomposition(A, self.S.basis_fields(order), list(self.orders), self.S)


def decompose_over_module(NF: Sequence[VectorField], S: LieMorphism) -> NormalFormDecomposition:
    """Solve NF_i = sum_j a_ij S_j with a_ij supported on Lambda Q = 0.

    Writes component k of NF_i as x_k g_ik with g_ik = sum_j lambda_k(g_j) a_ij,
    recovers a_i from the invertible block of Lambda and checks the rest.
    """
    if len(NF) != S.l:
        raise ValueError(f"family has {len(NF)} members, the algebra has dimension {S.l}")
    ref = NF[0]
    n, order, arith = ref.n, ref.order, ref.arith
    if n != S.n:
        raise ValueError("field dimension differs from the morphism")
    A = []
    for i, X in enumerate(NF):
        g = []
        for k, comp in enumerate(X.components):
            terms = {}
            for q, c in comp.terms.items():
                if q[k] == 0:
                    raise NotInModule(f"NF_{i + 1}: term {c} x^{q} d{k + 1} is not divisible by x{k + 1}")
                terms[q[:k] + (q[k] - 1,) + q[k + 1:]] = c
            g.append(FormalSeries(n, order, terms, arith, _trusted=True))
        row = []
        for j in range(S.l):
            a = FormalSeries.zero(n, order, arith)
            for kk, col in enumerate(S.cols):
                coef = S.L_inv[j][kk]
                if not arith.is_zero(coef) and not g[col].is_zero():
                    a = a + g[col].scale(coef)
            row.append(a)
        for k in range(n):
            back = FormalSeries.zero(n, order, arith)
            for j in range(S.l):
                if not arith.is_zero(S.Lambda[j][k]):
                    back = back + row[j].scale(S.Lambda[j][k])
            if back != g[k]:
                raise NotInModule(f"NF_{i + 1}: component {k + 1} is not a combination of the S(g_j)")
        for j, a in enumerate(row):
            if not in_first_integral_ring(a, S):
                bad = next(q for q in a.terms if not S.annihilates(q))
                raise NotInModule(f"a_{i + 1},{j + 1} has the non-invariant monomial x^{bad}")
        A.append(row)
    orders = [X.valuation for X in NF]
    return NormalFormDecomposition(A, S.basis_fields(order), orders, S)


@dataclass
class CartanCertificate:
    cartan: bool
    ord_detA: float
    predicted_ord: int
    p0: int | None
    det_junior: FormalSeries

    def to_json(self) -> dict:
        return {
            "cartan": self.cartan,
            "ord_detA": None if self.ord_detA == float("inf") else int(self.ord_detA),
            "predicted_ord_detA": self.predicted_ord,
            "p0": self.p0,
        }


def certify_cartan(dec: NormalFormDecomposition) -> CartanCertificate:
    """Junior parts free over the ring <=> det(A_1) is not identically zero."""
    dj = det(dec.junior)
    predicted = sum(d - 1 for d in dec.orders)
    return CartanCertificate(not dj.is_zero(), dec.detA.valuation, predicted, dec.p0(), dj)


def normalized_order(X: VectorField, S: LieMorphism) -> int:
    """Largest k such that J^k(X) commutes with S (X.order if fully normal)."""
    rest = nonzero_weight_part(X, S)
    if rest.is_zero():
        return X.order
    return rest.valuation - 1


def check_auto_normalization(
    X: VectorField, Y: VectorField, s_morphism: LieMorphism, k: int | None = None
) -> tuple[bool, int]:
    """Check that Y is normalized to order Ord(Y) + k - 1 when X is normalized to order k.

    ``s_morphism`` is the single-field morphism of the linear part s of X
    (build it with :func:`single_field_morphism`). Returns ``(holds, order)``.
    """
    if not lie_bracket(X, Y).is_zero():
        raise CommutationFailure("[X, Y] does not vanish up to the truncation order")
    if k is None:
        k = normalized_order(X, s_morphism)
    elif normalized_order(X, s_morphism) < k:
        raise ValueError(f"X is not normalized to order {k}")
    target = min(int(Y.valuation) + k - 1, Y.order)
    part = nonzero_weight_part(Y.jet(target), s_morphism)
    return part.is_zero(), target


def single_field_morphism(s: VectorField) -> LieMorphism:
    """l = 1 morphism generated by a diagonal linear field."""
    M = s.linear_part()
    n = s.n
    for a in range(n):
        for b in range(n):
            if a != b and not s.arith.is_zero(M[a][b]):
                raise ValueError("linear part is not diagonal")
    return LieMorphism([[M[i][i] for i in range(n)]], s.arith)
