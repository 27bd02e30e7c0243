"""Vector fields as n-tuples of series, Lie brackets, and polynomial jet diffeomorphisms.

Conventions
-----------
* ``[X, Y]_k = sum_j X_j dY_k/dx_j - Y_j dX_k/dx_j``, so that
  ``[S, x^Q d_i] = ((Q, lambda) - lambda_i) x^Q d_i`` for diagonal ``S``.
* ``pullback(phi, X)`` is ``X`` written in the coordinates ``y = phi(x)``:
  ``Y(phi(x)) = Dphi(x) X(x)``.  For ``phi = (Id + U)^{-1}`` this is
  ``X + [U, X] + O(U^2)``.
* ``compose(phi, psi)`` is "phi, then psi", i.e. the map ``psi o phi``, so that
  ``pullback(compose(phi, psi), X) == pullback(psi, pullback(phi, X))``.

All fields vanish at the origin, so every operation here is exact through the
shared truncation order N.
"""

from __future__ import annotations

from math import factorial
from typing import Iterable, Mapping, Sequence

from .errors import DimensionMismatch
from .scalars import EXACT, Arith
from .series import FormalSeries, grlex_key, substitute, unit


class VectorField:
    """Tuple of ``n`` component series ``X = sum_k X_k d/dx_k``."""

    __slots__ = ("components", "n", "order", "arith", "_val")

    def __init__(self, components: Sequence[FormalSeries]):
        comps = tuple(components)
        if not comps:
            raise ValueError("a vector field needs at least one component")
        ref = comps[0]
        if len(comps) != ref.n:
            raise DimensionMismatch(f"{len(comps)} components for n={ref.n}")
        for c in comps[1:]:
            ref._check(c)
        self.components = comps
        self.n = ref.n
        self.order = ref.order
        self.arith = ref.arith
        self._val = None

    # -- constructors -------------------------------------------------------
    @classmethod
    def zero(cls, n, order, arith=EXACT):
        return cls([FormalSeries.zero(n, order, arith) for _ in range(n)])

    @classmethod
    def from_terms(cls, terms: Mapping, n: int, order: int, arith: Arith = EXACT):
        """Build from ``{(Q, i): c}`` meaning ``c x^Q d/dx_{i+1}``."""
        per = [dict() for _ in range(n)]
        for (q, i), c in terms.items():
            q = tuple(q)
            per[i][q] = arith.coerce(c) + per[i].get(q, arith.zero)
        return cls([FormalSeries(n, order, per[i], arith) for i in range(n)])

    @classmethod
    def linear(cls, matrix, order, arith=EXACT):
        """Linear field x' = M x, given the n x n matrix M (rows = components)."""
        n = len(matrix)
        terms = {}
        for k in range(n):
            for j in range(n):
                if matrix[k][j] != 0:
                    terms[(unit(n, j), k)] = matrix[k][j]
        return cls.from_terms(terms, n, order, arith)

    @classmethod
    def diagonal(cls, eigenvalues, order, arith=EXACT):
        n = len(eigenvalues)
        return cls.linear([[eigenvalues[k] if j == k else 0 for j in range(n)] for k in range(n)], order, arith)

    # -- inspection ---------------------------------------------------------
    @property
    def valuation(self):
        """Order at 0: least degree of a nonzero term (inf for the zero field)."""
        if self._val is None:
            self._val = min(c.valuation for c in self.components)
        return self._val

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def linear_part(self) -> list:
        """n x n matrix M with X = M x + O(|x|^2)."""
        n = self.n
        return [[self.components[k].coeff(unit(n, j)) for j in range(n)] for k in range(n)]

    def monomials(self) -> Iterable[tuple]:
        """Yield (Q, i, c) for every term c x^Q d_i."""
        for i, comp in enumerate(self.components):
            for q, c in comp.terms.items():
                yield q, i, c

    def term_count(self) -> int:
        return sum(len(c) for c in self.components)

    def max_degree(self) -> int:
        return max(c.max_degree() for c in self.components)

    def __repr__(self):
        rows = [f"  d{k + 1}: {c!r}" for k, c in enumerate(self.components) if not c.is_zero()]
        return "VectorField(\n" + "\n".join(rows) + "\n)" if rows else f"VectorField(0; n={self.n}, N={self.order})"

    # -- algebra ------------------------------------------------------------
    def _check(self, other: VectorField):
        if not isinstance(other, VectorField):
            raise TypeError(f"expected VectorField, got {type(other).__name__}")
        self.components[0]._check(other.components[0])

    def _map(self, fn):
        return VectorField([fn(c) for c in self.components])

    def __add__(self, other):
        self._check(other)
        return VectorField([a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other):
        self._check(other)
        return VectorField([a - b for a, b in zip(self.components, other.components)])

    def __neg__(self):
        return self._map(lambda c: -c)

    def scale(self, c):
        return self._map(lambda s: s.scale(c))

    def times(self, f: FormalSeries) -> VectorField:
        """Pointwise product f X with a scalar series."""
        return self._map(lambda c: f * c)

    def __mul__(self, other):
        if isinstance(other, FormalSeries):
            return self.times(other)
        return self.scale(other)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, VectorField):
            return NotImplemented
        return self.n == other.n and self.order == other.order and all(
            a == b for a, b in zip(self.components, other.components)
        )

    __hash__ = None

    def derive(self, f: FormalSeries) -> FormalSeries:
        """Lie derivative X(f) = sum_j X_j df/dx_j."""
        out = FormalSeries.zero(self.n, self.order, self.arith)
        for j, xj in enumerate(self.components):
            if xj.is_zero():
                continue
            dj = f.diff(j)
            if not dj.is_zero():
                out = out + xj * dj
        return out

    def jacobian(self) -> list:
        return [[c.diff(j) for j in range(self.n)] for c in self.components]

    # -- degree filters -----------------------------------------------------
    def jet(self, k: int) -> VectorField:
        if k > self.order:
            raise ValueError(f"jet order {k} exceeds truncation order {self.order}")
        return self._map(lambda c: c.truncate(k))

    def degree_range(self, lo: int, hi: int) -> VectorField:
        return self._map(lambda c: c.degree_range(lo, hi))

    def homogeneous(self, k: int) -> VectorField:
        return self.degree_range(k, k)

    def junior(self) -> VectorField:
        if self.is_zero():
            return self
        return self.homogeneous(self.valuation)

    def with_order(self, order: int) -> VectorField:
        return self._map(lambda c: c.with_order(order))

    def compose(self, maps: Sequence[FormalSeries], cache: dict | None = None) -> VectorField:
        cache = {} if cache is None else cache
        return VectorField([substitute(c, maps, cache) for c in self.components])

    def scale_variables(self, factors) -> VectorField:
        return self._map(lambda c: c.scale_variables(factors))

    # -- serialization ------------------------------------------------------
    def to_json(self) -> dict:
        return {"n": self.n, "order_cap": self.order, "components": [c.to_json() for c in self.components]}

    @classmethod
    def from_json(cls, data: Mapping, arith: Arith = EXACT) -> VectorField:
        n, order = int(data["n"]), int(data["order_cap"])
        comps = []
        for comp in data["components"]:
            comp = dict(comp)
            comp.setdefault("n", n)
            comp.setdefault("order", order)
            s = FormalSeries.from_json(comp, arith)
            if s.n != n or s.order != order:
                raise DimensionMismatch("component header disagrees with field header")
            comps.append(s)
        return cls(comps)


def lie_bracket(X: VectorField, Y: VectorField) -> VectorField:
    """[X, Y] truncated at the shared order."""
    X._check(Y)
    out = []
    for k in range(X.n):
        out.append(X.derive(Y.components[k]) - Y.derive(X.components[k]))
    return VectorField(out)


def jet(X: VectorField, k: int) -> VectorField:
    return X.jet(k)


def ad_power(U: VectorField, X: VectorField, k: int) -> VectorField:
    for _ in range(k):
        X = lie_bracket(U, X)
    return X


def exp_conjugate(U: VectorField, X: VectorField, N: int | None = None) -> VectorField:
    """X + [U, X] + 1/2 [U, [U, X]] + ... with U of order >= 2.

    ``N`` defaults to the shared truncation order; the sum stops once the
    iterated bracket vanishes.
    """
    U._check(X)
    if not U.is_zero() and U.valuation < 2:
        raise ValueError("U must have order >= 2 for the adjoint series to terminate")
    if N is not None and N != X.order:
        X, U = X.with_order(N), U.with_order(N)
    total = X
    term = X
    k = 0
    while True:
        k += 1
        term = lie_bracket(U, term)
        if term.is_zero():
            return total
        total = total + term.scale(X.arith.coerce(1) / factorial(k) if X.arith.exact else 1.0 / factorial(k))


class JetDiffeo:
    """Polynomial map Id + U tangent to the identity, truncated at order N."""

    __slots__ = ("components", "n", "order", "arith", "_inverse")

    def __init__(self, components: Sequence[FormalSeries], *, check: bool = True):
        comps = tuple(components)
        ref = comps[0]
        if len(comps) != ref.n:
            raise DimensionMismatch(f"{len(comps)} components for n={ref.n}")
        for c in comps[1:]:
            ref._check(c)
        self.components = comps
        self.n = ref.n
        self.order = ref.order
        self.arith = ref.arith
        self._inverse = None
        if check:
            for k, c in enumerate(comps):
                lin = c.truncate(1)
                expected = FormalSeries.variable(k, self.n, self.order, self.arith)
                if lin != expected:
                    raise ValueError("jet diffeomorphism must be tangent to the identity at 0")

    @classmethod
    def identity(cls, n, order, arith=EXACT):
        return cls([FormalSeries.variable(k, n, order, arith) for k in range(n)], check=False)

    @classmethod
    def from_field(cls, U: VectorField) -> JetDiffeo:
        """Id + U, with U of order >= 2."""
        if not U.is_zero() and U.valuation < 2:
            raise ValueError("U must have order >= 2")
        ident = cls.identity(U.n, U.order, U.arith)
        return cls([a + b for a, b in zip(ident.components, U.components)], check=False)

    def displacement(self) -> VectorField:
        """U = phi - Id as a vector field."""
        ident = JetDiffeo.identity(self.n, self.order, self.arith)
        return VectorField([a - b for a, b in zip(self.components, ident.components)])

    def is_identity(self) -> bool:
        return self.displacement().is_zero()

    def jacobian(self) -> list:
        return [[c.diff(j) for j in range(self.n)] for c in self.components]

    def __eq__(self, other):
        if not isinstance(other, JetDiffeo):
            return NotImplemented
        return self.n == other.n and self.order == other.order and all(
            a == b for a, b in zip(self.components, other.components)
        )

    __hash__ = None

    def __repr__(self):
        return "JetDiffeo(" + ", ".join(repr(c) for c in self.components) + ")"

    def with_order(self, order: int) -> JetDiffeo:
        return JetDiffeo([c.with_order(order) for c in self.components], check=False)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "order_cap": self.order,
            "is_diffeo": True,
            "components": [c.to_json() for c in self.components],
        }

    @classmethod
    def from_json(cls, data: Mapping, arith: Arith = EXACT) -> JetDiffeo:
        field = VectorField.from_json(data, arith)
        return cls(field.components)


def compose(phi: JetDiffeo, psi: JetDiffeo) -> JetDiffeo:
    """The map x -> psi(phi(x)) ("phi, then psi")."""
    if phi.n != psi.n or phi.order != psi.order:
        raise DimensionMismatch("diffeomorphisms disagree on n or order")
    cache: dict = {}
    out = JetDiffeo([substitute(c, phi.components, cache) for c in psi.components], check=False)
    return out


def invert(phi: JetDiffeo) -> JetDiffeo:
    """Formal inverse by the fixed point psi <- Id - U o psi.

    Each pass fixes at least one more degree when U has order >= 2.  Maps
    with a unipotent linear part (built with ``check=False``) also converge.
    """
    if phi._inverse is not None:
        return phi._inverse
    U = phi.displacement()
    ident = JetDiffeo.identity(phi.n, phi.order, phi.arith)
    if U.is_zero():
        return ident
    # a nilpotent linear part in U (unipotent maps) slows the gain to one
    # degree per n passes, hence the generous cap
    psi = ident.components
    for _ in range((phi.order + 1) * (phi.n + 1)):
        cache: dict = {}
        new = tuple(x - substitute(u, psi, cache) for x, u in zip(ident.components, U.components))
        if all(a == b for a, b in zip(new, psi)):
            break
        psi = new
    out = JetDiffeo(psi, check=False)
    out._inverse = phi
    phi._inverse = out
    return out


def _neumann_solve(J: list, v: list, order: int) -> list:
    """Solve (I + J) w = v for w where J has entries of order >= 1."""
    n = len(v)
    w = list(v)
    term = list(v)
    for _ in range((order + 1) * (n + 1)):
        term = [
            -sum((J[k][j] * term[j] for j in range(n) if not J[k][j].is_zero() and not term[j].is_zero()),
                 FormalSeries.zero(v[0].n, v[0].order, v[0].arith))
            for k in range(n)
        ]
        if all(t.is_zero() for t in term):
            break
        w = [a + b for a, b in zip(w, term)]
    return w


def pullback(phi: JetDiffeo, X: VectorField) -> VectorField:
    """X in the coordinates y = phi(x): Y(y) = Dphi(phi^{-1} y) X(phi^{-1} y).

    Computed as D(psi)^{-1} X(psi(y)) with psi = phi^{-1}, so maps built as
    (Id + U)^{-1} need no series inversion.
    """
    if X.n != phi.n or X.order != phi.order:
        raise DimensionMismatch("field and diffeomorphism disagree on n or order")
    psi = invert(phi)
    if psi.is_identity():
        return X
    Xpsi = X.compose(psi.components)
    ident = JetDiffeo.identity(phi.n, phi.order, phi.arith)
    DU = [[psi.components[k].diff(j) - ident.components[k].diff(j) for j in range(phi.n)] for k in range(phi.n)]
    return VectorField(_neumann_solve(DU, list(Xpsi.components), phi.order))


def flow_jet(V: VectorField) -> JetDiffeo:
    """Time-one flow of V (order >= 2) as a jet: x_i -> sum_k V^k(x_i)/k!."""
    if not V.is_zero() and V.valuation < 2:
        raise ValueError("flow jets need a field of order >= 2")
    comps = []
    for i in range(V.n):
        xi = FormalSeries.variable(i, V.n, V.order, V.arith)
        total, term, k = xi, xi, 0
        while True:
            k += 1
            term = V.derive(term)
            if term.is_zero():
                break
            inv = V.arith.coerce(1) / factorial(k) if V.arith.exact else 1.0 / factorial(k)
            total = total + term.scale(inv)
        comps.append(total)
    return JetDiffeo(comps, check=False)


def field_terms_sorted(X: VectorField) -> list:
    return sorted(X.monomials(), key=lambda t: (grlex_key(t[0]), t[1]))
