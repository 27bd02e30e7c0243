"""Sparse truncated multivariate power series and majorant norms.

A :class:`FormalSeries` is a finite map from exponent tuples to coefficients,
with every exponent of total degree at most ``order`` (the truncation cap).
Arithmetic between series of different ``n`` or ``order`` raises instead of
silently truncating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import DimensionMismatch, InvalidBound
from .scalars import EXACT, Arith, magnitude


def grlex_key(q: tuple) -> tuple:
    """Graded lexicographic sort key: total degree first, then x1 before x2."""
    return (sum(q), tuple(-e for e in q))


def degree(q: tuple) -> int:
    return sum(q)


def unit(n: int, i: int) -> tuple:
    return tuple(1 if j == i else 0 for j in range(n))


def _encoder(n: int, base: int):
    weights = [base**j for j in range(n)]

    def enc(q):
        return sum(e * w for e, w in zip(q, weights))

    def dec(k):
        out = []
        for _ in range(n):
            k, r = divmod(k, base)
            out.append(r)
        return tuple(out)

    return enc, dec


class FormalSeries:
    """Truncated power series in ``n`` variables.

    Parameters
    ----------
    n : int
        Number of variables.
    order : int
        Truncation cap N; terms of total degree above N are discarded.
    terms : mapping, optional
        Exponent tuple -> coefficient. Zero coefficients are pruned.
    arith : Arith
        Scalar mode.
    """

    __slots__ = ("n", "order", "arith", "terms", "_ord")

    def __init__(self, n: int, order: int, terms: Mapping | None = None, arith: Arith = EXACT, *, _trusted=False):
        if order < 0:
            raise ValueError("truncation order must be nonnegative")
        self.n = n
        self.order = order
        self.arith = arith
        self._ord = None
        if _trusted:
            self.terms = terms
            return
        clean = {}
        if terms:
            for q, c in terms.items():
                q = tuple(int(e) for e in q)
                if len(q) != n or min(q, default=0) < 0:
                    raise DimensionMismatch(f"exponent {q} does not fit n={n}")
                if sum(q) > order:
                    continue
                c = arith.coerce(c)
                if not arith.is_zero(c):
                    clean[q] = c
        self.terms = clean

    # -- constructors -------------------------------------------------------
    @classmethod
    def zero(cls, n, order, arith=EXACT):
        return cls(n, order, {}, arith, _trusted=True)

    @classmethod
    def constant(cls, c, n, order, arith=EXACT):
        return cls(n, order, {(0,) * n: c}, arith)

    @classmethod
    def variable(cls, i, n, order, arith=EXACT):
        return cls(n, order, {unit(n, i): 1}, arith)

    @classmethod
    def monomial(cls, q, c, order, arith=EXACT):
        return cls(len(q), order, {tuple(q): c}, arith)

    def _new(self, terms):
        return FormalSeries(self.n, self.order, terms, self.arith, _trusted=True)

    def _prune(self, terms):
        z = self.arith.is_zero
        return {q: c for q, c in terms.items() if not z(c)}

    # -- inspection ---------------------------------------------------------
    @property
    def valuation(self) -> float:
        """Lowest total degree carrying a nonzero coefficient (inf for zero)."""
        if self._ord is None:
            self._ord = min((sum(q) for q in self.terms), default=math.inf)
        return self._ord

    def is_zero(self) -> bool:
        return not self.terms

    def max_degree(self) -> int:
        return max((sum(q) for q in self.terms), default=-1)

    def coeff(self, q):
        return self.terms.get(tuple(q), self.arith.zero)

    def items(self):
        """Terms in graded lexicographic order."""
        return sorted(self.terms.items(), key=lambda t: grlex_key(t[0]))

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.items())

    def __repr__(self):
        if not self.terms:
            return f"FormalSeries(0; n={self.n}, N={self.order})"
        parts = []
        for q, c in self.items():
            mono = "*".join(f"x{j + 1}^{e}" if e > 1 else f"x{j + 1}" for j, e in enumerate(q) if e)
            parts.append(f"{c}{'*' + mono if mono else ''}")
        return " + ".join(parts) + f"  [n={self.n}, N={self.order}]"

    # -- compatibility ------------------------------------------------------
    def _check(self, other: FormalSeries):
        if not isinstance(other, FormalSeries):
            raise TypeError(f"expected FormalSeries, got {type(other).__name__}")
        if other.n != self.n or other.order != self.order:
            raise DimensionMismatch(
                f"series mismatch: (n={self.n}, N={self.order}) vs (n={other.n}, N={other.order})"
            )

    def _lift(self, other):
        if isinstance(other, FormalSeries):
            self._check(other)
            return other
        return FormalSeries.constant(other, self.n, self.order, self.arith)

    # -- ring operations ----------------------------------------------------
    def __add__(self, other):
        other = self._lift(other)
        out = dict(self.terms)
        for q, c in other.terms.items():
            out[q] = out[q] + c if q in out else c
        return self._new(self._prune(out))

    __radd__ = __add__

    def __neg__(self):
        return self._new({q: -c for q, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def scale(self, c):
        c = self.arith.coerce(c)
        if self.arith.is_zero(c):
            return self._new({})
        return self._new(self._prune({q: c * v for q, v in self.terms.items()}))

    def __mul__(self, other):
        if not isinstance(other, FormalSeries):
            return self.scale(other)
        self._check(other)
        return _mul(self, other, self.order)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not power series")
        out = FormalSeries.constant(1, self.n, self.order, self.arith)
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def __eq__(self, other):
        if not isinstance(other, FormalSeries):
            return NotImplemented
        if other.n != self.n or other.order != self.order:
            return False
        return (self - other).is_zero()

    __hash__ = None

    # -- degree manipulation ------------------------------------------------
    def truncate(self, k: int) -> FormalSeries:
        """Drop terms of degree > k (the cap N is unchanged)."""
        return self._new({q: c for q, c in self.terms.items() if sum(q) <= k})

    def degree_range(self, lo: int, hi: int) -> FormalSeries:
        return self._new({q: c for q, c in self.terms.items() if lo <= sum(q) <= hi})

    def homogeneous(self, k: int) -> FormalSeries:
        return self.degree_range(k, k)

    def junior(self) -> FormalSeries:
        """Lowest-degree homogeneous part."""
        if self.is_zero():
            return self
        return self.homogeneous(self.valuation)

    def with_order(self, order: int) -> FormalSeries:
        """Same coefficients under another cap.

        Raising the cap reads the series as the polynomial it currently stores.
        """
        return FormalSeries(self.n, order, {q: c for q, c in self.terms.items() if sum(q) <= order}, self.arith, _trusted=True)

    def diff(self, i: int) -> FormalSeries:
        """Partial derivative in x_{i+1}. Exact up to degree N-1 only."""
        out = {}
        for q, c in self.terms.items():
            e = q[i]
            if e:
                out[q[:i] + (e - 1,) + q[i + 1:]] = c * e
        return self._new(out)

    def scale_variables(self, factors: Sequence) -> FormalSeries:
        """f(c_1 x_1, ..., c_n x_n)."""
        out = {}
        for q, c in self.terms.items():
            v = c
            for f, e in zip(factors, q):
                if e:
                    v = v * f**e
            out[q] = v
        return self._new(self._prune(out))

    def map_coefficients(self, fn) -> FormalSeries:
        return self._new(self._prune({q: fn(q, c) for q, c in self.terms.items()}))

    def compose(self, maps: Sequence[FormalSeries], cache: dict | None = None) -> FormalSeries:
        """Substitute ``maps[j]`` for x_{j+1}. Every map must vanish at 0.

        ``cache`` memoizes monomials in ``maps`` and may be shared between
        calls that substitute into the same maps.
        """
        return substitute(self, maps, cache)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "order": self.order,
            "terms": [{"q": list(q), **self.arith.to_json(c)} for q, c in self.items()],
        }

    @classmethod
    def from_json(cls, data: Mapping, arith: Arith = EXACT) -> FormalSeries:
        n, order = int(data["n"]), int(data["order"])
        terms = {}
        for t in data.get("terms", []):
            q = tuple(t["q"])
            c = arith.coerce({"re": t.get("re", 0), "im": t.get("im", 0)})
            terms[q] = terms.get(q, arith.zero) + c
        return cls(n, order, terms, arith)


def _mul(f: FormalSeries, g: FormalSeries, cap: int) -> FormalSeries:
    if not f.terms or not g.terms:
        return f._new({})
    if len(f.terms) > len(g.terms):
        f, g = g, f
    n = f.n
    enc, dec = _encoder(n, cap + 1)
    by_deg: list[list] = [[] for _ in range(cap + 1)]
    for q, c in g.terms.items():
        by_deg[sum(q)].append((enc(q), c))
    acc: dict = {}
    get = acc.get
    for q, c in f.terms.items():
        d = sum(q)
        kq = enc(q)
        for dd in range(cap - d + 1):
            for kb, cb in by_deg[dd]:
                k = kq + kb
                v = get(k)
                acc[k] = c * cb if v is None else v + c * cb
    z = f.arith.is_zero
    return f._new({dec(k): v for k, v in acc.items() if not z(v)})


def substitute(f: FormalSeries, maps: Sequence[FormalSeries], cache: dict | None = None) -> FormalSeries:
    """f(maps[0], ..., maps[n-1]) truncated at the cap of the maps."""
    if len(maps) != f.n:
        raise DimensionMismatch(f"need {f.n} substitution maps, got {len(maps)}")
    ref = maps[0]
    for m in maps[1:]:
        ref._check(m)
    if ref.order != f.order:
        raise DimensionMismatch("substituted series must share the truncation order")
    for m in maps:
        if m.terms and m.valuation < 1:
            raise ValueError("substituted maps must vanish at the origin")
    if cache is None:
        cache = {}
    one = FormalSeries.constant(1, ref.n, ref.order, ref.arith)
    zero_q = (0,) * f.n
    cache.setdefault(zero_q, one)

    def mono(q):
        m = cache.get(q)
        if m is not None:
            return m
        j = next(i for i, e in enumerate(q) if e)
        prev = q[:j] + (q[j] - 1,) + q[j + 1:]
        m = mono(prev) * maps[j]
        cache[q] = m
        return m

    acc: dict = {}
    for q, c in f.items():
        for k, v in mono(q).terms.items():
            w = acc.get(k)
            acc[k] = c * v if w is None else w + c * v
    z = ref.arith.is_zero
    return FormalSeries(ref.n, ref.order, {k: v for k, v in acc.items() if not z(v)}, ref.arith, _trusted=True)


# -- majorant norms -----------------------------------------------------------


@dataclass(frozen=True)
class PolyradiusSpec:
    """Anisotropic polydisc t0^kappa . r: radius t0**kappa_i * r on axis i."""

    r: float
    kappa: tuple
    t0: float = 1.0

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError("r must be positive")
        if not all(k > 0 for k in self.kappa):
            raise ValueError("kappa entries must be positive")
        if not 0 < self.t0 <= 1:
            raise ValueError("t0 must lie in (0, 1]")

    @property
    def radii(self) -> tuple:
        return tuple(self.t0**k * self.r for k in self.kappa)

    def with_r(self, r: float) -> PolyradiusSpec:
        return PolyradiusSpec(r, self.kappa, self.t0)

    def with_t0(self, t0: float) -> PolyradiusSpec:
        return PolyradiusSpec(self.r, self.kappa, t0)

    @classmethod
    def isotropic(cls, r: float, n: int) -> PolyradiusSpec:
        return cls(r, (1.0,) * n, 1.0)


def _radii(R) -> tuple:
    if isinstance(R, PolyradiusSpec):
        return R.radii
    return tuple(float(x) for x in R)


def majorant_norm(f: FormalSeries, R) -> float:
    """|f|_R = sum |f_Q| R^Q on the effective polyradius (a spec or a plain vector)."""
    radii = _radii(R)
    if len(radii) != f.n:
        raise DimensionMismatch("polyradius length differs from n")
    total = 0.0
    for q, c in f.terms.items():
        w = magnitude(c)
        for r, e in zip(radii, q):
            if e:
                w *= r**e
        total += w
    return total


def dominates(g: FormalSeries, f: FormalSeries) -> bool:
    """f < g coefficientwise in modulus (f is dominated by g)."""
    exact = f.arith.exact and g.arith.exact
    tol = 0.0 if exact else max(f.arith.tol, g.arith.tol)
    rel = 1.0 if exact else 1.0 + 1e-12
    for q, c in f.terms.items():
        if magnitude(c) > magnitude(g.coeff(q)) * rel + tol:
            return False
    return True


def bar(f: FormalSeries) -> FormalSeries:
    """Coefficientwise modulus, returned as a float-mode series."""
    fa = Arith(False, f.arith.tol)
    return FormalSeries(f.n, f.order, {q: magnitude(c) for q, c in f.terms.items()}, fa)


def inverse_bound(inv_f_norm: float, g_norm: float) -> float:
    """Bound on |1/(f+g)|_R from |1/f|_R and |g|_R (geometric-series lemma).

    Needs ``inv_f_norm * g_norm < 1``.
    """
    if inv_f_norm < 0 or g_norm < 0:
        raise InvalidBound("norms are nonnegative")
    prod = inv_f_norm * g_norm
    if not prod < 1:
        raise InvalidBound(f"|1/f|_R |g|_R = {prod:.6g} >= 1; the bound does not apply")
    return inv_f_norm / (1.0 - prod)


def monomial_inverse_norm(coeff, q: tuple, R) -> float:
    """|1/(p x^T)|_R = 1 / (|p| R^T)."""
    radii = _radii(R)
    den = magnitude(coeff)
    for r, e in zip(radii, q):
        den *= r**e
    return 1.0 / den


def series_from_dict(n: int, order: int, terms: Mapping, arith: Arith = EXACT) -> FormalSeries:
    return FormalSeries(n, order, terms, arith)


def multi_indices(n: int, deg: int) -> Iterable[tuple]:
    """All exponent tuples of total degree exactly ``deg`` (grlex order)."""
    if n == 1:
        yield (deg,)
        return
    for first in range(deg, -1, -1):
        for rest in multi_indices(n - 1, deg - first):
            yield (first,) + rest
