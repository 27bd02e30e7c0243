"""Majorant-norm constants behind the Newton step and a numeric check of its bound.

For a step from order m, with ``A_{p0}`` the truncated matrix of first
integrals and ``det A_{p0} = sum_T p_T x^T``:

* ``d = min (kappa, T)`` over nonzero p_T, attained at a unique T0, ``s = |T0|``;
* t0 is the largest value (capped by the user's) with
  ``sum_{T != T0} |p_T| t0^{(kappa,T) - d} r^{|T|} <= |p_T0| r^s / 4``;
* ``c = 2 / |p_T0|`` so that ``|1/det A|_{t0^kappa r} <= c / (t0^d r^s)``;
* eta bounds the perturbation ``det(A_{p0} + Z) - det A_{p0}`` and
  ``eta_1 = min_k t0^kappa_k eta / (2 l |L^{-1}|)``;
* c1 is the constant of the cohomological bound
  ``|U_alpha| <= c1 / omega_{k+1}^2 max_i |R_{i,alpha}|``.

Everything is evaluated in floating point from the exact data.  Hypotheses
that fail are reported, never raised.
"""

from __future__ import annotations

import math
import random
from dataclasses import asdict, dataclass, field
from itertools import combinations, permutations
from typing import Sequence

from .cartan import _sign, det
from .errors import InvalidBound
from .fields import VectorField
from .scalars import magnitude
from .series import FormalSeries, PolyradiusSpec, inverse_bound, majorant_norm, monomial_inverse_norm
from .torus import omega_sequence

SLACK = 1e-9


def field_norm(X: VectorField, R) -> float:
    """Majorant norm of a field: the largest component norm."""
    return max(majorant_norm(c, R) for c in X.components)


def jacobian_norm(X: VectorField, R) -> float:
    """|D X|_R: the largest norm among the Jacobian entries."""
    return max(majorant_norm(c.diff(j), R) for c in X.components for j in range(X.n))


def l1_norm(f: FormalSeries) -> float:
    return sum(magnitude(c) for c in f.terms.values())


def _kappa_dot(kappa: Sequence[float], q: Sequence[int]) -> float:
    return sum(k * e for k, e in zip(kappa, q))


def unique_minimizer(kappa: Sequence[float], support: Sequence[tuple], rel_tol: float = 1e-9):
    """(d, T0) if (kappa, T) has a unique minimizer over ``support``, else None."""
    vals = sorted((_kappa_dot(kappa, q), q) for q in support)
    if len(vals) > 1 and vals[1][0] - vals[0][0] <= rel_tol * max(1.0, abs(vals[0][0])):
        return None
    return vals[0]


def sample_kappa(n: int, support: Sequence[tuple], seed: int = 0, budget: int = 100) -> tuple:
    """kappa drawn in (1/2, 3/2)^n and resampled until the minimizer over ``support`` is unique."""
    rng = random.Random(seed)
    for _ in range(budget):
        kappa = tuple(rng.uniform(0.5, 1.5) for _ in range(n))
        if not support or unique_minimizer(kappa, support) is not None:
            return kappa
    raise InvalidBound("could not sample kappa with a unique minimizer")


def default_polyradius(state, r: float = 1.0, seed: int = 0) -> PolyradiusSpec:
    return PolyradiusSpec(r, sample_kappa(state.n, [], seed), 1.0)


def perturbation_coefficients(A0: Sequence[Sequence[FormalSeries]]) -> dict:
    """d_Q with det(A0 + Z) - det(A0) = sum_Q d_Q Z^Q, keyed by frozensets of (i, j).

    Each monomial in the entries z_ij is squarefree, so a set of positions
    identifies it.
    """
    l = len(A0)
    ref = A0[0][0]
    out: dict = {}
    for perm in permutations(range(l)):
        sgn = _sign(perm)
        for size in range(1, l + 1):
            for rows in combinations(range(l), size):
                prod = FormalSeries.constant(1, ref.n, ref.order, ref.arith)
                for i in range(l):
                    if i not in rows:
                        prod = prod * A0[i][perm[i]]
                key = frozenset((i, perm[i]) for i in rows)
                term = prod if sgn > 0 else -prod
                out[key] = out[key] + term if key in out else term
    return out


def _bisect_increasing(fn, target: float, hi: float, iters: int = 200) -> float:
    """Largest x in (0, hi] with fn(x) <= target for an increasing fn with fn(0) = 0."""
    if fn(hi) <= target:
        return hi
    lo = 0.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if fn(mid) <= target:
            lo = mid
        else:
            hi = mid
    return lo


@dataclass
class EstimateConstants:
    r: float
    kappa: tuple
    t0: float
    p0: int
    d: float
    T0: tuple
    p_T0: float
    s: int
    c: float
    eta: float
    eta_1: float
    M1: int
    M: int
    C: float
    L_inv_norm: float
    max_S_norm: float
    c1: float
    det_inverse_bound: float | None = None

    def to_json(self) -> dict:
        out = asdict(self)
        out["T0"] = list(self.T0)
        out["kappa"] = list(self.kappa)
        return out


@dataclass
class BoundCheck:
    weight: list
    lhs: float
    rhs: float
    holds: bool
    slack: float


@dataclass
class EstimateReport:
    m: int
    omega: float | None
    constants: EstimateConstants | None
    checks: list = field(default_factory=list)
    hypotheses: dict = field(default_factory=dict)
    hypotheses_unmet: bool = False
    error: str | None = None

    @property
    def all_hold(self) -> bool:
        return all(c.holds for c in self.checks)

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "omega": self.omega,
            "constants": None if self.constants is None else self.constants.to_json(),
            "checks": [asdict(c) for c in self.checks],
            "all_hold": self.all_hold,
            "hypotheses": self.hypotheses,
            "hypotheses_unmet": self.hypotheses_unmet,
            "error": self.error,
        }


def estimate_constants(dec, S, P: PolyradiusSpec, m: int, seed: int = 0) -> EstimateConstants:
    """Constants of the determinant lemma and of the cohomological bound for one step."""
    l = dec.l
    n = S.n
    r = P.r
    p0 = dec.p0(m)
    if p0 is None:
        raise InvalidBound("det A_p vanishes for every p <= m")
    A0 = dec.truncated(p0)
    detp = det(A0)
    support = list(detp.terms)
    kappa = tuple(P.kappa)
    best = unique_minimizer(kappa, support)
    if best is None:
        kappa = sample_kappa(n, support, seed)
        best = unique_minimizer(kappa, support)
    d, T0 = best
    pT0 = magnitude(detp.terms[T0])
    s = sum(T0)
    others = [(magnitude(c), _kappa_dot(kappa, q) - d, sum(q)) for q, c in detp.terms.items() if q != T0]
    rhs_t = pT0 * r**s / 4

    def tail(t):
        return sum(a * t**e * r**deg for a, e, deg in others)

    t0 = _bisect_increasing(tail, rhs_t, P.t0)
    if t0 <= 0:
        raise InvalidBound("no admissible t0")
    c = 2.0 / pT0

    coeffs = perturbation_coefficients(A0)
    weights = [(l1_norm(f), len(key)) for key, f in coeffs.items() if not f.is_zero()]
    target = pT0 / 4 * r**s * t0**d
    eta = _bisect_increasing(lambda e: sum(w * e**k for w, k in weights), target, 1e6)

    L_inv_norm = max(magnitude(v) for row in S.L_inv for v in row)
    eta_1 = min(t0**k for k in kappa) * eta / (2 * l * L_inv_norm)
    M1 = math.factorial(l)
    M = max(1, math.factorial(l - 1))
    C = max(l1_norm(a) for row in A0 for a in row)
    max_S = max(max(magnitude(v) for v in row) for row in S.Lambda)
    c1 = (
        2 ** (2 * s) * c**2 * l * M * (C + eta) ** (l - 1) / t0 ** (2 * d)
        * ((M1 * C**l + 1 / (2 * c)) + l**2 * M * (C + eta) ** (l - 1) * n * eta * max_S)
    )

    R = PolyradiusSpec(r, kappa, t0)
    det_bound = None
    try:
        full = dec.detA
        g = full - FormalSeries.monomial(T0, detp.terms[T0], full.order, full.arith).with_order(full.order)
        det_bound = inverse_bound(monomial_inverse_norm(detp.terms[T0], T0, R), majorant_norm(g, R))
    except InvalidBound:
        det_bound = None
    return EstimateConstants(
        r, kappa, t0, p0, d, tuple(T0), pT0, s, c, eta, eta_1, M1, M, C, L_inv_norm, max_S, c1, det_bound
    )


def estimate_diagnostics(step, state, P: PolyradiusSpec, seed: int = 0) -> EstimateReport:
    """Evaluate the constants for a Newton step and check the bound on every U_alpha.

    ``step`` is the record kept by the Newton step (decomposition, NF parts,
    buckets with U_alpha and R_{i,alpha}); ``state`` provides S and the orders.
    """
    m = step.m
    S = state.S
    k = max(0, math.ceil(math.log2(m)))
    try:
        omega = omega_sequence(S, k + 1).omega[k + 1]
    except Exception as exc:
        return EstimateReport(m, None, None, error=f"omega: {exc}")
    try:
        const = estimate_constants(step.dec, S, P, m, seed)
    except InvalidBound as exc:
        return EstimateReport(m, omega, None, error=str(exc), hypotheses_unmet=True)
    R = PolyradiusSpec(const.r, const.kappa, const.t0)
    factor = const.c1 / omega**2
    checks = []
    for b in step.buckets:
        lhs = field_norm(b.U, R)
        rem = max((field_norm(x, R) for x in b.R if x is not None), default=0.0)
        rhs = factor * rem
        checks.append(BoundCheck([str(c) for c in b.weight.coefficients], lhs, rhs, lhs <= rhs + SLACK, rhs - lhs))

    orders = state.orders
    NF = step.NF
    p0 = const.p0
    near = max(field_norm(X - X.jet(min(p0 + orders[i] - 1, X.order)), R) for i, X in enumerate(NF))
    deriv = max(jacobian_norm(X - X.jet(1), R) for X in NF)
    A0 = step.dec.truncated(p0)
    pert = max(majorant_norm(a - a0, R) for row, row0 in zip(step.dec.A, A0) for a, a0 in zip(row, row0))
    margins = [
        const.eta_1 - 8 * S.n / (m - d + 1) if m - d + 1 > 0 else None for d in orders
    ]
    hyp = {
        "r_in_range": 0.5 < const.r <= 1.0,
        "nf_near_p0_jet": near,
        "nf_near_p0_jet_ok": near < const.eta_1,
        "nf_derivative": deriv,
        "nf_derivative_ok": deriv < const.eta_1,
        "A_minus_Ap0": pert,
        "A_minus_Ap0_ok": pert < const.eta,
        "eta_1_minus_8n_over_m_minus_d_plus_1": margins,
    }
    unmet = not (hyp["r_in_range"] and hyp["nf_near_p0_jet_ok"] and hyp["nf_derivative_ok"] and hyp["A_minus_Ap0_ok"])
    return EstimateReport(m, omega, const, checks, hyp, unmet)
