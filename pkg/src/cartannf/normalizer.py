"""Poincare-Dulac normalization and the differentiated Newton method for commuting families.

A family X_1, ..., X_l is *normalized to order m* when the nonzero-weight
part of ``J^{m + d_i - 1}(X_i)`` vanishes for every i, where ``d_i`` is the
order of X_i at 0.  Each step conjugates by ``Phi = (Id + U)^{-1}`` with
``U`` a sum of nonzero-weight fields, so ``pullback(Phi, X) = X + [U, X] + ...``.

The Newton step solves, for every nonzero weight alpha, the system
``F_i + [U_alpha, NF_i] = 0`` (i = 1..l) through the cofactor identity

    alpha^2 det(A)^2 U = alpha det(A) G + D~(G),   G = sum_p c_p F_p,

where ``NF_i = sum_j a_ij S_j``, ``C = (c_ij)`` is the cofactor transpose of
``A``, ``D_q(V) = sum_r V(a_qr) S_r`` and ``D~ = sum_q c_q D_q`` (row i* of C).
The right side is divisible by ``det(A)^2``; the quotient is found by a
triangular solve over homogeneous degrees.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from .cartan import (
    CartanCertificate,
    NormalFormDecomposition,
    certify_cartan,
    det,
    decompose_over_module,
    single_field_morphism,
)
from .errors import CartanViolation, CommutationFailure, NotInModule, RankDeficient, SolveInconsistent
from .fields import JetDiffeo, VectorField, compose, invert, lie_bracket, pullback
from .scalars import magnitude
from .series import FormalSeries
from .torus import LieMorphism, is_regular_element, nonzero_weight_part, weight_decompose

log = logging.getLogger(__name__)


class Gauge(str, Enum):
    """Choice of the free zero-weight component of each generator U."""

    ZERO_ON_KERNEL = "zero_on_kernel"


class Mode(str, Enum):
    STEPWISE = "stepwise"
    NEWTON = "newton"


class NotRegular(CartanViolation):
    """The linear part of the first field is not a regular element of S(g)."""


# -- polynomial helpers ----------------------------------------------------------


def _lex_lead(f: FormalSeries):
    q = max(f.terms)
    return q, f.terms[q]


def exact_divide(f: FormalSeries, g: FormalSeries) -> FormalSeries:
    """Quotient of polynomials f / g, raising SolveInconsistent on a nonzero remainder.

    Multivariate long division against the lexicographic leading term of g;
    for g dividing f the remainder is zero and the quotient unique.
    """
    if g.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    gq, gc = _lex_lead(g)
    quotient = {}
    rest = f
    arith = f.arith
    while not rest.is_zero():
        rq, rc = _lex_lead(rest)
        if any(a < b for a, b in zip(rq, gq)):
            raise SolveInconsistent(f"division leaves the remainder term x^{rq}")
        tq = tuple(a - b for a, b in zip(rq, gq))
        tc = arith.div(rc, gc)
        quotient[tq] = quotient.get(tq, arith.zero) + tc
        rest = rest - FormalSeries(f.n, f.order, {tq: tc}, arith, _trusted=True) * g
    return FormalSeries(f.n, f.order, quotient, arith)


def _divide_field(V: VectorField, g: FormalSeries) -> VectorField:
    return VectorField([exact_divide(c, g) for c in V.components])


def D_operator(dec: NormalFormDecomposition, q: int, V: VectorField) -> VectorField:
    """D_q(V) = sum_r V(a_qr) S_r."""
    out = VectorField.zero(V.n, V.order, V.arith)
    for a, Sr in zip(dec.A[q], dec.basis_fields):
        da = V.derive(a)
        if not da.is_zero():
            out = out + Sr.times(da)
    return out


def tilde_D(dec: NormalFormDecomposition, i: int, V: VectorField) -> VectorField:
    """D~_i(V) = sum_q c_iq D_q(V); nilpotent of index 2 since S_r(a_qp) = 0."""
    out = VectorField.zero(V.n, V.order, V.arith)
    for q in range(dec.l):
        c = dec.C[i][q]
        if c.is_zero():
            continue
        dq = D_operator(dec, q, V)
        if not dq.is_zero():
            out = out + dq.times(c)
    return out


def _conjugate(fields: Sequence[VectorField], U: VectorField):
    """Pull every field back by Phi = (Id + U)^{-1}; returns (fields, Phi)."""
    phi = invert(JetDiffeo.from_field(U))
    return [pullback(phi, X) for X in fields], phi


# -- single field --------------------------------------------------------------


def poincare_dulac_normalize(
    X: VectorField,
    s: VectorField | None = None,
    N: int | None = None,
    gauge: Gauge = Gauge.ZERO_ON_KERNEL,
) -> tuple[VectorField, JetDiffeo]:
    """Degree-by-degree normal form of X with respect to its diagonal linear part s.

    Parameters
    ----------
    X : VectorField
        Field whose linear part equals ``s``.
    s : VectorField, optional
        Diagonal linear field; defaults to the linear part of X.
    N : int, optional
        Target order (defaults to the truncation order of X).
    gauge : Gauge
        Only ``ZERO_ON_KERNEL`` is offered: generators carry no zero-weight part.

    Returns
    -------
    (NF, phi)
        ``NF = pullback(phi, X)`` with ``[s, J^N(NF)] = 0``.  Near-resonant
        monomials in float mode are left in NF.
    """
    if gauge is not Gauge.ZERO_ON_KERNEL:
        raise ValueError(f"unsupported gauge {gauge!r}")
    if s is None:
        s = VectorField.linear(X.linear_part(), X.order, X.arith)
    S = single_field_morphism(s)
    lin = X.jet(1)
    if lin != s.with_order(X.order):
        raise ValueError("the linear part of X differs from s")
    N = X.order if N is None else N
    if N > X.order:
        X = X.with_order(N)
    psi = JetDiffeo.identity(X.n, X.order, X.arith)
    for k in range(2, N + 1):
        U = _stepwise_generator(X, S, [X.arith.one], k)
        if U is None:
            continue
        (X,), phi = _conjugate([X], U)
        psi = compose(psi, phi)
    return X, psi


def _stepwise_generator(X: VectorField, S: LieMorphism, g0: Sequence, k: int) -> VectorField | None:
    """U_k = (nonzero-weight degree-k part of X) / alpha(g0), so [U_k, s] cancels it."""
    arith = X.arith
    terms = [dict() for _ in range(X.n)]
    found = False
    for q, i, c in X.homogeneous(k).monomials():
        w = S.weight_vector(q, i)
        if S.is_zero_weight(w):
            continue
        a = sum((wj * gj for wj, gj in zip(w, g0)), arith.zero)
        if arith.is_zero(a):
            # g0 hits this weight's hyperplane: the term cannot be removed with X alone
            raise NotRegular(f"alpha(g0) vanishes on the nonzero weight of x^{q} d{i + 1}")
        terms[i][q] = c / a
        found = True
    if not found:
        return None
    return VectorField([FormalSeries(X.n, X.order, t, arith) for t in terms])


# -- family state ---------------------------------------------------------------


@dataclass
class BucketSolve:
    """Data of one weight alpha in a Newton step."""

    key: tuple
    weight: object
    i_star: int
    U: VectorField
    F: list
    R: list
    rest_valuation: float = math.inf


@dataclass
class StepRecord:
    kind: str
    m: int
    m_next: int
    delta: int = 0
    buckets: list = field(default_factory=list)
    dec: NormalFormDecomposition | None = None
    NF: list = field(default_factory=list)
    normal_ok: bool = True
    residual_ok: bool = True
    rest_t_ok: bool = True
    generator_terms: int = 0

    def summary(self) -> dict:
        return {
            "kind": self.kind,
            "m": self.m,
            "m_next": self.m_next,
            "ord_detA": self.delta,
            "weights": len(self.buckets),
            "generator_terms": self.generator_terms,
            "normal_ok": self.normal_ok,
            "residual_ok": self.residual_ok,
            "rest_t_ok": self.rest_t_ok,
        }


@dataclass
class NewtonState:
    """Current fields, certified order m, and the accumulated diffeomorphism.

    ``fields[i]`` equals ``pullback(psi, original[i])``; J^{m + d_i - 1}
    of it has no nonzero-weight part.
    """

    fields: list
    orders: list
    m: int
    psi: JetDiffeo
    S: LieMorphism
    g0: list
    history: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.fields[0].n

    @property
    def cap(self) -> int:
        return self.fields[0].order

    def normal_part(self, i: int, m: int | None = None) -> VectorField:
        m = self.m if m is None else m
        return self.fields[i].jet(min(m + self.orders[i] - 1, self.cap))

    def remainder(self, i: int) -> VectorField:
        return self.fields[i] - self.normal_part(i)

    def is_normalized(self, m: int | None = None) -> bool:
        return all(nonzero_weight_part(self.normal_part(i, m), self.S).is_zero() for i in range(len(self.fields)))


def _weight_buckets(fields: Sequence[VectorField], S: LieMorphism) -> dict:
    """{key: (Weight, [bucket field of each member or None])} over nonzero weights."""
    out: dict = {}
    for i, P in enumerate(fields):
        for key, b in weight_decompose(P, S).items():
            if S.is_zero_weight(b.weight.coefficients):
                continue
            entry = out.setdefault(key, (b.weight, [None] * len(fields)))
            entry[1][i] = b.field
    return out


def stepwise_step(state: NewtonState) -> NewtonState:
    """Normalize one more degree of X_1; the other members follow by commutation."""
    m1 = state.m + 1
    U = _stepwise_generator(state.fields[0], state.S, state.g0, m1)
    rec = StepRecord("stepwise", state.m, m1)
    fields, psi = state.fields, state.psi
    if U is not None:
        fields, phi = _conjugate(fields, U)
        psi = compose(psi, phi)
        rec.generator_terms = U.term_count()
    new = NewtonState(fields, state.orders, m1, psi, state.S, state.g0, state.history + [rec])
    rec.normal_ok = new.is_normalized()
    if not rec.normal_ok:
        raise CommutationFailure(f"stepwise normalization to order {m1} did not propagate to the whole family")
    return new


def newton_step(state: NewtonState, S: LieMorphism | None = None, target: int | None = None) -> NewtonState:
    """Upgrade a family normalized to order m into one normalized to order ``target`` (default 2m).

    Raises
    ------
    CartanViolation
        det of the junior matrix vanishes identically.
    SolveInconsistent
        the multiplied-through equation has no polynomial solution.
    """
    S = state.S if S is None else S
    m = state.m
    m2 = 2 * m if target is None else target
    if not m < m2 <= 2 * m:
        raise ValueError(f"a Newton step from m={m} reaches at most {2 * m}, asked for {m2}")
    K = state.cap
    d = state.orders
    l = len(state.fields)
    if max(m2 + di - 1 for di in d) > K:
        raise ValueError(f"truncation order {K} too small for target {m2}")
    NF = [state.normal_part(i) for i in range(l)]
    for i, P in enumerate(NF):
        if not nonzero_weight_part(P, S).is_zero():
            raise ValueError(f"member {i + 1} is not normalized to order {m + d[i] - 1}")

    dec = decompose_over_module(NF, S)
    if det_is_zero(dec.junior):
        raise CartanViolation("det of the junior matrix vanishes identically")
    delta = int(dec.detA.valuation)

    # all data is polynomial, so lifting to the working cap Kc is exact
    Kc = max(m2 + 2 * delta, K)
    dec_c = dec.with_order(Kc)
    det_c = dec_c.detA
    det2 = det_c * det_c
    D0 = det2.homogeneous(2 * delta)
    Dj = {j: det2.homogeneous(2 * delta + j) for j in range(1, m2 - m)}

    B = [state.fields[i].degree_range(m + d[i], m2 + d[i] - 1) for i in range(l)]
    R = [state.remainder(i) for i in range(l)]
    R_buckets = _weight_buckets(R, S)
    rec = StepRecord("newton", m, m2, delta=delta, dec=dec, NF=NF)
    arith = state.fields[0].arith
    zero_K = VectorField.zero(state.n, K, arith)
    U_total = zero_K
    for key, (weight, Fs) in _weight_buckets(B, S).items():
        alpha = weight.coefficients
        i_star = max(range(len(alpha)), key=lambda j: magnitude(alpha[j]))
        a = alpha[i_star]
        F_c = [f.with_order(Kc) if f is not None else None for f in Fs]
        G = VectorField.zero(state.n, Kc, arith)
        for p, f in enumerate(F_c):
            if f is not None and not dec_c.C[i_star][p].is_zero():
                G = G + f.times(dec_c.C[i_star][p])
        H = tilde_D(dec_c, i_star, G)
        P = G.times(det_c).scale(a) + H
        low = P.jet(m + 2 * delta)
        if not low.is_zero():
            raise SolveInconsistent(f"right side has terms below degree {m + 1 + 2 * delta}")
        a2 = a * a
        lead = D0.scale(a2)
        parts = {}
        for k in range(m + 1, m2 + 1):
            rhs = P.homogeneous(k + 2 * delta)
            for j in range(1, k - m):
                if not Dj[j].is_zero() and not parts[k - j].is_zero():
                    rhs = rhs - parts[k - j].times(Dj[j]).scale(a2)
            parts[k] = _divide_field(rhs, lead)
        U_alpha = zero_K
        for k in range(m + 1, m2 + 1):
            U_alpha = U_alpha + parts[k].with_order(K)
        # order bookkeeping: sum_p c_p (F_p + [U, NF_p]) = G - alpha det U + D~(U) vanishes below m2 + 1 + delta
        U_c = U_alpha.with_order(Kc)
        rest = G - U_c.times(det_c).scale(a) + tilde_D(dec_c, i_star, U_c)
        Rs = R_buckets.get(key, (weight, [None] * l))[1]
        bucket = BucketSolve(key, weight, i_star, U_alpha, list(Fs), list(Rs), rest.valuation)
        rec.buckets.append(bucket)
        if rest.valuation - delta < m2 + 1:
            rec.rest_t_ok = False
        U_total = U_total + U_alpha

    for b in rec.buckets:
        for i in range(l):
            F = b.F[i] if b.F[i] is not None else zero_K
            res = (F + lie_bracket(b.U, NF[i])).jet(m2 + d[i] - 1)
            if not res.is_zero():
                rec.residual_ok = False

    fields, psi = state.fields, state.psi
    if not U_total.is_zero():
        fields, phi = _conjugate(fields, U_total)
        psi = compose(psi, phi)
    rec.generator_terms = U_total.term_count()
    new = NewtonState(fields, d, m2, psi, S, state.g0, state.history + [rec])
    rec.normal_ok = new.is_normalized()
    if not (rec.normal_ok and rec.residual_ok):
        raise SolveInconsistent(f"Newton step {m} -> {m2} failed its postconditions")
    log.debug("newton step %d -> %d: %d weights, %d terms", m, m2, len(rec.buckets), rec.generator_terms)
    return new


def det_is_zero(matrix) -> bool:
    return det(matrix).is_zero()


# -- driver ----------------------------------------------------------------------


@dataclass
class NormalizationReport:
    mode: str
    N: int
    cap: int
    g0: list
    orders: list
    p0: int | None
    certificate: CartanCertificate | None
    steps: list
    master_invariant: bool
    normalized: bool
    gamma: list = field(default_factory=list)
    radius_ledger: list = field(default_factory=list)
    lemma_nb: dict = field(default_factory=dict)
    estimates: list = field(default_factory=list)
    seed: int | None = None

    def to_json(self, arith) -> dict:
        return {
            "mode": self.mode,
            "N": self.N,
            "cap": self.cap,
            "seed": self.seed,
            "g0": [arith.to_json(v) for v in self.g0],
            "orders": self.orders,
            "p0": self.p0,
            "cartan": None if self.certificate is None else self.certificate.to_json(),
            "steps": [s.summary() for s in self.steps],
            "master_invariant": self.master_invariant,
            "normalized": self.normalized,
            "gamma": self.gamma,
            "radius_ledger": self.radius_ledger,
            "lemma_nb": self.lemma_nb,
            "estimates": self.estimates,
        }


def _check_family(X: Sequence[VectorField], S: LieMorphism, N: int) -> list:
    """Validate the regular member and commutation; returns g0."""
    X1 = X[0]
    M = X1.linear_part()
    n = X1.n
    for a in range(n):
        for b in range(n):
            if a != b and not X1.arith.is_zero(M[a][b]):
                raise NotRegular("the linear part of X_1 is not diagonal")
    g0 = S.coordinates_of([M[i][i] for i in range(n)])
    if g0 is None:
        raise NotRegular("the linear part of X_1 is not in S(g)")
    if not is_regular_element(g0, S, N):
        raise NotRegular("the linear part of X_1 is not a regular element up to the working order")
    for i, Y in enumerate(X[1:], start=2):
        if not lie_bracket(X1, Y).is_zero():
            raise CommutationFailure(f"[X_1, X_{i}] does not vanish up to order {X1.order}")
    return g0


def _first_power_of_two(k: int) -> int:
    m = 1
    while m < k:
        m *= 2
    return m


def normalize_family(
    X: Sequence[VectorField],
    S: LieMorphism,
    N: int | None = None,
    mode: Mode | str = Mode.NEWTON,
    *,
    estimates: bool = False,
    polyradius=None,
    seed: int | None = None,
    verify: bool = True,
) -> tuple[list, JetDiffeo, NormalizationReport]:
    """Normalize a commuting family X_1 (regular), X_2, ..., X_l to order N.

    The inputs are read as polynomials and lifted to the working cap
    ``K = N + max(d_i) - 1`` so that ``J^{N + d_i - 1}`` is available for
    every member.

    Returns
    -------
    (NF, Psi, report)
        ``NF[i] = J^{N + d_i - 1}(pullback(Psi, X[i]))`` has no nonzero-weight
        part; ``report`` records the steps, the Cartan certificate, per-step
        gamma_k and the radius ledger.
    """
    mode = Mode(mode)
    X = list(X)
    N = X[0].order if N is None else N
    if N < 2:
        raise ValueError("N must be >= 2")
    if len(X) != S.l:
        raise ValueError(f"family has {len(X)} members, the algebra has dimension {S.l}")
    orders = [int(Y.valuation) for Y in X]
    if any(d == math.inf or d < 1 for d in orders):
        raise ValueError("every member must be a nonzero field vanishing at 0")
    K = N + max(orders) - 1
    X = [Y.with_order(K) if Y.order != K else Y for Y in X]
    g0 = _check_family(X, S, K)
    psi0 = JetDiffeo.identity(X[0].n, K, X[0].arith)
    state = NewtonState(list(X), orders, 1, psi0, S, g0)

    certificate = None
    p0 = None
    if mode is Mode.STEPWISE:
        while state.m < N:
            state = stepwise_step(state)
    else:
        m_pad = _first_power_of_two(max(2, max(orders)))
        while True:
            while state.m < min(m_pad, N):
                state = stepwise_step(state)
            dec = decompose_over_module([state.normal_part(i) for i in range(S.l)], S)
            certificate = certify_cartan(dec)
            if not certificate.cartan:
                raise CartanViolation("junior parts are not free: det of the junior matrix vanishes identically")
            p0 = dec.p0(state.m)
            if p0 is None or p0 <= m_pad or m_pad >= N:
                break
            m_pad = _first_power_of_two(p0)
        while state.m < N:
            state = newton_step(state, S, min(2 * state.m, N))

    if mode is Mode.STEPWISE:
        # the certificate is informative only: stepwise normalization needs no module structure
        try:
            dec = decompose_over_module([state.normal_part(i) for i in range(S.l)], S)
            certificate = certify_cartan(dec)
            p0 = certificate.p0
        except (NotInModule, RankDeficient):
            certificate = None

    NF = [state.fields[i].jet(N + orders[i] - 1) for i in range(S.l)]
    normalized = all(nonzero_weight_part(P, S).is_zero() for P in NF)
    master = True
    if verify:
        master = all(pullback(state.psi, Y) == Z for Y, Z in zip(X, state.fields))
    report = NormalizationReport(
        mode.value, N, K, g0, orders, p0, certificate, state.history, master, normalized, seed=seed
    )
    if mode is Mode.NEWTON:
        _radius_schedule(report, state, polyradius, estimates)
    return NF, state.psi, report


def _radius_schedule(report: NormalizationReport, state: NewtonState, polyradius, estimates: bool) -> None:
    """gamma_k = (c1 / omega_{k+1}^2)^(-1/m) per Newton step and R_{k+1} = gamma_k m^(-2/m) R_k."""
    from .estimates import default_polyradius, estimate_diagnostics
    from .torus import omega_sequence

    steps = [s for s in state.history if s.kind == "newton"]
    if not steps:
        return
    P = default_polyradius(state) if polyradius is None else polyradius
    R = P.r
    ledger = []
    for rec in steps:
        m = rec.m
        k = int(round(math.log2(m)))
        try:
            omega = omega_sequence(state.S, k + 1).omega[k + 1]
        except Exception as exc:  # budget guard
            report.gamma.append(None)
            ledger.append({"m": m, "error": str(exc)})
            continue
        c1 = None
        if estimates:
            est = estimate_diagnostics(rec, state, P)
            report.estimates.append(est.to_json())
            c1 = est.constants.c1 if est.constants is not None else None
        gamma = None if c1 is None else min(1.0, (c1 / omega**2) ** (-1.0 / m))
        rho = m ** (-1.0 / m) * R
        R_next = None if gamma is None else gamma * m ** (-2.0 / m) * R
        report.gamma.append(gamma)
        ledger.append({"m": m, "omega": omega, "r": R, "rho": rho, "R_next": R_next})
        if R_next is not None:
            R = R_next
    report.radius_ledger = ledger
    radii = [e["r"] for e in ledger if "r" in e]
    if len(radii) >= 2:
        report.lemma_nb = {
            "nonincreasing": all(b <= a for a, b in zip(radii, radii[1:])),
            "last_over_first": radii[-1] / radii[0],
            "above_half_of_first": all(x > radii[0] / 2 for x in radii),
        }
