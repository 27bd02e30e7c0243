"""JSON input/output for families, morphisms and normalization artifacts.

See ``docs/format.md`` for the schema.  Fields may be written in the full
form (``{"n", "order_cap", "components": [series, ...]}``) or the compact
form ``{"terms": [{"q": [...], "i": k, "c": "p/q"}, ...]}`` with 0-based
component index ``i``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Mapping

from .errors import DimensionMismatch, NormalFormError
from .fields import JetDiffeo, VectorField
from .scalars import Arith
from .series import FormalSeries
from .torus import LieMorphism, _solve_square


class ParseError(NormalFormError, ValueError):
    """Malformed or inconsistent input file."""

    exit_code = 2


def load_json(path: str) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from exc


def dump_json(obj: Any, path: str | None) -> str:
    text = json.dumps(obj, indent=2, sort_keys=False) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def parse_series(data: Mapping, n: int, order: int, arith: Arith) -> FormalSeries:
    """Series JSON; a term may give its coefficient as ``"c"`` instead of re/im.

    The cap is the larger of ``order`` and the cap stored in the file, so a
    jet written at a higher cap keeps its top-degree terms.
    """
    try:
        data = dict(data)
        data.setdefault("n", n)
        data["order"] = max(int(data.get("order", order)), order)
        terms = []
        for t in data.get("terms", []):
            if "c" in t:
                c = t["c"]
                t = {"q": t["q"], **(c if isinstance(c, dict) else {"re": c})}
            if len(t["q"]) != int(data["n"]):
                raise ParseError(f"exponent {t['q']} does not match n={data['n']}")
            terms.append(t)
        data["terms"] = terms
        return FormalSeries.from_json(data, arith)
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed series: {exc!r}") from exc


def parse_field(data: Mapping, n: int | None, order: int, arith: Arith) -> VectorField:
    """Full or compact field; the result is read as a polynomial at cap ``order``."""
    try:
        if "components" in data:
            nn = int(data.get("n", n if n is not None else len(data["components"])))
            comps = [parse_series(c, nn, order, arith) for c in data["components"]]
            cap = max(c.order for c in comps)
            return VectorField([c.with_order(cap) for c in comps])
        if n is None:
            n = len(data["terms"][0]["q"])
        terms = {}
        for t in data["terms"]:
            key = (tuple(int(v) for v in t["q"]), int(t["i"]))
            if len(key[0]) != n or not 0 <= key[1] < n:
                raise ParseError(f"term {t} does not match n={n}")
            terms[key] = t["c"] if "c" in t else {"re": t.get("re", 0), "im": t.get("im", 0)}
        return VectorField.from_terms(terms, n, order, arith)
    except ParseError:
        raise
    except (KeyError, TypeError, IndexError, ValueError, DimensionMismatch) as exc:
        raise ParseError(f"malformed field: {exc!r}") from exc


def parse_morphism(data: Mapping, arith: Arith) -> LieMorphism:
    try:
        rows = data["Lambda"]
    except (KeyError, TypeError) as exc:
        raise ParseError("morphism needs a 'Lambda' matrix") from exc
    try:
        return LieMorphism(rows, arith)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, NormalFormError):
            raise
        raise ParseError(f"malformed Lambda: {exc!r}") from exc


@dataclass
class FamilyInput:
    fields: list
    S: LieMorphism | None
    linear_map: list | None
    raw: Mapping


def parse_family(data: Mapping, order: int, arith: Arith) -> FamilyInput:
    if not isinstance(data, Mapping) or "fields" not in data:
        raise ParseError("family file needs a 'fields' list")
    S = parse_morphism(data["morphism"], arith) if data.get("morphism") is not None else None
    n = S.n if S is not None else data.get("n")
    fields = [parse_field(f, n, order, arith) for f in data["fields"]]
    if not fields:
        raise ParseError("empty family")
    if len({f.n for f in fields}) != 1:
        raise ParseError("fields disagree on n")
    lin = data.get("linear_map")
    if lin is not None:
        lin = [[arith.coerce(v) for v in row] for row in lin]
    return FamilyInput(fields, S, lin, data)


# -- linear changes of coordinates --------------------------------------------------


def _nullspace_vector(M: list, arith: Arith) -> list | None:
    """One nonzero solution of M v = 0 (Gaussian elimination), or None."""
    n = len(M)
    A = [list(r) for r in M]
    pivots = []
    row = 0
    for col in range(n):
        piv = next((r for r in range(row, n) if not arith.is_zero(A[r][col])), None)
        if piv is None:
            continue
        A[row], A[piv] = A[piv], A[row]
        p = A[row][col]
        A[row] = [v / p for v in A[row]]
        for r in range(n):
            if r != row and not arith.is_zero(A[r][col]):
                f = A[r][col]
                A[r] = [a - f * b for a, b in zip(A[r], A[row])]
        pivots.append(col)
        row += 1
    free = [c for c in range(n) if c not in pivots]
    if not free:
        return None
    fc = free[0]
    v = [arith.zero] * n
    v[fc] = arith.one
    for r, pc in enumerate(pivots):
        v[pc] = -A[r][fc]
    return v


def diagonalizing_map(M: list, arith: Arith) -> list | None:
    """P with P M P^{-1} diagonal, for triangular M with distinct diagonal entries.

    Returns None if M is already diagonal.  Raises ParseError for other
    matrices (supply ``linear_map`` in the input instead).
    """
    n = len(M)
    off = [(a, b) for a in range(n) for b in range(n) if a != b and not arith.is_zero(M[a][b])]
    if not off:
        return None
    lower = all(a > b for a, b in off)
    upper = all(a < b for a, b in off)
    diag = [M[k][k] for k in range(n)]
    distinct = all(not arith.eq(diag[a], diag[b]) for a in range(n) for b in range(a + 1, n))
    if not ((lower or upper) and distinct):
        raise ParseError("linear part is not diagonal; give 'linear_map' in the input")
    cols = []
    for k, lam in enumerate(diag):
        shifted = [[M[a][b] - (lam if a == b else arith.zero) for b in range(n)] for a in range(n)]
        v = _nullspace_vector(shifted, arith)
        # triangular eigenvectors have v[k] != 0; unit diagonal keeps P unipotent
        cols.append([c / v[k] for c in v])
    V = [[cols[j][i] for j in range(n)] for i in range(n)]
    return _solve_square(V, arith)


def linear_pullback(P: list, X: VectorField) -> VectorField:
    """X in the coordinates u = P x: Y(u) = P X(P^{-1} u)."""
    arith = X.arith
    n = X.n
    Pinv = _solve_square(P, arith)
    if Pinv is None:
        raise ParseError("linear_map is singular")
    maps = []
    for i in range(n):
        s = FormalSeries.zero(n, X.order, arith)
        for j in range(n):
            if not arith.is_zero(Pinv[i][j]):
                s = s + FormalSeries.variable(j, n, X.order, arith).scale(Pinv[i][j])
        maps.append(s)
    Xc = X.compose(maps)
    comps = []
    for i in range(n):
        s = FormalSeries.zero(n, X.order, arith)
        for j in range(n):
            if not arith.is_zero(P[i][j]):
                s = s + Xc.components[j].scale(P[i][j])
        comps.append(s)
    return VectorField(comps)


def matrix_to_json(M: list, arith: Arith) -> list:
    return [[arith.to_json(v) for v in row] for row in M]


def parse_diffeo(data: Mapping, arith: Arith) -> JetDiffeo:
    try:
        return JetDiffeo.from_json(data, arith)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, NormalFormError):
            raise
        raise ParseError(f"malformed diffeomorphism: {exc!r}") from exc
