"""Shared hypothesis strategies and settings."""

from __future__ import annotations

import os

from gmpy2 import mpq
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from cartannf.fields import JetDiffeo, VectorField
from cartannf.scalars import EXACT
from cartannf.series import FormalSeries, multi_indices

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("ci", max_examples=150, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

rationals = st.builds(
    lambda a, b: mpq(a, b),
    st.integers(-5, 5).filter(lambda v: v != 0),
    st.integers(1, 4),
)


def monomials(n: int, lo: int, hi: int) -> list:
    return [q for d in range(lo, hi + 1) for q in multi_indices(n, d)]


@st.composite
def series(draw, n: int = 2, order: int = 5, lo: int = 0, hi: int | None = None, max_terms: int = 5):
    """Sparse exact series in n variables with degrees in [lo, hi]."""
    hi = order if hi is None else hi
    pool = monomials(n, lo, hi)
    qs = draw(st.lists(st.sampled_from(pool), max_size=max_terms, unique=True))
    return FormalSeries(n, order, {q: draw(rationals) for q in qs}, EXACT)


@st.composite
def fields(draw, n: int = 2, order: int = 5, lo: int = 1, hi: int | None = None, max_terms: int = 3):
    return VectorField([draw(series(n, order, lo, hi, max_terms)) for _ in range(n)])


@st.composite
def diffeos(draw, n: int = 2, order: int = 5, max_terms: int = 2):
    """Id + U with U polynomial of order >= 2."""
    U = draw(fields(n, order, 2, min(order, 4), max_terms))
    return JetDiffeo.from_field(U)


# -- acceptance summary -------------------------------------------------------------

ACCEPTANCE_LINES: dict = {}


def record_criterion(number: int, title: str, passed: bool, detail: str = "") -> str:
    """Store and print one PASS/FAIL line for an acceptance criterion."""
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title}" + (f" ({detail})" if detail else "")
    ACCEPTANCE_LINES[number] = line
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
