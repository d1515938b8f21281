from functools import lru_cache

import pytest

from kresultant.field import make_field
from kresultant.lattice import Space
from oracle import PolyField, TupleSpace


@lru_cache(maxsize=None)
def field(p, n=1):
    return make_field(p, n)


@lru_cache(maxsize=None)
def space(p, n, d):
    return Space(field(p, n), d)


@lru_cache(maxsize=None)
def poly_field(p, n=1):
    return PolyField(p, n, field(p, n).spec.modulus)


@lru_cache(maxsize=None)
def tuple_space(p, n, d):
    return TupleSpace(poly_field(p, n), d)


@pytest.fixture
def get_space():
    return space


# acceptance criteria register their verdicts here; printed after the run
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
