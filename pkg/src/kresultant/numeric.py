"""Floating-point acceptance policy.

An identity ``S == V`` is accepted when ``|S - V| <= tol * max(1, scale)``,
where ``scale`` is the number of unit-modulus terms in ``S`` or, for sums of
larger terms, the sum of the absolute values of those terms.
"""

from __future__ import annotations

from fractions import Fraction

DEFAULT_TOL = 1e-8


def close(a, b, scale: float = 1.0, tol: float = DEFAULT_TOL) -> bool:
    return bool(abs(a - b) <= tol * max(1.0, float(scale)))


def leq(lhs, rhs, tol: float = DEFAULT_TOL) -> bool:
    """``lhs <= rhs`` up to relative slack ``tol``; exact for ints/Fractions."""
    if isinstance(lhs, (int, Fraction)) and isinstance(rhs, (int, Fraction)):
        return lhs <= rhs
    return bool(float(lhs) <= float(rhs) + tol * max(1.0, abs(float(rhs))))


def as_float(x) -> float:
    return float(x)
