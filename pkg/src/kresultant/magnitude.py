"""The counting function nu_k, the resultant magnitude set Delta_k(E), and
audits of the inequalities that bound |Delta_k(E)| from below."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal

import numpy as np

from .errors import BadDimension, DegenerateSet, RoundingOverflow, TooLarge
from .lattice import PointSet, Space
from .numeric import DEFAULT_TOL, close, leq
from .restriction import lemma32_exponents, lemma33_exponents, sphere_moment
from .spectral import fourier, set_hat, set_tilde, sphere_hats

COUNT_LIMIT = 2**63
# Doubles hold every integer below 2^53, so no float route can resolve counts
# beyond it.  Below FLOAT_SAFE the round-off of one transform stays far under
# 1/2; above it the direct route convolves in limbs that keep each transform
# output below FLOAT_SAFE.
SPECTRAL_LIMIT = 2**53
FLOAT_SAFE = 2**45


@dataclass(frozen=True)
class NuProfile:
    k: int
    counts: tuple[int, ...]
    set_size: int
    method: str
    residual: float  # largest distance to the nearest integer before rounding

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(t for t, c in enumerate(self.counts) if c > 0)


def _round_counts(values: np.ndarray, what: str) -> tuple[np.ndarray, float]:
    rounded = np.rint(values.real)
    residual = float(np.max(np.abs(values - rounded))) if len(values) else 0.0
    if residual >= 0.5:
        raise RoundingOverflow(f"{what}: residual {residual} >= 0.5")
    return rounded.astype(np.int64), residual


def _check_count_range(E: PointSet, k: int) -> None:
    if k < 2:
        raise ValueError("k must be >= 2")
    if E.size**k >= COUNT_LIMIT:
        raise TooLarge(f"|E|^k = {E.size}^{k} does not fit in 64-bit counts")


def convolution_power(space: Space, E: PointSet, k: int, minus: int = 0,
                      twist: int = 1) -> tuple[np.ndarray, float]:
    """Integer table y -> #{(x_1..x_k) in E^k : x_1 + ... +- x_k = y}.

    The last ``minus`` summands enter with a minus sign.  Exact for every
    |E|^k below 2^63.
    """
    _check_count_range(E, k)
    tilde = set_tilde(space, E, twist)
    if E.size**k < FLOAT_SAFE:
        # the transform of -E is the conjugate, E being real
        spectrum = tilde ** (k - minus) * np.conj(tilde) ** minus
        values = fourier(space, spectrum, "inverse", twist).values / space.size
        return _round_counts(values, "convolution")
    bits = E.bits if minus < k else E.bits[space.neg(np.arange(space.size))]  # E or -E
    counts = bits.astype(np.int64)
    residual = 0.0
    for j in range(1, k):
        factor = tilde if j < k - minus else np.conj(tilde)
        counts, res = _convolve_exact(space, counts, factor, E.size, twist)
        residual = max(residual, res)
    return counts, residual


def _convolve_exact(space: Space, counts: np.ndarray, factor: np.ndarray, size: int,
                    twist: int) -> tuple[np.ndarray, float]:
    """counts * g for an integer table and a 0/1 table g of weight ``size``
    given by its tilde transform ``factor``.

    counts is split into limbs small enough that each limb's convolution
    stays below FLOAT_SAFE, so every rounding is exact.
    """
    bits = max(1, FLOAT_SAFE.bit_length() - 1 - size.bit_length())
    mask = (1 << bits) - 1
    out = np.zeros(space.size, dtype=np.int64)
    rest = counts.copy()
    shift, residual = 0, 0.0
    while rest.any():
        limb = rest & mask
        spectrum = fourier(space, limb, "tilde", twist).values * factor
        values = fourier(space, spectrum, "inverse", twist).values / space.size
        part, res = _round_counts(values, "limb convolution")
        out += part << shift
        residual = max(residual, res)
        rest >>= bits
        shift += bits
    return out, residual


def _profile_direct(space, E, k, twist):
    conv, residual = convolution_power(space, E, k, twist=twist)
    counts = tuple(int(conv[m].sum()) for m in space.spheres.members)
    return counts, residual


def _profile_spectral(space, E, k, twist):
    if E.size**k >= SPECTRAL_LIMIT:
        raise TooLarge(f"|E|^k = {E.size}^{k} is beyond double precision; "
                       "use the direct method")
    hat = set_hat(space, E, twist)
    H = sphere_hats(space, twist)
    powered = np.conj(hat) ** k
    values = space.size**k * np.sum(H * powered[None, :], axis=1)
    rounded, residual = _round_counts(values, "spectral profile")
    return tuple(int(c) for c in rounded), residual


def nu_profile(space: Space, E: PointSet, k: int,
               method: Literal["direct", "spectral", "both"] = "both",
               twist: int = 1) -> NuProfile:
    """nu_k(t) for every t in F_q.

    ``direct`` rounds the k-fold convolution and sums it over each sphere;
    ``spectral`` evaluates q^(dk) sum_m S_t^(m) conj(E^(m))^k.  ``both``
    computes the two and requires identical integers.  The spectral route
    needs |E|^k < 2^53; the direct one is exact up to 2^63.
    """
    _check_count_range(E, k)
    if method == "direct":
        counts, res = _profile_direct(space, E, k, twist)
    elif method == "spectral":
        counts, res = _profile_spectral(space, E, k, twist)
    elif method == "both":
        counts, res1 = _profile_direct(space, E, k, twist)
        other, res2 = _profile_spectral(space, E, k, twist)
        if counts != other:
            raise RoundingOverflow(f"direct {counts} and spectral {other} profiles differ")
        res = max(res1, res2)
    else:
        raise ValueError(f"unknown method {method!r}")
    return NuProfile(k=k, counts=counts, set_size=E.size, method=method, residual=res)


def checked_method(E: PointSet, k: int) -> str:
    """``both`` where the spectral route can resolve integers, else ``direct``."""
    return "both" if E.size**k < SPECTRAL_LIMIT else "direct"


def nu_profile_bruteforce(space: Space, E: PointSet, k: int) -> tuple[int, ...]:
    """Enumerate E^k one summand at a time; for small oracles only."""
    sums = np.zeros(1, dtype=np.int64)
    pts = E.indices
    for _ in range(k):
        sums = space.add(sums[:, None], pts[None, :]).ravel()
    return tuple(int(c) for c in np.bincount(space.norms[sums], minlength=space.q))


@dataclass
class DeltaReport:
    k: int
    delta_members: tuple[int, ...]
    cardinality: int
    nu0: int
    lower_bound_r41: Fraction
    r41_holds: bool
    lemma41_hypothesis: bool
    lemma41_bound: float
    ratio_actual_over_bound: float
    profile: NuProfile


def r41_bound(profile: NuProfile) -> Fraction:
    """(|E|^k - nu_k(0))^2 / sum_{t != 0} nu_k(t)^2, exactly; 0 when both vanish."""
    num = (profile.set_size**profile.k - profile.counts[0]) ** 2
    den = sum(c * c for c in profile.counts[1:])
    return Fraction(num, den) if den else Fraction(0)


def delta_report(space: Space, E: PointSet, k: int, twist: int = 1) -> DeltaReport:
    if E.size == 0:
        raise DegenerateSet("E is empty")
    q, d = space.q, space.d
    profile = nu_profile(space, E, k, checked_method(E, k), twist)
    members = profile.support
    bound = r41_bound(profile)
    moments = sphere_moment(space, E, k, twist)
    if moments.max_nonzero_t > 0:
        l41 = min(float(q), E.size ** (k + 1) / (float(q) ** (d * k) * moments.max_nonzero_t))
    else:
        l41 = float(q)
    return DeltaReport(
        k=k, delta_members=members, cardinality=len(members), nu0=profile.counts[0],
        lower_bound_r41=bound, r41_holds=len(members) >= bound,
        lemma41_hypothesis=d % 2 == 0 and E.size**2 >= 9 * q**d,
        lemma41_bound=l41, ratio_actual_over_bound=len(members) / l41,
        profile=profile)


def sign_sweep(space: Space, E: PointSet, k: int, twist: int = 1) -> dict[int, int]:
    """|{||x_1 + ... + x_a - x_(a+1) - ... - x_k||}| keyed by the number of minus
    signs.  Only the count matters (addition commutes) and the first sign is
    fixed since ||-v|| = ||v||."""
    out = {}
    for minus in range(k):
        conv, _ = convolution_power(space, E, k, minus, twist)
        out[minus] = int(np.count_nonzero(np.bincount(space.norms, weights=conv > 0,
                                                      minlength=space.q)))
    return out


# -- lemma audit -----------------------------------------------------------------

@dataclass
class AuditRecord:
    name: str
    hypothesis_met: bool
    lhs: float | int | Fraction | None
    rhs: float | int | Fraction | None
    passed: bool | None
    slack_ratio: float | None
    kind: str = "inequality"  # or "identity"


@dataclass
class AuditReport:
    k: int
    records: list[AuditRecord] = field(default_factory=list)

    def __getitem__(self, name: str) -> AuditRecord:
        for r in self.records:
            if r.name == name:
                return r
        raise KeyError(name)

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.records if r.hypothesis_met)


def _ratio(lhs, rhs):
    if rhs == 0:
        return None
    return float(Fraction(lhs) / Fraction(rhs)) if isinstance(rhs, (int, Fraction)) \
        and isinstance(lhs, (int, Fraction)) else float(lhs) / float(rhs)


def _ineq(name, lhs, rhs, tol, hypothesis=True):
    if not hypothesis:
        return AuditRecord(name, False, None, None, None, None)
    return AuditRecord(name, True, lhs, rhs, leq(lhs, rhs, tol), _ratio(lhs, rhs))


def lemma_audit(space: Space, E: PointSet, k: int, twist: int = 1,
                tol: float = DEFAULT_TOL, profile: NuProfile | None = None) -> AuditReport:
    """Evaluate the moment bound, the second-moment and zero-count bounds, and the nu_k(0) formula.

    Records whose hypotheses fail carry ``hypothesis_met=False``
    and no verdict.
    """
    q, d = space.q, space.d
    size = E.size
    even = d % 2 == 0
    profile = profile or nu_profile(space, E, k, checked_method(E, k), twist)
    counts = profile.counts
    hat = set_hat(space, E, twist)
    report = AuditReport(k=k)

    # moment bound: sum |E^|^k <= |E|^(k-1) / q^(dk-d)
    lhs = math.fsum(np.abs(hat) ** k)
    report.records.append(_ineq("R2.1", lhs, size ** (k - 1) / float(q) ** (d * k - d), tol))

    # sum of nu_k(t)^2 and the exact identity behind its bound
    hat_k = hat**k
    sphere_sums = np.array([np.sum(hat_k[m]) for m in space.spheres.members])
    energy = float(np.sum(np.abs(sphere_sums) ** 2))
    sum_sq = sum(c * c for c in counts)
    rhs24 = size ** (2 * k) / q + float(q) ** (2 * d * k - d) * energy
    report.records.append(_ineq("L2.4", sum_sq, rhs24, tol))
    total = complex(np.sum(hat_k))
    exact = rhs24 - float(q) ** (2 * d * k - d - 1) * abs(total) ** 2
    report.records.append(AuditRecord(
        "L2.4-identity", True, sum_sq, exact, close(sum_sq, exact, rhs24, tol),
        _ratio(sum_sq, exact), kind="identity"))

    nu0 = counts[0]
    big = size**2 >= 9 * q**d  # |E| >= 3 q^(d/2)
    report.records.append(_ineq(
        "L2.5", Fraction(size ** (2 * k), 9), (size**k - nu0) ** 2, tol, even and big))

    half = size**2 >= q**d  # |E| >= q^(d/2)
    lhs26 = float(float(q) ** (2 * d * k - d) * abs(sphere_sums[0]) ** 2 - nu0**2)
    report.records.append(_ineq("L2.6", lhs26, 4 * size ** (2 * k) / q, tol, even and half))

    if even:
        value, scale = nu0_formula(space, E, k, twist)
        report.records.append(AuditRecord(
            "R2.3", True, nu0, value.real, close(nu0, value, scale, tol),
            _ratio(nu0, value.real), kind="identity"))
    else:
        report.records.append(AuditRecord("R2.3", False, None, None, None, None, "identity"))
    return report


def nu0_formula(space: Space, E: PointSet, k: int, twist: int = 1) -> tuple[complex, float]:
    """q^-1 |E|^k + q^(dk-d-1) G^d sum_m conj(E^(m))^k sum_{l != 0} chi(||m|| l).

    Returns the (complex) value and the sum of term magnitudes, which sets
    the comparison tolerance.
    """
    q, d = space.q, space.d
    field_ = space.field
    chi = field_.chi(twist)
    unit_sums = np.array([np.sum(chi[field_.tables.mul[1:, a]]) for a in range(q)])
    hat = set_hat(space, E, twist)
    terms = np.conj(hat) ** k * unit_sums[space.norms]
    coef = float(q) ** (d * k - d - 1) * field_.gauss_sum(twist) ** d
    head = E.size**k / q
    value = head + coef * np.sum(terms)
    scale = head + abs(coef) * float(np.sum(np.abs(terms)))
    return complex(value), scale


# -- exponent arithmetic -------------------------------------------------------

def theorem_exponents(d: int, which: Literal["T1.3", "T1.4"]) -> Fraction:
    """Size threshold exponent beta with |E| >~ q^beta forcing |Delta_k(E)| >~ q.

    Checked three ways: the headline form (d+1)/2 - 1/(...), the rational
    closed form, and the exponent obtained by feeding the moment estimate
    into min(q, |E|^(k+1) / (q^(dk) M)) >= q.
    """
    if d % 2 or d < 4 or (which == "T1.4" and d < 8):
        raise BadDimension(f"{which} needs even d >= {8 if which == 'T1.4' else 4}, got {d}")
    if which == "T1.3":
        headline = Fraction(d + 1, 2) - Fraction(1, 6 * d + 2)
        closed = Fraction(3 * d * d + 4 * d, 6 * d + 2)
        k = 3 if d in (4, 6) else 4
        a, b = lemma32_exponents(d, k)
    elif which == "T1.4":
        headline = Fraction(d + 1, 2) - Fraction(1, 9 * d - 18)
        closed = Fraction(9 * d * d - 9 * d - 20, 18 * d - 36)
        k = 3
        a, b = lemma33_exponents(d)
    else:
        raise ValueError(f"unknown theorem {which!r}")
    # |E|^(k+1) / (q^(dk) q^a |E|^b) >= q  <=>  |E|^(k+1-b) >= q^(1+dk+a)
    derived = (1 + d * k + a) / (k + 1 - b)
    if not headline == closed == derived:
        raise AssertionError(f"{which} exponents disagree at d={d}: {headline}, {closed}, {derived}")
    return closed
