"""Fourier analysis on F_q^d.

Conventions (chi is the canonical trace character unless ``twist`` is given):

* tilde: ``f~(m) = sum_x f(x) chi(-x.m)``
* hat:   ``f^(m) = q^-d sum_x f(x) chi(-x.m)``
* inverse: ``f(x) = sum_m g(m) chi(m.x)``

The additive group of F_q^d is (Z_p)^(nd).  Writing ``Tr(a b) = c(a)^T T c(b)``
with T the trace form, ``chi(-x.m)`` becomes ``exp(-2 pi i c(x).u(m) / p)`` with
``u(m) = T c(m)``, so every transform is an n*d-axis length-p DFT followed by
the index permutation ``m -> u(m)``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

import numpy as np

from .errors import EmptySphere, MissingSphere, OddDimension, SizeMismatch
from .lattice import PointSet, Space

Mode = Literal["hat", "tilde", "inverse"]


@dataclass(frozen=True, eq=False)
class SpectralTable:
    values: np.ndarray
    kind: str  # "hat", "tilde", "raw"

    def __len__(self) -> int:
        return len(self.values)


def _dual_permutation(space: Space, twist: int) -> np.ndarray:
    def build():
        field = space.field
        T = field.trace_form
        w = field.p ** np.arange(field.n)
        dual = ((field.tables.coeffs @ T.T) % field.p) @ w  # element a -> u(a)
        coords = space.coords
        if twist != 1:
            coords = field.tables.mul[twist][coords]
        perm = space.encode_coords(dual[coords])
        perm.flags.writeable = False
        return perm

    return space.cache(("dual_perm", twist), build)


def _axes_shape(space: Space) -> tuple[int, ...]:
    return (space.p,) * space.ndigits


def fourier(space: Space, f, mode: Mode = "hat", twist: int = 1) -> SpectralTable:
    """Transform a table over F_q^d; see module docstring for conventions."""
    f = np.asarray(f)
    if f.shape != (space.size,):
        raise SizeMismatch(f"expected {space.size} entries, got {f.shape}")
    perm = _dual_permutation(space, twist)
    if mode in ("hat", "tilde"):
        spectrum = np.fft.fftn(f.astype(complex).reshape(_axes_shape(space))).ravel()
        values = spectrum[perm]
        if mode == "hat":
            values = values / space.size
        return SpectralTable(values, mode)
    if mode == "inverse":
        g = np.empty(space.size, dtype=complex)
        g[perm] = f
        values = np.fft.ifftn(g.reshape(_axes_shape(space))).ravel() * space.size
        return SpectralTable(values, "raw")
    raise ValueError(f"unknown mode {mode!r}")


def fourier_naive(space: Space, f, mode: Mode = "hat", twist: int = 1,
                  chunk: int = 256) -> SpectralTable:
    """Direct double sum over character values; O(q^2d), for cross-checks."""
    f = np.asarray(f, dtype=complex)
    if f.shape != (space.size,):
        raise SizeMismatch(f"expected {space.size} entries, got {f.shape}")
    chi = space.field.chi(twist)
    neg = space.field.tables.neg
    xs = np.arange(space.size)
    out = np.empty(space.size, dtype=complex)
    for start in range(0, space.size, chunk):
        ms = xs[start:start + chunk]
        dots = space.dot(ms[:, None], xs[None, :])
        kernel = chi[dots] if mode == "inverse" else chi[neg[dots]]
        out[start:start + chunk] = kernel @ f
    if mode == "hat":
        out /= space.size
    return SpectralTable(out, "raw" if mode == "inverse" else mode)


def set_key(E: PointSet) -> tuple[str, str]:
    return E.label, hashlib.blake2b(E.bits.tobytes(), digest_size=16).hexdigest()


def set_hat(space: Space, E: PointSet, twist: int = 1) -> np.ndarray:
    """Normalised transform of the indicator of E, memoised per set."""
    def build():
        v = fourier(space, E.bits, "hat", twist).values
        v.flags.writeable = False
        return v

    return space.cache(("hat",) + set_key(E) + (twist,), build)


def set_tilde(space: Space, E: PointSet, twist: int = 1) -> np.ndarray:
    return set_hat(space, E, twist) * space.size


def sphere_hats(space: Space, twist: int = 1) -> np.ndarray:
    """(q, q^d) array whose row t is the hat transform of S_t's indicator."""
    def build():
        norms = space.norms
        rows = np.stack([fourier(space, norms == t, "hat", twist).values
                         for t in range(space.q)])
        rows.flags.writeable = False
        return rows

    return space.cache(("sphere_hats", twist), build)


def _kloosterman_row(space: Space, t: int, twist: int) -> np.ndarray:
    """K(t, s/4) for every s in F_q."""
    field = space.field
    quarter = field.inv(field.from_int(4))
    return np.array([field.kloosterman_sum(t, field.mul(s, quarter), twist, real=False)
                     for s in range(space.q)])


def sphere_hat_closed(space: Space, t: int, m=None, twist: int = 1):
    """Closed-form hat transform of S_t for even d.

    ``q^-1 delta_0(m) + q^(-d-1) G^d sum_{l != 0} chi(t l + ||m|| / (4 l))``.
    With ``m=None`` the whole table is returned.
    """
    if space.d % 2:
        raise OddDimension("the closed form holds for even d only; use sphere_hats")
    q, d = space.q, space.d
    gauss = space.field.gauss_sum(twist)
    kl = _kloosterman_row(space, t, twist)
    idx = np.arange(space.size) if m is None else np.asarray(m)
    vals = q ** (-d - 1) * gauss**d * kl[space.norms[idx]] + np.where(idx == 0, 1.0 / q, 0.0)
    return vals if m is None or np.ndim(m) else complex(vals)


def _sum_over_units(space: Space, twist: int) -> np.ndarray:
    """a -> sum over s != 0 of chi(s a)."""
    field = space.field
    chi = field.chi(twist)
    return np.array([np.sum(chi[field.tables.mul[1:, a]]) for a in range(space.q)])


def dual_sum_identity(space: Space, m, v, twist: int = 1):
    """Both sides of sum_t S_t^(m) conj(S_t^(v)) = closed form.

    The left side is assembled from the directly transformed spheres; the
    right is the literal character sum.  ``m`` and ``v`` may be arrays.
    """
    m = np.asarray(m)
    v = np.asarray(v)
    H = sphere_hats(space, twist)
    lhs = np.sum(H[:, m] * np.conj(H[:, v]), axis=0)
    q, d = space.q, space.d
    field = space.field
    diff = field.sub(space.norms[m], space.norms[v])
    rhs = ((m == 0) & (v == 0)) / q + q ** (-d - 1) * _sum_over_units(space, twist)[diff]
    return lhs, rhs


def dual_sum_simplified(space: Space, m, v) -> np.ndarray:
    """``q^-1 d0(m) d0(v) + q^(-d-1) (q [||m|| = ||v||] - 1)``."""
    m = np.asarray(m)
    v = np.asarray(v)
    q, d = space.q, space.d
    same = space.norms[m] == space.norms[v]
    return ((m == 0) & (v == 0)) / q + q ** (-d - 1) * (q * same - 1)


@dataclass(frozen=True)
class NormSpec:
    exponent: float | Fraction  # float("inf") allowed
    measure: Literal["dm", "dx", "dsigma"] = "dm"

    def conjugate(self) -> "NormSpec":
        s = self.exponent
        if s == 1:
            c = float("inf")
        elif s == float("inf"):
            c = 1
        elif isinstance(s, (Fraction, int)):
            c = Fraction(s) / (Fraction(s) - 1)
        else:
            c = s / (s - 1)
        return NormSpec(c, self.measure)


def norm_eval(space: Space, f, spec: NormSpec, t: int | None = None,
              allow_zero_radius: bool = False) -> float:
    """L^s norm of f over (F_q^d, dm), (F_q^d, dx) or (S_t, dsigma)."""
    vals = np.abs(np.asarray(f))
    if spec.measure == "dsigma":
        if t is None:
            raise MissingSphere("dsigma norms need a radius t")
        if t == 0 and not allow_zero_radius:
            raise MissingSphere("surface measure is defined for t != 0")
        members = space.spheres.members[t]
        if len(members) == 0:
            raise EmptySphere(f"S_{t} is empty")
        if len(vals) == space.size:
            vals = vals[members]
        weight = 1.0 / len(members)
    elif spec.measure == "dx":
        weight = 1.0 / space.size
    else:
        weight = 1.0
    s = spec.exponent
    if s == float("inf"):
        return float(vals.max())
    s = float(s)
    return float((weight * np.sum(vals**s)) ** (1.0 / s))


def extension_fn(space: Space, f, t: int, twist: int = 1) -> SpectralTable:
    """(f dsigma)^v(m) = |S_t|^-1 sum_{x in S_t} f(x) chi(m.x).

    ``f`` is either a full q^d table (values off S_t ignored) or an array
    aligned with ``space.spheres.members[t]``.
    """
    members = space.spheres.members[t]
    if len(members) == 0:
        raise EmptySphere(f"S_{t} is empty")
    f = np.asarray(f)
    full = np.zeros(space.size, dtype=complex)
    if len(f) == space.size:
        full[members] = f[members]
    elif len(f) == len(members):
        full[members] = f
    else:
        raise SizeMismatch(f"f has {len(f)} entries; expected {space.size} or {len(members)}")
    values = fourier(space, full, "inverse", twist).values / len(members)
    return SpectralTable(values, "raw")


def adjoint_identity(space: Space, f, g, t: int, twist: int = 1):
    """Both sides of <(f dsigma)^v, g>_dm = <f, g~>_dsigma.

    This is the pairing behind the extension/restriction duality.
    """
    members = space.spheres.members[t]
    ext = extension_fn(space, f, t, twist).values
    lhs = np.sum(ext * np.conj(g))
    g_t = fourier(space, g, "tilde", twist).values
    fv = np.asarray(f)
    fv = fv[members] if len(fv) == space.size else fv
    rhs = np.sum(fv * np.conj(g_t[members])) / len(members)
    return complex(lhs), complex(rhs)
