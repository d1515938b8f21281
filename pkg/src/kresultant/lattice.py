"""Vectors in F_q^d, the diagonal quadratic form, spheres and point sets.

A vector ``(x_0, ..., x_{d-1})`` of element indices is stored as the integer
``sum(x_j * q**j)``.  Because element indices are themselves base-p digit
strings, a vector index is a string of ``n*d`` base-p digits and vector
addition is digit-wise addition mod p.
"""

from __future__ import annotations

import ast
import os
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import BadSpec, DimensionMismatch, TooLarge
from .field import Field

DEFAULT_MAX_POINTS = 10**7
MAX_POINTS_ENV = "KRESULTANT_MAX_POINTS"


def max_points() -> int:
    raw = os.environ.get(MAX_POINTS_ENV)
    return int(raw) if raw else DEFAULT_MAX_POINTS


def _digit_add_table(p: int, ndig: int) -> np.ndarray:
    size = p**ndig
    w = p ** np.arange(ndig, dtype=np.int64)
    dig = (np.arange(size, dtype=np.int64)[:, None] // w) % p
    return ((dig[:, None, :] + dig[None, :, :]) % p) @ w


@dataclass(frozen=True)
class VectorIndexer:
    d: int
    q: int

    @property
    def size(self) -> int:
        return self.q**self.d

    def encode(self, coords: Sequence[int]) -> int:
        if len(coords) != self.d:
            raise DimensionMismatch(f"expected {self.d} coordinates, got {len(coords)}")
        return sum(int(c) * self.q**j for j, c in enumerate(coords))

    def decode(self, index: int) -> tuple[int, ...]:
        return tuple((int(index) // self.q**j) % self.q for j in range(self.d))


@dataclass(frozen=True, eq=False)
class SphereTable:
    norm_of: np.ndarray
    members: tuple[np.ndarray, ...]
    sizes: np.ndarray


class Space:
    """F_q^d over a fixed field, with vectorised index arithmetic."""

    def __init__(self, field: Field, d: int):
        if d < 1:
            raise DimensionMismatch("dimension must be >= 1")
        self.field = field
        self.d = d
        self.q = field.q
        self.p = field.p
        self.size = self.q**d
        if self.size > max_points():
            raise TooLarge(f"q^d = {self.size} exceeds the cap {max_points()}")
        self.indexer = VectorIndexer(d, self.q)
        self.ndigits = field.n * d
        self._lo_digits = (self.ndigits + 1) // 2
        self._lo = self.p**self._lo_digits
        self._add_lo = _digit_add_table(self.p, self._lo_digits)
        self._add_hi = _digit_add_table(self.p, self.ndigits - self._lo_digits)
        self._cache: dict = {}

    def __repr__(self) -> str:
        return f"Space(q={self.q}, d={self.d})"

    @property
    def label(self) -> str:
        return f"p={self.p} n={self.field.n} d={self.d}"

    @cached_property
    def coords(self) -> np.ndarray:
        """(q^d, d) table of coordinates for every index."""
        idx = np.arange(self.size, dtype=np.int64)
        w = self.q ** np.arange(self.d, dtype=np.int64)
        out = (idx[:, None] // w) % self.q
        out.flags.writeable = False
        return out

    def encode_coords(self, coords: np.ndarray) -> np.ndarray:
        w = self.q ** np.arange(self.d, dtype=np.int64)
        return np.asarray(coords, dtype=np.int64) @ w

    def add(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        lo = self._add_lo[a % self._lo, b % self._lo]
        hi = self._add_hi[a // self._lo, b // self._lo]
        return hi * self._lo + lo

    @cached_property
    def _neg_table(self) -> np.ndarray:
        t = self.encode_coords(self.field.tables.neg[self.coords])
        t.flags.writeable = False
        return t

    def neg(self, a):
        return self._neg_table[a]

    def sub(self, a, b):
        return self.add(a, self._neg_table[b])

    def scale(self, s: int, a):
        return self.encode_coords(self.field.tables.mul[s][self.coords[a]])

    def dot(self, a, b):
        """Dot product of index arrays a, b (broadcast), as field indices."""
        prods = self.field.tables.mul[self.coords[a], self.coords[b]]
        return self._field_sum(prods)

    def _field_sum(self, values: np.ndarray) -> np.ndarray:
        add = self.field.tables.add
        acc = values[..., 0]
        for j in range(1, values.shape[-1]):
            acc = add[acc, values[..., j]]
        return acc

    @cached_property
    def norms(self) -> np.ndarray:
        sq = np.diagonal(self.field.tables.mul)
        out = self._field_sum(sq[self.coords])
        out.flags.writeable = False
        return out

    @cached_property
    def spheres(self) -> SphereTable:
        return build_spheres(self)

    def cache(self, key, factory):
        """Memoise derived tables (transforms etc.) on this space."""
        if key not in self._cache:
            self._cache[key] = factory()
        return self._cache[key]


def bilinear(field: Field, v: Sequence[int], w: Sequence[int]) -> tuple[int, int]:
    """Return ``(v . w, ||v||)`` for coordinate sequences of field indices."""
    if len(v) != len(w):
        raise DimensionMismatch(f"{len(v)} != {len(w)}")
    add, mul = field.tables.add, field.tables.mul
    dot = 0
    norm = 0
    for a, b in zip(v, w):
        dot = int(add[dot, mul[a, b]])
        norm = int(add[norm, mul[a, a]])
    return dot, norm


def build_spheres(space: Space) -> SphereTable:
    norm_of = space.norms
    order = np.argsort(norm_of, kind="stable")
    sizes = np.bincount(norm_of, minlength=space.q)
    bounds = np.concatenate([[0], np.cumsum(sizes)])
    members = []
    for t in range(space.q):
        m = order[bounds[t]:bounds[t + 1]].copy()
        m.flags.writeable = False
        members.append(m)
    sizes.flags.writeable = False
    return SphereTable(norm_of=norm_of, members=tuple(members), sizes=sizes)


@dataclass(frozen=True, eq=False)
class PointSet:
    bits: np.ndarray
    size: int
    label: str

    @classmethod
    def from_indices(cls, space: Space, indices, label: str) -> "PointSet":
        idx = np.asarray(list(indices) if not isinstance(indices, np.ndarray) else indices,
                         dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= space.size):
            raise BadSpec(f"index out of range [0, {space.size})")
        bits = np.zeros(space.size, dtype=bool)
        bits[idx] = True
        return cls.from_bits(bits, label)

    @classmethod
    def from_bits(cls, bits: np.ndarray, label: str) -> "PointSet":
        bits = np.array(bits, dtype=bool)
        bits.flags.writeable = False
        return cls(bits=bits, size=int(np.count_nonzero(bits)), label=label)

    @property
    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.bits)

    def __len__(self) -> int:
        return self.size

    def __contains__(self, index) -> bool:
        return bool(self.bits[index])


# -- generator grammar ---------------------------------------------------------
#
# A generator is a call expression with literal arguments, e.g.
#   explicit([0, 0, 5])          random(10, seed=42)
#   random_density(0.25, seed=1) subfield() / subfield(3, 2, 2)
#   sphere_cap(1, 5)             sphere_cap(0)       (whole sphere)
#   affine([1, 3], shift=4)      full()
# Basis and shift vectors are vector indices or coordinate lists.

def parse_generator(spec: str) -> tuple[str, list, dict]:
    try:
        node = ast.parse(spec.strip(), mode="eval").body
    except SyntaxError as exc:
        raise BadSpec(f"cannot parse generator {spec!r}: {exc.msg}") from None
    if not isinstance(node, ast.Call) or not isinstance(node.func, ast.Name):
        raise BadSpec(f"generator must look like name(args): {spec!r}")
    try:
        args = [ast.literal_eval(a) for a in node.args]
        kwargs = {k.arg: ast.literal_eval(k.value) for k in node.keywords}
    except ValueError:
        raise BadSpec(f"generator arguments must be literals: {spec!r}") from None
    return node.func.id, args, kwargs


def _vector(space: Space, v) -> int:
    if isinstance(v, (list, tuple)):
        if len(v) != space.d or any(not 0 <= c < space.q for c in v):
            raise BadSpec(f"bad coordinate vector {v!r}")
        return space.indexer.encode(v)
    if not 0 <= int(v) < space.size:
        raise BadSpec(f"vector index {v!r} out of range")
    return int(v)


def _gen_explicit(space, indices):
    return PointSet.from_indices(space, [int(i) for i in indices], "")


def _gen_random(space, size, seed=0):
    if not 0 <= size <= space.size:
        raise BadSpec(f"size {size} outside [0, {space.size}]")
    rng = np.random.default_rng(seed)
    return PointSet.from_indices(space, rng.choice(space.size, size=size, replace=False), "")


def _gen_random_density(space, delta, seed=0):
    if not 0.0 <= delta <= 1.0:
        raise BadSpec(f"density {delta} outside [0, 1]")
    rng = np.random.default_rng(seed)
    return PointSet.from_bits(rng.random(space.size) < delta, "")


def _gen_subfield(space, p=None, s=None, d=None):
    if p is not None and p != space.p:
        raise BadSpec(f"subfield prime {p} does not match field characteristic {space.p}")
    if s is not None and s != space.field.n:
        raise BadSpec(f"subfield degree {s} does not match field degree {space.field.n}")
    if d is not None and d != space.d:
        raise BadSpec(f"subfield dimension {d} does not match space dimension {space.d}")
    # prime subfield elements are the constant polynomials, indices 0..p-1
    bits = np.all(space.coords < space.p, axis=1)
    return PointSet.from_bits(bits, "")


def _gen_sphere_cap(space, t, j=None):
    if not 0 <= t < space.q:
        raise BadSpec(f"radius {t} not a field element")
    members = space.spheres.members[t]
    if j is None:
        j = len(members)
    if not 0 <= j <= len(members):
        raise BadSpec(f"cap size {j} outside [0, {len(members)}]")
    return PointSet.from_indices(space, members[:j], "")


def _gen_affine(space, basis, shift=0):
    basis = [_vector(space, b) for b in basis]
    points = np.array([_vector(space, shift)], dtype=np.int64)
    for b in basis:
        multiples = np.array([space.scale(s, b) for s in range(space.q)], dtype=np.int64)
        points = np.unique(space.add(points[:, None], multiples[None, :]).ravel())
    return PointSet.from_indices(space, points, "")


def _gen_full(space):
    return PointSet.from_bits(np.ones(space.size, dtype=bool), "")


GENERATORS = {
    "explicit": _gen_explicit,
    "random": _gen_random,
    "random_density": _gen_random_density,
    "subfield": _gen_subfield,
    "sphere_cap": _gen_sphere_cap,
    "affine": _gen_affine,
    "full": _gen_full,
}


def build_set(space: Space, spec: str) -> PointSet:
    """Build the point set described by the generator string ``spec``."""
    name, args, kwargs = parse_generator(spec)
    if name not in GENERATORS:
        raise BadSpec(f"unknown generator {name!r}; expected one of {sorted(GENERATORS)}")
    try:
        built = GENERATORS[name](space, *args, **kwargs)
    except TypeError as exc:
        raise BadSpec(f"{spec!r}: {exc}") from None
    return PointSet(bits=built.bits, size=built.size, label=spec.strip())
