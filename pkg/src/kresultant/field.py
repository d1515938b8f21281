"""Table-driven arithmetic in F_q, q = p^n with p odd.

Elements are integers in ``[0, q)``: the element ``c_0 + c_1 x + ... +
c_{n-1} x^{n-1}`` (mod the field modulus) has index ``sum(c_i * p**i)``.
The prime subfield is therefore exactly the indices ``0..p-1``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import CharTwo, NotPrime, TooLarge, TrivialTwist

DEFAULT_MAX_Q = 121


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for f in range(2, int(n**0.5) + 1):
        if n % f == 0:
            return False
    return True


# -- polynomials over Z_p, coefficient lists constant-first ------------------

def _poly_trim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mod(a, b, p):
    a = _poly_trim(a)
    b = _poly_trim(b)
    inv_lead = pow(b[-1], -1, p)
    while len(a) >= len(b):
        coef = a[-1] * inv_lead % p
        shift = len(a) - len(b)
        for i, c in enumerate(b):
            a[shift + i] = (a[shift + i] - coef * c) % p
        a = _poly_trim(a)
    return a


def is_irreducible(coeffs: Sequence[int], p: int) -> bool:
    """Exhaustive factor scan of the monic ``x^n + sum coeffs[i] x^i``."""
    n = len(coeffs)
    f = list(coeffs) + [1]
    for deg in range(1, n // 2 + 1):
        for low in itertools.product(range(p), repeat=deg):
            if not _poly_mod(f, list(low) + [1], p):
                return False
    return True


def least_irreducible(p: int, n: int) -> tuple[int, ...]:
    """Lexicographically least monic irreducible of degree n (constant first)."""
    if n == 1:
        return (0,)
    for coeffs in itertools.product(range(p), repeat=n):
        if is_irreducible(coeffs, p):
            return coeffs
    raise AssertionError("no irreducible polynomial found")  # pragma: no cover


@dataclass(frozen=True)
class FieldSpec:
    p: int
    n: int
    q: int
    modulus: tuple[int, ...]

    def __str__(self) -> str:
        return f"F_{self.q}" if self.n == 1 else f"F_{self.p}^{self.n}"


@dataclass(frozen=True)
class FqElement:
    coeffs: tuple[int, ...]
    index: int


@dataclass(frozen=True, eq=False)
class ArithTables:
    add: np.ndarray
    mul: np.ndarray
    neg: np.ndarray
    inv: np.ndarray  # inv[0] == -1
    trace: np.ndarray
    frobenius: np.ndarray
    coeffs: np.ndarray  # (q, n) digit table


@dataclass(frozen=True, eq=False)
class CharacterTable:
    chi: np.ndarray
    eta: np.ndarray
    gauss: complex


def _freeze(*arrays):
    for a in arrays:
        a.flags.writeable = False


def _build_tables(p: int, n: int, modulus: tuple[int, ...]) -> ArithTables:
    q = p**n
    weights = p ** np.arange(n, dtype=np.int64)
    idx = np.arange(q, dtype=np.int64)
    coeffs = (idx[:, None] // weights[None, :]) % p

    # multiplication-by-x as an n x n matrix acting on coefficient columns
    comp = np.zeros((n, n), dtype=np.int64)
    for i in range(n - 1):
        comp[i + 1, i] = 1
    comp[:, n - 1] = [(-m) % p for m in modulus]
    powers = [np.eye(n, dtype=np.int64)]
    for _ in range(1, n):
        powers.append(comp @ powers[-1] % p)
    basis = np.stack(powers)  # basis[i] is the matrix of x^i
    mats = np.einsum("ai,ijk->ajk", coeffs, basis) % p  # (q, n, n)

    prod = np.einsum("ajk,bk->abj", mats, coeffs) % p
    mul = prod @ weights
    add = ((coeffs[:, None, :] + coeffs[None, :, :]) % p) @ weights
    neg = ((-coeffs) % p) @ weights

    inv = np.full(q, -1, dtype=np.int64)
    rows, cols = np.nonzero(mul == 1)
    inv[rows] = cols

    frob = idx.copy()
    for _ in range(p - 1):
        frob = mul[frob, idx]
    trace = idx.copy()
    conj = idx.copy()
    for _ in range(n - 1):
        conj = frob[conj]
        trace = add[trace, conj]
    if np.any(trace >= p):
        raise AssertionError("trace left the prime subfield")

    tables = ArithTables(add=add, mul=mul, neg=neg, inv=inv, trace=trace,
                         frobenius=frob, coeffs=coeffs)
    _freeze(add, mul, neg, inv, trace, frob, coeffs)
    return tables


def _build_characters(p: int, q: int, tables: ArithTables) -> CharacterTable:
    roots = np.exp(2j * np.pi * np.arange(p) / p)
    chi = roots[tables.trace]
    eta = np.full(q, -1, dtype=np.int64)
    eta[0] = 0
    eta[np.unique(np.diagonal(tables.mul)[1:])] = 1
    gauss = complex(np.sum(eta[1:] * chi[1:]))
    _freeze(chi, eta)
    return CharacterTable(chi=chi, eta=eta, gauss=gauss)


@dataclass(frozen=True, eq=False)
class Field:
    """F_q with its arithmetic and character tables.

    Unpacks as ``(spec, tables, chars)``.
    """

    spec: FieldSpec
    tables: ArithTables
    chars: CharacterTable

    def __iter__(self) -> Iterator:
        return iter((self.spec, self.tables, self.chars))

    @property
    def p(self) -> int:
        return self.spec.p

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def q(self) -> int:
        return self.spec.q

    def __repr__(self) -> str:
        return f"Field(p={self.p}, n={self.n}, modulus={self.spec.modulus})"

    def element(self, value) -> FqElement:
        if isinstance(value, FqElement):
            return value
        if isinstance(value, (int, np.integer)):
            i = int(value)
            if not 0 <= i < self.q:
                raise ValueError(f"index {i} outside [0, {self.q})")
            return FqElement(tuple(int(c) for c in self.tables.coeffs[i]), i)
        coeffs = tuple(int(c) % self.p for c in value)
        if len(coeffs) != self.n:
            raise ValueError(f"expected {self.n} coefficients, got {len(coeffs)}")
        return FqElement(coeffs, sum(c * self.p**i for i, c in enumerate(coeffs)))

    def _i(self, a):
        return a.index if isinstance(a, FqElement) else a

    # arithmetic; all accept ints or integer arrays
    def add(self, a, b):
        return self.tables.add[self._i(a), self._i(b)]

    def sub(self, a, b):
        return self.tables.add[self._i(a), self.tables.neg[self._i(b)]]

    def mul(self, a, b):
        return self.tables.mul[self._i(a), self._i(b)]

    def neg(self, a):
        return self.tables.neg[self._i(a)]

    def inv(self, a):
        a = self._i(a)
        if np.any(np.asarray(a) == 0):
            raise ZeroDivisionError("0 has no inverse")
        return self.tables.inv[a]

    def power(self, a, e: int) -> int:
        a = self._i(a)
        result = 1
        for _ in range(e):
            result = int(self.tables.mul[result, a])
        return result

    def from_int(self, k: int) -> int:
        """Image of the integer k in the prime subfield."""
        return k % self.p

    @property
    def trace_form(self) -> np.ndarray:
        """n x n matrix T with T[i, j] = Tr(x^i x^j); nondegenerate."""
        b = self.p ** np.arange(self.n)
        return self.tables.trace[self.tables.mul[b[:, None], b[None, :]]]

    # characters
    def chi(self, twist=1) -> np.ndarray:
        """Table of a -> chi(twist * a)."""
        twist = self._i(twist)
        if twist == 1:
            return self.chars.chi
        return self.chars.chi[self.tables.mul[twist]]

    def quadratic_character(self, a) -> int:
        return int(self.chars.eta[self._i(a)])

    def additive_character(self, a, twist=1, nontrivial: bool = True) -> complex:
        twist = self._i(twist)
        if twist == 0 and nontrivial:
            raise TrivialTwist("twist 0 gives the trivial character")
        return complex(self.chars.chi[self.tables.mul[twist, self._i(a)]])

    def gauss_sum(self, twist=1) -> complex:
        twist = self._i(twist)
        if twist == 1:
            return self.chars.gauss
        if twist == 0:
            raise TrivialTwist("twist 0 gives the trivial character")
        chi = self.chi(twist)
        return complex(np.sum(self.chars.eta[1:] * chi[1:]))

    def kloosterman_sum(self, a, b, twist=1, real: bool = True):
        """K(a, b) = sum over l != 0 of chi(a l + b / l).

        The terms for l and -l are conjugate, so the sum is real; pass
        ``real=False`` to get the raw complex value.
        """
        a, b = self._i(a), self._i(b)
        ells = np.arange(1, self.q)
        args = self.tables.add[self.tables.mul[a, ells], self.tables.mul[b, self.tables.inv[ells]]]
        total = complex(np.sum(self.chi(twist)[args]))
        return total.real if real else total


def make_field(p: int, n: int = 1, max_q: int = DEFAULT_MAX_Q) -> Field:
    """Build F_{p^n} with the lexicographically least modulus.

    Raises CharTwo for p == 2, NotPrime for composite p, TooLarge when
    p**n exceeds ``max_q``.
    """
    if p == 2:
        raise CharTwo("characteristic 2 is not supported")
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    if n < 1:
        raise ValueError("extension degree must be >= 1")
    q = p**n
    if q > max_q:
        raise TooLarge(f"q = {q} exceeds the cap {max_q}")
    modulus = least_irreducible(p, n)
    spec = FieldSpec(p=p, n=n, q=q, modulus=modulus)
    tables = _build_tables(p, n, modulus)
    chars = _build_characters(p, q, tables)
    return Field(spec, tables, chars)


def field_audit(field: Field, tol: float = 1e-8) -> list[tuple[str, float, float, bool]]:
    """Exhaustive structural checks; each record is (name, lhs, rhs, passed).

    Identities compare |lhs - rhs| against ``tol * max(1, terms)``; the
    Kloosterman record compares max |K(a, b)| over ab != 0 with 2 sqrt(q).
    """
    q, p = field.q, field.p
    t = field.tables
    a = np.arange(q)
    A, B = a[:, None], a[None, :]
    A3, B3, C3 = a[:, None, None], a[None, :, None], a[None, None, :]
    recs = []

    def flag(name, ok):
        recs.append((name, float(ok), 1.0, bool(ok)))

    flag("add_assoc", np.array_equal(t.add[t.add[A3, B3], C3], t.add[A3, t.add[B3, C3]]))
    flag("mul_assoc", np.array_equal(t.mul[t.mul[A3, B3], C3], t.mul[A3, t.mul[B3, C3]]))
    flag("distributive", np.array_equal(t.mul[A3, t.add[B3, C3]],
                                        t.add[t.mul[A3, B3], t.mul[A3, C3]]))
    flag("commutative", np.array_equal(t.add, t.add.T) and np.array_equal(t.mul, t.mul.T))
    flag("identities", np.array_equal(t.add[0], a) and np.array_equal(t.mul[1], a))
    flag("additive_inverse", np.all(t.add[a, t.neg] == 0))
    flag("multiplicative_inverse", np.all(t.mul[a[1:], t.inv[1:]] == 1))
    flag("trace_linear", np.array_equal(t.trace[t.add[A, B]], (t.trace[A] + t.trace[B]) % p)
         and np.array_equal(t.trace[t.mul[a[:p, None], B]], (a[:p, None] * t.trace[B]) % p))
    flag("trace_onto", set(t.trace.tolist()) == set(range(p)))
    fixed = np.flatnonzero(t.frobenius == a)
    flag("frobenius", np.array_equal(t.frobenius[t.mul[A, B]], t.mul[t.frobenius[A], t.frobenius[B]])
         and np.array_equal(t.frobenius[t.add[A, B]], t.add[t.frobenius[A], t.frobenius[B]])
         and np.array_equal(fixed, np.arange(p)))

    eta = field.chars.eta
    euler = np.array([field.power(x, (q - 1) // 2) for x in range(q)])
    euler_sign = np.where(euler == 1, 1, np.where(euler == 0, 0, -1))
    flag("eta_euler", np.array_equal(eta, euler_sign))
    flag("eta_multiplicative", np.array_equal(eta[t.mul[A, B]], eta[A] * eta[B]))
    flag("eta_half_squares", int(np.sum(eta == 1)) == (q - 1) // 2)

    chi = field.chars.chi
    flag("chi_homomorphism", np.allclose(chi[t.add[A, B]], chi[A] * chi[B], atol=tol, rtol=0))
    sums = np.abs(np.sum(chi[t.mul[a[1:, None], B]], axis=1))
    recs.append(("orthogonality", float(sums.max()), tol * q, bool(sums.max() <= tol * q)))
    zero_sum = abs(np.sum(chi[t.mul[0, a]]) - q)
    recs.append(("orthogonality_trivial", float(zero_sum), tol * q, bool(zero_sum <= tol * q)))

    G = field.chars.gauss
    err = abs(abs(G) ** 2 - q)
    recs.append(("gauss_modulus", abs(G) ** 2, float(q), bool(err <= tol * q)))
    err = abs(G**2 - eta[t.neg[1]] * q)
    recs.append(("gauss_square", float(err), tol * q, bool(err <= tol * q)))

    ells = a[1:]
    args = t.add[t.mul[A[..., None], ells], t.mul[B[..., None], t.inv[ells]]]
    K = np.sum(chi[args], axis=2)
    imag = float(np.abs(K.imag).max())
    recs.append(("kloosterman_real", imag, tol * q, bool(imag <= tol * q)))
    worst = float(np.abs(K.real[1:, 1:]).max())
    bound = 2 * float(np.sqrt(q))
    recs.append(("kloosterman_bound", worst, bound, bool(worst <= bound + tol * q)))
    return recs
