"""Polynomial arithmetic over GF(2) and the GF(2^m) fields built from it.

Polynomials are plain nonnegative integers: bit ``i`` is the coefficient of
``x**i`` (so ``19 == 0b10011`` is ``1 + x + x**4``).  Field elements use the
same encoding, reduced modulo the generator polynomial.

A :class:`FeedbackSpec` describes a (generalized) LFSR whose stages hold field
elements.  The next stage value is the field sum of ``c_j * window[j-1]`` for
``j = 1..k``; the constant term of the feedback polynomial is kept only for
display.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

Poly2 = int

# Degree reported for the zero polynomial.  No real polynomial has it.
ZERO_DEGREE = -1

MAX_FIELD_DEGREE = 16
MAX_STATE_SPACE = 1 << 24


class GaloisError(ValueError):
    """Base class for invalid arithmetic inputs."""


class InvalidModulusError(GaloisError):
    pass


class InvalidInputError(GaloisError):
    pass


class InvalidElementError(GaloisError):
    pass


class ShapeError(GaloisError):
    pass


class DegenerateSeedError(GaloisError):
    pass


def degree(a: Poly2) -> int:
    if a < 0:
        raise InvalidInputError(f"negative polynomial encoding {a}")
    return a.bit_length() - 1 if a else ZERO_DEGREE


def poly2_mod(a: Poly2, modulus: Poly2) -> Poly2:
    n = degree(modulus)
    if n < 1:
        raise InvalidModulusError(f"modulus must have degree >= 1, got {modulus}")
    d = degree(a)
    while d >= n:
        a ^= modulus << (d - n)
        d = degree(a)
    return a


def poly2_mul(a: Poly2, b: Poly2) -> Poly2:
    """Carry-less product of two GF(2) polynomials."""
    r = 0
    while b:
        if b & 1:
            r ^= a
        a <<= 1
        b >>= 1
    return r


def poly2_mul_mod(a: Poly2, b: Poly2, modulus: Poly2) -> Poly2:
    n = degree(modulus)
    if n < 1:
        raise InvalidModulusError(f"modulus must have degree >= 1, got {modulus}")
    a = poly2_mod(a, modulus)
    b = poly2_mod(b, modulus)
    top = 1 << n
    r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if a & top:
            a ^= modulus
    return r


def poly2_pow_mod(a: Poly2, e: int, modulus: Poly2) -> Poly2:
    r = poly2_mod(1, modulus) if degree(modulus) > 0 else 0
    a = poly2_mod(a, modulus)
    while e:
        if e & 1:
            r = poly2_mul_mod(r, a, modulus)
        a = poly2_mul_mod(a, a, modulus)
        e >>= 1
    return r


def poly2_str(a: Poly2, var: str = "x") -> str:
    """Human-readable form, low powers first: ``19 -> '1+x+x^4'``."""
    if a == 0:
        return "0"
    terms = []
    for i in range(a.bit_length()):
        if a >> i & 1:
            terms.append("1" if i == 0 else var if i == 1 else f"{var}^{i}")
    return "+".join(terms)


def parse_poly(text: str | int) -> Poly2:
    """Accept ``19``, ``0b10011`` or ``0x13``."""
    if isinstance(text, int):
        value = text
    else:
        try:
            value = int(text.strip(), 0)
        except ValueError:
            raise InvalidInputError(f"not a polynomial literal: {text!r}") from None
    if value < 0:
        raise InvalidInputError(f"negative polynomial literal: {text!r}")
    return value


def is_irreducible(p: Poly2) -> bool:
    """Trial division by every polynomial of degree <= deg(p)/2."""
    n = degree(p)
    if n < 1:
        raise InvalidInputError(f"irreducibility undefined for constant polynomial {p}")
    for d in range(2, 1 << (n // 2 + 1)):
        if poly2_mod(p, d) == 0:
            return False
    return True


def _prime_factors(n: int) -> list[int]:
    out = []
    f = 2
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 1
    if n > 1:
        out.append(n)
    return out


def multiplicative_order(a: Poly2, p: Poly2) -> int:
    """Order of ``a`` in the multiplicative group of GF(2)[x]/p (p irreducible)."""
    if poly2_mod(a, p) == 0:
        raise InvalidElementError("zero has no multiplicative order")
    order = (1 << degree(p)) - 1
    for q in _prime_factors(order):
        while order % q == 0 and poly2_pow_mod(a, order // q, p) == 1:
            order //= q
    return order


def is_primitive(p: Poly2) -> bool:
    n = degree(p)
    if n < 1 or not is_irreducible(p):
        raise InvalidInputError(f"{poly2_str(p)} is not irreducible")
    if n > MAX_FIELD_DEGREE:
        raise InvalidInputError(f"degree {n} exceeds supported maximum {MAX_FIELD_DEGREE}")
    if p == 0b10:
        return False  # x is zero modulo itself
    return multiplicative_order(0b10, p) == (1 << n) - 1


def first_primitive(m: int) -> Poly2:
    """Smallest primitive polynomial of degree ``m``."""
    for p in range(1 << m, 1 << (m + 1)):
        if is_irreducible(p) and is_primitive(p):
            return p
    raise InvalidInputError(f"no primitive polynomial of degree {m}")  # pragma: no cover


@dataclass(frozen=True)
class FieldSpec:
    """GF(2^m) generated by the irreducible polynomial ``p``."""

    p: Poly2

    def __post_init__(self):
        m = degree(self.p)
        if m < 1:
            raise InvalidModulusError(f"field generator must have degree >= 1, got {self.p}")
        if m > MAX_FIELD_DEGREE:
            raise InvalidModulusError(f"field degree {m} exceeds {MAX_FIELD_DEGREE}")
        if not is_irreducible(self.p):
            raise InvalidModulusError(f"{poly2_str(self.p)} is reducible")

    @property
    def m(self) -> int:
        return degree(self.p)

    @property
    def size(self) -> int:
        return 1 << self.m

    def check(self, a: int) -> int:
        if not 0 <= a < self.size:
            raise InvalidElementError(f"{a} is not an element of GF(2^{self.m})")
        return a

    def mul(self, a: int, b: int) -> int:
        return poly2_mul_mod(self.check(a), self.check(b), self.p)

    def inverse(self, a: int) -> int:
        if self.check(a) == 0:
            raise InvalidElementError("zero has no inverse")
        return poly2_pow_mod(a, self.size - 2, self.p)

    def __str__(self) -> str:
        return f"GF(2^{self.m}) mod {poly2_str(self.p)}"


GF2 = FieldSpec(0b11)


def field_mul(f: FieldSpec, a: int, b: int) -> int:
    return f.mul(a, b)


@dataclass(frozen=True)
class FeedbackSpec:
    """Feedback polynomial ``q(z) = c0 + c1 z + ... + ck z^k`` over a field.

    ``coeffs`` holds ``c1..ck``.  Multiplication tables for each tap are
    built once so stepping the register costs ``k`` lookups.
    """

    field: FieldSpec
    coeffs: tuple[int, ...]
    c0: int = 1

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(self.coeffs))
        if not self.coeffs:
            raise InvalidInputError("feedback polynomial needs k >= 1")
        for c in (*self.coeffs, self.c0):
            self.field.check(c)
        if self.coeffs[-1] == 0:
            raise InvalidInputError("leading coefficient c_k must be nonzero")
        tables = tuple(
            tuple(self.field.mul(c, v) for v in range(self.field.size)) for c in self.coeffs
        )
        object.__setattr__(self, "_tables", tables)

    @classmethod
    def from_poly2(cls, q: Poly2) -> FeedbackSpec:
        """Bit-oriented register from a GF(2) polynomial, e.g. 19 -> taps (1,0,0,1)."""
        k = degree(q)
        if k < 1:
            raise InvalidInputError(f"feedback polynomial must have degree >= 1, got {q}")
        return cls(GF2, tuple(q >> j & 1 for j in range(1, k + 1)), c0=q & 1)

    @property
    def k(self) -> int:
        return len(self.coeffs)

    @property
    def word_bits(self) -> int:
        return self.field.m

    def next(self, window: Sequence[int]) -> int:
        if len(window) != len(self.coeffs):
            raise ShapeError(f"window has {len(window)} stages, register has {self.k}")
        acc = 0
        for table, v in zip(self._tables, window):
            acc ^= table[v]
        return acc

    def describe(self) -> str:
        terms = [str(self.c0)] + [f"{c}z^{j}" for j, c in enumerate(self.coeffs, 1) if c]
        return f"q(z)={'+'.join(terms)} over {self.field}"


def glfsr_next(fb: FeedbackSpec, window: Sequence[int]) -> int:
    for v in window:
        fb.field.check(v)
    return fb.next(window)


def sequence_period(fb: FeedbackSpec, seed: Sequence[int]) -> int:
    """Return length of the cycle through ``seed`` by direct enumeration."""
    seed = tuple(seed)
    if len(seed) != fb.k:
        raise ShapeError(f"seed has {len(seed)} stages, register has {fb.k}")
    for v in seed:
        fb.field.check(v)
    if not any(seed):
        raise DegenerateSeedError("all-zero seed is a fixed point")
    bound = fb.field.size ** fb.k
    if bound > MAX_STATE_SPACE:
        raise InvalidInputError(f"state space {bound} exceeds {MAX_STATE_SPACE}")
    window = seed
    for t in range(1, bound + 1):
        window = window[1:] + (fb.next(window),)
        if window == seed:
            return t
    # Singular recurrences (c0-free transients) never return to the seed.
    raise DegenerateSeedError("seed lies on a transient and never recurs")
