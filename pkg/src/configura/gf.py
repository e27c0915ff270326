"""Finite fields GF(p^m) backed by eager log/antilog tables.

Elements are FieldElement values (polynomial basis, coefficients low to high).
Internally every element also has an integer code sum(c_i * p**i), which is
what the tables are indexed by.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import (InternalInvariantViolation, NotASubfield, NotPrime,
                     NotPrimePower, PreconditionFailed, ZeroElement)

MAX_ORDER = 2 ** 31


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def prime_factors(n: int) -> list[int]:
    out = []
    f = 2
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 1 if f == 2 else 2
    if n > 1:
        out.append(n)
    return out


def prime_power(q: int) -> tuple[int, int]:
    """Return (p, m) with q = p**m, or raise NotPrimePower."""
    if q < 2:
        raise NotPrimePower(f"{q} is not a prime power")
    p = prime_factors(q)[0]
    m = 0
    r = q
    while r % p == 0:
        r //= p
        m += 1
    if r != 1:
        raise NotPrimePower(f"{q} is not a prime power")
    return p, m


def is_prime_power(q: int) -> bool:
    try:
        prime_power(q)
    except NotPrimePower:
        return False
    return True


def smallest_primitive_root(p: int) -> int:
    if p == 2:
        return 1
    fs = prime_factors(p - 1)
    for g in range(2, p):
        if all(pow(g, (p - 1) // f, p) != 1 for f in fs):
            return g
    raise InternalInvariantViolation(f"no primitive root mod {p}")


def is_primitive_root(g: int, p: int) -> bool:
    if p == 2:
        return g % 2 == 1
    if g % p == 0:
        return False
    return all(pow(g, (p - 1) // f, p) != 1 for f in prime_factors(p - 1))


# -- dense polynomial helpers over GF(p), lists low-to-high -------------------

def _trim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def _polymod(a, f, p):
    a = list(a)
    df = len(f) - 1
    inv = pow(f[-1], p - 2, p)
    while len(_trim(a)) - 1 >= df:
        c = a[-1] * inv % p
        shift = len(a) - 1 - df
        for i, fc in enumerate(f):
            a[shift + i] = (a[shift + i] - c * fc) % p
    return a


def _polymulmod(a, b, f, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _polymod(out, f, p)


def _polypowmod(base, e, f, p):
    result = [1]
    base = _polymod(base, f, p)
    while e:
        if e & 1:
            result = _polymulmod(result, base, f, p)
        base = _polymulmod(base, base, f, p)
        e >>= 1
    return result


def _polygcd(a, b, p):
    a, b = _trim(list(a)), _trim(list(b))
    while b:
        a, b = b, _trim(_polymod(a, b, p))
    return a


def is_irreducible(f, p) -> bool:
    """Rabin-style test: gcd(f, x^(p^i) - x) = 1 for i <= deg/2."""
    m = len(f) - 1
    if m <= 0:
        return False
    if m == 1:
        return True
    xp = [0, 1]
    for _ in range(m // 2):
        xp = _polypowmod(xp, p, f, p)
        diff = list(xp) + [0] * max(0, 2 - len(xp))
        diff[1] = (diff[1] - 1) % p
        g = _polygcd(f, diff, p)
        if len(g) > 1:
            return False
    return True


def _x_is_primitive(f, p, order, factors) -> bool:
    if _polypowmod([0, 1], order, f, p) != [1]:
        return False
    return all(_polypowmod([0, 1], order // r, f, p) != [1] for r in factors)


def find_modulus(p: int, m: int) -> tuple[int, ...]:
    """Lexicographically smallest monic irreducible f of degree m with x primitive."""
    if m == 1:
        g = smallest_primitive_root(p)
        return ((-g) % p, 1)
    order = p ** m - 1
    factors = prime_factors(order)
    for low in itertools.product(range(p), repeat=m):
        # cheap filters first: the norm of a primitive element generates GF(p)*,
        # and an irreducible polynomial of degree > 1 has no roots
        if not is_primitive_root((-1) ** m * low[0] % p, p):
            continue
        f = list(low) + [1]
        if any(sum(c * pow(a, i, p) for i, c in enumerate(f)) % p == 0 for a in range(p)):
            continue
        if _x_is_primitive(f, p, order, factors) and is_irreducible(f, p):
            return tuple(f)
    raise InternalInvariantViolation(f"no primitive modulus for GF({p}^{m})")


@dataclass(frozen=True)
class FieldElement:
    coeffs: tuple[int, ...]

    def is_zero(self) -> bool:
        return not any(self.coeffs)


class FiniteField:
    """GF(p^m) with materialized log and antilog tables."""

    def __init__(self, p: int, m: int = 1):
        if not is_prime(p):
            raise NotPrime(f"{p} is not prime")
        if m < 1 or p ** m > MAX_ORDER:
            raise PreconditionFailed(f"unsupported field GF({p}^{m})")
        self.p, self.m, self.q = p, m, p ** m
        self.modulus = find_modulus(p, m)
        self._weights = p ** np.arange(m, dtype=np.int64)
        self.antilog_table = self._build_antilog()
        log = np.full(self.q, -1, dtype=np.int64)
        log[self.antilog_table] = np.arange(self.q - 1, dtype=np.int64)
        if np.count_nonzero(log[1:] < 0) or log[0] != -1:
            raise InternalInvariantViolation("antilog table is not a bijection")
        self.log_table = log
        self.antilog_table.setflags(write=False)
        self.log_table.setflags(write=False)

    # table construction by repeated doubling of the known power range
    def _mul_batch(self, batch: np.ndarray, y: np.ndarray) -> np.ndarray:
        p, m = self.p, self.m
        n = batch.shape[0]
        prod = np.zeros((n, 2 * m - 1), dtype=np.int64)
        for j in range(m):
            if y[j]:
                prod[:, j:j + m] += batch * int(y[j])
        prod %= p
        f = self.modulus
        for deg in range(2 * m - 2, m - 1, -1):
            c = prod[:, deg].copy()
            if not c.any():
                continue
            for i in range(m):
                if f[i]:
                    prod[:, deg - m + i] -= c * f[i]
            prod[:, deg] = 0
            prod %= p
        return prod[:, :m]

    def _build_antilog(self) -> np.ndarray:
        p, m, n = self.p, self.m, self.q - 1
        if m == 1:
            g = (-self.modulus[0]) % p
            out = np.empty(n, dtype=np.int64)
            x = 1
            for i in range(n):
                out[i] = x
                x = x * g % p
            return out
        powers = np.zeros((1, m), dtype=np.int64)
        powers[0, 0] = 1
        xi = np.zeros(m, dtype=np.int64)
        xi[1] = 1
        step = self._mul_batch(powers, xi)[0]  # xi^1
        while powers.shape[0] < n:
            more = self._mul_batch(powers, step)
            powers = np.vstack([powers, more])
            step = self._mul_batch(more[-1:], xi)[0]
        powers = powers[:n]
        return powers @ self._weights

    # -- conversions
    def encode(self, x: FieldElement) -> int:
        return int(sum(c * self.p ** i for i, c in enumerate(x.coeffs)))

    def decode(self, code: int) -> FieldElement:
        cs = []
        for _ in range(self.m):
            code, c = divmod(code, self.p)
            cs.append(c)
        return FieldElement(tuple(cs))

    def element(self, coeffs) -> FieldElement:
        if isinstance(coeffs, int):
            return self.decode(coeffs % self.q) if self.m > 1 else FieldElement((coeffs % self.p,))
        cs = tuple(int(c) % self.p for c in coeffs)
        cs = cs + (0,) * (self.m - len(cs))
        if len(cs) != self.m:
            raise PreconditionFailed("too many coefficients")
        return FieldElement(cs)

    @property
    def zero(self) -> FieldElement:
        return FieldElement((0,) * self.m)

    @property
    def one(self) -> FieldElement:
        return self.element([1])

    @property
    def primitive(self) -> FieldElement:
        return self.antilog(1)

    def antilog(self, i: int) -> FieldElement:
        return self.decode(int(self.antilog_table[i % (self.q - 1)]))

    def dlog(self, x: FieldElement) -> int:
        return dlog(self, x)

    # -- arithmetic on integer codes
    def add_code(self, a: int, b: int) -> int:
        if self.p == 2:
            return a ^ b
        out, w = 0, 1
        for _ in range(self.m):
            a, ca = divmod(a, self.p)
            b, cb = divmod(b, self.p)
            out += ((ca + cb) % self.p) * w
            w *= self.p
        return out

    def mul_code(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        e = (self.log_table[a] + self.log_table[b]) % (self.q - 1)
        return int(self.antilog_table[e])

    # -- arithmetic on elements
    def add(self, x: FieldElement, y: FieldElement) -> FieldElement:
        return FieldElement(tuple((a + b) % self.p for a, b in zip(x.coeffs, y.coeffs)))

    def sub(self, x: FieldElement, y: FieldElement) -> FieldElement:
        return FieldElement(tuple((a - b) % self.p for a, b in zip(x.coeffs, y.coeffs)))

    def neg(self, x: FieldElement) -> FieldElement:
        return FieldElement(tuple((-a) % self.p for a in x.coeffs))

    def mul(self, x: FieldElement, y: FieldElement) -> FieldElement:
        return self.decode(self.mul_code(self.encode(x), self.encode(y)))

    def inv(self, x: FieldElement) -> FieldElement:
        return self.antilog(-dlog(self, x))

    def pow(self, x: FieldElement, e: int) -> FieldElement:
        if x.is_zero():
            if e == 0:
                return self.one
            return self.zero
        return self.antilog(dlog(self, x) * e)

    def poly_mul(self, x: FieldElement, y: FieldElement) -> FieldElement:
        """Schoolbook product mod the modulus; independent of the tables."""
        r = _polymulmod(list(x.coeffs), list(y.coeffs), list(self.modulus), self.p)
        return self.element(r)

    # -- table views for vectorized code
    def add_table(self) -> np.ndarray:
        """q x q addition table on integer codes."""
        codes = np.arange(self.q, dtype=np.int64)
        digits = (codes[:, None] // self._weights) % self.p
        s = (digits[:, None, :] + digits[None, :, :]) % self.p
        return s @ self._weights

    def mul_table(self) -> np.ndarray:
        q = self.q
        log = self.log_table
        e = (log[:, None] + log[None, :]) % (q - 1)
        out = self.antilog_table[e]
        out[0, :] = 0
        out[:, 0] = 0
        return out

    def __repr__(self):
        return f"FiniteField(p={self.p}, m={self.m}, modulus={self.modulus})"


@lru_cache(maxsize=64)
def field_new(p: int, m: int = 1) -> FiniteField:
    """Build (and cache) GF(p^m). Deterministic in (p, m)."""
    return FiniteField(p, m)


def gf(q: int) -> FiniteField:
    p, m = prime_power(q)
    return field_new(p, m)


def dlog(F: FiniteField, x: FieldElement) -> int:
    if x.is_zero():
        raise ZeroElement("discrete log of zero")
    return int(F.log_table[F.encode(x)])


def subfield_test(F: FiniteField, x: FieldElement, r: int) -> bool:
    if r < 1 or F.m % r:
        raise NotASubfield(f"GF({F.p}^{r}) is not a subfield of GF({F.p}^{F.m})")
    if x.is_zero():
        return True
    return dlog(F, x) % ((F.q - 1) // (F.p ** r - 1)) == 0
