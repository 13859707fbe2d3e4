"""Integer and fixed-point primitives shared by the rest of the package.

Logarithms are carried as :class:`FixedReal` values: an integer mantissa
scaled by ``2**-64`` together with an absolute error bound in the same
units.  Real parts of relations, which get multiplied by large integer
solution vectors, are kept exactly as :class:`LogTerms` (a sparse integer
combination of logarithms) and only rounded to a :class:`FixedReal` at the
precision the final combination needs.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, total_ordering

import gmpy2
import mpmath

from .exceptions import NonResidue

FRAC_BITS = 64
ONE = 1 << FRAC_BITS

_MR_BASES_64 = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47)


# ---------------------------------------------------------------------------
# Kronecker symbol, square roots, primality


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol ``(a/n)`` for any integer ``a`` and ``n``."""
    if n == 0:
        return 1 if abs(a) == 1 else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    # factor out powers of two from n
    v = (n & -n).bit_length() - 1
    if v:
        if a % 2 == 0:
            return 0
        n >>= v
        if v & 1 and a % 8 in (3, 5):
            result = -result
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def sqrt_mod(a: int, p: int) -> int:
    """Square root of ``a`` modulo the odd prime ``p``, the one in ``[0, p/2]``."""
    a %= p
    if a == 0:
        return 0
    if p == 2:
        return a
    if kronecker(a, p) != 1:
        raise NonResidue(f"{a} is not a square modulo {p}")
    if p % 4 == 3:
        r = pow(a, (p + 1) // 4, p)
    elif p % 8 == 5:
        v = pow(2 * a, (p - 5) // 8, p)
        i = 2 * a * v * v % p
        r = a * v * (i - 1) % p
    else:
        # Tonelli-Shanks
        q, s = p - 1, 0
        while q % 2 == 0:
            q //= 2
            s += 1
        z = 2
        while kronecker(z, p) != -1:
            z += 1
        m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
        while t != 1:
            i, t2 = 0, t
            while t2 != 1:
                t2 = t2 * t2 % p
                i += 1
            b = pow(c, 1 << (m - i - 1), p)
            m, c = i, b * b % p
            t, r = t * c % p, r * b % p
    return min(r, p - r)


def _miller_rabin(n: int, bases) -> bool:
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in bases:
        a %= n
        if a in (0, 1, n - 1):
            continue
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def is_probable_prime(n: int) -> bool:
    """Deterministic below ``2**64``; 40 seeded random rounds above."""
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    if n < 2209:
        return True
    if n < (1 << 64):
        return _miller_rabin(n, _MR_BASES_64)
    rng = random.Random(n)
    bases = [rng.randrange(2, n - 1) for _ in range(40)]
    return _miller_rabin(n, _MR_BASES_64 + tuple(bases))


def next_probable_prime(n: int) -> int:
    if n < 2:
        return 2
    m = n + 1
    if m > 2 and m % 2 == 0:
        m += 1
    while not is_probable_prime(m):
        m += 2 if m > 2 else 1
    return m


@lru_cache(maxsize=32)
def primes_up_to(bound: int) -> tuple:
    if bound < 2:
        return ()
    sieve = bytearray([1]) * (bound + 1)
    sieve[0:2] = b"\x00\x00"
    for i in range(2, math.isqrt(bound) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytes(len(range(i * i, bound + 1, i)))
    return tuple(i for i, f in enumerate(sieve) if f)


def _rho_split(n: int) -> int | None:
    if n % 2 == 0:
        return 2
    n = gmpy2.mpz(n)
    for c in range(1, 20):
        x = y = gmpy2.mpz(2)
        d = gmpy2.mpz(1)
        while d == 1:
            x = (x * x + c) % n
            y = (y * y + c) % n
            y = (y * y + c) % n
            d = gmpy2.gcd(abs(x - y), n)
        if d != n:
            return int(d)
    return None


def factor_int(n: int) -> dict:
    """Prime factorization ``{p: e}`` by trial division and Pollard rho."""
    n = int(n)
    if n < 1:
        raise ValueError("n must be positive")
    out: dict = {}
    for p in primes_up_to(1000):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if is_probable_prime(m):
            out[m] = out.get(m, 0) + 1
            continue
        r = math.isqrt(m)
        d = r if r * r == m else _rho_split(m)
        if d is None:
            raise ArithmeticError(f"could not split {m}")
        stack += [d, m // d]
    return dict(sorted(out.items()))


def is_squarefree(n: int) -> bool:
    n = abs(n)
    if n == 0:
        return False
    bound = 1 << 16
    for p in primes_up_to(bound):
        if p * p * p > n:
            break
        if n % (p * p) == 0:
            return False
        if n % p == 0:
            n //= p
    if n == 1 or is_probable_prime(n):
        return True
    r = math.isqrt(n)
    if r * r == n:
        return False
    if bound ** 3 > n:
        # no prime factor below cbrt(n) is left, so n = p*q with p != q
        return True
    return all(e == 1 for e in factor_int(n).values())


# ---------------------------------------------------------------------------
# Discriminants


@dataclass(frozen=True)
class Discriminant:
    value: int

    def __post_init__(self):
        if self.value == 0 or self.value % 4 not in (0, 1):
            raise ValueError(f"{self.value} is not a discriminant (must be nonzero and 0 or 1 mod 4)")

    @property
    def sign(self) -> int:
        return -1 if self.value < 0 else 1

    @property
    def is_imaginary(self) -> bool:
        return self.value < 0

    @property
    def is_real(self) -> bool:
        return self.value > 0

    @property
    def fundamental(self) -> bool:
        d = self.value
        if d % 4 == 1:
            return is_squarefree(d) and d != 1
        m = d // 4
        return m % 4 in (2, 3) and is_squarefree(m)

    @property
    def bits(self) -> int:
        return abs(self.value).bit_length()

    def __int__(self):
        return self.value

    def __str__(self):
        return str(self.value)


def as_discriminant(d) -> Discriminant:
    return d if isinstance(d, Discriminant) else Discriminant(int(d))


def gen_prime_discriminant(bits: int, sign: int, seed: int) -> Discriminant:
    """Prime discriminant of exactly ``bits`` bits.

    ``sign=-1`` gives ``-p`` with ``p = 3 (mod 4)``; ``sign=+1`` gives
    ``p = 1 (mod 4)``.  A seeded odd start value of the right length is
    stepped by 2 until the condition holds.
    """
    if bits < 4:
        raise ValueError("bits must be at least 4")
    if sign not in (-1, 1):
        raise ValueError("sign must be +1 or -1")
    want = 3 if sign < 0 else 1
    rng = random.Random(seed)
    lo, hi = 1 << (bits - 1), 1 << bits
    n = rng.getrandbits(bits - 1) | lo | 1
    while True:
        if n >= hi:
            n = lo + 1
        if n % 4 == want and is_probable_prime(n):
            return Discriminant(sign * n)
        n += 2


# ---------------------------------------------------------------------------
# Fixed-point reals with an error bound


@total_ordering
@dataclass(frozen=True)
class FixedReal:
    """Real number ``mant * 2**-64`` known to within ``err * 2**-64``."""

    mant: int
    err: int = 0

    def __post_init__(self):
        if self.err < 0:
            raise ValueError("err must be non-negative")

    @classmethod
    def zero(cls) -> "FixedReal":
        return cls(0, 0)

    @classmethod
    def from_int(cls, n: int) -> "FixedReal":
        return cls(n << FRAC_BITS, 0)

    @classmethod
    def from_float(cls, x: float, err: int = 1) -> "FixedReal":
        return cls(round(Fraction(x) * ONE), err)

    def __add__(self, other):
        if not isinstance(other, FixedReal):
            return NotImplemented
        return FixedReal(self.mant + other.mant, self.err + other.err + 1)

    def __sub__(self, other):
        if not isinstance(other, FixedReal):
            return NotImplemented
        return FixedReal(self.mant - other.mant, self.err + other.err + 1)

    def __neg__(self):
        return FixedReal(-self.mant, self.err)

    def scale(self, k: int) -> "FixedReal":
        return FixedReal(self.mant * k, self.err * abs(k))

    def div_int(self, k: int) -> "FixedReal":
        if k == 0:
            raise ZeroDivisionError
        mant = self.mant if k > 0 else -self.mant
        k = abs(k)
        q = (2 * mant + k) // (2 * k)
        return FixedReal(q, -(-self.err // k) + 1)

    def __float__(self):
        return self.mant / ONE

    def to_fraction(self) -> Fraction:
        return Fraction(self.mant, ONE)

    @property
    def lower(self) -> Fraction:
        return Fraction(self.mant - self.err, ONE)

    @property
    def upper(self) -> Fraction:
        return Fraction(self.mant + self.err, ONE)

    @property
    def err_float(self) -> float:
        return self.err / ONE

    def contains(self, x) -> bool:
        x = Fraction(x) if not isinstance(x, Fraction) else x
        return self.lower <= x <= self.upper

    def __eq__(self, other):
        if not isinstance(other, FixedReal):
            return NotImplemented
        return self.mant == other.mant and self.err == other.err

    def __hash__(self):
        return hash((self.mant, self.err))

    def __lt__(self, other):
        if not isinstance(other, FixedReal):
            return NotImplemented
        return self.mant < other.mant

    def definitely_less(self, other: "FixedReal") -> bool:
        return self.mant + self.err < other.mant - other.err

    def close_to(self, other: "FixedReal", slack: int = 0) -> bool:
        return abs(self.mant - other.mant) <= self.err + other.err + slack

    def __repr__(self):
        return f"FixedReal({float(self):.12g} ± {self.err}ulp)"


def _to_fixed(x: mpmath.mpf, err: int) -> FixedReal:
    return FixedReal(int(mpmath.nint(mpmath.ldexp(x, FRAC_BITS))), err)


def fr_ln_rational(num: int, den: int = 1) -> FixedReal:
    """``ln(num/den)`` rounded to the fixed-point grid, error at most 2 ulps."""
    if num <= 0 or den <= 0:
        raise ValueError("num and den must be positive")
    if num == den:
        return FixedReal(0, 0)
    return _ln_rational_cached(num, den)


@lru_cache(maxsize=65536)
def _ln_rational_cached(num: int, den: int) -> FixedReal:
    prec = 96 + max(num.bit_length(), den.bit_length()).bit_length()
    with mpmath.workprec(prec):
        x = mpmath.log(mpmath.mpf(num)) - mpmath.log(mpmath.mpf(den))
        return _to_fixed(x, 2)


def _abs_quadratic(b: int, delta: int) -> mpmath.mpf:
    """``|b + sqrt(delta)|`` without cancellation, at the ambient precision."""
    r = mpmath.sqrt(mpmath.mpf(delta))
    if b >= 0:
        return b + r
    # b + r = (delta - b^2) / (r - b)
    return abs(mpmath.mpf(delta - b * b) / (r - b))


def fr_ln_quadratic(b: int, den: int, delta: int) -> FixedReal:
    """``ln|(b + sqrt(delta)) / den|`` for ``delta > 0``, error at most 2 ulps."""
    return _ln_quadratic_cached(b, abs(den), delta)


@lru_cache(maxsize=262144)
def _ln_quadratic_cached(b: int, den: int, delta: int) -> FixedReal:
    prec = 96 + 2 * delta.bit_length() + b.bit_length()
    with mpmath.workprec(prec):
        x = mpmath.log(_abs_quadratic(b, delta)) - mpmath.log(mpmath.mpf(den))
        return _to_fixed(x, 2)


# ---------------------------------------------------------------------------
# Exact linear combinations of logarithms


class LogTerms:
    """Exact sparse combination ``sum c * atom`` of logarithms.

    Atoms are ``("s", B)`` for ``ln|(B + sqrt(delta))/2|`` and ``("n", k)``
    for ``ln k``.  Coefficients are :class:`~fractions.Fraction` or ``int``.
    Instances are treated as immutable.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {k: v for k, v in (terms or {}).items() if v}

    @classmethod
    def quadratic(cls, b: int) -> "LogTerms":
        return cls({("s", b): 1})

    @classmethod
    def log_int(cls, n: int, coef=1) -> "LogTerms":
        if n == 1:
            return cls()
        return cls({("n", n): coef})

    def __add__(self, other: "LogTerms") -> "LogTerms":
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return LogTerms(out)

    def __sub__(self, other: "LogTerms") -> "LogTerms":
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, k) -> "LogTerms":
        if not k:
            return LogTerms()
        return LogTerms({a: v * k for a, v in self.terms.items()})

    def __eq__(self, other):
        return isinstance(other, LogTerms) and self.terms == other.terms

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        return f"LogTerms({len(self.terms)} atoms)"

    @staticmethod
    def combine(coeffs, items) -> "LogTerms":
        out: dict = {}
        for c, lt in zip(coeffs, items):
            if not c:
                continue
            for k, v in lt.terms.items():
                out[k] = out.get(k, 0) + c * v
        return LogTerms(out)

    def evaluate(self, delta: int = 0, extra_bits: int = 0) -> FixedReal:
        """Round to the fixed-point grid with error at most 2 ulps.

        Atoms are evaluated as fixed-point integers at ``P`` fractional bits
        (error below 2 units each), with ``P`` large enough that the
        coefficient-weighted atom error stays under a quarter ulp.
        """
        return FixedReal(self.evaluate_bits(delta, FRAC_BITS, extra_bits), 2)

    def evaluate_bits(self, delta: int, bits: int, extra_bits: int = 0) -> int:
        """``round(value * 2**bits)`` within 2 units."""
        if not self.terms:
            return 0
        den = 1
        for c in self.terms.values():
            if isinstance(c, Fraction):
                den = den * c.denominator // math.gcd(den, c.denominator)
        weight = sum(abs(int(c * den)) for c in self.terms.values())
        prec = bits + 8 + weight.bit_length() + extra_bits
        prec = -(-prec // 64) * 64
        total = 0
        for (kind, x), c in self.terms.items():
            total += int(c * den) * _atom_fixed(kind, x, delta if kind == "s" else 0, prec)
        q = den << (prec - bits)
        return (2 * total + q) // (2 * q)


_ATOMS: dict = {}


def _atom_fixed(kind: str, x: int, delta: int, prec: int) -> int:
    """``round(atom * 2**prec)`` within 2 units, cached at the highest precision seen."""
    key = (kind, x, delta)
    hit = _ATOMS.get(key)
    if hit is not None and hit[0] >= prec:
        return hit[1] >> (hit[0] - prec)
    with mpmath.workprec(prec + 32):
        if kind == "n":
            lg = mpmath.log(mpmath.mpf(x))
        else:
            lg = mpmath.log(_abs_quadratic(x, delta) / 2)
        v = int(mpmath.nint(mpmath.ldexp(lg, prec)))
    if len(_ATOMS) > 500000:
        _ATOMS.clear()
    _ATOMS[key] = (prec, v)
    return v
