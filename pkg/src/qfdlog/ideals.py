"""Ideal arithmetic in the maximal order of a quadratic field.

A primitive ideal ``aZ + (b + sqrt(D))/2 Z`` is stored as the pair
``(a, b)`` with ``b`` normalized into ``(-a, a]``.  Whenever an ideal is
replaced by an equivalent one, the relative generator ``gamma`` with
``old = (gamma) * new`` is tracked through ``ln|gamma|`` under the real
embedding with ``sqrt(D) > 0``.  In imaginary fields these logarithms carry
no information and are returned as zero.

For real fields, the reduced principal ideal ``(1/mu) O`` has distance
``ln|mu|``; one reduction step from ``(a, b)`` to ``(|c|, -b)`` adds
``ln|(b + sqrt(D)) / (2c)|``, so the full cycle from the unit ideal back to
itself has length equal to the regulator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .exceptions import Inert, NotSmooth
from .ntkernel import (
    Discriminant,
    FixedReal,
    as_discriminant,
    fr_ln_quadratic,
    fr_ln_rational,
    kronecker,
    sqrt_mod,
)

ZERO = FixedReal(0, 0)


def _norm_b(a: int, b: int) -> int:
    """Representative of ``b mod 2a`` in ``(-a, a]``."""
    b %= 2 * a
    return b - 2 * a if b > a else b


@dataclass(frozen=True, order=True)
class Ideal:
    a: int
    b: int

    def __post_init__(self):
        if self.a <= 0:
            raise ValueError(f"ideal norm must be positive, got {self.a}")
        nb = _norm_b(self.a, self.b)
        if nb != self.b:
            object.__setattr__(self, "b", nb)

    @property
    def norm(self) -> int:
        return self.a

    def c(self, delta) -> int:
        delta = int(delta)
        num = self.b * self.b - delta
        if num % (4 * self.a):
            raise ValueError(f"{self} is not an ideal for discriminant {delta}")
        return num // (4 * self.a)

    def is_valid(self, delta) -> bool:
        return (self.b * self.b - int(delta)) % (4 * self.a) == 0

    def __str__(self):
        return f"{self.a},{self.b}"

    @classmethod
    def parse(cls, text: str) -> "Ideal":
        try:
            a, b = (int(t) for t in text.replace(" ", "").split(","))
        except ValueError:
            raise ValueError(f"expected an ideal as 'a,b', got {text!r}") from None
        return cls(a, b)


@dataclass(frozen=True)
class DistIdeal:
    ideal: Ideal
    dist: FixedReal

    def __iter__(self):
        return iter((self.ideal, self.dist))


def check_ideal(D, I: Ideal) -> Ideal:
    delta = int(D)
    if not isinstance(I, Ideal):
        I = Ideal(*I)
    if (I.b - delta) % 2 or not I.is_valid(delta):
        raise ValueError(f"({I}) is not an ideal of discriminant {delta}")
    return I


def unit_ideal(D) -> Ideal:
    return Ideal(1, int(D) % 2)


def prime_ideal_above(D, p: int) -> Ideal:
    """The prime ideal ``(p, b_p)`` with the smallest non-negative ``b_p``."""
    delta = int(D)
    k = kronecker(delta, p)
    if k == -1:
        raise Inert(f"{p} is inert in discriminant {delta}")
    return Ideal(p, _prime_b(delta, p))


def _prime_b(delta: int, p: int) -> int:
    if p == 2:
        # smallest b >= 0 with b = delta (mod 2) and b^2 = delta (mod 8)
        for b in range(delta % 2, 4, 2):
            if (b * b - delta) % 8 == 0:
                return b
        raise Inert(f"2 is inert in discriminant {delta}")
    r = sqrt_mod(delta, p)
    # lift to b = delta (mod 2); candidates r, p - r, r + p, 2p - r
    cands = [b for b in (r, p - r, r + p, 2 * p - r) if b >= 0 and (b - delta) % 2 == 0]
    return min(cands)


def invert(I: Ideal) -> Ideal:
    return Ideal(I.a, -I.b)


def _xgcd(a: int, b: int):
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        return -a, -x0, -y0
    return a, x0, y0


def multiply(D, I: Ideal, J: Ideal):
    """Gauss composition.  Returns ``(K, g)`` with ``I * J = (g) * K``."""
    delta = int(D)
    a1, b1 = I.a, I.b
    a2, b2 = J.a, J.b
    if a1 == 1:
        return J, 1
    if a2 == 1:
        return I, 1
    c2 = (b2 * b2 - delta) // (4 * a2)
    s = (b1 + b2) // 2
    d0, e1, e2 = _xgcd(a1, a2)
    if s % d0 == 0:
        d, f, w = d0, 1, 0
    else:
        d, f, w = _xgcd(d0, s)
    v = f * e2
    a3 = (a1 // d) * (a2 // d)
    b3 = b2 + 2 * (a2 // d) * (v * (s - b2) - w * c2)
    return Ideal(a3, b3), d


def square(D, I: Ideal):
    return multiply(D, I, I)


# ---------------------------------------------------------------------------
# Reduction


def is_reduced(D, I: Ideal) -> bool:
    delta = int(D)
    a, b = I.a, I.b
    if delta < 0:
        c = (b * b - delta) // (4 * a)
        return a < c or (a == c and b >= 0)
    s = math.isqrt(delta)
    if a > s:
        return False
    bs = _norm_b_real(a, b, s)
    return bs > 0 and 2 * a - bs <= s


def _norm_b_real(a: int, b: int, s: int) -> int:
    """Representative of ``b mod 2a`` used by the reduction operator."""
    if a > s:
        return _norm_b(a, b)
    # into (s - 2a, s]
    return s - (s - b) % (2 * a)


def _reduce_imag(delta: int, a: int, b: int):
    c = (b * b - delta) // (4 * a)
    while True:
        if not -a < b <= a:
            nb = _norm_b(a, b)
            c += (nb * nb - b * b) // (4 * a)
            b = nb
        if a > c:
            a, b, c = c, -b, a
            continue
        if a == c and b < 0:
            b = -b
        return a, b


def _rho_step(delta: int, s: int, a: int, b: int):
    """One reduction step; ``b`` must already be normalized for ``a``.

    Returns the next ``(a', b')`` (b' normalized) and the step length.
    """
    c = (b * b - delta) // (4 * a)
    na = abs(c)
    step = fr_ln_quadratic(b, 2 * c, delta)
    return na, _norm_b_real(na, -b, s), step


def reduce(D, I: Ideal):
    """Reduced ideal ``J`` and ``ln|gamma|`` with ``I = (gamma) J``."""
    delta = int(D)
    if delta < 0:
        a, b = _reduce_imag(delta, I.a, I.b)
        return Ideal(a, b), ZERO
    s = math.isqrt(delta)
    a, b = I.a, _norm_b_real(I.a, I.b, s)
    dist = ZERO
    while not (a <= s and b > 0 and 2 * a - b <= s):
        a, b, step = _rho_step(delta, s, a, b)
        dist = dist + step
    return Ideal(a, b), dist


def rho(D, x: DistIdeal) -> DistIdeal:
    delta = int(D)
    if delta <= 0:
        raise ValueError("rho is only defined for real discriminants")
    s = math.isqrt(delta)
    a, b = x.ideal.a, _norm_b_real(x.ideal.a, x.ideal.b, s)
    na, nb, step = _rho_step(delta, s, a, b)
    return DistIdeal(Ideal(na, nb), x.dist + step)


def rho_inverse(D, x: DistIdeal) -> DistIdeal:
    delta = int(D)
    if delta <= 0:
        raise ValueError("rho_inverse is only defined for real discriminants")
    s = math.isqrt(delta)
    a1 = x.ideal.a
    b = _norm_b_real(a1, -x.ideal.b, s)
    a = (delta - b * b) // (4 * a1)
    step = fr_ln_quadratic(b, 2 * a1, delta)
    return DistIdeal(Ideal(a, b), x.dist - step)


def regulator_by_walk(D, max_steps: int = 10**7) -> FixedReal:
    """Regulator by walking the principal cycle (only for small discriminants)."""
    one = unit_ideal(D)
    x = DistIdeal(one, ZERO)
    for _ in range(max_steps):
        x = rho(D, x)
        if x.ideal == one:
            return x.dist
    raise RuntimeError("principal cycle longer than max_steps")


def _walk_to(D, x: DistIdeal, t: FixedReal) -> DistIdeal:
    while x.dist.mant > t.mant:
        x = rho_inverse(D, x)
    nxt = rho(D, x)
    while nxt.dist.mant <= t.mant:
        x, nxt = nxt, rho(D, nxt)
    if nxt.dist.mant - t.mant < t.mant - x.dist.mant:
        return nxt
    return x


def principal_near(D, t) -> DistIdeal:
    """Reduced principal ideal whose distance is nearest ``t``.

    Uses repeated doubling: the ideal near ``t/2`` is squared, reduced and
    then moved by a few single steps.
    """
    delta = int(D)
    if delta <= 0:
        raise ValueError("principal_near needs a real discriminant")
    if not isinstance(t, FixedReal):
        t = FixedReal.from_float(float(t), 0)
    base = FixedReal.from_int(max(4, delta.bit_length()))
    return _near(delta, t, base)


def _near(delta: int, t: FixedReal, base: FixedReal) -> DistIdeal:
    if abs(t.mant) <= base.mant:
        return _walk_to(delta, DistIdeal(unit_ideal(delta), ZERO), t)
    half = _near(delta, t.div_int(2), base)
    sq, g = multiply(delta, half.ideal, half.ideal)
    red, d = reduce(delta, sq)
    dist = half.dist.scale(2) + fr_ln_rational(g) + d
    return _walk_to(delta, DistIdeal(red, dist), t)


def ideal_pow(D, I: Ideal, k: int):
    """``[I]^k`` as a reduced ideal plus ``ln|gamma|`` of the generator."""
    if k < 0:
        raise ValueError("exponent must be non-negative")
    delta = int(D)
    real = delta > 0
    result, log = unit_ideal(delta), ZERO
    if k == 0:
        return result, log
    base, blog = reduce(delta, I)
    first = True
    for bit in bin(k)[2:]:
        if not first:
            sq, g = multiply(delta, result, result)
            result, d = reduce(delta, sq)
            if real:
                log = log.scale(2) + fr_ln_rational(g) + d
        if bit == "1":
            if first:
                result, log = base, blog
            else:
                pr, g = multiply(delta, result, base)
                result, d = reduce(delta, pr)
                if real:
                    log = log + blog + fr_ln_rational(g) + d
        first = False
    return result, log


# ---------------------------------------------------------------------------
# Factoring over a factor base


def factor_over(FB, I: Ideal):
    """Exponent vector ``e`` with ``I = prod p_i^{e_i}``.

    A negative ``e_i`` stands for the conjugate prime to the power
    ``|e_i|``.  Raises :class:`NotSmooth` with the leftover cofactor when the
    norm has a prime factor outside the factor base.
    """
    exps = [0] * len(FB)
    n = I.a
    b = I.b
    for p, idx in FB.iter_dividing(n):
        k = 0
        while n % p == 0:
            n //= p
            k += 1
        bp = FB.bp[idx]
        if (b - bp) % (2 * p) == 0:
            exps[idx] = k
        elif (b + bp) % (2 * p) == 0:
            exps[idx] = -k
        else:
            raise ValueError(f"({I}) is not an ideal above {p}")
    if n != 1:
        raise NotSmooth(f"norm of ({I}) leaves cofactor {n}", cofactor=n, partial=exps)
    return exps


def compose(D, FB, exps):
    """Reduced ideal and ``ln|gamma|`` with ``prod p_i^{e_i} = (gamma) J``."""
    delta = int(D)
    real = delta > 0
    acc, log = unit_ideal(delta), ZERO
    for idx, e in enumerate(exps):
        if not e:
            continue
        p = FB.primes[idx]
        P = Ideal(p, FB.bp[idx])
        if e < 0:
            P = invert(P)
            if real:
                # p^-1 = (1/p) * conj(p)
                log = log - fr_ln_rational(p).scale(-e)
        J, plog = ideal_pow(delta, P, abs(e))
        acc, g = multiply(delta, acc, J)
        acc, d = reduce(delta, acc)
        if real:
            log = log + plog + fr_ln_rational(g) + d
    return acc, log


def enumerate_reduced_imag(D):
    """All reduced ideals of an imaginary discriminant (brute force)."""
    delta = int(D)
    out = []
    amax = math.isqrt(-delta // 3) + 1
    for a in range(1, amax + 1):
        for b in range(-a + 1, a + 1):
            if (b * b - delta) % (4 * a):
                continue
            I = Ideal(a, b)
            if is_reduced(delta, I):
                out.append(I)
    return out


__all__ = [
    "Ideal",
    "DistIdeal",
    "check_ideal",
    "unit_ideal",
    "prime_ideal_above",
    "invert",
    "multiply",
    "square",
    "is_reduced",
    "reduce",
    "rho",
    "rho_inverse",
    "regulator_by_walk",
    "principal_near",
    "ideal_pow",
    "factor_over",
    "compose",
    "enumerate_reduced_imag",
    "Discriminant",
    "as_discriminant",
]
