"""Argument checks shared by the solver front ends."""

from __future__ import annotations

import numbers

from .ideals import Ideal
from .ntkernel import Discriminant, as_discriminant


def check_discriminant(d, sign: int | None = None, fundamental: bool = True) -> Discriminant:
    """Coerce ``d`` to a :class:`Discriminant` and check sign and fundamentality."""
    if isinstance(d, str):
        try:
            d = int(d.strip())
        except ValueError:
            raise ValueError(f"not an integer discriminant: {d!r}") from None
    if isinstance(d, bool) or not isinstance(d, (numbers.Integral, Discriminant)):
        raise TypeError(f"discriminant must be an integer, got {type(d).__name__}")
    D = as_discriminant(d)
    if sign is not None and D.sign != sign:
        kind = "negative" if sign < 0 else "positive"
        raise ValueError(f"discriminant {D} must be {kind}")
    if fundamental and not D.fundamental:
        raise ValueError(f"discriminant {D} is not fundamental")
    return D


def check_ideal(D, I) -> Ideal:
    """Accept an :class:`Ideal`, an ``(a, b)`` pair, or the text ``"a,b"``."""
    if isinstance(I, str):
        I = Ideal.parse(I)
    elif isinstance(I, tuple) and len(I) == 2:
        I = Ideal(int(I[0]), int(I[1]))
    elif not isinstance(I, Ideal):
        raise TypeError(f"cannot interpret {I!r} as an ideal")
    if not I.is_valid(int(D)):
        raise ValueError(f"({I}) is not an ideal of discriminant {int(D)}")
    return I


def check_positive_int(name: str, value, allow_none: bool = False, minimum: int = 1):
    if value is None and allow_none:
        return None
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_timeout(value):
    if value is None:
        return None
    value = float(value)
    if value <= 0:
        raise ValueError("timeout must be positive")
    return value
