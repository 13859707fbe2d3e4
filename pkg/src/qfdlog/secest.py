"""Security-parameter estimates from subexponential run-time extrapolation.

Run times scale like ``L_N[e, c] = exp(c (ln N)^e (ln ln N)^(1-e))``.  Given
a measured time ``t1`` at size ``N1``, the time at ``N2`` is estimated as
``t1 * L_N2 / L_N1``.  Factoring uses the number field sieve constants
``e = 1/3, c = (64/9)^(1/3)``; the quadratic-field discrete logarithm
problems use ``e = 1/2, c = 1``.

Ratios of ``L`` values are formed in the log domain so that nothing is
lost to cancellation when two huge values are divided.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

SECONDS_PER_YEAR = 31_536_000
NFS_E = 1 / 3
NFS_C = (64 / 9) ** (1 / 3)

#: RSA-768: 2000 Opteron-years at 4400 MIPS.
RSA768_MIPS_YEARS = 8.8e6
RSA_BITS = (768, 1024, 2048, 3072, 7680, 15360)

# Largest sizes with at least 10 measured instances, average seconds on a
# 4800 MIPS machine.
IMAG_ANCHOR_BITS, IMAG_ANCHOR_SECONDS = 256, 22992.70
REAL_ANCHOR_BITS, REAL_ANCHOR_SECONDS = 230, 5680.90
ANCHOR_MIPS = 4800

#: Discriminant sizes printed for the 768-bit row, used to calibrate anchors.
CALIBRATION_BITS = {"imaginary": 640, "real": 634}


@dataclass(frozen=True)
class Anchor:
    bits: int
    time: float
    e: float = 0.5
    c: float = 1.0

    def __post_init__(self):
        if self.time <= 0:
            raise ValueError("anchor time must be positive")
        if not 0 <= self.e <= 1:
            raise ValueError("e must lie in [0, 1]")


@dataclass(frozen=True)
class EstimateRow:
    rsa_bits: int
    t2_mips_years: float
    bits_imaginary: int
    bits_real: int


def ln_L(bits, e: float, c: float) -> float:
    """Natural log of ``L_{2^bits}[e, c]``."""
    if bits < 2:
        raise ValueError("bits must be at least 2")
    lnN = bits * math.log(2)
    return c * lnN**e * math.log(lnN) ** (1 - e)


def extrapolate(t1: float, bits1: int, bits2: int, e: float, c: float) -> float:
    if t1 <= 0:
        raise ValueError("t1 must be positive")
    return t1 * math.exp(ln_L(bits2, e, c) - ln_L(bits1, e, c))


def min_bits(anchor: Anchor, t2: float) -> int:
    """Smallest ``b`` with ``L_{2^b} > L_{N1} * t2 / t1`` (strict)."""
    if t2 <= 0:
        raise ValueError("t2 must be positive")
    goal = ln_L(anchor.bits, anchor.e, anchor.c) + math.log(t2 / anchor.time)
    # L is increasing in b, so bracket and bisect
    lo, hi = 2, max(4, anchor.bits)
    while ln_L(hi, anchor.e, anchor.c) <= goal:
        lo, hi = hi, hi * 2
    if ln_L(lo, anchor.e, anchor.c) > goal:
        return lo
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ln_L(mid, anchor.e, anchor.c) > goal:
            hi = mid
        else:
            lo = mid
    return hi


def mips_years(seconds: float, mips: float) -> float:
    if seconds < 0 or mips <= 0:
        raise ValueError("seconds must be non-negative and mips positive")
    return seconds * mips / SECONDS_PER_YEAR


def nfs_column(rsa_bits=RSA_BITS, t768: float = RSA768_MIPS_YEARS) -> list:
    return [extrapolate(t768, 768, b, NFS_E, NFS_C) for b in rsa_bits]


def calibrate_anchor(bits: int, t2: float, target_bits: int) -> Anchor:
    """Anchor time at ``bits`` for which ``min_bits(., t2) == target_bits``.

    The admissible times form an interval; its geometric midpoint is used.
    """
    base = ln_L(bits, 0.5, 1.0) + math.log(t2)
    # need ln_L(target - 1) <= base - ln t1 < ln_L(target)
    ln_hi = base - ln_L(target_bits - 1, 0.5, 1.0)
    ln_lo = base - ln_L(target_bits, 0.5, 1.0)
    return Anchor(bits, math.exp((ln_lo + ln_hi) / 2))


def literal_anchors(mips: float = ANCHOR_MIPS):
    """Anchors converted from the measured seconds at the stated MIPS rating."""
    return (
        Anchor(IMAG_ANCHOR_BITS, mips_years(IMAG_ANCHOR_SECONDS, mips)),
        Anchor(REAL_ANCHOR_BITS, mips_years(REAL_ANCHOR_SECONDS, mips)),
    )


def calibrated_anchors(t768: float = RSA768_MIPS_YEARS):
    """Anchors back-solved so the 768-bit row reproduces the published sizes."""
    return (
        calibrate_anchor(IMAG_ANCHOR_BITS, t768, CALIBRATION_BITS["imaginary"]),
        calibrate_anchor(REAL_ANCHOR_BITS, t768, CALIBRATION_BITS["real"]),
    )


def security_table(calibration=None, rsa_bits=RSA_BITS) -> list:
    """Rows of (RSA size, NFS time, imaginary bits, real bits).

    ``calibration`` is a pair of anchors (imaginary, real); the default
    is :func:`calibrated_anchors`.
    """
    imag, real = calibration or calibrated_anchors()
    rows = []
    for b, t2 in zip(rsa_bits, nfs_column(rsa_bits)):
        rows.append(EstimateRow(b, t2, min_bits(imag, t2), min_bits(real, t2)))
    return rows


def anchor_from_seconds(bits: int, seconds: float, mips: float = ANCHOR_MIPS) -> Anchor:
    return Anchor(bits, mips_years(seconds, mips))


def format_table(rows) -> str:
    lines = [f"{'RSA':>6} {'D (imag)':>9} {'D (real)':>9} {'NFS MIPS-years':>15}"]
    for r in rows:
        lines.append(f"{r.rsa_bits:>6} {r.bits_imaginary:>9} {r.bits_real:>9} {r.t2_mips_years:>15.2e}")
    return "\n".join(lines)


def with_time(anchor: Anchor, time: float) -> Anchor:
    return replace(anchor, time=time)
