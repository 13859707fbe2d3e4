"""End-to-end acceptance checks, one test per criterion.

Each test records a one-line verdict that is printed in the terminal
summary, then asserts it.
"""

import io
import json
import math
import random
import time
from contextlib import redirect_stdout
from fractions import Fraction

import pytest

from qfdlog import cli, secest
from qfdlog.exactla import group_structure, hnf_with_det, solve_certified
from qfdlog.exceptions import NoSolution, RankDeficient
from qfdlog.ideals import ideal_pow, prime_ideal_above, principal_near, unit_ideal
from qfdlog.ntkernel import gen_prime_discriminant, kronecker, primes_up_to
from qfdlog.relgen import RelationStream, RelGenConfig, batch_smooth, verify_relation
from qfdlog.solver import (
    IndexCalculus,
    choose_factor_base,
    class_group,
    euler_window,
    infra_residual,
    regulator,
    verify_dlp,
    verify_infra,
)

from conftest import random_fundamental
from oracles import (
    class_group_oracle,
    invariant_factors,
    is_smooth_trial,
    lattice_det,
    rational_rank,
    regulator_cf,
)

slow = pytest.mark.slow


def _within(x, ref, rel):
    return abs(x - ref) <= rel * abs(ref)


def test_criterion_01_l_function_anchors(record_criterion):
    t = time.perf_counter()
    cases = [(140, 1.41e9), (256, 1.46e13), (230, 2.23e12)]
    got = [math.exp(secest.ln_L(b, 0.5, 1.0)) for b, _ in cases]
    ok = all(_within(g, ref, 0.02) for g, (_, ref) in zip(got, cases))
    dt = time.perf_counter() - t
    ok = ok and dt < 1
    record_criterion(1, ok, " ".join(f"L(2^{b})={g:.3e}" for (b, _), g in zip(cases, got)) + f" in {dt:.3f}s")
    assert ok


def _estimate_json(*extra):
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = cli.main(["estimate", "--json", *extra])
    assert code == 0
    return json.loads(buf.getvalue())


def test_criterion_02_nfs_column(record_criterion):
    t = time.perf_counter()
    rows = _estimate_json("--table")["rows"]
    dt = time.perf_counter() - t
    expect = {1024: 1.07e10, 2048: 1.25e19, 3072: 4.74e25, 7680: 1.06e45, 15360: 1.01e65}
    got = {r["rsa"]: r["mips_years"] for r in rows}
    ok = all(_within(got[b], v, 0.05) for b, v in expect.items()) and dt < 1
    record_criterion(2, ok, " ".join(f"{b}:{got[b]:.3g}" for b in expect) + f" in {dt:.3f}s")
    assert ok


LITERAL_SNAPSHOT = {
    "imaginary": [501, 644, 1152, 1601, 3288, 5580],
    "real": [492, 634, 1139, 1585, 3267, 5554],
}


def test_criterion_03_discriminant_sizes(record_criterion):
    rows = _estimate_json("--table", "--paper-calibrated")["rows"]
    imag = [r["imaginary"] for r in rows]
    real = [r["real"] for r in rows]
    ref_imag = [640, 798, 1348, 1827, 3598, 5971]
    ref_real = [634, 792, 1341, 1818, 3586, 5957]
    ok_cal = all(abs(a - b) <= 3 for a, b in zip(imag, ref_imag)) and all(
        abs(a - b) <= 3 for a, b in zip(real, ref_real)
    )
    lit = _estimate_json("--table", "--literal-units")["rows"]
    ok_lit = [r["imaginary"] for r in lit] == LITERAL_SNAPSHOT["imaginary"] and [
        r["real"] for r in lit
    ] == LITERAL_SNAPSHOT["real"]
    ok = ok_cal and ok_lit
    record_criterion(3, ok, f"imag {imag} real {real}; literal snapshot {'matches' if ok_lit else 'differs'}")
    assert ok


@slow
def test_criterion_04_class_groups(record_criterion):
    rng = random.Random(2024)
    deltas = [-23, -47, -84] + [random_fundamental(rng, -10**6, -3) for _ in range(100)]
    t = time.perf_counter()
    bad = []
    for d in deltas:
        cg = class_group(d)
        h, inv = class_group_oracle(d)
        if cg.h != h or list(cg.invariants) != inv:
            bad.append((d, cg.h, cg.invariants, h, inv))
    dt = time.perf_counter() - t
    fixtures_ok = class_group(-84).invariants == (2, 2)
    ok = not bad and dt < 600 and fixtures_ok
    record_criterion(4, ok, f"{len(deltas) - len(bad)}/{len(deltas)} match the reduced-forms oracle in {dt:.0f}s")
    assert ok, bad[:5]


@slow
def test_criterion_05_regulators(record_criterion):
    rng = random.Random(2025)
    deltas = [5, 13, 40] + [random_fundamental(rng, 2, 10**8 - 1) for _ in range(100)]
    bad, outside = [], []
    worst = 0.0
    for d in deltas:
        est = regulator(d)
        R = float(est.R)
        ref = regulator_cf(d)
        worst = max(worst, abs(R - ref))
        if abs(R - ref) > 1e-6:
            bad.append((d, R, ref))
        if est.h is None or not euler_window(d).contains(est.h * R):
            outside.append((d, est.h))
    fixtures = {5: 0.481212, 13: 1.194763, 40: 1.818446}
    fix_ok = all(abs(float(regulator(d).R) - v) < 1e-6 for d, v in fixtures.items())
    ok = not bad and not outside and fix_ok
    record_criterion(
        5,
        ok,
        f"{len(deltas) - len(bad)}/{len(deltas)} within 1e-6 (worst {worst:.1e}), "
        f"hR in window {len(deltas) - len(outside)}/{len(deltas)}",
    )
    assert ok, (bad[:5], outside[:5])


def _split_prime_ideal(d, rng):
    ps = [p for p in primes_up_to(5000)[3:] if kronecker(d, p) == 1]
    return prime_ideal_above(d, rng.choice(ps))


@slow
def test_criterion_06_imaginary_dlp(record_criterion):
    rng = random.Random(6)
    passed, worst = 0, 0.0
    failures = []
    for i in range(25):
        d = int(gen_prime_discriminant(rng.randint(50, 60), -1, rng.getrandbits(32)))
        g = _split_prime_ideal(d, rng)
        assert g != unit_ideal(d)
        k = rng.getrandbits(48)
        a = ideal_pow(d, g, k)[0]
        t = time.perf_counter()
        x = IndexCalculus(seed=i).fit(d).dlog(g, a)
        dt = time.perf_counter() - t
        worst = max(worst, dt)
        if verify_dlp(d, g, a, x) and dt < 60:
            passed += 1
        else:
            failures.append((d, g, a, x, dt))
    ok = passed == 25
    record_criterion(6, ok, f"{passed}/25 verified, slowest {worst:.1f}s (limit 60s)")
    assert ok, failures


@slow
def test_criterion_07_infrastructure_dlp(record_criterion):
    rng = random.Random(7)
    passed, worst, worst_res = 0, 0.0, 0.0
    failures = []
    for i in range(25):
        d = int(gen_prime_discriminant(rng.randint(50, 60), 1, rng.getrandbits(32)))
        t0 = rng.uniform(1.0, 1e6)
        a = principal_near(d, t0).ideal
        t = time.perf_counter()
        dist = IndexCalculus(seed=i).fit(d).infra_dlog(a)
        dt = time.perf_counter() - t
        worst = max(worst, dt)
        res = infra_residual(d, a, dist)
        if res is not None:
            worst_res = max(worst_res, res)
        if verify_infra(d, a, dist) and res is not None and res < 1e-6 and dt < 120:
            passed += 1
        else:
            failures.append((d, a, float(dist), res, dt))
    ok = passed == 25
    record_criterion(7, ok, f"{passed}/25 verified, worst residual {worst_res:.1e}, slowest {worst:.1f}s (limit 120s)")
    assert ok, failures


def test_criterion_08_batch_smoothness(record_criterion):
    rng = random.Random(8)
    primes = list(primes_up_to(600)[:100])
    values = []
    for i in range(100_000):
        kind = i % 4
        if kind == 0:
            values.append(rng.getrandbits(64) | 1)
        elif kind == 1:
            # smooth by construction
            v = 1
            while True:
                p = rng.choice(primes)
                if (v * p).bit_length() > 64:
                    break
                v *= p
            values.append(v)
        elif kind == 2:
            # smooth times one prime just outside the base
            v = rng.choice((601, 607, 613, 617)) * rng.choice(primes) ** rng.randint(1, 6)
            values.append(v)
        else:
            values.append(rng.randint(1, 1 << 64))
    flags = batch_smooth(values, primes)
    mismatches = sum(f != is_smooth_trial(v, primes) for v, f in zip(values, flags))
    smooth = sum(flags)
    ok = mismatches == 0
    record_criterion(8, ok, f"{len(values)} values, {smooth} smooth, {mismatches} disagreements with trial division")
    assert ok


def test_criterion_09_exact_linear_algebra(record_criterion):
    rng = random.Random(9)
    counts = {"hnf": 0, "snf": 0, "solve": 0, "nosol": 0, "deficient": 0}
    bad = []
    for _ in range(500):
        m, n = rng.randint(1, 8), rng.randint(1, 8)
        M = [[rng.randint(-10, 10) for _ in range(n)] for _ in range(m)]
        det = lattice_det(M) if m >= n else 0
        if det == 0:
            try:
                hnf_with_det(M)
                bad.append(("hnf accepted a rank-deficient matrix", M))
            except RankDeficient:
                counts["deficient"] += 1
        else:
            H, d = hnf_with_det(M)
            if d != det:
                bad.append(("det", M, d, det))
            counts["hnf"] += 1
            h, inv = group_structure(M)
            if h != det or inv != invariant_factors(M):
                bad.append(("snf", M, inv, invariant_factors(M)))
            counts["snf"] += 1
        # a consistent right-hand side ...
        y = [rng.randint(-5, 5) for _ in range(m)]
        rhs = [sum(y[i] * M[i][j] for i in range(m)) for j in range(n)]
        x = solve_certified(M, rhs)
        if [sum(x[i] * M[i][j] for i in range(m)) for j in range(n)] != [Fraction(r) for r in rhs]:
            bad.append(("solve", M, rhs, x))
        counts["solve"] += 1
        # ... and an arbitrary one, which may lie outside the row space
        rhs = [rng.randint(-10, 10) for _ in range(n)]
        solvable = rational_rank(M + [rhs]) == rational_rank(M)
        try:
            x = solve_certified(M, rhs)
            if not solvable:
                bad.append(("solved an inconsistent system", M, rhs))
            counts["solve"] += 1
        except NoSolution:
            if solvable:
                bad.append(("missed a solution", M, rhs))
            counts["nosol"] += 1
    ok = not bad
    record_criterion(9, ok, f"500 matrices: {counts}, {len(bad)} disagreements")
    assert ok, bad[:3]


@slow
def test_criterion_10_relation_soundness(record_criterion):
    rng = random.Random(10)
    deltas = []
    for bits in (24, 32, 40, 48, 56):
        deltas.append(int(gen_prime_discriminant(bits, -1, rng.getrandbits(32))))
        deltas.append(int(gen_prime_discriminant(bits, 1, rng.getrandbits(32))))
    # a few composite ones with ramified primes and 2 in the factor base
    deltas += [-84, -4420, 40, 924]
    per = -(-10_000 // len(deltas))
    total = bad = 0
    for d in deltas:
        FB = choose_factor_base(d)
        stream = RelationStream(FB, RelGenConfig(seed=d & 0xFFFF))
        seen = 0
        while seen < per:
            for rel in stream.batch():
                total += 1
                seen += 1
                if not verify_relation(FB, rel.exps, rel.logpart):
                    bad += 1
                if seen >= per:
                    break
        stream.close()
    ok = bad == 0 and total >= 10_000
    record_criterion(10, ok, f"{total} relations over {len(deltas)} discriminants, {bad} failed recomposition")
    assert ok
