import math
import random

import pytest
from sklearn.base import clone

from qfdlog import (
    IndexCalculus,
    LikelyNonPrincipal,
    SolverConfig,
    Timeout,
    class_group,
    dlp_imaginary,
    dlp_infrastructure,
    regulator,
    verify_dlp,
    verify_infra,
)
from qfdlog.exceptions import NoSolution, PrecisionLoss
from qfdlog.ideals import enumerate_reduced_imag, ideal_pow, invert, is_reduced, principal_near, prime_ideal_above
from qfdlog.ntkernel import FixedReal, LogTerms, kronecker, primes_up_to
from qfdlog.solver import class_order, euler_window, real_gcd

from conftest import random_fundamental
from oracles import class_group_oracle, form_order, regulator_cf


def _split(d, skip=3):
    return [p for p in primes_up_to(3000)[skip:] if kronecker(d, p) == 1]


def test_estimator_params_round_trip():
    est = IndexCalculus(seed=3, fb_size=40, surplus=5)
    assert est.get_params()["fb_size"] == 40
    c = clone(est)
    assert c.get_params() == est.get_params() and c is not est
    est.set_params(surplus=7)
    assert est.surplus == 7


@pytest.mark.parametrize(
    "kw", [{"seed": -1}, {"surplus": -1}, {"kernel_samples": 11}, {"jobs": 0}, {"timeout": 0}, {"fb_size": 0}]
)
def test_invalid_params(kw):
    with pytest.raises(ValueError):
        IndexCalculus(**kw).fit(-3299)


def test_rejects_bad_discriminants():
    with pytest.raises(ValueError):
        class_group(-3299 * 4)  # not fundamental
    with pytest.raises(ValueError):
        class_group(229)  # wrong sign
    with pytest.raises(ValueError):
        regulator(-23)
    with pytest.raises(TypeError):
        class_group(-23.0)


def test_unfitted_estimator():
    from sklearn.exceptions import NotFittedError

    with pytest.raises(NotFittedError):
        IndexCalculus().dlog((2, 1), (3, 1))


@pytest.mark.parametrize("d", [-3, -4, -23, -84, -3299, -4420, -1000003, -3999971])
def test_class_group_against_oracle(d):
    h, inv = class_group_oracle(d)
    cg = class_group(d)
    assert cg.h == h and list(cg.invariants) == inv
    assert cg.certified


@pytest.mark.parametrize("d", [5, 8, 13, 40, 229, 924, 4000033, 52507240])
def test_regulator_against_oracle(d):
    est = regulator(d)
    assert abs(float(est.R) - regulator_cf(d)) < 1e-9
    assert euler_window(d).contains(est.h * float(est.R))


def test_euler_window_contains_class_numbers():
    rng = random.Random(1)
    ds = [-23, -47, -84] + [random_fundamental(rng, -10**5, -10**4) for _ in range(20)]
    for d in ds:
        h, _ = class_group_oracle(d)
        assert euler_window(d).contains(h), d


def test_real_gcd():
    R = 1.2345678901
    xs = [FixedReal.from_float(m * R, 4) for m in (6, 10, 15)]
    assert abs(float(real_gcd(xs)) - R) < 1e-9
    with pytest.raises(NoSolution):
        real_gcd([FixedReal(0, 0)])
    with pytest.raises(ValueError):
        real_gcd([LogTerms.log_int(2)])
    # exact inputs: gcd(12 ln 2, 18 ln 2) = 6 ln 2
    g = real_gcd([LogTerms.log_int(2, 12), LogTerms.log_int(2, 18)], delta=5)
    assert abs(float(g) - 6 * math.log(2)) < 1e-15
    # huge multiples with a coarse error bound cannot be resolved
    with pytest.raises(PrecisionLoss):
        real_gcd([FixedReal.from_float(1e15 * R, 1 << 50), FixedReal.from_float((1e15 + 1) * R, 1 << 50)])


def test_class_order():
    d = -3299
    h, _ = class_group_oracle(d)
    for p in _split(d)[:5]:
        P = prime_ideal_above(d, p)
        assert class_order(d, P, h) == form_order((P.a, P.b, P.c(d)), d, h)


@pytest.mark.parametrize("d", [-3299, -1000003, -(2**31 - 1)])
def test_dlog_small(d):
    rng = random.Random(d)
    ic = IndexCalculus(seed=1).fit(d)
    ps = _split(d)
    for _ in range(4):
        g = prime_ideal_above(d, rng.choice(ps))
        k = rng.randrange(1, 10**6)
        a, _ = ideal_pow(d, g, k)
        x = ic.dlog(g, a)
        assert verify_dlp(d, g, a, x)
        if ic.h_ is not None:
            assert 0 <= x < ic.h_
    # negative direction and batch interface
    g = prime_ideal_above(d, ps[0])
    a, _ = ideal_pow(d, invert(g), 5)
    assert verify_dlp(d, g, a, ic.transform([(g, a)])[0])
    assert ic.dlog(g, ideal_pow(d, g, 0)[0]) == 0


def test_dlog_functional_front_end():
    d = -1000003
    g = prime_ideal_above(d, _split(d)[2])
    a, _ = ideal_pow(d, g, 4242)
    x = dlp_imaginary(d, g, a, SolverConfig(seed=2))
    assert verify_dlp(d, g, a, x)


@pytest.mark.parametrize("d", [229, 4000033, 52507240])
def test_infra_dlog_small(d):
    ic = IndexCalculus(seed=1).fit(d)
    R = float(ic.regulator_.R)
    for t0 in (0.3 * R, 0.77 * R, 5.5 * R):
        a = principal_near(d, t0).ideal
        t = ic.infra_dlog(a)
        assert verify_infra(d, a, t)
        assert 0 <= float(t) < R
        assert abs((float(t) - t0 + R / 2) % R - R / 2) < math.log(d)
    assert float(ic.infra_dlog(principal_near(d, 0).ideal)) == 0.0


def test_infra_dlog_functional_and_non_principal():
    d = 4000033
    a = principal_near(d, 123.0).ideal
    t = dlp_infrastructure(d, a)
    assert verify_infra(d, a, t)
    # 4000033 has h = 2: a reduced ideal in the other class is not principal
    ic = IndexCalculus(seed=0, max_retries=1).fit(d)
    assert ic.h_ == 2
    for p in _split(d, 0):
        P = prime_ideal_above(d, p)
        if is_reduced(d, P):
            try:
                ic.infra_dlog(P)
            except LikelyNonPrincipal:
                break
    else:
        pytest.fail("no non-principal reduced prime ideal found")


def test_determinism():
    d = -(2**31 - 1)
    a = IndexCalculus(seed=9).fit(d)
    b = IndexCalculus(seed=9).fit(d)
    assert [r.key() for r in a.relations_] == [r.key() for r in b.relations_]
    assert a.h_ == b.h_


def test_timeout():
    from qfdlog.ntkernel import gen_prime_discriminant

    with pytest.raises(Timeout):
        IndexCalculus(timeout=1e-3).fit(int(gen_prime_discriminant(90, -1, 0)))


def test_reduced_ideal_enumeration_gives_h():
    for d in (-3299, -4420, -84):
        assert len(enumerate_reduced_imag(d)) == class_group(d).h
