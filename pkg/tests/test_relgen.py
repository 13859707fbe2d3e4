import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qfdlog.ideals import ideal_pow, prime_ideal_above
from qfdlog.ntkernel import FixedReal, kronecker, primes_up_to
from qfdlog.relgen import (
    PartialRelation,
    Relation,
    RelationStream,
    RelGenConfig,
    batch_smooth,
    build_factor_base,
    default_fb_size,
    factor_base_up_to,
    find_target_relation,
    merge_partials,
    read_cache,
    relation_stream,
    sieve_relations,
    smooth_parts,
    verify_relation,
    write_cache,
)

from oracles import is_smooth_trial

PRIMES = list(primes_up_to(200))


@given(st.lists(st.integers(0, 2**80), max_size=50))
@settings(max_examples=100)
def test_batch_smooth_matches_trial_division(values):
    assert batch_smooth(values, PRIMES) == [is_smooth_trial(v, PRIMES) for v in values]


def test_smooth_parts():
    assert smooth_parts([2**10 * 1009, 3 * 5 * 7, 1, 1009], PRIMES) == [2**10, 105, 1, 1]
    assert batch_smooth([], PRIMES) == []


def test_default_fb_size_interpolates():
    assert default_fb_size(140) == 200 and default_fb_size(220) == 1500
    assert 200 < default_fb_size(150) < 300
    sizes = [default_fb_size(b) for b in range(16, 400, 8)]
    assert sizes == sorted(sizes) and sizes[0] >= 6


@pytest.mark.parametrize("d", [-3299, -4420, 229, 924])
def test_factor_base(d):
    FB = build_factor_base(d, 20)
    assert len(FB) == 20
    assert all(kronecker(d, p) != -1 for p in FB.primes)
    for i, p in enumerate(FB.primes):
        assert FB.ideal(i).is_valid(d) and FB.ideal(i).a == p
    small = factor_base_up_to(d, FB.bound)
    assert small.primes == FB.primes
    with pytest.raises(ValueError):
        build_factor_base(d, 0)


@pytest.mark.parametrize("d", [-1000003, -4420, 4000033, 924])
def test_sieved_relations_recompose(d):
    FB = build_factor_base(d, 25)
    rels = sieve_relations(FB, FB.ideal(len(FB) - 1), 40, FB.bound**2)
    full = [r for r in rels if isinstance(r, Relation)]
    assert full
    for r in full:
        assert verify_relation(FB, r.exps, r.logpart)
    for r in full[:5]:
        # a perturbed real part or exponent vector must fail
        if d > 0:
            assert not verify_relation(FB, r.exps, r.logpart + FixedReal.from_float(0.75))
        bad = dict(r.exps)
        j = next(i for i in range(len(FB)) if FB.primes[i] > 2 and d % FB.primes[i])
        bad[j] = bad.get(j, 0) + 1
        assert not verify_relation(FB, bad, r.logpart)


@pytest.mark.parametrize("d", [-1000003, 4000033])
def test_partials_merge_into_valid_relations(d):
    FB = build_factor_base(d, 15)
    parts = []
    for k in range(len(FB)):
        parts += [r for r in sieve_relations(FB, FB.ideal(k), 200, FB.bound**2) if isinstance(r, PartialRelation)]
    merged = merge_partials(parts)
    assert merged
    for r in merged:
        assert verify_relation(FB, r.exps, r.logpart)


def test_relation_set_dedups_and_collects_units():
    d = 229
    FB = build_factor_base(d, 10)
    rs = relation_stream(FB, 15, RelGenConfig(seed=1))
    n = len(rs)
    assert n >= 15
    assert not rs.add(rs.relations[0])
    assert len(rs) == n
    keys = {r.key() for r in rs.relations}
    assert len(keys) == n
    # an inverse relation is redundant as a row
    r = rs.relations[0]
    inv = Relation({i: -e if d % FB.primes[i] else e for i, e in r.exps.items()}, r.logterms.scale(-1), d)
    assert not rs.add(inv)


def test_relation_stream_is_deterministic_across_jobs():
    FB = build_factor_base(-(10**9 + 7), 40)
    a = RelationStream(FB, RelGenConfig(seed=5))
    b = RelationStream(FB, RelGenConfig(seed=5), jobs=2)
    try:
        ka = [r.key() for _ in range(4) for r in a.batch()]
        kb = [r.key() for _ in range(4) for r in b.batch()]
    finally:
        a.close()
        b.close()
    assert ka == kb and ka


@pytest.mark.parametrize("d", [-1000003, 4000033])
def test_find_target_relation(d):
    FB = build_factor_base(d, 30)
    p = next(q for q in primes_up_to(5000)[200:] if kronecker(d, q) == 1)
    T, _ = ideal_pow(d, prime_ideal_above(d, p), 3)
    e, ell = find_target_relation(FB, T, random.Random(2))
    assert verify_relation(FB, e, ell, target=T)


@pytest.mark.parametrize("d", [-4420, 4000033])
def test_cache_round_trip(tmp_path, d):
    FB = build_factor_base(d, 12)
    rs = relation_stream(FB, 20, RelGenConfig(seed=3))
    parts = [r for r in sieve_relations(FB, FB.ideal(5), 60, FB.bound**2) if isinstance(r, PartialRelation)][:5]
    path = tmp_path / "rels.txt"
    write_cache(path, rs, parts)
    FB2, rs2, parts2 = read_cache(path)
    assert FB2.primes == FB.primes
    assert [r.key() for r in rs2.relations] == [r.key() for r in rs.relations]
    assert [r.logterms for r in rs2.relations] == [r.logterms for r in rs.relations]
    assert [p.large for p in parts2] == [p.large for p in parts]
    (tmp_path / "bad.txt").write_text("nonsense\n")
    with pytest.raises(ValueError):
        read_cache(tmp_path / "bad.txt")
