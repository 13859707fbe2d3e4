"""Factor bases and relation collection.

A relation comes from an element ``beta = (B + sqrt(D))/2`` whose principal
ideal ``(beta) = (|N(beta)|, B)`` splits over the factor base.  The
elements are drawn from seed ideals ``(a, b)`` built as short products of
factor-base primes: ``beta = a*x + (b + sqrt(D))/2`` has norm ``a*f(x)``
with ``f(x) = a x^2 + b x + c``, so only ``f(x)`` needs to be smooth.
Values with one or two leftover primes become partial relations, merged
later through cycles in the large-prime graph.

Real parts are stored exactly as :class:`~qfdlog.ntkernel.LogTerms` so the
linear algebra can evaluate combinations with large coefficients to full
precision.
"""

from __future__ import annotations

import bisect
import logging
import math
import random
import time
from dataclasses import dataclass, field
from typing import Iterable

import gmpy2
from gmpy2 import mpz

from .exceptions import NotSmooth, Timeout
from .ideals import Ideal, compose, factor_over, invert, multiply, principal_near, reduce, unit_ideal
from .ideals import _prime_b
from .ntkernel import (
    FixedReal,
    LogTerms,
    fr_ln_quadratic,
    fr_ln_rational,
    is_probable_prime,
    kronecker,
    primes_up_to,
)

log = logging.getLogger(__name__)

# Measured optimal factor base sizes by discriminant bit length.
_FB_TABLE = ((140, 200), (160, 300), (180, 400), (200, 800), (220, 1500))


def default_fb_size(bits: int) -> int:
    if bits <= _FB_TABLE[0][0]:
        return max(6, round(_FB_TABLE[0][1] * bits / _FB_TABLE[0][0]))
    for (b0, n0), (b1, n1) in zip(_FB_TABLE, _FB_TABLE[1:]):
        if bits <= b1:
            return round(n0 + (n1 - n0) * (bits - b0) / (b1 - b0))
    b0, n0 = _FB_TABLE[-2]
    b1, n1 = _FB_TABLE[-1]
    return round(n1 + (n1 - n0) * (bits - b1) / (b1 - b0))


class FactorBase:
    """The first ``n`` split or ramified primes with their square roots ``b_p``."""

    def __init__(self, D, primes, bps):
        self.delta = int(D)
        self.primes = list(primes)
        self.bp = list(bps)
        self.index = {p: i for i, p in enumerate(self.primes)}
        self.bound = self.primes[-1] if self.primes else 1
        self._product = None

    def __len__(self):
        return len(self.primes)

    def __iter__(self):
        return iter(zip(self.primes, self.bp))

    def __repr__(self):
        return f"FactorBase(delta={self.delta}, n={len(self)}, bound={self.bound})"

    def ideal(self, idx: int) -> Ideal:
        return Ideal(self.primes[idx], self.bp[idx])

    @property
    def product(self):
        if self._product is None:
            self._product = _prod([mpz(p) for p in self.primes])
        return self._product

    def iter_dividing(self, n: int):
        if n == 1:
            return
        g = int(gmpy2.gcd(self.product, n))
        if g == 1:
            return
        for i, p in enumerate(self.primes):
            if g % p == 0:
                yield p, i
                g //= p
                while g % p == 0:
                    g //= p
                if g == 1:
                    return


def build_factor_base(D, n: int) -> FactorBase:
    """Exactly the first ``n`` non-inert primes of ``D``."""
    if n < 1:
        raise ValueError("factor base size must be positive")
    delta = int(D)
    primes, bps = [], []
    bound = max(64, int(2.5 * n * math.log(n + 2)) + 16)
    while len(primes) < n:
        primes.clear()
        bps.clear()
        for p in primes_up_to(bound):
            if kronecker(delta, p) != -1:
                primes.append(p)
                bps.append(_prime_b(delta, p))
                if len(primes) == n:
                    break
        bound *= 2
    return FactorBase(delta, primes, bps)


def factor_base_up_to(D, bound: int) -> FactorBase:
    delta = int(D)
    primes = [p for p in primes_up_to(bound) if kronecker(delta, p) != -1]
    return FactorBase(delta, primes, [_prime_b(delta, p) for p in primes])


# ---------------------------------------------------------------------------
# Relations


@dataclass
class Relation:
    """``prod p_i^{e_i} = (alpha)`` with ``ln|alpha|`` held exactly in ``logterms``."""

    exps: dict
    logterms: LogTerms = field(default_factory=LogTerms)
    delta: int = 0

    @property
    def logpart(self) -> FixedReal:
        if self.delta < 0:
            return FixedReal(0, 0)
        return self.logterms.evaluate(self.delta)

    def dense(self, n: int) -> list:
        row = [0] * n
        for i, e in self.exps.items():
            row[i] = e
        return row

    def key(self):
        return tuple(sorted(self.exps.items()))


@dataclass
class PartialRelation:
    """Relation that still involves one or two primes outside the factor base.

    ``large`` maps each large prime ``q`` to the exponent of the canonical
    prime ideal above it (``-1`` for its conjugate).
    """

    exps: dict
    logterms: LogTerms
    large: dict
    delta: int = 0

    @property
    def logpart(self) -> FixedReal:
        if self.delta < 0:
            return FixedReal(0, 0)
        return self.logterms.evaluate(self.delta)


def _element_relation(FB: FactorBase, B: int, norm: int, lp_bound: int | None = None):
    """Relation (or partial) for ``beta = (B + sqrt(D))/2`` with ``|N(beta)| = norm``.

    Returns ``None`` when the norm is not usable.
    """
    delta = FB.delta
    real = delta > 0
    try:
        exps = factor_over(FB, Ideal(norm, B))
        cof = 1
    except NotSmooth as ns:
        exps, cof = ns.partial, ns.cofactor
        if lp_bound is None:
            return None
    lt = LogTerms.quadratic(B) if real else LogTerms()
    sparse = {}
    for i, e in enumerate(exps):
        if e:
            sparse[i] = e
            if e < 0 and real:
                lt = lt - LogTerms.log_int(FB.primes[i], -e)
    if cof == 1:
        return Relation(sparse, lt, delta)
    large = _split_large(cof, FB.bound, lp_bound)
    if large is None:
        return None
    lmap = {}
    for q in large:
        bq = _prime_b(delta, q)
        if (B - bq) % (2 * q) == 0:
            lmap[q] = 1
        else:
            lmap[q] = -1
            if real:
                lt = lt - LogTerms.log_int(q)
    return PartialRelation(sparse, lt, lmap, delta)


def _split_large(cof: int, fb_bound: int, lp_bound: int):
    if cof <= lp_bound:
        if cof > fb_bound and is_probable_prime(cof):
            return (cof,)
        return None
    if cof > lp_bound * lp_bound or is_probable_prime(cof):
        return None
    q = _pollard_rho(cof)
    if q is None:
        return None
    r = cof // q
    if q == r or not (fb_bound < q <= lp_bound and fb_bound < r <= lp_bound):
        return None
    if not (is_probable_prime(q) and is_probable_prime(r)):
        return None
    return tuple(sorted((q, r)))


def _pollard_rho(n: int, max_iter: int = 200000):
    n = mpz(n)
    if n % 2 == 0:
        return 2
    for c in range(1, 6):
        x = y = mpz(2)
        d = mpz(1)
        it = 0
        while d == 1 and it < max_iter:
            x = (x * x + c) % n
            y = (y * y + c) % n
            y = (y * y + c) % n
            d = gmpy2.gcd(abs(x - y), n)
            it += 1
        if 1 < d < n:
            return int(d)
    return None


# ---------------------------------------------------------------------------
# Batch smoothness


def _prod(xs):
    xs = list(xs)
    if not xs:
        return mpz(1)
    while len(xs) > 1:
        nxt = [xs[i] * xs[i + 1] for i in range(0, len(xs) - 1, 2)]
        if len(xs) % 2:
            nxt.append(xs[-1])
        xs = nxt
    return xs[0]


def _product_tree(values):
    tree = [values]
    while len(tree[-1]) > 1:
        lvl = tree[-1]
        nxt = [lvl[i] * lvl[i + 1] for i in range(0, len(lvl) - 1, 2)]
        if len(lvl) % 2:
            nxt.append(lvl[-1])
        tree.append(nxt)
    return tree


def _remainders(P, tree):
    rems = [P % tree[-1][0]]
    for lvl in reversed(tree[:-1]):
        rems = [rems[i // 2] % v for i, v in enumerate(lvl)]
    return rems


def smooth_parts(values, primes, chunk: int = 1024) -> list:
    """Largest ``primes``-smooth divisor of every value (product/remainder tree).

    Zero gets 1, so it never counts as smooth.
    """
    P = _prod([mpz(p) for p in primes])
    out = []
    for start in range(0, len(values), chunk):
        vals = [mpz(v) if v else mpz(1) for v in values[start : start + chunk]]
        if not vals:
            continue
        tree = _product_tree(vals)
        rems = _remainders(P, tree)
        for v, r in zip(vals, rems):
            if v == 1:
                out.append(1)
                continue
            e = max(1, (v.bit_length() - 1).bit_length())
            y = gmpy2.powmod(r, mpz(2) ** e, v)
            out.append(int(gmpy2.gcd(v, y)))
    return out


def batch_smooth(values, primes) -> list:
    """Flag ``i`` is true iff ``values[i]`` factors completely over ``primes``."""
    values = list(values)
    if not values:
        return []
    return [s == v for s, v in zip(smooth_parts(values, primes), values)]


# ---------------------------------------------------------------------------
# Sieving


def sieve_relations(FB: FactorBase, seed_ideal: Ideal, radius: int, lp_bound: int | None = None) -> list:
    """Relations from elements ``a*x + (b + sqrt(D))/2`` with ``|x| <= radius``.

    Keeps fully smooth values and, when ``lp_bound`` is given, values with
    one or two leftover primes in ``(B, lp_bound]``.
    """
    delta = FB.delta
    a, b = seed_ideal.a, seed_ideal.b
    c = (b * b - delta) // (4 * a)
    xs = range(-radius, radius + 1)
    fvals = [abs(a * x * x + b * x + c) for x in xs]
    norms = [a * f for f in fvals]
    smooth = smooth_parts(norms, FB.primes)
    cap = None
    if lp_bound is not None:
        cap = lp_bound * lp_bound
    out = []
    for x, nv, sp in zip(xs, norms, smooth):
        if nv == 0:
            continue
        cof = nv // sp
        if cof != 1 and (cap is None or cof > cap):
            continue
        rel = _element_relation(FB, 2 * a * x + b, nv, lp_bound)
        if rel is None:
            continue
        if isinstance(rel, Relation) and not rel.exps and delta < 0:
            continue
        out.append(rel)
    return out


# ---------------------------------------------------------------------------
# Large-prime merging


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x, y):
        self.parent[self.find(x)] = self.find(y)


def _combine(coeffs, rels, delta):
    exps: dict = {}
    for c, r in zip(coeffs, rels):
        for i, e in r.exps.items():
            exps[i] = exps.get(i, 0) + c * e
    exps = {i: e for i, e in exps.items() if e}
    lt = LogTerms.combine(coeffs, [r.logterms for r in rels])
    return Relation(exps, lt, delta)


class PartialGraph:
    """Incremental large-prime graph; vertex ``1`` stands for "no prime"."""

    def __init__(self, delta: int, cap: int | None = None):
        self.delta = delta
        self.cap = cap
        self.uf = _UnionFind()
        self.adj: dict = {}
        self.parts: list = []

    def __len__(self):
        return len(self.parts)

    def add(self, part: PartialRelation):
        """Add one partial; return the full relation it closes, if any."""
        qs = sorted(part.large)
        u, v = (1, qs[0]) if len(qs) == 1 else (qs[0], qs[1])
        if self.uf.find(u) != self.uf.find(v):
            if self.cap is not None and len(self.parts) >= self.cap:
                return None
            idx = len(self.parts)
            self.parts.append(part)
            self.adj.setdefault(u, []).append((v, idx))
            self.adj.setdefault(v, []).append((u, idx))
            self.uf.union(u, v)
            return None
        path = self._path(u, v)
        if path is None:
            return None
        # cycle: edges along path from u to v, then the new edge back to u
        verts = [u] + [w for w, _ in path]
        edges = [self.parts[i] for _, i in path] + [part]
        return _cycle_relation(verts, edges, self.delta)

    def _path(self, u, v):
        prev = {u: None}
        queue = [u]
        for node in queue:
            if node == v:
                break
            for w, idx in self.adj.get(node, ()):
                if w not in prev:
                    prev[w] = (node, idx)
                    queue.append(w)
        if v not in prev:
            return None
        path = []
        node = v
        while prev[node] is not None:
            pnode, idx = prev[node]
            path.append((node, idx))
            node = pnode
        return list(reversed(path))


def _cycle_relation(verts, edges, delta):
    """Combine partials around a cycle so every large prime cancels.

    ``verts[i]`` is the vertex shared by ``edges[i-1]`` and ``edges[i]``;
    ``verts[0]`` closes the cycle between the last and first edge.
    """
    k = len(edges)
    if 1 in verts:
        shift = verts.index(1)
        verts = verts[shift:] + verts[:shift]
        edges = edges[shift:] + edges[:shift]
    coeffs = [1] * k
    for i in range(1, k):
        q = verts[i]
        coeffs[i] = -coeffs[i - 1] * edges[i - 1].large[q] * edges[i].large[q]
    q0 = verts[0]
    if q0 != 1 and coeffs[-1] * edges[-1].large[q0] + coeffs[0] * edges[0].large[q0] != 0:
        return None
    rel = _combine(coeffs, edges, delta)
    return rel if rel.exps else None


def merge_partials(parts: Iterable[PartialRelation]) -> list:
    """Full relations obtained from cycles among the partials."""
    parts = list(parts)
    if not parts:
        return []
    graph = PartialGraph(parts[0].delta)
    out = []
    for p in parts:
        rel = graph.add(p)
        if rel is not None:
            out.append(rel)
    return out


# ---------------------------------------------------------------------------
# Relation streams


@dataclass
class RelGenConfig:
    seed: int = 0
    surplus: int = 10
    radius: int | None = None
    large_primes: bool = True
    max_partials: int = 200000
    max_seeds: int = 20000
    target_tries: int = 2000


def sieve_radius(delta: int) -> int:
    bits = abs(delta).bit_length()
    if bits <= 24:
        return 64
    return min(4096, 64 << ((bits - 24) // 6))


def _seed_ideal(FB: FactorBase, rng: random.Random, target: float, force: int | None = None):
    """Random short product of factor-base primes with norm near ``target``.

    ``force`` names a factor-base index that must divide the seed.
    """
    delta = FB.delta
    if force is not None:
        I = FB.ideal(force)
        if rng.random() < 0.5:
            I = invert(I)
        if FB.primes[force] * 3 > target or len(FB) < 2:
            return I
        rest = _seed_ideal(FB, rng, target / FB.primes[force])
        return multiply(delta, I, rest)[0]
    if target < 2 or len(FB) < 2:
        idx = rng.randrange(len(FB))
        I = FB.ideal(idx)
        return I if rng.random() < 0.5 else invert(I)
    # pick primes from the upper part of the factor base, skipping ramified ones
    lo = len(FB) // 3
    cands = [i for i in range(lo, len(FB)) if delta % FB.primes[i]]
    if not cands:
        cands = [i for i in range(len(FB)) if delta % FB.primes[i]] or list(range(len(FB)))
    I, a = unit_ideal(delta), 1
    used = set()
    while a * FB.primes[cands[-1]] <= target * 1.5 or a == 1:
        rest = [i for i in cands if i not in used]
        if not rest:
            break
        # last factor: pick the one that brings a closest to target
        need = target / a
        if need <= FB.primes[rest[-1]]:
            j = bisect.bisect_left([FB.primes[i] for i in rest], need)
            j = min(len(rest) - 1, j + rng.randrange(-2, 3) if len(rest) > 4 else j)
            i = rest[max(0, j)]
        else:
            i = rng.choice(rest)
        used.add(i)
        P = FB.ideal(i)
        if rng.random() < 0.5:
            P = invert(P)
        I, g = multiply(delta, I, P)
        a = I.a
        if len(used) >= 6:
            break
    return I


class RelationSet:
    """Rows of the relation matrix ``A`` and their real parts ``v``.

    In the real case a relation whose exponent vector is empty or repeats an
    earlier one still carries information: the quotient of the two
    generators is a unit, so the log difference is kept in ``unit_logs``.
    """

    max_units = 64

    def __init__(self, FB: FactorBase, relations=None):
        self.FB = FB
        self.relations: list = []
        self._by_key: dict = {}
        self.unit_logs: list = []
        self.partials_seen = 0
        self.merged = 0
        for r in relations or ():
            self.add(r)

    def __len__(self):
        return len(self.relations)

    def __iter__(self):
        return iter(self.relations)

    def _inverse_key(self, rel: Relation):
        delta, primes = self.FB.delta, self.FB.primes
        # a ramified prime is its own inverse up to the principal ideal (p)
        return tuple(sorted((i, e if delta % primes[i] == 0 else -e) for i, e in rel.exps.items()))

    def add(self, rel: Relation) -> bool:
        key = rel.key()
        prev = self._by_key.get(key) if rel.exps else None
        inv = None
        if rel.exps and prev is None:
            inv = self._by_key.get(self._inverse_key(rel))
        if not rel.exps or prev is not None or inv is not None:
            if self.FB.delta > 0 and len(self.unit_logs) < self.max_units:
                if inv is not None:
                    # the product of the two generators generates prod p^e
                    # over the ramified primes
                    u = rel.logterms + inv.logterms
                    for i, e in rel.exps.items():
                        if self.FB.delta % self.FB.primes[i] == 0:
                            u = u - LogTerms.log_int(self.FB.primes[i], e)
                else:
                    u = rel.logterms - prev.logterms if prev is not None else rel.logterms
                # identical generators give a zero difference; skip those
                if u and abs(u.evaluate(self.FB.delta).mant) > (1 << 60):
                    self.unit_logs.append(u)
            return False
        self._by_key[key] = rel
        self.relations.append(rel)
        return True

    @property
    def rows(self):
        return [dict(r.exps) for r in self.relations]

    @property
    def v(self):
        return [r.logterms for r in self.relations]


def _sieve_job(args):
    FB, seed, radius, lp_bound = args
    return sieve_relations(FB, seed, radius, lp_bound)


class RelationStream:
    """Deterministic relation producer for one factor base.

    With ``jobs > 1`` seed ideals are sieved in worker processes.  Seeds are
    drawn in the same order either way and results are consumed in that
    order, so the relation sequence does not depend on ``jobs``.
    """

    def __init__(self, FB: FactorBase, config: RelGenConfig | None = None, jobs: int = 1):
        self.FB = FB
        self.config = config or RelGenConfig()
        self.rng = random.Random(self.config.seed)
        delta = FB.delta
        self.radius = self.config.radius or sieve_radius(delta)
        self.lp_bound = FB.bound * FB.bound if self.config.large_primes else None
        self.graph = PartialGraph(delta, cap=self.config.max_partials)
        self.seeds_used = 0
        self.jobs = max(1, int(jobs))
        self._first = True
        self._target_a = math.sqrt(abs(delta) / 2) / self.radius
        if len(FB) > 3:
            # single-prime seeds give too few distinct relations
            mid = FB.primes[len(FB) // 3]
            self._target_a = max(self._target_a, float(mid * mid))
        self._ready: list = []
        self._pool = None

    def _next_seed(self):
        if self._first:
            self._first = False
            return unit_ideal(self.FB.delta)
        # once the seeds near the ideal norm run out, relations repeat; widen
        # the norm range as a function of the seed index alone so the seed
        # sequence does not depend on how results are consumed
        spread = min(self.seeds_used // max(len(self.FB), 16), 24)
        target = self._target_a * (1 << self.rng.randint(0, spread)) if spread else self._target_a
        return _seed_ideal(self.FB, self.rng, target)

    def _raw_batch(self):
        if self._ready:
            return self._ready.pop(0)
        if self.seeds_used >= self.config.max_seeds:
            raise Timeout("relation collection exceeded the seed budget")
        if self.jobs == 1:
            self.seeds_used += 1
            return sieve_relations(self.FB, self._next_seed(), self.radius, self.lp_bound)
        n = min(self.jobs, self.config.max_seeds - self.seeds_used)
        seeds = [self._next_seed() for _ in range(n)]
        self.seeds_used += n
        if self._pool is None:
            from concurrent.futures import ProcessPoolExecutor

            self._pool = ProcessPoolExecutor(self.jobs)
        args = [(self.FB, sd, self.radius, self.lp_bound) for sd in seeds]
        self._ready = list(self._pool.map(_sieve_job, args))
        return self._ready.pop(0)

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def batch(self) -> list:
        """Full relations from one more seed ideal (merged partials included)."""
        out = []
        for rel in self._raw_batch():
            if isinstance(rel, Relation):
                out.append(rel)
            else:
                merged = self.graph.add(rel)
                if merged is not None:
                    out.append(merged)
        return out

    def cover(self, rs: RelationSet, columns, tries: int = 8) -> list:
        """Sieve seeds through each factor-base prime in ``columns``.

        Used when some prime never showed up in a relation, which would
        leave a zero column.  Returns the indices still uncovered.
        """
        if not hasattr(self, "_cover_rng"):
            self._cover_rng = random.Random(f"{self.config.seed}:cover")
        missing = []
        for i in columns:
            for _ in range(tries):
                seed = _seed_ideal(self.FB, self._cover_rng, self._target_a, force=i)
                hits = 0
                for rel in sieve_relations(self.FB, seed, self.radius, self.lp_bound):
                    if isinstance(rel, Relation) and i in rel.exps and rs.add(rel):
                        hits += 1
                        if hits == 2:
                            break
                if hits:
                    break
            else:
                missing.append(i)
        return missing

    def fill(self, rs: RelationSet, target_count: int, deadline: float | None = None) -> RelationSet:
        while len(rs) < target_count:
            if deadline is not None and time.monotonic() > deadline:
                raise Timeout("relation collection timed out")
            for rel in self.batch():
                rs.add(rel)
        return rs


def relation_stream(FB: FactorBase, target_count: int, config: RelGenConfig | None = None) -> RelationSet:
    """At least ``target_count`` distinct verified-by-construction relations."""
    stream = RelationStream(FB, config)
    return stream.fill(RelationSet(FB), target_count)


# ---------------------------------------------------------------------------
# Target decomposition


def find_target_relation(FB: FactorBase, T: Ideal, rng: random.Random | None = None, max_tries: int = 2000, radius: int | None = None):
    """Exponents ``e`` and ``ln|alpha|`` with ``T * prod p_i^{e_i} = (alpha)``.

    ``T`` is multiplied by a random power product of factor-base primes,
    reduced, and the elements of the reduced ideal are searched for one
    whose cofactor is smooth.
    """
    delta = FB.delta
    real = delta > 0
    rng = rng or random.Random(0)
    radius = radius or max(16, sieve_radius(delta) // 4)
    n = len(FB)
    for attempt in range(max_tries):
        r = [0] * n
        if attempt:
            for _ in range(rng.randint(1, 3)):
                r[rng.randrange(n)] += rng.choice((-1, 1))
        prod, plog = compose(delta, FB, r)
        U, g = multiply(delta, T, prod)
        U, d = reduce(delta, U)
        # T * prod(p^r) = (gamma1) * U
        if real:
            lg1 = plog + fr_ln_rational(g) + d
        a, b = U.a, U.b
        c = (b * b - delta) // (4 * a)
        xs = list(range(-radius, radius + 1))
        fvals = [abs(a * x * x + b * x + c) for x in xs]
        smooth = smooth_parts(fvals, FB.primes)
        for x, f, sp in sorted(zip(xs, fvals, smooth), key=lambda t: abs(t[0])):
            if f == 0 or sp != f:
                continue
            B = 2 * a * x + b
            cexp = factor_over(FB, Ideal(f, B))
            e = [ri + ci for ri, ci in zip(r, cexp)]
            if not real:
                return e, FixedReal(0, 0)
            ell = lg1 + fr_ln_quadratic(B, 2, delta)
            for i, ci in enumerate(cexp):
                if ci < 0:
                    ell = ell - fr_ln_rational(FB.primes[i]).scale(-ci)
            return e, ell
    raise Timeout(f"no smooth decomposition of ({T}) after {max_tries} randomizations")


# ---------------------------------------------------------------------------
# Verification


def verify_relation(FB: FactorBase, exps, logpart: FixedReal | None = None, target: Ideal | None = None) -> bool:
    """Recomposition check for ``(target) * prod p_i^{e_i} = (alpha)``.

    Imaginary: the product reduces to the unit class.  Real: the reduced
    product is principal with the distance predicted by ``logpart``.
    """
    delta = FB.delta
    if isinstance(exps, dict):
        dense = [0] * len(FB)
        for i, e in exps.items():
            dense[i] = e
        exps = dense
    J, lg = compose(delta, FB, exps)
    if target is not None:
        J, g = multiply(delta, J, target)
        J, d = reduce(delta, J)
        if delta > 0:
            lg = lg + fr_ln_rational(g) + d
    if delta < 0:
        return J == unit_ideal(delta)
    # prod = (gamma) J and prod = (alpha)  =>  J = (1/mu) O with mu = gamma/alpha
    t = lg - (logpart if logpart is not None else FixedReal(0, 0))
    near = principal_near(delta, t)
    return near.ideal == J and abs(near.dist.mant - t.mant) <= near.dist.err + t.err + (1 << 40)


# ---------------------------------------------------------------------------
# Relation cache files


def write_cache(path, rs: RelationSet, partials: Iterable[PartialRelation] = ()):
    FB = rs.FB
    with open(path, "w") as fh:
        fh.write(f"QFREL v1 delta={FB.delta} fb={len(FB)}\n")
        for r in rs.relations:
            fh.write(_format_line("R", FB, r) + "\n")
        for p in partials:
            fh.write(_format_line("P", FB, p) + "\n")


def _format_line(tag, FB, rel):
    body = " ".join(f"{FB.primes[i]}:{e}" for i, e in sorted(rel.exps.items()))
    lp = rel.logpart if FB.delta > 0 else FixedReal(0, 0)
    mant = f"{'-' if lp.mant < 0 else ''}{abs(lp.mant):x}"
    atoms = " ".join(f"{k}:{x}:{c}" for (k, x), c in sorted(rel.logterms.terms.items(), key=str))
    head = tag
    if tag == "P":
        head += " " + ",".join(f"{q}:{s}" for q, s in sorted(rel.large.items()))
    line = f"{head} {body} | {mant}:{lp.err:x}"
    if atoms:
        line += f" ; {atoms}"
    return line


def read_cache(path):
    """Load ``(FactorBase, RelationSet, partials)`` from a cache file."""
    from fractions import Fraction

    with open(path) as fh:
        header = fh.readline().split()
        if len(header) < 4 or header[0] != "QFREL" or header[1] != "v1":
            raise ValueError(f"{path}: not a QFREL v1 relation cache")
        fields = dict(kv.split("=", 1) for kv in header[2:])
        delta, n = int(fields["delta"]), int(fields["fb"])
        FB = build_factor_base(delta, n)
        rs = RelationSet(FB)
        partials = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            exact = None
            if " ; " in line:
                line, exact = line.split(" ; ", 1)
            left, _, _ = line.partition(" | ")
            toks = left.split()
            tag = toks[0]
            large = {}
            if tag == "P":
                for item in toks[1].split(","):
                    q, s = item.split(":")
                    large[int(q)] = int(s)
                toks = toks[2:]
            else:
                toks = toks[1:]
            exps = {}
            for t in toks:
                p, e = t.split(":")
                exps[FB.index[int(p)]] = int(e)
            terms = {}
            if exact:
                for atom in exact.split():
                    k, x, c = atom.split(":")
                    terms[(k, int(x))] = Fraction(c) if "/" in c else int(c)
            lt = LogTerms(terms)
            if tag == "R":
                rs.add(Relation(exps, lt, delta))
            else:
                partials.append(PartialRelation(exps, lt, large, delta))
    return FB, rs, partials
