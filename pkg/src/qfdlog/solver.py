"""Index-calculus pipelines: class groups, regulators and discrete logarithms.

The work is organised around one estimator, :class:`IndexCalculus`.
``fit(delta)`` builds a factor base, collects relations and computes the
class group (imaginary fields) or the regulator (real fields); the
discrete-logarithm methods then reuse the fitted relations.  The module
level functions are thin wrappers that fit a fresh estimator.

Real parts are carried as exact :class:`~qfdlog.ntkernel.LogTerms`
combinations, so a regulator or distance is evaluated once, at the end, to
full fixed-point precision no matter how large the solution coefficients
are.
"""

from __future__ import annotations

import logging
import math
import random
import time
from dataclasses import asdict, dataclass, field
from functools import lru_cache

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import _validation as val
from .exactla import (
    LeftSolver,
    SparseIntMatrix,
    graph_eliminate,
    hnf_with_det,
    snf,
)
from .exceptions import (
    LikelyNonPrincipal,
    NoSolution,
    PrecisionLoss,
    RankDeficient,
    RelationDeficit,
    Timeout,
    Unverified,
)
from .ideals import (
    Ideal,
    ideal_pow,
    invert,
    is_reduced,
    principal_near,
    reduce,
    unit_ideal,
)
from .ntkernel import FRAC_BITS, FixedReal, LogTerms, ONE, factor_int, kronecker, primes_up_to
from .relgen import (
    FactorBase,
    RelationSet,
    RelationStream,
    RelGenConfig,
    build_factor_base,
    default_fb_size,
    factor_base_up_to,
    find_target_relation,
)

log = logging.getLogger(__name__)

#: Multiples of the regulator below this are treated as zero.  Every
#: regulator is at least ln((1 + sqrt 5)/2) > 0.48.
ZERO_TOL = 0.2


# ---------------------------------------------------------------------------
# Result types


@dataclass(frozen=True)
class ClassGroup:
    h: int
    invariants: tuple
    relations_used: int = 0
    certified: bool = False

    def __post_init__(self):
        prod = 1
        for m in self.invariants:
            prod *= m
        if prod != self.h:
            raise ValueError("invariant factors must multiply to h")


@dataclass(frozen=True)
class RegulatorEstimate:
    R: FixedReal
    certified_window: bool
    h: int | None = None
    relations_used: int = 0
    terms: LogTerms | None = field(default=None, repr=False, compare=False)

    def __float__(self):
        return float(self.R)


@dataclass(frozen=True)
class EulerWindow:
    """Heuristic window ``(hstar, 2 hstar]`` around ``h`` (or ``h R``)."""

    estimate: float
    kind: str
    half_width: float = math.sqrt(2)

    @property
    def hstar(self) -> float:
        return self.estimate / self.half_width

    hRstar = hstar

    @property
    def bounds(self):
        return self.hstar, 2 * self.hstar

    def contains(self, x) -> bool:
        x = float(x)
        lo, hi = self.bounds
        return lo < x <= hi


@dataclass
class SolverConfig:
    seed: int = 0
    fb_size: int | None = None
    surplus: int = 10
    certified: bool | None = None
    kernel_samples: int = 5
    max_retries: int = 5
    timeout: float | None = None
    large_primes: bool = True
    jobs: int = 1
    euler_cutoff: int | None = None


# ---------------------------------------------------------------------------
# Euler product window


@lru_cache(maxsize=64)
def _log_euler_product(delta: int, P: int) -> float:
    s = 0.0
    for p in primes_up_to(P):
        k = kronecker(delta, p)
        if k:
            s -= math.log1p(-k / p)
    return s


def euler_window(D, P: int | None = None) -> EulerWindow:
    """Window from the truncated Euler product for ``L(1, chi)``.

    Imaginary: ``h ~ w sqrt|D| / (2 pi) * L``; real: ``h R ~ sqrt(D)/2 * L``.
    """
    delta = int(D)
    P = P or (1 << 16)
    if P < 100:
        raise ValueError("Euler product cutoff must be at least 100")
    L = math.exp(_log_euler_product(delta, P))
    if delta < 0:
        w = {-3: 6, -4: 4}.get(delta, 2)
        return EulerWindow(w * math.sqrt(-delta) / (2 * math.pi) * L, "h")
    return EulerWindow(math.sqrt(delta) / 2 * L, "hR")


# ---------------------------------------------------------------------------
# Real GCD


def _fr_round_ratio(a: FixedReal, b: FixedReal) -> int:
    return (2 * a.mant + b.mant) // (2 * b.mant)


def real_gcd(multiples, delta: int | None = None, zero_tol: float = ZERO_TOL) -> FixedReal:
    """``gcd(m_1, m_2, ...) R`` from approximations of ``m_i R``.

    Inputs may be :class:`FixedReal` values, or exact :class:`LogTerms`
    (then ``delta`` is required and the result is evaluated afresh at every
    step, so errors do not accumulate).  Values within ``zero_tol`` of zero
    are ignored.  Raises :class:`PrecisionLoss` if the error bound of a
    fixed-point remainder reaches ``zero_tol / 4``, and :class:`NoSolution`
    if every input is zero.
    """
    items = list(multiples)
    if items and isinstance(items[0], LogTerms):
        if delta is None:
            raise ValueError("delta is required for exact log combinations")
        return _real_gcd_terms(items, delta, zero_tol)[1]
    tol = round(zero_tol * ONE)
    vals = [abs_fr(x) for x in items]
    vals = [x for x in vals if x.mant > tol]
    if not vals:
        raise NoSolution("no nonzero regulator multiple")
    g = vals[0]
    for x in vals[1:]:
        a, b = (x, g) if x.mant >= g.mant else (g, x)
        while True:
            q = _fr_round_ratio(a, b)
            r = abs_fr(a - b.scale(q))
            if r.err * 4 >= tol:
                raise PrecisionLoss("real GCD error bound exceeded the decision threshold")
            if r.mant <= tol:
                break
            a, b = b, r
        g = b
    return g


def abs_fr(x: FixedReal) -> FixedReal:
    return -x if x.mant < 0 else x


def _float_or_inf(x: FixedReal) -> float:
    # a GCD of too few samples can be an astronomically large multiple
    try:
        return float(x)
    except OverflowError:
        return math.inf if x.mant > 0 else -math.inf


#: Guard bits for the extended Euclid run, on top of the input size.
_GCD_GUARD = 64


def _real_gcd_terms(terms, delta, zero_tol=ZERO_TOL):
    """Symbolic real GCD; returns the exact combination and its value.

    Remainders are tracked as integer combinations of the inputs, valued
    from one high-precision evaluation of each input.  A remainder is
    re-evaluated exactly only when its propagated error reaches one unit
    at the output precision.
    """
    tol0 = round(zero_tol * ONE)
    rough = [t.evaluate_bits(delta, FRAC_BITS) for t in terms]
    # the error of a remainder grows at most like the size of the inputs
    guard = _GCD_GUARD + max(max(abs(v) for v in rough).bit_length() - tol0.bit_length(), 0)
    hb = FRAC_BITS + guard
    tol = tol0 << guard
    ulp = 1 << guard
    base = []
    for t, v0 in zip(terms, rough):
        if abs(v0) <= tol0 + 2:
            continue
        v = t.evaluate_bits(delta, hb)
        if abs(v) > tol:
            base.append((t, v))
    if not base:
        raise NoSolution("no nonzero regulator multiple")

    def unit(i, v):
        s = 1 if v > 0 else -1
        return ({i: s}, s * v, 2)

    def exact(coef):
        lt = LogTerms.combine(list(coef.values()), [base[i][0] for i in coef])
        v = lt.evaluate_bits(delta, hb)
        return (coef, v, 2) if v >= 0 else ({i: -c for i, c in coef.items()}, -v, 2)

    g = unit(0, base[0][1])
    for i in range(1, len(base)):
        x = unit(i, base[i][1])
        a, b = (x, g) if x[1] >= g[1] else (g, x)
        while True:
            q = (2 * a[1] + b[1]) // (2 * b[1])
            coef = dict(a[0])
            for j, c in b[0].items():
                coef[j] = coef.get(j, 0) - q * c
            coef = {j: c for j, c in coef.items() if c}
            err = a[2] + abs(q) * b[2]
            r = (coef, a[1] - q * b[1], err)
            if err >= ulp:
                r = exact(coef)
            elif r[1] < 0:
                r = ({j: -c for j, c in coef.items()}, -r[1], err)
            if r[1] <= tol:
                break
            a, b = b, r
        g = b
    lt = LogTerms.combine(list(g[0].values()), [base[j][0] for j in g[0]])
    val = lt.evaluate(delta)
    if val.mant < 0:
        lt, val = -lt, -val
    return lt, val


# ---------------------------------------------------------------------------
# Small helpers


def class_order(D, I: Ideal, h: int) -> int:
    """Order of ``[I]`` given a multiple ``h`` of it."""
    delta = int(D)
    one = unit_ideal(delta)
    order = h
    for q in factor_int(h):
        while order % q == 0 and ideal_pow(delta, I, order // q)[0] == one:
            order //= q
    return order


def generating_bound(D) -> int:
    """Prime bound up to which the factor base generates the class group.

    Minkowski's bound is unconditional; ``6 ln^2 |D|`` holds under GRH.
    The smaller of the two is used.
    """
    delta = int(D)
    mink = math.isqrt(-delta // 3) if delta < 0 else math.isqrt(delta) // 2
    bach = int(6 * math.log(abs(delta)) ** 2)
    return max(2, min(mink, bach) + 1)


def choose_factor_base(D, fb_size: int | None = None) -> FactorBase:
    """Factor base of the requested size (or the default for ``D``'s size).

    Without an explicit size, small discriminants get every prime up to
    :func:`generating_bound` so the relation lattice sees the whole group.
    """
    if fb_size is not None:
        return build_factor_base(D, fb_size)
    n = default_fb_size(as_bits(D))
    FB = build_factor_base(D, n)
    gb = generating_bound(D)
    if gb > FB.bound:
        big = factor_base_up_to(D, gb)
        if len(big) <= max(2 * n, 200):
            FB = big
    return FB


def as_bits(D) -> int:
    return abs(int(D)).bit_length()


def _common_den(x) -> int:
    d = 1
    for f in x:
        d = d * f.denominator // math.gcd(d, f.denominator)
    return d


def verify_dlp(D, g: Ideal, a: Ideal, x: int) -> bool:
    """Recompute ``g^x`` and compare reduced forms with ``a``."""
    delta = int(D)
    x = int(x)
    base = g if x >= 0 else invert(g)
    lhs, _ = ideal_pow(delta, base, abs(x))
    rhs, _ = reduce(delta, a)
    return lhs == rhs


def infra_residual(D, a: Ideal, t: FixedReal):
    """Distance residual of ``t`` against ``a``, or ``None`` if ``a`` is not hit."""
    near = principal_near(int(D), t)
    if near.ideal != a:
        return None
    return abs(float(near.dist - t))


def verify_infra(D, a: Ideal, t, tol: float = 1e-6) -> bool:
    """``principal_near(t)`` must land on ``a`` with distance residual below ``tol``."""
    if not isinstance(t, FixedReal):
        t = FixedReal.from_float(float(t))
    res = infra_residual(D, a, t)
    return res is not None and res < tol


def result_record(delta, seed, **fields) -> dict:
    """JSON-ready result; integers beyond 2^53 become decimal strings."""
    def enc(x):
        if isinstance(x, bool) or x is None:
            return x
        if isinstance(x, int):
            return str(x) if abs(x) > (1 << 53) else x
        if isinstance(x, FixedReal):
            return {"mant": str(x.mant), "err": str(x.err)}
        if isinstance(x, (list, tuple)):
            return [enc(y) for y in x]
        return x

    rec = {
        "delta": str(int(delta)),
        "h": None,
        "invariants": None,
        "regulator": None,
        "dlog": None,
        "verified": None,
        "relations_used": None,
        "seed": seed,
    }
    for k, v in fields.items():
        rec[k] = enc(v)
    return rec


class _WindowMiss(Exception):
    pass


# ---------------------------------------------------------------------------
# The estimator


class IndexCalculus(BaseEstimator):
    """Subexponential index calculus in the class group of one discriminant.

    Parameters
    ----------
    seed : int
        Seeds relation collection and target randomization.
    fb_size : int or None
        Factor base size; ``None`` picks one from the discriminant size.
    surplus : int
        Relations collected beyond the factor base size.
    certified : bool or None
        Check ``h`` (or ``h R``) against the Euler-product window and
        collect more relations until it fits.  ``None`` means on.
    kernel_samples : int
        Extra relations used to sample regulator multiples (at most 10).
    max_retries : int
        Rounds of "+10% relations" before giving up.
    timeout : float or None
        Wall-clock budget in seconds for relation collection.
    large_primes : bool
        Keep partial relations and merge them through the large-prime graph.
    jobs : int
        Worker processes for sieving.
    euler_cutoff : int or None
        Prime cutoff of the Euler product, default ``max(FB bound, 2^16)``.

    Attributes after ``fit``: ``delta_``, ``factor_base_``, ``relations_``,
    ``h_``, ``invariants_`` (imaginary), ``regulator_`` (real),
    ``certified_``, ``timings_``.
    """

    def __init__(
        self,
        seed=0,
        fb_size=None,
        surplus=10,
        certified=None,
        kernel_samples=5,
        max_retries=5,
        timeout=None,
        large_primes=True,
        jobs=1,
        euler_cutoff=None,
    ):
        self.seed = seed
        self.fb_size = fb_size
        self.surplus = surplus
        self.certified = certified
        self.kernel_samples = kernel_samples
        self.max_retries = max_retries
        self.timeout = timeout
        self.large_primes = large_primes
        self.jobs = jobs
        self.euler_cutoff = euler_cutoff

    # -- parameter handling -------------------------------------------------

    def _validate_params(self):
        val.check_positive_int("seed", self.seed, minimum=0)
        val.check_positive_int("fb_size", self.fb_size, allow_none=True)
        val.check_positive_int("surplus", self.surplus, minimum=0)
        val.check_positive_int("kernel_samples", self.kernel_samples)
        if self.kernel_samples > 10:
            raise ValueError("kernel_samples must be at most 10")
        val.check_positive_int("max_retries", self.max_retries, minimum=0)
        val.check_positive_int("jobs", self.jobs)
        val.check_positive_int("euler_cutoff", self.euler_cutoff, allow_none=True, minimum=100)
        val.check_timeout(self.timeout)

    def _deadline(self):
        return None if self.timeout is None else self._t0 + float(self.timeout)

    def _check_time(self):
        dl = self._deadline()
        if dl is not None and time.monotonic() > dl:
            raise Timeout(f"exceeded the {self.timeout} s budget")

    # -- relation collection ------------------------------------------------

    def _collect(self, count):
        t = time.perf_counter()
        try:
            self._stream.fill(self.relations_, count, self._deadline())
            # primes seen in fewer than 3 relations tend to leave the matrix
            # rank deficient; sieve seeds through them directly
            weight = [0] * len(self.factor_base_)
            for r in self.relations_.relations:
                for j in r.exps:
                    weight[j] += 1
            thin = [i for i, w in enumerate(weight) if w < 3]
            if thin:
                self._stream.cover(self.relations_, thin)
        finally:
            self.timings_["sieving"] += time.perf_counter() - t

    def _grow(self, count):
        # the column cover can overshoot a target, so grow from what is there
        count = max(count, len(self.relations_))
        return count + max(1, math.ceil(0.1 * count))

    def _eliminate(self, rels, keep_zero_cols):
        t = time.perf_counter()
        n = len(self.factor_base_)
        M = SparseIntMatrix([dict(r.exps) for r in rels], n, [r.logterms for r in rels])
        out = graph_eliminate(M, keep_zero_cols=keep_zero_cols)
        self.timings_["elimination"] += time.perf_counter() - t
        return out

    def _timed_la(self, fn, *args, **kw):
        t = time.perf_counter()
        try:
            return fn(*args, **kw)
        finally:
            self.timings_["linear_algebra"] += time.perf_counter() - t

    # -- fit ----------------------------------------------------------------

    def fit(self, X, y=None, relations=None):
        """Collect relations for discriminant ``X`` and compute the group data.

        ``relations`` may hold a previously collected
        :class:`~qfdlog.relgen.RelationSet` for the same discriminant; its
        factor base is reused and collection continues from it.
        """
        self._validate_params()
        D = val.check_discriminant(X)
        self._t0 = time.monotonic()
        t_start = time.perf_counter()
        self.delta_ = int(D)
        if relations is not None:
            if relations.FB.delta != self.delta_:
                raise ValueError("cached relations belong to a different discriminant")
            self.factor_base_ = relations.FB
        else:
            self.factor_base_ = choose_factor_base(D, self.fb_size)
        self.timings_ = {"sieving": 0.0, "elimination": 0.0, "linear_algebra": 0.0}
        cfg = RelGenConfig(seed=self.seed, surplus=self.surplus, large_primes=self.large_primes)
        self._stream = RelationStream(self.factor_base_, cfg, jobs=self.jobs)
        self.relations_ = RelationSet(self.factor_base_, relations.relations if relations is not None else None)
        self.certified_ = False
        self.h_ = None
        self.invariants_ = None
        self.regulator_ = None
        self._solver = None
        self._elim = None
        cutoff = self.euler_cutoff or max(self.factor_base_.bound, 1 << 16)
        self.window_ = euler_window(D, cutoff)
        try:
            if self.delta_ < 0:
                self._fit_imaginary()
            else:
                self._fit_real()
        finally:
            self._stream.close()
        self.timings_["total"] = time.perf_counter() - t_start
        return self

    def _certify(self):
        return True if self.certified is None else bool(self.certified)

    def _fit_imaginary(self):
        n = len(self.factor_base_)
        target = n + self.surplus
        certify = self._certify()
        for _ in range(self.max_retries + 1):
            self._collect(target)
            red, colmap, elog = self._eliminate(self.relations_.relations, keep_zero_cols=True)
            try:
                H, h = self._timed_la(hnf_with_det, red)
                if certify and not self.window_.contains(h):
                    raise _WindowMiss(h)
            except (RankDeficient, _WindowMiss) as exc:
                log.debug("class number attempt with %d relations failed: %r", target, exc)
                if not certify and isinstance(exc, RankDeficient):
                    # DLP use: the group order is a convenience, not a requirement
                    return
                target = self._grow(target)
                continue
            self.h_ = h
            self.invariants_ = tuple(self._timed_la(snf, H))
            self.certified_ = certify
            return
        raise RelationDeficit(f"no consistent class number after {self.max_retries} retries")

    def _fit_real(self):
        n = len(self.factor_base_)
        k = self.kernel_samples
        target = n + self.surplus + k
        certify = self._certify()
        for attempt in range(self.max_retries + 1):
            self._collect(target)
            try:
                terms = self._regulator_terms(k, attempt)
                R = terms.evaluate(self.delta_)
                h = None
                if certify:
                    red, _, _ = self._eliminate(self.relations_.relations, keep_zero_cols=True)
                    _, h = self._timed_la(hnf_with_det, red)
                    hR = _float_or_inf(R) * h
                    if not self.window_.contains(hR):
                        raise _WindowMiss(hR)
            except (NoSolution, RankDeficient, _WindowMiss) as exc:
                log.debug("regulator attempt with %d relations failed: %r", target, exc)
                target = self._grow(target)
                continue
            self.h_ = h
            self._R_terms = terms
            self.regulator_ = RegulatorEstimate(R, certify, h, len(self.relations_), terms)
            self.certified_ = certify
            return
        raise RelationDeficit(f"no consistent regulator after {self.max_retries} retries")

    def _regulator_terms(self, k, attempt=0):
        """Exact combination equal to the real GCD of sampled regulator multiples."""
        rels = self.relations_.relations
        # extras must not be the only relations touching some column
        weight: dict = {}
        for r in rels:
            for j in r.exps:
                weight[j] = weight.get(j, 0) + 1
        order = list(range(len(rels) - 1, -1, -1))
        if attempt:
            self._rng("extras", attempt).shuffle(order)
        chosen = set()
        for idx in order:
            if len(chosen) == k:
                break
            if all(weight[j] > 2 for j in rels[idx].exps):
                chosen.add(idx)
                for j in rels[idx].exps:
                    weight[j] -= 1
        base = [r for i, r in enumerate(rels) if i not in chosen]
        extras = [rels[i] for i in sorted(chosen)]
        red, colmap, elog = self._eliminate(base, keep_zero_cols=False)
        solver = self._timed_la(LeftSolver, red, seed=self.seed)
        multiples = list(self.relations_.unit_logs)
        for e in extras:
            try:
                vec, lt = elog.reduce_vector(e.exps, e.logterms)
                x = self._timed_la(solver.solve, vec, integral=True)
            except NoSolution:
                continue
            d = _common_den(x)
            coeffs = [int(f * d) for f in x]
            multiples.append(LogTerms.combine(coeffs, red.v) - lt.scale(d))
        self._elim = (red, elog)
        self._solver = solver
        t = time.perf_counter()
        try:
            return _real_gcd_terms(multiples, self.delta_)[0]
        finally:
            self.timings_["linear_algebra"] += time.perf_counter() - t

    # -- discrete logarithms ------------------------------------------------

    def _rng(self, *tags):
        return random.Random(":".join(str(t) for t in (self.seed,) + tags))

    def _current_elim(self):
        if self._elim is None:
            red, _, elog = self._eliminate(self.relations_.relations, keep_zero_cols=False)
            self._elim = (red, elog)
            self._solver = None
        return self._elim

    def _more_relations(self):
        self._collect(self._grow(len(self.relations_)))
        self._elim = None
        self._solver = None

    def dlog(self, g, a) -> int:
        """``x`` with ``[g]^x = [a]`` by solving one augmented system."""
        check_is_fitted(self, "relations_")
        if self.delta_ > 0:
            raise ValueError("dlog needs an imaginary discriminant; use infra_dlog")
        delta = self.delta_
        g = val.check_ideal(delta, g)
        a = val.check_ideal(delta, a)
        a_red, _ = reduce(delta, a)
        g_red, _ = reduce(delta, g)
        if a_red == unit_ideal(delta):
            return 0
        if a_red == g_red:
            return 1
        rng = self._rng("dlog", g, a)
        FB = self.factor_base_
        for attempt in range(self.max_retries + 1):
            self._check_time()
            try:
                e_g, _ = find_target_relation(FB, g_red, rng)
                e_a, _ = find_target_relation(FB, a_red, rng)
                red, elog = self._current_elim()
                vg, _ = elog.reduce_vector(e_g)
                va, _ = elog.reduce_vector(e_a)
                aug = SparseIntMatrix(red.rows + [{j: c for j, c in enumerate(vg) if c}], red.ncols)
                solver = self._timed_la(LeftSolver, aug, seed=self.seed + attempt)
                sol = self._timed_la(solver.solve, va, integral=True)
                if _common_den(sol) != 1:
                    raise NoSolution("no integral solution; relations may not generate the lattice")
                x = int(sol[-1])
            except (NoSolution, RankDeficient) as exc:
                log.debug("dlog attempt %d failed: %r", attempt, exc)
                self._more_relations()
                continue
            if self.h_ is not None:
                x %= class_order(delta, g_red, self.h_)
            if verify_dlp(delta, g_red, a_red, x):
                return x
            log.debug("dlog attempt %d produced an unverifiable answer", attempt)
            self._more_relations()
        raise Unverified("discrete logarithm could not be verified")

    def infra_dlog(self, a) -> FixedReal:
        """Distance ``t`` in ``[0, R)`` of the reduced principal ideal ``a``."""
        check_is_fitted(self, "relations_")
        if self.delta_ < 0:
            raise ValueError("infra_dlog needs a real discriminant; use dlog")
        delta = self.delta_
        a = val.check_ideal(delta, a)
        if not is_reduced(delta, a):
            raise ValueError(f"({a}) is not reduced")
        if a == unit_ideal(delta):
            return FixedReal(0, 0)
        rng = self._rng("infra", a)
        FB = self.factor_base_
        R_lt, R = self._R_terms, self.regulator_.R
        for attempt in range(self.max_retries + 1):
            self._check_time()
            try:
                e_a, ell = find_target_relation(FB, a, rng)
                red, elog = self._current_elim()
                if self._solver is None:
                    self._solver = self._timed_la(LeftSolver, red, seed=self.seed)
                vec, adj = elog.reduce_vector(e_a, LogTerms())
                x = self._timed_la(self._solver.solve, vec, integral=True)
            except (NoSolution, RankDeficient) as exc:
                log.debug("infra attempt %d failed: %r", attempt, exc)
                self._more_relations()
                continue
            d = _common_den(x)
            coeffs = [int(f * d) for f in x]
            # d * t = Y.v - d * (ell + adj)  (mod R)
            num = LogTerms.combine(coeffs, red.v) - adj.scale(d)
            t = self._distance_mod(num, ell, d, R_lt, R, a)
            if t is not None:
                return t
            log.debug("infra attempt %d produced an unverifiable answer", attempt)
            self._more_relations()
        raise LikelyNonPrincipal(f"({a}) does not look principal, or relations are deficient")

    def _distance_mod(self, num, ell, d, R_lt, R, a):
        delta = self.delta_
        # reduce num - d*ell modulo d*R exactly, then divide by d
        approx = num.evaluate(delta) - ell.scale(d)
        q = approx.mant // (R.mant * d)
        if q:
            # the quotient needs R to bits(q) more places than the output grid
            extra = abs(q).bit_length() + 64
            hb = FRAC_BITS + extra
            v = num.evaluate_bits(delta, hb) - (ell.mant << extra) * d
            q = v // (R_lt.evaluate_bits(delta, hb) * d)
        num = num - R_lt.scale(q * d)
        base = (num.evaluate(delta) - ell.scale(d)).div_int(d)
        if d > 64:
            return None
        # a^d determines t only up to multiples of R/d
        for j in range(d):
            t = base + R.scale(j).div_int(d) if j else base
            while t.mant < 0:
                t = t + R
            while t.mant >= R.mant:
                t = t - R
            if verify_infra(delta, a, t):
                return t
        return None

    def transform(self, X):
        """Solve a batch of targets: ``(g, a)`` pairs (imaginary) or ideals (real)."""
        check_is_fitted(self, "relations_")
        if self.delta_ < 0:
            return [self.dlog(g, a) for g, a in X]
        return [self.infra_dlog(a) for a in X]


# ---------------------------------------------------------------------------
# Functional front ends


def _estimator(config, certified_default):
    if config is None:
        config = SolverConfig()
    params = asdict(config) if isinstance(config, SolverConfig) else dict(config)
    if params.get("certified") is None:
        params["certified"] = certified_default
    return IndexCalculus(**params)


def class_group(D, config=None) -> ClassGroup:
    D = val.check_discriminant(D, sign=-1)
    est = _estimator(config, True).fit(D)
    if est.h_ is None:
        raise RelationDeficit("relations did not determine the class number")
    return ClassGroup(est.h_, est.invariants_, len(est.relations_), est.certified_)


def regulator(D, config=None) -> RegulatorEstimate:
    D = val.check_discriminant(D, sign=1)
    return _estimator(config, True).fit(D).regulator_


def dlp_imaginary(D, g, a, config=None) -> int:
    D = val.check_discriminant(D, sign=-1)
    return _estimator(config, False).fit(D).dlog(g, a)


def dlp_infrastructure(D, a, config=None) -> FixedReal:
    D = val.check_discriminant(D, sign=1)
    return _estimator(config, False).fit(D).infra_dlog(a)
