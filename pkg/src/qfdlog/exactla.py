"""Exact integer linear algebra on relation matrices.

Matrices are lists of sparse rows (``dict`` column -> int).  The paired
real vector ``v`` (one :class:`~qfdlog.ntkernel.LogTerms` per row) goes
through exactly the same row operations as the integer part.

Systems are solved on the left, ``x @ M = rhs``, matching the convention
that rows are relations.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

from flint import fmpz_mat, nmod_mat

from .exceptions import NoSolution, RankDeficient
from .ntkernel import is_probable_prime

#: Word-sized prime used for rank tests.
WORD_PRIME = (1 << 62) - 57


@dataclass
class SparseIntMatrix:
    rows: list
    ncols: int
    v: list | None = None

    def __post_init__(self):
        self.rows = [{c: x for c, x in r.items() if x} for r in self.rows]
        if self.v is not None and len(self.v) != len(self.rows):
            raise ValueError("v must be row-aligned with the matrix")

    @classmethod
    def from_dense(cls, dense, v=None):
        ncols = len(dense[0]) if dense else 0
        return cls([{j: x for j, x in enumerate(r) if x} for r in dense], ncols, v)

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    def dense(self):
        out = []
        for r in self.rows:
            row = [0] * self.ncols
            for j, x in r.items():
                row[j] = x
            out.append(row)
        return out

    def column_weights(self):
        w = [0] * self.ncols
        for r in self.rows:
            for j in r:
                w[j] += 1
        return w


def _as_dense(M):
    if isinstance(M, SparseIntMatrix):
        return M.dense()
    return [list(r) for r in M]


def _ncols(M):
    if isinstance(M, SparseIntMatrix):
        return M.ncols
    return len(M[0]) if M else 0


# ---------------------------------------------------------------------------
# Structured elimination


@dataclass
class EliminationLog:
    """What :func:`graph_eliminate` did, for mapping vectors into the reduced system."""

    colmap: list
    pivots: list = field(default_factory=list)  # (col, row dict, row logterms)
    zero_cols: list = field(default_factory=list)
    dropped_rows: int = 0

    def reduce_vector(self, vec, logterms=None):
        """Map a full-length exponent vector into reduced coordinates.

        Each eliminated pivot row is a relation, so subtracting multiples of it
        keeps the represented class; the real part is adjusted alongside.
        Raises :class:`NoSolution` if the vector touches a dropped zero column.
        """
        w = {j: x for j, x in enumerate(vec) if x} if not isinstance(vec, dict) else dict(vec)
        lt = logterms
        for col, row, rlt in self.pivots:
            k = w.get(col, 0)
            if not k:
                continue
            f = k * row[col]  # row[col] is +-1
            for j, x in row.items():
                nv = w.get(j, 0) - f * x
                if nv:
                    w[j] = nv
                else:
                    w.pop(j, None)
            if lt is not None and rlt is not None:
                lt = lt - rlt.scale(f)
        for j in self.zero_cols:
            if w.get(j):
                raise NoSolution(f"vector uses column {j}, which no relation touches")
        inv = {c: i for i, c in enumerate(self.colmap)}
        out = [0] * len(self.colmap)
        for j, x in w.items():
            out[inv[j]] = x
        return out, lt


def graph_eliminate(M: SparseIntMatrix, max_weight: int = 2, keep_zero_cols: bool = False):
    """Shrink ``M`` while preserving its row lattice.

    Drops zero columns (recorded), empty and duplicate rows, then repeatedly
    pivots on a ``+-1`` entry of a column of weight at most ``max_weight``,
    removing that column together with its pivot row.  Returns
    ``(reduced, colmap, log)`` where ``colmap[k]`` is the original index of
    reduced column ``k``.
    """
    rows = [dict(r) for r in M.rows]
    v = list(M.v) if M.v is not None else None
    weights = M.column_weights()
    zero_cols = [] if keep_zero_cols else [j for j in range(M.ncols) if weights[j] == 0]
    alive_cols = set(range(M.ncols)) - set(zero_cols)

    dropped = 0
    seen = set()
    keep_rows, keep_v = [], []
    for i, r in enumerate(rows):
        key = tuple(sorted(r.items()))
        if not r or key in seen:
            dropped += 1
            continue
        seen.add(key)
        keep_rows.append(r)
        keep_v.append(v[i] if v is not None else None)
    rows, vv = keep_rows, keep_v

    col_rows: dict = {j: set() for j in alive_cols}
    for i, r in enumerate(rows):
        for j in r:
            col_rows[j].add(i)
    dead = set()
    pivots = []
    changed = True
    while changed:
        changed = False
        for j in sorted(col_rows):
            touching = col_rows[j]
            if not touching or len(touching) > max_weight:
                continue
            piv = next((i for i in sorted(touching) if abs(rows[i][j]) == 1), None)
            if piv is None:
                continue
            prow = rows[piv]
            plt = vv[piv]
            for i in sorted(touching - {piv}):
                f = rows[i][j] * prow[j]
                r = rows[i]
                for c, x in prow.items():
                    nv = r.get(c, 0) - f * x
                    if nv:
                        if c not in r:
                            col_rows[c].add(i)
                        r[c] = nv
                    else:
                        if c in r:
                            del r[c]
                            col_rows[c].discard(i)
                if plt is not None:
                    vv[i] = vv[i] - plt.scale(f)
            pivots.append((j, dict(prow), plt))
            for c in prow:
                col_rows[c].discard(piv)
            dead.add(piv)
            del col_rows[j]
            changed = True
    colmap = sorted(col_rows)
    inv = {c: k for k, c in enumerate(colmap)}
    out_rows, out_v = [], []
    for i, r in enumerate(rows):
        if i in dead:
            continue
        if not r:
            dropped += 1
            continue
        out_rows.append({inv[c]: x for c, x in r.items()})
        out_v.append(vv[i])
    red = SparseIntMatrix(out_rows, len(colmap), out_v if v is not None else None)
    elog = EliminationLog(colmap, pivots, zero_cols, dropped)
    return red, colmap, elog


# ---------------------------------------------------------------------------
# Modular helpers


def _nmod(dense, p):
    m = len(dense)
    n = len(dense[0]) if m else 0
    return nmod_mat(m, n, [x % p for r in dense for x in r], p)


def _rref_pivots(A):
    R, rank = A.rref()
    pivots = []
    j = 0
    for i in range(rank):
        while int(R[i, j]) == 0:
            j += 1
        pivots.append(j)
        j += 1
    return pivots


def _rank_profile_mod(dense, p):
    """Rank mod ``p`` with independent columns and rows.

    The submatrix on the returned rows and columns is nonsingular mod ``p``.
    """
    A = _nmod(dense, p)
    pcols = _rref_pivots(A)
    prows = _rref_pivots(A.transpose())
    return len(pcols), pcols, prows


def rank_mod_p(M, p: int = WORD_PRIME) -> int:
    dense = _as_dense(M)
    if not dense or not dense[0]:
        return 0
    return _rank_profile_mod(dense, p)[0]


def _inverse_mod(A, p):
    """Inverse of square ``A`` modulo ``p`` as an ``nmod_mat``, or None if singular."""
    try:
        return _nmod(A, p).inv()
    except ZeroDivisionError:
        return None


def exact_rank(dense) -> int:
    """Rank over the rationals."""
    if not dense or not dense[0]:
        return 0
    return fmpz_mat(dense).rank()


# ---------------------------------------------------------------------------
# Hermite and Smith normal forms


def _xgcd(a, b):
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        return -a, -x0, -y0
    return a, x0, y0


def hnf_with_det(M):
    """Upper-triangular Hermite normal form of the row lattice and its determinant.

    Full column rank is checked first (mod a word prime, then exactly);
    the triangularization itself is FLINT's.
    """
    dense = _as_dense(M)
    n = _ncols(M)
    if n == 0:
        return [], 1
    if not dense:
        raise RankDeficient("empty matrix")
    if rank_mod_p(dense) < n and exact_rank(dense) < n:
        raise RankDeficient(f"matrix has rank < {n}")
    full = fmpz_mat(dense).hnf().tolist()
    H = [[int(x) for x in row] for row in full[:n]]
    det = 1
    for j in range(n):
        if H[j][j] <= 0:
            raise RankDeficient("zero pivot in HNF")
        det *= H[j][j]
    return H, det


def _dense_snf_diagonal(A):
    """Diagonal of the Smith normal form of a square nonsingular matrix."""
    A = [list(r) for r in A]
    n = len(A)
    diag = []
    for k in range(n):
        while True:
            # smallest nonzero entry of the trailing block becomes the pivot
            best = None
            for i in range(k, n):
                for j in range(k, n):
                    if A[i][j] and (best is None or abs(A[i][j]) < abs(A[best[0]][best[1]])):
                        best = (i, j)
            if best is None:
                raise RankDeficient("singular matrix in SNF")
            i, j = best
            A[k], A[i] = A[i], A[k]
            for r in A:
                r[k], r[j] = r[j], r[k]
            p = A[k][k]
            done = True
            for i in range(k + 1, n):
                q = A[i][k] // p
                if q:
                    A[i] = [u - q * w for u, w in zip(A[i], A[k])]
                if A[i][k]:
                    done = False
            for j in range(k + 1, n):
                q = A[k][j] // p
                if q:
                    for r in A:
                        r[j] -= q * r[k]
                if A[k][j]:
                    done = False
            if not done:
                continue
            bad = next(((i, j) for i in range(k + 1, n) for j in range(k + 1, n) if A[i][j] % p), None)
            if bad is None:
                break
            A[k] = [u + w for u, w in zip(A[k], A[bad[0]])]
        diag.append(abs(A[k][k]))
    return diag


def snf(H) -> list:
    """Nontrivial invariant factors ``m1, m2, ...`` with ``m_{i+1} | m_i``.

    The standard Smith form lists them increasing; here they are returned
    in decreasing order, dropping the trivial factors equal to 1.
    """
    dense = _as_dense(H)
    n = len(dense)
    if n == 0:
        return []
    Hn, det = hnf_with_det(dense)
    J = [j for j in range(n) if Hn[j][j] > 1]
    if not J:
        return []
    pos = {j: k for k, j in enumerate(J)}
    # express every unit-diagonal generator through the generators in J
    expr = [None] * n
    for k in range(n - 1, -1, -1):
        if k in pos:
            e = [0] * len(J)
            e[pos[k]] = 1
            expr[k] = e
            continue
        e = [0] * len(J)
        for l in range(k + 1, n):
            c = Hn[k][l]
            if c:
                e = [u - c * w for u, w in zip(e, expr[l])]
        expr[k] = [u % det for u in e]
    rel = []
    for i in J:
        row = [0] * len(J)
        row[pos[i]] = Hn[i][i]
        for l in range(i + 1, n):
            c = Hn[i][l]
            if c:
                row = [u + c * w for u, w in zip(row, expr[l])]
        rel.append([u % det if pos_idx != pos[i] else u for pos_idx, u in enumerate(row)])
    diag = _dense_snf_diagonal(rel)
    return sorted((d for d in diag if d > 1), reverse=True)


def group_structure(M):
    """``(h, invariants)`` of ``Z^n / rowspace(M)``."""
    H, det = hnf_with_det(M)
    return det, snf(H)


# ---------------------------------------------------------------------------
# Rational system solving


def _rat_recon(u, m):
    """Rational reconstruction of ``u mod m`` with both parts below ``sqrt(m/2)``."""
    bound = math.isqrt(m // 2)
    r0, r1 = m, u % m
    s0, s1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if s1 == 0 or abs(s1) > bound:
        return None
    if s1 < 0:
        r1, s1 = -r1, -s1
    return Fraction(r1, s1)


def _random_prime(rng, bits=62):
    while True:
        p = rng.getrandbits(bits) | (1 << (bits - 1)) | 1
        if is_probable_prime(p):
            return p


def dixon_solve(A, c, rng=None, max_primes: int = 5):
    """Solve ``A y = c`` for square nonsingular integer ``A`` by p-adic lifting.

    Returns a list of Fractions, verified exactly.  Raises
    :class:`RankDeficient` if ``A`` is singular modulo every prime tried.
    """
    rng = rng or random.Random(1)
    for _ in range(max_primes):
        p = _random_prime(rng)
        Ainv = _inverse_mod(A, p)
        if Ainv is None:
            continue
        return _dixon_lift(A, c, p, Ainv)
    if fmpz_mat(A).det() == 0:
        raise RankDeficient("singular system")
    raise RankDeficient("every sampled prime divides the determinant")


def _dixon_lift(A, c, p, Ainv):
    """p-adic lifting for square ``A y = c`` given ``Ainv = A^-1 mod p``.

    ``A`` may be a list of rows or an ``fmpz_mat``.  Returns Fractions.
    """
    fA = A if isinstance(A, fmpz_mat) else fmpz_mat(A)
    n = fA.nrows()
    had = 1
    for row in fA.tolist():
        had *= max(1, math.isqrt(sum(int(x) ** 2 for x in row)) + 1)
    cnorm = max(1, math.isqrt(sum(x * x for x in c)) + 1)
    need_bits = 2 * (had.bit_length() + cnorm.bit_length()) + 4
    res = list(c)
    X = [0] * n
    pk = 1
    it = 0
    while True:
        z = [int(t) for t in (Ainv * nmod_mat(n, 1, [r % p for r in res], p)).entries()]
        X = [x + zi * pk for x, zi in zip(X, z)]
        Az = (fA * fmpz_mat(n, 1, z)).entries()
        res = [(r - int(t)) // p for r, t in zip(res, Az)]
        pk *= p
        it += 1
        if pk.bit_length() >= need_bits or (it % 4 == 0):
            y = _reconstruct(X, pk)
            if y is not None and _check(fA, y, c):
                return y
            if pk.bit_length() >= need_bits + 64:
                raise ArithmeticError("p-adic lifting failed to converge")


def _reconstruct(X, m):
    # a running common denominator keeps later coordinates small
    den = 1
    out = []
    for x in X:
        f = _rat_recon(x * den % m, m)
        if f is None:
            return None
        out.append(f / den)
        den *= f.denominator
    return out


def _check(A, y, c):
    fA = A if isinstance(A, fmpz_mat) else fmpz_mat(A)
    num, L = _to_int_vector(y)
    prod = (fA * fmpz_mat(len(num), 1, num)).entries()
    return all(int(t) == ci * L for t, ci in zip(prod, c))


def _common_den(x):
    d = 1
    for f in x:
        d = d * f.denominator // math.gcd(d, f.denominator)
    return d


def _to_int_vector(x):
    """``(numerators, d)`` with ``x = numerators / d``."""
    d = _common_den(x)
    return [int(f * d) for f in x], d


def _verify_left(x, dense, rhs):
    if not dense:
        return not any(rhs)
    num, d = _to_int_vector(x)
    return _verify_left_int(num, d, fmpz_mat(dense), rhs)


def _verify_left_int(num, d, fM, rhs):
    acc = (fmpz_mat(1, len(num), num) * fM).entries()
    return all(int(a) == r * d for a, r in zip(acc, rhs))


class LeftSolver:
    """Reusable solver for ``x @ M = rhs`` with several right-hand sides.

    The system is restricted to a set of independent columns and compressed
    to square systems ``(P M) y = rhs``: first with ``P`` selecting
    independent rows, then with random small ``P``.  Combining solutions of
    different compressions lowers the denominator; with ``integral=True``
    compressions are added until the solution is integral or
    ``max_compressions`` is reached.
    """

    def __init__(self, M, seed: int = 0, compressions: int = 2, max_compressions: int = 10):
        self.dense = _as_dense(M)
        self.m = len(self.dense)
        self.n = _ncols(M)
        self.rng = random.Random(seed)
        if self.dense and self.n:
            rank, pcols, prows = _rank_profile_mod(self.dense, WORD_PRIME)
            self._fdense = fmpz_mat(self.dense)
        else:
            rank, pcols, prows = 0, [], []
            self._fdense = None
        self.rank = rank
        self.cols = pcols
        self._prows = prows
        self._fsub = fmpz_mat([[row[j] for j in pcols] for row in self.dense]) if rank else None
        self.max_compressions = max_compressions
        self.systems = []
        while len(self.systems) < compressions and self._add_system():
            pass

    def _add_system(self) -> bool:
        if len(self.systems) >= self.max_compressions:
            return False
        rank, m = self.rank, self.m
        if rank == 0:
            self.systems.append((None, None, 0, None))
            return True
        for _ in range(8):
            if not self.systems:
                entries = [0] * (rank * m)
                for k, r in enumerate(self._prows):
                    entries[k * m + r] = 1
            else:
                entries = [self.rng.randint(-2, 2) for _ in range(rank * m)]
            P = fmpz_mat(rank, m, entries)
            BT = (P * self._fsub).transpose()
            p = _random_prime(self.rng)
            inv = _inverse_mod(BT.tolist(), p)
            if inv is not None:
                self.systems.append((P, BT, p, inv))
                return True
        return False

    def solve(self, rhs, integral: bool = False):
        rhs = list(rhs)
        if len(rhs) != self.n:
            raise ValueError("rhs length mismatch")
        if not any(rhs):
            return [Fraction(0)] * self.m
        if self.rank == 0:
            raise NoSolution("right-hand side is outside the row space")
        c = [rhs[j] for j in self.cols]
        best = None
        k = 0
        while True:
            if k >= len(self.systems):
                if not (integral or k < 2) or not self._add_system():
                    break
            P, BT, p, inv = self.systems[k]
            k += 1
            ynum, d = _to_int_vector(_dixon_lift(BT, c, p, inv))
            xnum = [int(t) for t in (fmpz_mat(1, self.rank, ynum) * P).entries()]
            if not _verify_left_int(xnum, d, self._fdense, rhs):
                self._certify_no_solution(rhs)
            x = _reduce_pair(xnum, d)
            best = x if best is None else _combine_solutions(best, x)
            if best[1] == 1:
                break
        num, d = best
        assert _verify_left_int(num, d, self._fdense, rhs), "solution failed exact verification"
        return [Fraction(u, d) for u in num]

    def _certify_no_solution(self, rhs):
        if exact_rank(self.dense + [rhs]) > exact_rank(self.dense):
            raise NoSolution("right-hand side is outside the row space")
        raise NoSolution("solution could not be verified")


def _reduce_pair(num, d):
    g = d
    for u in num:
        g = math.gcd(g, u)
        if g == 1:
            break
    return [u // g for u in num], d // g


def _combine_solutions(x1, x2):
    """Affine combination of two solutions ``(num, den)`` with smaller denominator."""
    (n1, d1), (n2, d2) = x1, x2
    g, u, v = _xgcd(d1, d2)
    if g >= d1:
        return x1
    if g >= d2:
        return x2
    # weights u*d1/g + v*d2/g = 1, so x = (u n1 + v n2) / g
    return _reduce_pair([u * a + v * b for a, b in zip(n1, n2)], g)


def solve_certified(M, rhs, seed: int = 0):
    """Rational ``x`` with ``x @ M = rhs``, exactly verified before returning."""
    return LeftSolver(M, seed=seed).solve(rhs)


def kernel_sample(M, extra_rows, seed: int = 0):
    """Left-kernel vectors of ``M`` stacked with ``extra_rows``.

    For each extra row ``r_i`` solves ``X_i M = r_i`` and returns
    ``X_i' = (X_i | 0..0, -1, 0..0)`` with ``-1`` in slot ``m + i``.
    """
    solver = LeftSolver(M, seed=seed)
    m = solver.m
    k = len(extra_rows)
    stacked = solver.dense + [list(r) for r in extra_rows]
    out = []
    for i, r in enumerate(extra_rows):
        x = solver.solve(list(r))
        xp = list(x) + [Fraction(0)] * k
        xp[m + i] = Fraction(-1)
        assert _verify_left(xp, stacked, [0] * solver.n)
        out.append(xp)
    return out


def dump_sms(M: SparseIntMatrix, fh):
    """Write ``M`` in a SMS-like sparse text format."""
    fh.write(f"{M.nrows} {M.ncols}\n")
    for i, r in enumerate(M.rows):
        for j, x in sorted(r.items()):
            fh.write(f"{i} {j} {x}\n")
