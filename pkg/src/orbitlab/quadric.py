"""Integer points on ternary affine quadrics q(x) = m: split-condition
validation, the symmetric-square action of SL2, exact counting, orbit
classification, and main-term fits.

The counting loops run over the variable whose complement is definite
(diagonal forms) or over the middle coefficient with a divisor search (the
discriminant form x2^2 - 4 x1 x3).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (BudgetExceeded, DegenerateForm, InvalidParameter,
                     PlateauBudget)
from .fitting import SeriesFit, fit_t_logt_model

GEN_S = ((0, -1), (1, 0))
GEN_T = ((1, 1), (0, 1))
GEN_T_INV = ((1, -1), (0, 1))
DEFAULT_GENERATORS = (GEN_S, GEN_T, GEN_T_INV)

DISC_GRAM = ((0, 0, Fraction(-2)), (0, 1, 0), (Fraction(-2), 0, 0))
_DIAG_1_1_M1 = ((Fraction(1), 0, 0), (0, Fraction(1), 0), (0, 0, Fraction(-1)))
_IDENTITY3 = ((Fraction(1), 0, 0), (0, Fraction(1), 0), (0, 0, Fraction(1)))


def _mat3_apply(E, x):
    return tuple(sum(E[i][j] * Fraction(x[j]) for j in range(3))
                 for i in range(3))


def _mat3_inv(E):
    a, b, c = E[0]
    d, e, f = E[1]
    g, h, i = E[2]
    det = a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)
    if det == 0:
        raise InvalidParameter("equivalence matrix is singular")
    adj = ((e * i - f * h, c * h - b * i, b * f - c * e),
           (f * g - d * i, a * i - c * g, c * d - a * f),
           (d * h - e * g, b * g - a * h, a * e - b * d))
    return tuple(tuple(v / det for v in row) for row in adj)


@dataclass
class TernaryQuadricProblem:
    gram: tuple                       # symmetric 3x3, exact rationals
    m: Fraction
    norm_choice: str = "euclidean"    # "euclidean" | "max"
    x0: tuple | None = None
    disc_equivalence: tuple | None = None   # E with q(x) = disc_form(E.x)

    def __post_init__(self):
        g = [[Fraction(x) for x in row] for row in self.gram]
        if any(g[i][j] != g[j][i] for i in range(3) for j in range(3)):
            raise InvalidParameter("Gram matrix must be symmetric")
        self.gram = tuple(tuple(row) for row in g)
        self.m = Fraction(self.m)
        if self.m == 0:
            raise InvalidParameter("m must be nonzero")
        if self.norm_choice not in ("euclidean", "max"):
            raise InvalidParameter(f"unknown norm {self.norm_choice!r}")
        if self.x0 is not None:
            self.x0 = tuple(int(v) for v in self.x0)
            if self.q(self.x0) != self.m:
                raise InvalidParameter("base point does not satisfy q(x0)=m")
        if self.disc_equivalence is None:
            if self.is_disc_form():
                self.disc_equivalence = _IDENTITY3
            elif self.gram == _DIAG_1_1_M1:
                # (x,y,z) -> ((z-x)/2, y, (z+x)/2) carries q to b^2 - 4ac
                self.disc_equivalence = (
                    (Fraction(-1, 2), 0, Fraction(1, 2)),
                    (0, Fraction(1), 0),
                    (Fraction(1, 2), 0, Fraction(1, 2)))
        if self.disc_equivalence is not None:
            E = [[Fraction(x) for x in row] for row in self.disc_equivalence]
            self.disc_equivalence = tuple(tuple(row) for row in E)
            self._check_equivalence()

    def _check_equivalence(self):
        # q(x) = (Ex)_2^2 - 4 (Ex)_1 (Ex)_3 must hold identically
        for probe in ((1, 0, 0), (0, 1, 0), (0, 0, 1),
                      (1, 1, 0), (1, 0, 1), (0, 1, 1)):
            u, b, w = _mat3_apply(self.disc_equivalence, probe)
            if b * b - 4 * u * w != self.q(probe):
                raise InvalidParameter("equivalence does not carry q to the "
                                       "discriminant form")

    def q(self, x) -> Fraction:
        x = [Fraction(v) for v in x]
        return sum(x[i] * self.gram[i][j] * x[j]
                   for i in range(3) for j in range(3))

    def det(self) -> Fraction:
        g = self.gram
        return (g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1])
                - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
                + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]))

    def norm(self, x) -> float:
        if self.norm_choice == "euclidean":
            return math.sqrt(sum(float(v) ** 2 for v in x))
        return max(abs(float(v)) for v in x)

    def is_diagonal(self) -> bool:
        return all(self.gram[i][j] == 0 for i in range(3) for j in range(3)
                   if i != j)

    def is_disc_form(self) -> bool:
        return self.gram == DISC_GRAM


def diagonal_problem(d1, d2, d3, m, norm_choice="euclidean", x0=None):
    gram = ((Fraction(d1), 0, 0), (0, Fraction(d2), 0), (0, 0, Fraction(d3)))
    return TernaryQuadricProblem(gram, Fraction(m), norm_choice, x0)


def disc_problem(m, norm_choice="max", x0=None):
    return TernaryQuadricProblem(DISC_GRAM, Fraction(m), norm_choice, x0)


def _fraction_is_square(x: Fraction) -> bool:
    if x < 0:
        return False
    p, q = x.numerator, x.denominator
    rp, rq = math.isqrt(p), math.isqrt(q)
    return rp * rp == p and rq * rq == q


def validate(problem: TernaryQuadricProblem):
    """Exact rational-square test of -m * det(q)."""
    det = problem.det()
    if det == 0:
        raise DegenerateForm("form determinant is zero")
    value = -problem.m * det
    ok = _fraction_is_square(value)
    return ok, f"-m*det(q) = {value} is{'' if ok else ' not'} a rational square"


def spin_act(g, x):
    """Symmetric-square action: read (x1,x2,x3) as the binary quadratic form
    x1 u^2 + x2 uv + x3 v^2 and substitute (u,v) -> (u,v).g.

    Exact on ints/Fractions; preserves x2^2 - 4 x1 x3.
    """
    (a, b), (c, d) = g
    if a * d - b * c != 1:
        raise InvalidParameter("matrix must have determinant 1")
    x1, x2, x3 = x
    y1 = x1 * a * a + x2 * a * b + x3 * b * b
    y2 = 2 * x1 * a * c + x2 * (a * d + b * c) + 2 * x3 * b * d
    y3 = x1 * c * c + x2 * c * d + x3 * d * d
    return (y1, y2, y3)


def mat_mul(g, h):
    (a, b), (c, d) = g
    (e, f), (i, j) = h
    return ((a * e + b * i, a * f + b * j), (c * e + d * i, c * f + d * j))


# ---------------------------------------------------------------------------
# Exact counting
# ---------------------------------------------------------------------------

def _primes_up_to(n: int) -> np.ndarray:
    if n < 2:
        return np.array([], dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p:: p] = False
    return np.nonzero(sieve)[0].astype(np.int64)


def _isqrt_array(vals: np.ndarray) -> np.ndarray:
    r = np.array(np.sqrt(vals.astype(np.float64)), dtype=np.int64)
    r = np.where((r + 1) * (r + 1) <= vals, r + 1, r)
    r = np.where(r * r > vals, r - 1, r)
    return r


def _r2_batch_shifted_squares(m: int, zmax: int) -> np.ndarray:
    """r2(m + z^2) for z = 0..zmax, by sieving roots of z^2 = -m mod p.

    Primes up to sqrt(m + zmax^2) are divided out along their root classes,
    after which each cofactor is 1 or a single prime, so the multiplicative
    count closes exactly.  Slots with m + z^2 <= 0 return 0 (and r2(0) is the
    caller's special case).
    """
    from sympy.ntheory.residue_ntheory import sqrt_mod

    if zmax < 0:
        return np.zeros(0, dtype=np.int64)
    vals = m + np.arange(zmax + 1, dtype=np.int64) ** 2
    mult = np.ones(zmax + 1, dtype=np.int64)
    dead = vals <= 0
    vals = np.where(dead, 1, vals)
    limit = math.isqrt(int(vals.max()))

    def strike(p: int, starts):
        one_mod_4 = (p % 4 == 1)
        for st in starts:
            idx = np.arange(st, zmax + 1, p, dtype=np.int64)
            if idx.size == 0:
                continue
            sub = vals[idx]
            e = np.zeros(idx.size, dtype=np.int64)
            while True:
                mask = sub % p == 0
                if not mask.any():
                    break
                sub[mask] //= p
                e[mask] += 1
            vals[idx] = sub
            if p == 2:
                continue            # the even part never changes r2
            if one_mod_4:
                mult[idx] *= e + 1
            else:
                dead[idx] |= (e % 2 == 1)

    strike(2, [r for r in range(min(2, zmax + 1)) if (m + r * r) % 2 == 0])
    for p in _primes_up_to(limit):
        p = int(p)
        if p == 2:
            continue
        roots = sqrt_mod(-m % p, p, all_roots=True) or []
        strike(p, sorted({int(r) % p for r in roots}))
    # cofactor is now 1 or a single prime > sqrt(max value)
    rem = vals
    big = rem > 1
    mult = mult * np.where(big & (rem % 4 == 1), 2, 1)
    dead |= big & (rem % 4 == 3)
    dead |= big & (rem % 2 == 0)    # cannot occur; belt and braces
    return np.where(dead, 0, 4 * mult)


def _r2_single(n: int) -> int:
    total = 0
    for x in range(math.isqrt(n // 2) + 1):
        y2 = n - x * x
        y = math.isqrt(y2)
        if y * y != y2:
            continue
        if x == 0:
            total += 4
        elif y == x:
            total += 4
        else:
            total += 8
    return total


def brute_force_count(problem: TernaryQuadricProblem, T: float,
                      budget: int = 500_000_000) -> int:
    """Exact number of integer triples with q = m and norm <= T."""
    if T < 0:
        raise InvalidParameter("T must be nonnegative")
    if problem.is_diagonal():
        return _count_diagonal(problem, T, budget)
    if problem.is_disc_form():
        return _count_disc(problem, T, budget)
    raise InvalidParameter(
        "counting implemented for diagonal forms and x2^2-4x1x3")


def _count_diagonal(problem, T, budget) -> int:
    d = [problem.gram[i][i] for i in range(3)]
    if 0 in d:
        raise DegenerateForm("diagonal entry zero")
    pos = [i for i in range(3) if d[i] > 0]
    neg = [i for i in range(3) if d[i] < 0]
    if len(pos) == 2 and len(neg) == 1:
        sign = 1
    elif len(pos) == 1 and len(neg) == 2:
        sign = -1
    else:
        raise InvalidParameter("need signature (2,1) or (1,2)")
    # normalize to u^2 + v^2 = m' + w^2 shape only in the unit-coefficients case
    if sign == 1:
        (i, j), k = pos, neg[0]
    else:
        (i, j), k = neg, pos[0]
    if not (abs(d[i]) == 1 and abs(d[j]) == 1 and abs(d[k]) == 1):
        return _count_diagonal_slow(problem, T, budget)
    m_eff = problem.m * sign
    if m_eff.denominator != 1:
        return 0
    m_eff = int(m_eff)
    if problem.norm_choice == "max":
        return _count_diagonal_slow(problem, T, budget)
    # x_i^2 + x_j^2 = m_eff + x_k^2 with sum of all squares <= T^2
    zsq_max = (T * T - m_eff) / 2.0
    if zsq_max < 0:
        return 0
    zmax = math.isqrt(int(math.floor(zsq_max)))
    if zmax + 1 > budget:
        raise BudgetExceeded("outer loop too long")
    counts = _r2_batch_shifted_squares(m_eff, zmax)
    z = np.arange(0, zmax + 1, dtype=np.int64)
    # target 0 means the axis point (0, 0, z): one representation
    zero_target = (m_eff + z * z) == 0
    counts = np.where(zero_target, 1, counts)
    total = int(counts[0] + 2 * counts[1:].sum())
    return total


def _count_diagonal_slow(problem, T, budget) -> int:
    """Definite-pair reduction with per-z pair filtering (any norm)."""
    d = [int(problem.gram[i][i]) for i in range(3)]
    pos = [i for i in range(3) if d[i] > 0]
    neg = [i for i in range(3) if d[i] < 0]
    sign = 1 if len(pos) == 2 else -1
    if sign == 1:
        (i, j), k = pos, neg[0]
    else:
        (i, j), k = neg, pos[0]
    m_eff = problem.m * sign
    if m_eff.denominator != 1:
        return 0
    m_eff = int(m_eff)
    di, dj, dk = abs(d[i]), abs(d[j]), abs(d[k])
    zmax = int(math.floor(T))
    total = 0
    ops = 0
    for z in range(-zmax, zmax + 1):
        target = m_eff + dk * z * z
        if target < 0:
            continue
        xmax = math.isqrt(target // di) if di else 0
        ops += 2 * xmax + 1
        if ops > budget:
            raise BudgetExceeded("slow diagonal loop too long")
        for x in range(-xmax, xmax + 1):
            rem = target - di * x * x
            if rem < 0 or rem % dj:
                continue
            y2, ok = divmod(rem, dj)
            y = math.isqrt(y2)
            if y * y != y2:
                continue
            ys = {y, -y}
            for yy in ys:
                triple = [0, 0, 0]
                triple[i], triple[j], triple[k] = x, yy, z
                if problem.norm(triple) <= T + 1e-12:
                    total += 1
    return total


def _count_disc(problem, T, budget) -> int:
    """b^2 - 4ac = m with (a,b,c) = (x1,x2,x3); divisor search on ac."""
    if problem.m.denominator != 1:
        return 0
    m = int(problem.m)
    bmax = int(math.floor(T))
    total = 0
    ops = 0
    for b in range(-bmax, bmax + 1):
        num = b * b - m
        if num % 4:
            continue
        k = num // 4          # need a*c = k
        amax = int(math.floor(T))
        if k == 0:
            # a = 0 or c = 0
            for a in range(-amax, amax + 1):
                triple = (a, b, 0)
                if problem.norm(triple) <= T + 1e-12:
                    total += 1
                if a != 0:
                    triple = (0, b, a)
                    if problem.norm(triple) <= T + 1e-12:
                        total += 1
            continue
        for a in range(1, amax + 1):
            ops += 1
            if ops > budget:
                raise BudgetExceeded("disc-form loop too long")
            if k % a:
                continue
            c = k // a
            for aa, cc in ((a, c), (-a, -c)):
                triple = (aa, b, cc)
                if problem.norm(triple) <= T + 1e-12:
                    total += 1
    return total


def enumerate_points(problem: TernaryQuadricProblem, T: float,
                     budget: int = 500_000_000):
    """All integer solutions with norm <= T (small T; feeds classification)."""
    pts = []
    R = int(math.floor(T)) if problem.norm_choice == "max" else int(math.floor(T))
    for a in range(-R, R + 1):
        for b in range(-R, R + 1):
            for c in range(-R, R + 1):
                if problem.norm((a, b, c)) > T + 1e-12:
                    continue
                if problem.q((a, b, c)) == problem.m:
                    pts.append((a, b, c))
        if (2 * R + 1) ** 3 > budget:
            raise BudgetExceeded("enumeration budget")
    return pts


def enumerate_points_fast(problem: TernaryQuadricProblem, T: float):
    """Structured enumeration for the two supported shapes."""
    pts = []
    if problem.is_disc_form():
        m = int(problem.m)
        bmax = int(math.floor(T))
        for b in range(-bmax, bmax + 1):
            num = b * b - m
            if num % 4:
                continue
            k = num // 4
            amax = int(math.floor(T if problem.norm_choice == "max"
                                   else math.sqrt(max(0.0, T * T - b * b))))
            if k == 0:
                for a in range(-amax, amax + 1):
                    if problem.norm((a, b, 0)) <= T + 1e-12:
                        pts.append((a, b, 0))
                    if a != 0 and problem.norm((0, b, a)) <= T + 1e-12:
                        pts.append((0, b, a))
                continue
            for a in range(1, amax + 1):
                if k % a:
                    continue
                c = k // a
                for aa, cc in ((a, c), (-a, -c)):
                    if problem.norm((aa, b, cc)) <= T + 1e-12:
                        pts.append((aa, b, cc))
        return pts
    if problem.is_diagonal():
        d = [int(problem.gram[i][i]) for i in range(3)]
        pos = [i for i in range(3) if d[i] > 0]
        neg = [i for i in range(3) if d[i] < 0]
        (i, j), k = (pos, neg[0]) if len(pos) == 2 else (neg, pos[0])
        sign = 1 if len(pos) == 2 else -1
        m_eff = int(problem.m * sign)
        zmax = int(math.floor(T))
        for z in range(-zmax, zmax + 1):
            target = m_eff + abs(d[k]) * z * z
            if target < 0:
                continue
            xmax = math.isqrt(target // abs(d[i]))
            for x in range(-xmax, xmax + 1):
                rem = target - abs(d[i]) * x * x
                if rem < 0 or rem % abs(d[j]):
                    continue
                y2 = rem // abs(d[j])
                y = math.isqrt(y2)
                if y * y != y2:
                    continue
                for yy in ({y, -y}):
                    triple = [0, 0, 0]
                    triple[i], triple[j], triple[k] = x, yy, z
                    if problem.norm(triple) <= T + 1e-12:
                        pts.append(tuple(triple))
        return pts
    raise InvalidParameter("unsupported form shape")


# ---------------------------------------------------------------------------
# Orbit classification under the modular group
# ---------------------------------------------------------------------------

@dataclass
class OrbitSignature:
    representative: tuple
    word: tuple = field(default_factory=tuple)   # generator indices from input


def _spin_matrix(g):
    """3x3 matrix of the symmetric-square action on (x1, x2, x3)."""
    cols = [spin_act(g, e) for e in ((1, 0, 0), (0, 1, 0), (0, 0, 1))]
    return tuple(tuple(Fraction(cols[j][i]) for j in range(3))
                 for i in range(3))


def _transported_moves(problem: TernaryQuadricProblem, generators):
    """Integer matrices K_g and a scale s; in s-scaled coordinates P = s*x a
    move is P -> (K_g . P) / s, exactly divisible.

    The transported maps M_g = E^-1 spin(g) E have denominators dividing
    s = den(E) * den(E^-1), and points of an integral orbit live in (1/s) Z^3.
    """
    if problem.disc_equivalence is None:
        raise InvalidParameter(
            "problem carries no equivalence with the discriminant form")
    key = tuple(generators)
    cache = getattr(problem, "_move_cache", None)
    if cache is not None and cache[0] == key:
        return cache[1], cache[2]
    E = problem.disc_equivalence
    Einv = _mat3_inv(E)
    dens = [v.denominator for row in E for v in row]
    dens += [v.denominator for row in Einv for v in row]
    s = math.lcm(*dens)
    mats = []
    for g in generators:
        S = _spin_matrix(g)
        M = _mat3_mul(_mat3_mul(Einv, S), E)
        K = tuple(tuple(int(v * s) for v in row) for row in M)
        if any(Fraction(K[i][j], s) != M[i][j] for i in range(3) for j in range(3)):
            raise InvalidParameter("transported move has unexpected denominator")
        mats.append(K)
    problem._move_cache = (key, mats, s)
    return mats, s


def _mat3_mul(A, B):
    return tuple(tuple(sum(A[i][k] * B[k][j] for k in range(3))
                       for j in range(3)) for i in range(3))


def _int_apply(K, p):
    return (K[0][0] * p[0] + K[0][1] * p[1] + K[0][2] * p[2],
            K[1][0] * p[0] + K[1][1] * p[1] + K[1][2] * p[2],
            K[2][0] * p[0] + K[2][1] * p[1] + K[2][2] * p[2])


def spin_move(problem: TernaryQuadricProblem, g, x):
    """The spin action transported to the problem's coordinates through its
    rational equivalence with the discriminant form (exact)."""
    if problem.disc_equivalence is None:
        raise InvalidParameter(
            "problem carries no equivalence with the discriminant form")
    E = problem.disc_equivalence
    Einv = getattr(problem, "_Einv", None)
    if Einv is None:
        Einv = _mat3_inv(E)
        problem._Einv = Einv
    y = spin_act(g, _mat3_apply(E, x))
    out = _mat3_apply(Einv, y)
    return tuple(int(v) if v.denominator == 1 else v for v in out)


def orbit_reduce(problem: TernaryQuadricProblem, x,
                 generators=DEFAULT_GENERATORS,
                 plateau_budget: int = 4096) -> OrbitSignature:
    """Greedy norm descent along generator moves, then the plateau closure
    (points reachable without a norm increase); the class representative is
    the closure's lexicographic minimum.  Deterministic.

    The recorded word replays from x to the representative exactly.
    """
    x = tuple(int(v) for v in x)
    if problem.q(x) != problem.m:
        raise InvalidParameter("q(x) != m")
    mats, s = _transported_moves(problem, generators)

    if problem.norm_choice == "euclidean":
        def snorm(P):
            return P[0] * P[0] + P[1] * P[1] + P[2] * P[2]
    else:
        def snorm(P):
            return max(abs(P[0]), abs(P[1]), abs(P[2]))

    def moves(P):
        for gi, K in enumerate(mats):
            Q = _int_apply(K, P)
            yield gi, (Q[0] // s, Q[1] // s, Q[2] // s)

    cur = (s * x[0], s * x[1], s * x[2])
    word: list = []
    while True:
        # greedy strict descent
        while True:
            cur_norm = snorm(cur)
            best = None
            for gi, y in moves(cur):
                ny = snorm(y)
                if ny < cur_norm and (best is None or ny < best[0]):
                    best = (ny, gi, y)
            if best is None:
                break
            cur, word = best[2], word + [best[1]]
        # plateau closure: equal-norm moves; a strictly smaller point found
        # while walking the plateau restarts the descent from there
        plateau_norm = snorm(cur)
        seen = {cur: word}
        frontier = [cur]
        tunnel = None
        while frontier and tunnel is None:
            nxt = []
            for p in frontier:
                for gi, y in moves(p):
                    ny = snorm(y)
                    if ny < plateau_norm:
                        tunnel = (y, seen[p] + [gi])
                        break
                    if ny == plateau_norm and y not in seen:
                        if len(seen) >= plateau_budget:
                            raise PlateauBudget(
                                f"plateau exceeded {plateau_budget} points")
                        seen[y] = seen[p] + [gi]
                        nxt.append(y)
                if tunnel is not None:
                    break
            frontier = nxt
        if tunnel is None:
            rep_scaled = min(seen)
            rep = tuple(int(v // s) if v % s == 0 else Fraction(v, s)
                        for v in rep_scaled)
            return OrbitSignature(representative=rep,
                                  word=tuple(seen[rep_scaled]))
        cur, word = tunnel


def replay_word(problem, x, word, generators=DEFAULT_GENERATORS):
    cur = tuple(x)
    for gi in word:
        cur = spin_move(problem, generators[gi], cur)
    return cur


def orbit_count(problem: TernaryQuadricProblem, T: float,
                generators=DEFAULT_GENERATORS,
                plateau_budget: int = 4096) -> dict:
    """Counts of solutions with norm <= T, keyed by class representative."""
    pts = enumerate_points_fast(problem, T)
    out: dict = {}
    cache: dict = {}
    for p in pts:
        if p not in cache:
            cache[p] = orbit_reduce(problem, p, generators, plateau_budget).representative
        rep = cache[p]
        out[rep] = out.get(rep, 0) + 1
    return out


@dataclass
class CountSeries:
    T: list
    counts: list

    def __post_init__(self):
        if any(b < a for a, b in zip(self.counts, self.counts[1:])):
            raise InvalidParameter("counts must be nondecreasing in T")


def fit_main_term(series: CountSeries) -> SeriesFit:
    """Least squares for N(T) ~ c1 T log T + c2 T."""
    T = np.asarray(series.T, dtype=float)
    if T.size < 4 or T.max() / T.min() < 100:
        raise InvalidParameter("need >= 4 samples spanning >= 2 decades")
    return fit_t_logt_model(T, np.asarray(series.counts, dtype=float))
