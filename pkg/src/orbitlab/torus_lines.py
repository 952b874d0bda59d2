"""Effective equidistribution of coordinate lines on tori R^l / Lambda for
lattices commensurable with an embedded ring of integers.

The dual objects are trace forms L_beta(alpha) = Tr(alpha * beta); their
coefficient vectors in the real basis (e_1..e_{l1}, then Re/Im pairs) are
(sigma_i(beta); 2 Re sigma_{l1+j}(beta), -2 Im sigma_{l1+j}(beta)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np
from scipy.special import itj0y0

from .config import DELTA1, delta2_default
from .errors import BudgetExceeded, InvalidParameter
from .fitting import SeriesFit, power_law_fit
from .number_field import ArchVector, FieldElement, NumberFieldSpec


@dataclass
class TorusLattice:
    """A full-rank lattice in R^l with its integral dual forms.

    basis columns span the lattice; dual rows satisfy dual[i] . basis[:,j]
    = delta_ij, so Hom(Lambda, Z) = Z-span of the dual rows.  L0 is the index
    of the trace-form sublattice inside Hom(Lambda, Z).
    """

    basis: np.ndarray
    dual: np.ndarray
    L0: int
    fieldspec: NumberFieldSpec | None = None

    @property
    def rank(self) -> int:
        return self.basis.shape[0]

    def covolume(self) -> float:
        return abs(float(np.linalg.det(self.basis)))

    def to_torus_coords(self, points: np.ndarray) -> np.ndarray:
        """Map points (shape (..., l)) to basis coordinates mod 1."""
        coords = points @ self.dual.T
        return coords - np.floor(coords)


@dataclass
class DualForm:
    coefficients: np.ndarray
    beta: FieldElement | None = None

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coefficients))

    def __call__(self, v: np.ndarray) -> float:
        return float(np.dot(self.coefficients, v))


@dataclass
class LineSpec:
    """A coordinate line: a real direction index, or a complex direction index
    with an angle interval."""

    direction: int
    T: float
    T0: float = 0.0
    interval: tuple[float, float] | None = None   # set for complex directions

    def __post_init__(self):
        if self.interval is not None:
            lo, hi = self.interval
            if hi - lo > 2 * math.pi + 1e-12:
                raise InvalidParameter("angle interval longer than 2*pi")


def arch_to_real_coords(spec: NumberFieldSpec, v: ArchVector) -> np.ndarray:
    out = list(v.reals)
    for z in v.complexes:
        out.extend([z.real, z.imag])
    return np.array(out, dtype=float)


def lattice_from_field(spec: NumberFieldSpec) -> TorusLattice:
    cols = [arch_to_real_coords(spec, spec.embed(b)) for b in spec.integral_basis]
    basis = np.column_stack(cols)
    dual = np.linalg.inv(basis)
    gram = [[spec.trace(spec.mul(bi, bj)) for bj in spec.integral_basis]
            for bi in spec.integral_basis]
    det = _fraction_det(gram)
    L0 = abs(int(det))
    if det != L0 and det != -L0:
        raise InvalidParameter("trace Gram determinant not an integer")
    return TorusLattice(basis=basis, dual=dual, L0=L0, fieldspec=spec)


def _fraction_det(rows) -> Fraction:
    n = len(rows)
    if n == 1:
        return Fraction(rows[0][0])
    if n == 2:
        return Fraction(rows[0][0]) * rows[1][1] - Fraction(rows[0][1]) * rows[1][0]
    total = Fraction(0)
    for j in range(n):
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        total += (-1) ** j * Fraction(rows[0][j]) * _fraction_det(minor)
    return total


def trace_dual_form(lattice: TorusLattice, beta: FieldElement) -> DualForm:
    spec = lattice.fieldspec
    if spec is None:
        raise InvalidParameter("lattice has no attached field")
    emb = spec.embed(beta)
    coeffs = list(emb.reals)
    for z in emb.complexes:
        coeffs.extend([2 * z.real, -2 * z.imag])
    return DualForm(coefficients=np.array(coeffs), beta=beta)


# ---------------------------------------------------------------------------
# Dual-lattice enumeration and Kronecker conditions
# ---------------------------------------------------------------------------

def _dual_points_in_ball(lattice: TorusLattice, R: float, budget: int):
    """Integer combinations n of the dual rows with ||n . dual|| <= R.

    Rectangular pre-bound from Gram-Schmidt of the dual rows, exact filter.
    Yields (n, coeff_vector) pairs, excluding 0.
    """
    D = lattice.dual
    l = lattice.rank
    # Gram-Schmidt norms give |n_i| <= R / ||d_i*|| on the orthogonalized rows
    q, r = np.linalg.qr(D.T)
    star_norms = np.abs(np.diag(r))
    bounds = [int(math.floor(R / sn)) + 1 for sn in star_norms]
    count = 1
    for b in bounds:
        count *= 2 * b + 1
        if count > budget:
            raise BudgetExceeded(f"dual enumeration needs {count} > {budget} points")
    ranges = [range(-b, b + 1) for b in bounds]
    for n in product(*ranges):
        if all(x == 0 for x in n):
            continue
        vec = np.array(n, dtype=float) @ D
        if float(vec @ vec) <= R * R + 1e-12:
            yield np.array(n), vec


def min_dual_value(lattice: TorusLattice, alpha: np.ndarray, R: float,
                   budget: int = 50_000_000):
    """Exact minimizer of |L(alpha)| over nonzero integral forms of norm <= R."""
    if R < 1:
        raise InvalidParameter("R must be >= 1")
    alpha = np.asarray(alpha, dtype=float)
    best, witness = None, None
    for n, vec in _dual_points_in_ball(lattice, R, budget):
        val = abs(float(vec @ alpha))
        if best is None or val < best:
            best, witness = val, DualForm(coefficients=vec)
    if best is None:
        return math.inf, None
    return best, witness


def kronecker_condition_lattice(lattice: TorusLattice, delta: float,
                                alpha: np.ndarray, N: float, kappa: float,
                                budget: int = 50_000_000) -> bool:
    """Every nonzero integral form of norm <= delta^{-kappa(2l+2)} takes a
    value >= delta^{-kappa(2l+2)} / N at alpha."""
    if not (0 < delta < 0.5 and N > 1 and kappa > 4):
        raise InvalidParameter("need 0<delta<0.5, N>1, kappa>4")
    l = lattice.rank
    bound = delta ** (-kappa * (2 * l + 2))
    val, _ = min_dual_value(lattice, alpha, bound, budget)
    return val >= bound / N


def kronecker_condition_integer(delta: float, alpha_vec, N: int, kappa: float,
                                budget: int = 50_000_000) -> bool:
    """Integer form: |v . alpha - L| >= delta^{-kappa} / N for all integer v
    with 0 < ||v||_inf <= delta^{-kappa} (only the nearest L matters)."""
    if N < 1 or int(N) != N:
        raise InvalidParameter("N must be a positive integer")
    alpha = np.asarray(alpha_vec, dtype=float)
    vmax = int(math.floor(delta ** (-kappa)))
    thr = delta ** (-kappa) / N
    if thr > 0.5:
        # nearest-integer distance never exceeds 0.5
        return vmax < 1
    count = (2 * vmax + 1) ** alpha.size
    if count > budget:
        raise BudgetExceeded(f"{count} integer vectors > budget {budget}")
    for v in product(range(-vmax, vmax + 1), repeat=alpha.size):
        if all(x == 0 for x in v):
            continue
        t = float(np.dot(v, alpha))
        if abs(t - round(t)) < thr:
            return False
    return True


def bad_set(lattice_or_l, delta: float, N: float, kappa: float, alpha,
            budget: int = 50_000_000):
    """Union of the shift intervals BAD(v, L) in (-0.5, 0) where the perturbed
    slope condition fails, over v meeting the slope lower bound.

    Returns (interval list, total measure).  The total measure stays below
    2*(3*delta^kappa)^l.
    """
    if not (0 < delta < 0.5 and N > 1 and kappa > 4):
        raise InvalidParameter("need 0<delta<0.5, N>1, kappa>4")
    alpha = np.asarray(alpha, dtype=float)
    l = alpha.size
    vmax = int(math.floor(delta ** (-kappa)))
    eps = delta ** (-kappa) / N
    slope_floor = delta ** (-kappa * (2 * l + 2)) / N
    count = (2 * vmax + 1) ** l
    if count > budget:
        raise BudgetExceeded(f"{count} integer vectors > budget {budget}")
    intervals = []
    for v in product(range(-vmax, vmax + 1), repeat=l):
        if all(x == 0 for x in v):
            continue
        c = float(np.dot(v, alpha))
        if abs(c) < slope_floor:
            continue
        # lambda in (-0.5, 0) with |c - L + lambda*c| <= eps
        lo_val, hi_val = sorted((0.5 * c, c))
        for L in range(math.ceil(lo_val - eps), math.floor(hi_val + eps) + 1):
            a = (L - c - eps) / c
            b = (L - c + eps) / c
            a, b = min(a, b), max(a, b)
            a, b = max(a, -0.5), min(b, 0.0)
            if a < b:
                intervals.append((a, b))
    intervals.sort()
    merged, total = [], 0.0
    for a, b in intervals:
        if merged and a <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], b))
        else:
            merged.append((a, b))
    merged = [(a, b) for a, b in merged]
    total = sum(b - a for a, b in merged)
    return merged, total


# ---------------------------------------------------------------------------
# Line and torus averages
# ---------------------------------------------------------------------------

def line_points_real(lattice: TorusLattice, i: int, t: np.ndarray) -> np.ndarray:
    pts = np.zeros((t.size, lattice.rank))
    pts[:, i] = t
    return pts


def line_average(f, lattice: TorusLattice, line: LineSpec, step: float):
    """Composite-midpoint average of f along a coordinate line (or the
    line-times-angle family for complex directions).

    Returns (value, quad_error_bound); the bound is Lip(f)*step/4 per unit
    length of domain, using the Lipschitz constant attached to f (attribute
    `lip`, default 1).
    """
    if step <= 0:
        raise InvalidParameter("step must be positive")
    lip = getattr(f, "lip", 1.0)
    T0, T = line.T0, line.T
    n = max(8, int(math.ceil(T / step)))
    tt = T0 + (np.arange(n) + 0.5) * (T / n)
    if line.interval is None:
        pts = line_points_real(lattice, line.direction, tt)
        vals = f(lattice.to_torus_coords(pts) @ lattice.basis.T)
        value = float(np.mean(vals))
        err = lip * (T / n) / 4.0
        return value, err
    lo, hi = line.interval
    m = max(8, int(math.ceil((hi - lo) / step)))
    th = lo + (np.arange(m) + 0.5) * ((hi - lo) / m)
    # accumulate over angle rows to bound memory
    acc = np.zeros(m)
    for k, theta in enumerate(th):
        x = tt * math.cos(theta)
        y = tt * math.sin(theta)
        pts = np.zeros((tt.size, lattice.rank))
        pts[:, 2 * line.direction] = x
        pts[:, 2 * line.direction + 1] = y
        vals = f(lattice.to_torus_coords(pts) @ lattice.basis.T)
        acc[k] = float(np.mean(vals))
    value = float(np.sum(acc) * (hi - lo) / m)
    err = lip * ((T / n) + ((hi - lo) / m)) / 4.0 * max(1.0, hi - lo)
    return value, err


def torus_average(f, lattice: TorusLattice, resolution: int = 64) -> float:
    """Normalized grid average over a fundamental parallelepiped."""
    if resolution < 8:
        raise InvalidParameter("resolution must be >= 8")
    l = lattice.rank
    axes = [np.arange(resolution) / resolution] * l
    grids = np.meshgrid(*axes, indexing="ij")
    coords = np.stack([g.ravel() for g in grids], axis=-1)
    pts = coords @ lattice.basis.T
    return float(np.mean(f(pts)))


class CharacterSum:
    """A finite sum  sum_k c_k exp(2 pi i <w_k, v>)  with frequencies w_k in
    the dual lattice; gives exact torus and line averages."""

    def __init__(self, freqs: np.ndarray, coeffs: np.ndarray):
        self.freqs = np.asarray(freqs, dtype=float)
        self.coeffs = np.asarray(coeffs, dtype=complex)
        self.lip = float(sum(abs(c) * 2 * math.pi * np.linalg.norm(w)
                             for c, w in zip(self.coeffs, self.freqs)))

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        phases = pts @ self.freqs.T
        vals = np.exp(2j * math.pi * phases) @ self.coeffs
        return np.real(vals)

    def mean(self) -> float:
        out = 0.0
        for w, c in zip(self.freqs, self.coeffs):
            if np.allclose(w, 0.0):
                out += c.real
        return out

    def line_average_exact(self, line: LineSpec) -> float:
        """Closed-form average along the line (times angle interval)."""
        total = 0.0 + 0.0j
        for w, c in zip(self.freqs, self.coeffs):
            if line.interval is None:
                freq = w[line.direction]
                total += c * _interval_character_avg(freq, line.T0, line.T)
            else:
                wx = w[2 * line.direction]
                wy = w[2 * line.direction + 1]
                total += c * _polar_character_avg(wx, wy, line)
        return float(np.real(total))


def character_bump(lattice: TorusLattice) -> CharacterSum:
    """Separable nonnegative trig-polynomial bump prod (1+cos(2 pi u_i))/2 in
    basis coordinates; mean is 2^-l."""
    l = lattice.rank
    freqs, coeffs = [], []
    for n in product((-1, 0, 1), repeat=l):
        freqs.append(np.array(n, dtype=float) @ lattice.dual)
        coeffs.append(np.prod([0.5 if k == 0 else 0.25 for k in n]))
    return CharacterSum(np.array(freqs), np.array(coeffs))


def _interval_character_avg(freq: float, T0: float, T: float) -> complex:
    """(1/T) * integral_{T0}^{T0+T} exp(2 pi i freq t) dt."""
    if abs(freq) < 1e-15:
        return 1.0 + 0.0j
    a = 2 * math.pi * freq
    return (np.exp(1j * a * (T0 + T)) - np.exp(1j * a * T0)) / (1j * a * T)


def _polar_character_avg(wx: float, wy: float, line: LineSpec) -> complex:
    """(1/T) int_{T0}^{T0+T} int_I exp(2 pi i (wx, wy).(t cos th, t sin th)) dth dt.

    For the full circle this is 2 pi J0(2 pi |w| t) averaged in t, via the
    tabulated integral of J0.
    """
    lo, hi = line.interval
    wnorm = math.hypot(wx, wy)
    if wnorm < 1e-15:
        return (hi - lo) * (1.0 + 0.0j)
    full = abs((hi - lo) - 2 * math.pi) < 1e-12
    if not full:
        raise InvalidParameter("closed form implemented for full circles only")
    a = 2 * math.pi * wnorm
    upper, _ = itj0y0(a * (line.T0 + line.T))
    lower, _ = itj0y0(a * line.T0)
    return complex(2 * math.pi * (upper - lower) / (a * line.T))


def exceptional_angle_measure(lattice: TorusLattice, j: int, T: float,
                              delta1: float = DELTA1,
                              kappa: float = 4.5) -> float:
    """Total measure of the excluded angle sets for the complex direction j:
    angles where some short trace form nearly annihilates the direction."""
    spec = lattice.fieldspec
    if spec is None or spec.l2 <= j:
        raise InvalidParameter("lattice has no such complex place")
    l = lattice.rank
    delta2 = delta2_default(l, kappa)
    norm_cut = lattice.L0 * T ** (delta2 * kappa * (2 * l + 2))
    # enumerate beta in O_k with ||L_beta|| <= norm_cut
    total = 0.0
    bound = int(math.ceil(norm_cut)) + 1
    seen = 0
    for a in range(-bound, bound + 1):
        for b in range(-bound, bound + 1):
            if (a, b) == (0, 0):
                continue
            beta = FieldElement((Fraction(a), Fraction(b)))
            form = trace_dual_form(lattice, beta)
            if form.norm <= norm_cut:
                total += 2 * math.pi * T ** (-delta1)
                seen += 1
    return min(total, 2 * math.pi)


def discrepancy_sweep(f, lattice: TorusLattice, direction, T_list,
                      step: float | None = None, method: str = "auto",
                      exact_threshold: float = 3000.0) -> SeriesFit:
    """Per T, |line average - torus average| (complex: minus |I| times the
    torus average); then a log-log fit of the error against T.

    For CharacterSum test functions the torus average is exact and, when
    method='auto', large complex-direction T values switch to the closed-form
    line average (quadrature noise there would otherwise swamp the signal).
    """
    is_char = isinstance(f, CharacterSum)
    complex_dir = isinstance(direction, tuple) and direction[0] == "complex"
    errors, noises, excluded = [], [], []
    if is_char:
        mean = f.mean()
    else:
        mean = torus_average(f, lattice)
    for T in T_list:
        if complex_dir:
            line = LineSpec(direction=direction[1], T=T,
                            interval=(0.0, 2 * math.pi))
            target = 2 * math.pi * mean
        else:
            line = LineSpec(direction=direction, T=T)
            target = mean
        use_exact = is_char and (method == "exact" or
                                 (method == "auto" and complex_dir
                                  and T > exact_threshold))
        if use_exact:
            avg = f.line_average_exact(line)
            noise = 1e-12
        else:
            h = step if step is not None else max(5e-3, min(0.02, T / 2e6))
            avg, noise = line_average(f, lattice, line, h)
            if is_char:
                noise = abs(avg - f.line_average_exact(line))
        errors.append(abs(avg - target))
        noises.append(noise)
        if complex_dir and lattice.fieldspec is not None:
            excluded.append(exceptional_angle_measure(lattice, direction[1], T))
        else:
            excluded.append(0.0)
    errors = np.array(errors)
    if np.all(errors == 0.0):
        fit = SeriesFit(params=np.array(T_list, float), values=errors,
                        degenerate=True, coeffs={"exponent": 0.0})
        fit.meta["flag"] = "all errors identically zero"
        return fit
    fit = power_law_fit(np.array(T_list, float), errors)
    fit.coeffs["delta_hat"] = -fit.coeffs["exponent"]
    fit.meta["noise"] = np.array(noises)
    fit.meta["excluded_measure"] = np.array(excluded)
    fit.meta["torus_average"] = mean
    return fit
