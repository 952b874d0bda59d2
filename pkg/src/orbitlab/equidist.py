"""Diagonal-orbit integrals on the modular surface, the compactified
two-parameter family interpolating between them and horocycle averages, the
boundary distributions, and the main equidistribution identity.

Everything here is the rank-one case: the group is SL2(R), the lattice is the
modular group, the diagonal ray is h_t = diag(t, 1/t) and the rotation-
invariant observable is a TestBump.  Trajectory points are computed through
g -> g^{-1}.i, under which right diagonal flow is pure scaling of the point:
(a h_t)^{-1}.i = t^{-2} (a^{-1}.i).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import EPS0_DEFAULT
from .errors import (CoordInconsistent, InvalidParameter, SlowConvergence,
                     TruncationUnsafe)
from .fitting import power_law_fit
from .group_kit import GroupElement, a_block, big_T
from .modular import (TestBump, arc_average_table,
                      arc_smoothed_horocycle_average,
                      closed_horocycle_average, reduce_points,
                      unfolded_d_integrals)
from .util import composite_gl, gauss_legendre


def _as_mat(a) -> np.ndarray:
    if isinstance(a, GroupElement):
        if a.l1 != 1 or a.l2 != 0:
            raise InvalidParameter("rank-one experiments need a single place")
        return np.asarray(a.mats[0], dtype=float)
    return np.asarray(a, dtype=float)


def _inv_point(mat: np.ndarray) -> complex:
    """g^{-1}.i for a real determinant-one matrix."""
    a, b, c, d = mat[0, 0], mat[0, 1], mat[1, 0], mat[1, 1]
    z = (d * 1j - b) / (-c * 1j + a)
    if z.imag <= 0:
        raise InvalidParameter("matrix not orientation preserving")
    return z


def a_norms(s: float) -> float:
    """||a_s.e1|| = ||a_s.e2|| for the balanced one-parameter family."""
    return math.sqrt((s * s + 1.0 / (s * s)) / 2.0)


def a_param_for_norm(n: float) -> float:
    """Positive s >= 1 with ||a_s.e1|| = n."""
    if n < 1.0:
        raise InvalidParameter("column norm of the a-family is >= 1")
    q = n * n
    s2 = q + math.sqrt(max(q * q - 1.0, 0.0))
    return math.sqrt(s2)


@dataclass
class CompactifiedCoord:
    """(x1, x2, a): reciprocal column norms along the diagonal ray through a;
    interior points satisfy x1 * x2 * ||a.e1|| * ||a.e2|| = 1."""

    x1: float
    x2: float
    a: float | None       # s-parameter of the a-family; None marks infinity

    def check_interior(self, tol: float = 1e-9):
        if self.a is None:
            raise CoordInconsistent("boundary coordinate (a = infinity)")
        n = a_norms(self.a)
        if abs(self.x1 * self.x2 * n * n - 1.0) > tol:
            raise CoordInconsistent(
                f"x1*x2*|a.e1||a.e2| = {self.x1 * self.x2 * n * n}")


def coord_from_t(t: float, s: float) -> CompactifiedCoord:
    n = a_norms(s)
    return CompactifiedCoord(x1=1.0 / (t * n), x2=t / n, a=s)


def coord_from_x(x1: float, x2: float) -> CompactifiedCoord:
    """Interior coordinate with the balanced a determined by x1 * x2."""
    q = 1.0 / (x1 * x2)
    if q < 1.0:
        raise CoordInconsistent("x1 * x2 must be <= 1 on this family")
    return CompactifiedCoord(x1=x1, x2=x2, a=a_param_for_norm(math.sqrt(q)))


def phi_eval(bump: TestBump, g) -> float:
    """The observable at the coset of g."""
    return bump.phi_mat(_as_mat(g))


def haar_average(bump: TestBump, resolution: int = 1200) -> float:
    from .modular import haar_average_grid
    return haar_average_grid(bump, resolution)


def _midpoint_richardson(f, a: float, b: float, n: int,
                         tol: float = 5e-6):
    """Midpoint at n and 2n points with Richardson extrapolation; returns
    (value, |difference|).  The integrand vanishes at both ends here, so the
    smooth part of the midpoint error telescopes away."""
    def mid(k):
        x = a + (np.arange(k) + 0.5) * ((b - a) / k)
        return float(np.mean(f(x))) * (b - a)

    m1, m2 = mid(n), mid(2 * n)
    val = (4.0 * m2 - m1) / 3.0
    return val, abs(m2 - m1)


def orbit_integral(bump: TestBump, a, n_base: int | None = None,
                   window_budget: float = 400.0, points_per_visit: int = 16,
                   return_err: bool = False):
    """integral over the diagonal ray of the bump along a's coset, dt/t.

    The trajectory w -> e^{-2w} (a^{-1}.i) scales a fixed point; once the
    reduced height provably exceeds the bump ceiling on both ends the
    integrand vanishes, which gives hard truncation bounds.  The grid is
    sized so each ball crossing (width ~ rho * sin(angle of a^{-1}.i)) holds
    points_per_visit nodes.
    """
    mat = _as_mat(a)
    zstar = _inv_point(mat)
    sin_th = zstar.imag / abs(zstar)
    rstar = abs(zstar)
    y_stop = max(1.0, bump.y_max) * (1.0 + 1e-9)
    w_minus = -0.5 * math.log(y_stop / (rstar * sin_th))
    w_plus = 0.5 * math.log(y_stop * rstar / sin_th)
    if w_minus >= w_plus:
        return (0.0, 0.0) if return_err else 0.0
    if (w_plus - w_minus) > window_budget:
        raise TruncationUnsafe("support window could not be bracketed")
    if n_base is None:
        visit_width = bump.rho * sin_th
        need = points_per_visit * (w_plus - w_minus) / visit_width
        n_base = 1 << max(18, int(need - 1).bit_length())
        if n_base > 1 << 26:
            raise TruncationUnsafe(
                f"required grid {n_base} too fine; trajectory under-resolved")

    def f(wvals):
        z = zstar * np.exp(-2.0 * wvals)
        return bump.phi_points(z)

    val, err = _midpoint_richardson(f, w_minus, w_plus, n_base)
    return (val, err) if return_err else val


def f_eval(bump: TestBump, coord: CompactifiedCoord,
           eps0: float = EPS0_DEFAULT, rel_tol: float = 1e-9,
           scheme: str = "gauss") -> float:
    """Arc-smoothed observable along the diagonal ray at an interior
    coordinate: (1/2 eps0) integral over |xi| < eps0 of the bump at
    a h_{t e^xi}."""
    coord.check_interior()
    s = coord.a
    n = a_norms(s)
    t = 1.0 / (coord.x1 * n)
    zstar = _inv_point(a_block(s))

    def f(xis):
        z = zstar * (t * np.exp(xis)) ** (-2.0)
        return bump.phi_points(z)

    if scheme == "gauss":
        val, _ = _midpoint_richardson(f, -eps0, eps0, 1 << 15)
    elif scheme == "midpoint":
        m = 20001
        xs = -eps0 + (np.arange(m) + 0.5) * (2 * eps0 / m)
        val = float(np.mean(f(xs))) * 2 * eps0
    else:
        raise InvalidParameter(f"unknown scheme {scheme!r}")
    return val / (2 * eps0)


def boundary_f(bump: TestBump, x: float, sign: str = "+",
               eps0: float = EPS0_DEFAULT, scheme: str = "table") -> float:
    """Boundary value at (x, 0, infinity) (sign +) or (0, x, infinity)
    (sign -): the arc-smoothed closed-horocycle average at height x^2."""
    if x <= 0:
        raise InvalidParameter("x must be positive")
    flip = -2.0 if sign == "+" else 2.0
    if scheme == "table":
        return arc_average_table(bump, x, flip, eps0)
    if scheme == "fused":
        return arc_smoothed_horocycle_average(bump, x, flip, eps0)
    if scheme == "nested":
        def f(xis):
            return np.array([closed_horocycle_average(bump,
                                                      x * x * math.exp(flip * xi))
                             for xi in np.atleast_1d(xis)])
        val, _ = composite_gl(f, -eps0, eps0, rel_tol=1e-10, abs_tol=1e-14,
                              n=12, max_depth=6)
        return val / (2 * eps0)
    raise InvalidParameter(f"unknown scheme {scheme!r}")


def horocycle_transform(bump: TestBump, x: float) -> float:
    """Unsmoothed transform: the closed-horocycle average at height x^2."""
    return closed_horocycle_average(bump, x * x)


def boundary_support_cut(bump: TestBump, eps0: float = EPS0_DEFAULT) -> float:
    """x beyond which boundary_f vanishes: every arc height clears both the
    cusp ceiling and the fundamental-domain waist."""
    return math.exp(eps0) * math.sqrt(max(1.0, bump.y_max)) * (1 + 1e-9)


@dataclass
class DConstants:
    dplus: float
    dminus: float
    fit_exponent: float
    tail_estimate: float

    @property
    def total(self) -> float:
        return self.dplus + self.dminus


def d_constants(bump: TestBump, eps0: float = EPS0_DEFAULT,
                x_lo: float = 1e-3, n_panels: int = 32,
                form: str = "direct") -> DConstants:
    """The two boundary distributions evaluated at the bump.

    form='direct':   (1/l) [ int_0^1 (F(x) - mean) dx/x + int_1^inf F dx/x ]
    form='logderiv': (1/l) int_0^inf F'(x) (-log x) dx
    with F the arc-smoothed boundary transform.  Both integrals over
    [x_lo, x_hi] are unfolded per orbit point (exact chord tables); below
    x_lo the power model C x^p anchored at x_lo closes each form.  The
    '-quad' variants keep the direct composite-quadrature routes.
    """
    mean = bump.haar_average_exact()
    out = {}
    for sign in ("+", "-"):
        def bf(x):
            return boundary_f(bump, x, sign, eps0)

        x_hi = boundary_support_cut(bump, eps0)
        flip = -2.0 if sign == "+" else 2.0
        if form in ("direct", "logderiv"):
            val, fit_p, tail_est = _unfolded_d_value(bump, bf, mean, x_lo,
                                                     x_hi, eps0, flip, form)
        elif form == "direct-quad":
            val, fit_p, tail_est = _direct_d_integral(bump, bf, mean,
                                                      max(x_lo, 0.005),
                                                      x_hi, eps0, flip,
                                                      n_panels)
        elif form == "logderiv-quad":
            val, fit_p, tail_est = _logderiv_d_integral(bump, bf, mean,
                                                        max(x_lo, 0.005),
                                                        x_hi, eps0, flip)
        else:
            raise InvalidParameter(f"unknown form {form!r}")
        out[sign] = (val, fit_p, tail_est)
    return DConstants(dplus=out["+"][0], dminus=out["-"][0],
                      fit_exponent=min(out["+"][1], out["-"][1]),
                      tail_estimate=max(abs(out["+"][2]), abs(out["-"][2])))


def _power_closure(bf, mean, x_lo):
    """Power model C x^p from magnitude samples at x_lo, 2 x_lo, 4 x_lo."""
    S = np.array([bf(x) - mean for x in (x_lo, 2 * x_lo, 4 * x_lo)])
    mags = np.abs(S)
    if np.all(mags < 1e-11):
        return 0.0, 1.0, 1e-11
    fit = power_law_fit(np.array([x_lo, 2 * x_lo, 4 * x_lo]), mags)
    p = fit.coeffs["exponent"]
    if p <= 0:
        raise SlowConvergence(f"near-zero exponent {p:.3f} <= 0")
    C = S[0] / x_lo ** p
    err = abs(S[0]) * (1.0 + abs(math.log(x_lo)))
    return C, p, err


def _unfolded_d_value(bump, bf, mean, x_lo, x_hi, eps0, flip, form):
    direct_part, ld_part = unfolded_d_integrals(bump, eps0, flip, x_lo, x_hi)
    C, p, err = _power_closure(bf, mean, x_lo)
    if form == "direct":
        val = direct_part + mean * math.log(x_lo) + C * x_lo ** p / p
    else:
        val = ld_part + C * x_lo ** p * (1.0 / p - math.log(x_lo))
    return val, p, err


def _x_fprime(bump, eps0, flip):
    """x F'(x) in closed form: differentiating the arc average under the
    integral sign telescopes to a boundary difference of closed-horocycle
    averages."""
    def fn(x: float) -> float:
        a = closed_horocycle_average(bump, x * x * math.exp(flip * eps0))
        b = closed_horocycle_average(bump, x * x * math.exp(-flip * eps0))
        return (2.0 / flip) * (a - b) / (2.0 * eps0)
    return fn


def _near_zero_pieces(bump, bf, mean, x_lo, eps0, flip):
    """Contributions of (0, x_lo] to both forms, bookkept consistently.

    On [x_lo/4, x_lo] the direct piece uses integration by parts against the
    closed-form derivative (boundary values from two bf calls); below x_lo/4
    both forms close with the power model C x^p anchored at x_lo/4.
    Returns (direct_piece, logderiv_piece, p, err_estimate).
    """
    x_tiny = x_lo / 4.0
    S_lo = bf(x_lo) - mean
    S_mid = bf(2.0 * x_tiny) - mean
    S_tiny = bf(x_tiny) - mean
    mags = np.abs([S_tiny, S_mid, S_lo])
    if np.all(mags < 1e-12):
        return 0.0, 0.0, 1.0, 1e-12
    fit = power_law_fit(np.array([x_tiny, 2 * x_tiny, x_lo]), mags)
    p = fit.coeffs["exponent"]
    if p <= 0:
        raise SlowConvergence(f"near-zero exponent {p:.3f} <= 0")
    xfp = _x_fprime(bump, eps0, flip)

    def integrand(us):
        return np.array([xfp(math.exp(u)) * (-u) for u in np.atleast_1d(us)])

    ld_seg, _ = composite_gl(integrand, math.log(x_tiny), math.log(x_lo),
                             rel_tol=1e-7, abs_tol=1e-10, n=12, max_depth=2,
                             min_panels=8)
    direct_seg = (S_lo * math.log(x_lo) - S_tiny * math.log(x_tiny)) + ld_seg
    # below x_tiny: C x^p with C pinned at x_tiny (consistent in both forms)
    C = S_tiny / x_tiny ** p
    direct_tail = C * x_tiny ** p / p
    ld_tail = C * x_tiny ** p * (1.0 / p - math.log(x_tiny))
    err = abs(S_tiny) * (1.0 + abs(math.log(x_tiny)))
    return direct_seg + direct_tail, ld_seg + ld_tail, p, err


def _direct_d_integral(bump, bf, mean, x_lo, x_hi, eps0, flip, n_panels):
    tail, _, p, tail_err = _near_zero_pieces(bump, bf, mean, x_lo, eps0, flip)

    def inner(us):
        return np.array([bf(math.exp(u)) - mean for u in np.atleast_1d(us)])

    def outer(us):
        return np.array([bf(math.exp(u)) for u in np.atleast_1d(us)])

    lo, _ = composite_gl(inner, math.log(x_lo), 0.0, rel_tol=3e-7,
                         abs_tol=3e-9, n=12, max_depth=3,
                         min_panels=n_panels)
    hi, _ = composite_gl(outer, 0.0, math.log(x_hi), rel_tol=3e-7,
                         abs_tol=3e-9, n=12, max_depth=3,
                         min_panels=n_panels)
    return tail + lo + hi, p, tail_err


def _logderiv_d_integral(bump, bf, mean, x_lo, x_hi, eps0, flip):
    """integral of F'(x)(-log x) dx with the closed-form derivative."""
    _, tail, p, tail_err = _near_zero_pieces(bump, bf, mean, x_lo, eps0, flip)
    xfp = _x_fprime(bump, eps0, flip)

    def integrand(us):
        return np.array([xfp(math.exp(u)) * (-u) for u in np.atleast_1d(us)])

    total, _ = composite_gl(integrand, math.log(x_lo),
                            math.log(x_hi * 1.02), rel_tol=3e-7,
                            abs_tol=3e-9, n=12, max_depth=3, min_panels=48)
    return tail + total, p, tail_err


@dataclass
class TheoremRow:
    s: float
    T: float
    orbit: float
    log_term: float
    dplus: float
    dminus: float
    residual: float


def theorem_check(bump: TestBump, s_list, eps0: float = EPS0_DEFAULT,
                  dconst: DConstants | None = None):
    """Residuals of the main identity along the a-family: orbit integral
    minus log(T) * mean minus both boundary constants, with a decay fit of
    |residual| against T."""
    if dconst is None:
        dconst = d_constants(bump, eps0)
    mean = bump.haar_average_exact()
    rows = []
    for s in s_list:
        ge = GroupElement([a_block(float(s))], 1, 0, check=False)
        T = big_T(ge)
        orb = orbit_integral(bump, ge)
        log_term = math.log(T) * mean
        resid = orb - log_term - dconst.dplus - dconst.dminus
        rows.append(TheoremRow(s=float(s), T=T, orbit=orb, log_term=log_term,
                               dplus=dconst.dplus, dminus=dconst.dminus,
                               residual=resid))
    fit = power_law_fit(np.array([r.T for r in rows]),
                        np.array([r.residual for r in rows]))
    return rows, fit


# ---------------------------------------------------------------------------
# Coordinate ladders for the boundary-regime diagnostics
# ---------------------------------------------------------------------------

def focusing_ladder(bump: TestBump, x1: float, x2_list,
                    eps0: float = EPS0_DEFAULT):
    """|f(x1, x2, a) - f(x1, 0, inf)| along x2 -> 0 with x1 fixed."""
    target = boundary_f(bump, x1, "+", eps0)
    errs = []
    for x2 in x2_list:
        coord = coord_from_x(x1, x2)
        errs.append(abs(f_eval(bump, coord, eps0) - target))
    fit = power_law_fit(np.asarray(x2_list, float), np.asarray(errs))
    return np.asarray(errs), fit


def generic_ladder(bump: TestBump, x_list, eps0: float = EPS0_DEFAULT):
    """|f(x, x, a) - mean| along x -> 0 (the balanced scale t = 1)."""
    mean = bump.haar_average_exact()
    errs = []
    for x in x_list:
        coord = coord_from_x(x, x)
        errs.append(abs(f_eval(bump, coord, eps0) - mean))
    fit = power_law_fit(np.asarray(x_list, float), np.asarray(errs))
    return np.asarray(errs), fit


def boundary_decay_ladder(bump: TestBump, x_list, sign: str = "+",
                          eps0: float = EPS0_DEFAULT):
    """|boundary_f(x) - mean| along x -> 0."""
    mean = bump.haar_average_exact()
    errs = [abs(boundary_f(bump, x, sign, eps0) - mean) for x in x_list]
    fit = power_law_fit(np.asarray(x_list, float), np.asarray(errs))
    return np.asarray(errs), fit
