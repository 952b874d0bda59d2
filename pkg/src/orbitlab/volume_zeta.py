"""Invariant volumes of norm balls on the one-sheeted quadric x^2+y^2-z^2 = m,
height zeta functions, pole diagnostics, and the decaying-weight tail bound.

The chart (theta, t) -> sqrt(m) (cosh t cos theta, cosh t sin theta, sinh t)
carries the invariant surface measure to cosh(t) dtheta dt: the Leray form
dx dy / |dq/dz| pulls back to that (all volume outputs carry one global
positive factor, so checks are ratio/exponent based).

T on the section through (theta, t) is cosh t: the section k a_{e^{t/2}} is
compact times the a-family, and right diagonal factors do not change it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter, QuadratureDiverged, TailTooLarge
from .fitting import power_law_fit
from .group_kit import a_block, h_block, big_T, GroupElement
from .quadric import TernaryQuadricProblem, _DIAG_1_1_M1
from .util import adaptive_gl, gauss_legendre


def _panel_nodes(edges: np.ndarray, n: int):
    """Gauss-Legendre nodes/weights tiled over consecutive panels."""
    xs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        x, w = gauss_legendre(n, lo, hi)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def _require_hyperboloid(problem: TernaryQuadricProblem) -> float:
    if problem.gram != _DIAG_1_1_M1:
        raise InvalidParameter("volume chart implemented for diag(1,1,-1)")
    m = float(problem.m)
    if m <= 0:
        raise InvalidParameter("need m > 0 (one-sheeted quadric)")
    if problem.norm_choice != "euclidean":
        raise InvalidParameter("volume chart uses the euclidean norm")
    return m


@dataclass
class QuadricChart:
    """Hyperbolic chart of the m-level quadric with its measure density."""

    m: float

    def point(self, theta, t):
        rm = math.sqrt(self.m)
        ct = np.cosh(t)
        return np.stack([rm * ct * np.cos(theta), rm * ct * np.sin(theta),
                         rm * np.sinh(t)], axis=-1)

    def density(self, theta, t):
        return np.cosh(t) * np.ones_like(theta)

    def norm_of_t(self, t):
        return np.sqrt(self.m * np.cosh(2 * t))

    def t_of_norm(self, T: float) -> float:
        val = T * T / self.m
        if val < 1:
            raise InvalidParameter("norm below the waist of the quadric")
        return 0.5 * math.acosh(val)

    def section(self, theta: float, t: float, h: float = 1.0) -> np.ndarray:
        """A matrix moving the base point to the chart point; any right
        diagonal factor h gives another valid section."""
        phi = -theta / 2.0 + math.pi / 4.0
        c, s = math.cos(phi), math.sin(phi)
        rot = np.array([[c, -s], [s, c]])
        return rot @ a_block(math.exp(t / 2.0)) @ h_block(h)

    def integrate(self, f, T: float, rel_tol: float = 1e-6,
                  max_depth: int = 7):
        """integral over the norm-T ball of f(theta, t) against the invariant
        density: tensor Gauss-Legendre, both axes refined dyadically together
        until successive estimates agree to rel_tol."""
        t_max = self.t_of_norm(T)
        prev = None
        panels = 2
        for depth in range(max_depth + 1):
            xs, ws = [], []
            edges_th = np.linspace(0.0, 2 * math.pi, panels + 1)
            edges_t = np.linspace(-t_max, t_max, panels + 1)
            nth, wth = _panel_nodes(edges_th, 8)
            nt, wt = _panel_nodes(edges_t, 8)
            TH, TT = np.meshgrid(nth, nt, indexing="ij")
            W = np.outer(wth, wt)
            vals = f(TH, TT) * np.cosh(TT)
            total = float(np.sum(vals * W))
            if prev is not None and abs(total - prev) <= rel_tol * max(
                    abs(total), 1e-12):
                return total, abs(total - prev)
            prev = total
            panels *= 2
        if not np.isfinite(prev):
            raise QuadratureDiverged("ball integral did not converge")
        return prev, abs(total - prev)


def ball_measure(problem: TernaryQuadricProblem, T: float,
                 rel_tol: float = 1e-8) -> float:
    """Invariant measure of the norm-T ball (one global scale factor free)."""
    m = _require_hyperboloid(problem)
    chart = QuadricChart(m)
    if T < math.sqrt(m):
        return 0.0
    t_max = chart.t_of_norm(T)
    val, _ = adaptive_gl(np.cosh, -t_max, t_max, rel_tol=rel_tol)
    return 2 * math.pi * val


def ball_measure_mc(problem: TernaryQuadricProblem, T: float, n: int,
                    seed: int = 20240901) -> tuple[float, float]:
    """Monte-Carlo estimate of ball_measure with a standard-error estimate."""
    m = _require_hyperboloid(problem)
    chart = QuadricChart(m)
    if T < math.sqrt(m):
        return 0.0, 0.0
    t_max = chart.t_of_norm(T)
    rng = np.random.default_rng(seed)
    t = rng.uniform(-t_max, t_max, size=n)
    w = np.cosh(t)
    est = 2 * math.pi * 2 * t_max * float(np.mean(w))
    se = 2 * math.pi * 2 * t_max * float(np.std(w) / math.sqrt(n))
    return est, se


def log_weighted_ball(problem: TernaryQuadricProblem, T: float,
                      rel_tol: float = 1e-8, section_h: float = 1.0) -> float:
    """integral of log T_g over the norm-T ball, T_g evaluated on a section
    (any right diagonal factor gives the same value)."""
    m = _require_hyperboloid(problem)
    chart = QuadricChart(m)
    if T <= math.sqrt(m):
        return 0.0
    t_max = chart.t_of_norm(T)

    def f(tvals):
        out = np.empty_like(tvals)
        for i, t in enumerate(tvals):
            g = chart.section(0.0, float(t), section_h)
            ge = GroupElement([g], 1, 0, check=False)
            out[i] = math.log(big_T(ge)) * math.cosh(t)
        return out

    val, _ = adaptive_gl(f, -t_max, t_max, rel_tol=rel_tol)
    return 2 * math.pi * val


@dataclass
class ZetaSample:
    tau: float
    value: float
    cutoff: float
    tail_estimate: float


def _ball_growth_rate(problem: TernaryQuadricProblem, cutoff: float):
    """Fitted linear growth rate alpha with m(B_T) ~ alpha T near the cutoff,
    plus a drift figure used for the tail error estimate."""
    Ts = [cutoff / 4, cutoff / 2, cutoff]
    vals = [ball_measure(problem, T) for T in Ts]
    a1 = (vals[1] - vals[0]) / (Ts[1] - Ts[0])
    a2 = (vals[2] - vals[1]) / (Ts[2] - Ts[1])
    return a2, abs(a2 - a1)


def height_zeta(problem: TernaryQuadricProblem, tau: float, cutoff: float,
                weighted: bool = False, rel_tol: float = 1e-8,
                tail_tol: float = 0.02) -> ZetaSample:
    """Z(tau) = integral of ||x||^-tau (optionally times log T_g) over the
    quadric: quadrature inside the cutoff ball, fitted-growth tail beyond."""
    m = _require_hyperboloid(problem)
    if tau <= 1.0:
        raise InvalidParameter("tau must exceed 1")
    chart = QuadricChart(m)
    t_cut = chart.t_of_norm(cutoff)

    def f(tvals):
        norm = chart.norm_of_t(tvals)
        w = np.log(np.cosh(tvals)) if weighted else 1.0
        return w * norm ** (-tau) * np.cosh(tvals)

    val, _ = adaptive_gl(f, -t_cut, t_cut, rel_tol=rel_tol)
    val *= 2 * math.pi
    alpha, alpha_drift = _ball_growth_rate(problem, cutoff)
    # tail: d(ball)/dT ~ alpha, log T_g ~ log T - log sqrt(2m) out there
    c = cutoff
    base = alpha * c ** (1 - tau) / (tau - 1)
    if weighted:
        shift = math.log(math.sqrt(2 * m))
        tail = alpha * (c ** (1 - tau) * math.log(c) / (tau - 1)
                        + c ** (1 - tau) / (tau - 1) ** 2) - shift * base
    else:
        tail = base
    tail_err = (alpha_drift / max(alpha, 1e-300)) * abs(tail)
    total = val + tail
    if abs(tail_err) > tail_tol * abs(total):
        raise TailTooLarge(
            f"tail error estimate {tail_err:.3g} vs value {total:.3g}")
    return ZetaSample(tau=tau, value=total, cutoff=cutoff,
                      tail_estimate=tail_err)


def tail_integral(problem: TernaryQuadricProblem, delta: float, T: float,
                  rel_tol: float = 1e-8) -> float:
    """integral of T_g^-delta over the norm-T ball."""
    m = _require_hyperboloid(problem)
    if not 0 <= delta < 0.5:
        raise InvalidParameter("need 0 <= delta < 0.5")
    chart = QuadricChart(m)
    if T < math.sqrt(m):
        return 0.0
    t_max = chart.t_of_norm(T)

    def f(tvals):
        return np.cosh(tvals) ** (-delta) * np.cosh(tvals)

    val, _ = adaptive_gl(f, -t_max, t_max, rel_tol=rel_tol)
    return 2 * math.pi * val


def tail_exponent(problem: TernaryQuadricProblem, delta: float,
                  T_list) -> float:
    vals = [tail_integral(problem, delta, T) for T in T_list]
    fit = power_law_fit(np.asarray(T_list, float), np.asarray(vals))
    return fit.coeffs["exponent"]


def transported_action(problem: TernaryQuadricProblem, g: np.ndarray,
                       pts: np.ndarray) -> np.ndarray:
    """Float spin action on quadric points through the problem's equivalence
    (for invariance tests of the chart measure)."""
    if problem.disc_equivalence is None:
        raise InvalidParameter("no equivalence available")
    E = np.array([[float(v) for v in row] for row in problem.disc_equivalence])
    Einv = np.linalg.inv(E)
    abc = pts @ E.T
    a, b, c = abc[..., 0], abc[..., 1], abc[..., 2]
    (ga, gb), (gc, gd) = g
    y1 = a * ga * ga + b * ga * gb + c * gb * gb
    y2 = 2 * a * ga * gc + b * (ga * gd + gb * gc) + 2 * c * gb * gd
    y3 = a * gc * gc + b * gc * gd + c * gd * gd
    out = np.stack([y1, y2, y3], axis=-1)
    return out @ Einv.T


def chart_coords_of_points(chart: QuadricChart, pts: np.ndarray):
    """Invert the chart: theta from (x, y), t from z."""
    rm = math.sqrt(chart.m)
    t = np.arcsinh(pts[..., 2] / rm)
    theta = np.arctan2(pts[..., 1], pts[..., 0])
    return theta, t


def invariance_defect(problem: TernaryQuadricProblem, g, bump_center,
                      bump_width: float = 0.7, rel_tol: float = 1e-6) -> float:
    """| int f(g.x) dmu - int f dmu | / int f dmu for a smooth chart bump."""
    m = _require_hyperboloid(problem)
    chart = QuadricChart(m)
    th0, t0 = bump_center

    def bump(theta, t):
        dth = np.angle(np.exp(1j * (theta - th0)))
        u = (dth ** 2 + (t - t0) ** 2) / bump_width ** 2
        return np.where(u < 1, (1 - u) ** 3, 0.0)

    def moved(theta, t):
        pts = chart.point(theta, t)
        q = transported_action(problem, g, pts)
        thq, tq = chart_coords_of_points(chart, q)
        return bump(thq, tq)

    T = chart.norm_of_t(abs(t0) + bump_width + 4.0)
    base, _ = chart.integrate(bump, T, rel_tol)
    pushed, _ = chart.integrate(moved, T * 50, rel_tol)
    return abs(pushed - base) / abs(base)
