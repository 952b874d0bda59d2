"""The modular surface: fundamental-domain reduction, compactly supported
rotation-invariant bump functions, and closed-horocycle averages.

Functions on the quotient are evaluated through the identification g -> g^-1.i
(adopted globally); a bump is profile(d(reduce(g^-1.i), z0)/rho) with the C^2
quartic kernel profile(u) = (1-u)^3 (1+3u).

Closed-horocycle averages unfold to chord integrals: the hyperbolic ball
B(w, rho) is the euclidean disk with center Re w + i Im(w) cosh(rho) and
radius Im(w) sinh(rho), so the height-h horocycle meets the ball of the orbit
point w iff h/Im(w) lies in (e^-rho, e^rho), and each crossing is a smooth
one-dimensional integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from functools import lru_cache

import numpy as np

from .errors import InvalidParameter, MaxIterations
from .util import gauss_legendre

FUND_DOMAIN_AREA = math.pi / 3.0


def mobius(m, z):
    a, b, c, d = m[0][0], m[0][1], m[1][0], m[1][1]
    return (a * z + b) / (c * z + d)


def reduce_points(z, max_iter: int = 600):
    """Vectorized reduction to |Re| <= 1/2, |z| >= 1.  Complex array in/out."""
    z = np.array(z, dtype=complex)
    flat = z.ravel()
    for _ in range(max_iter):
        x = np.real(flat)
        shift = np.round(x)
        flat = flat - shift
        inside = np.abs(flat) < 1.0 - 1e-15
        if not inside.any() and np.all(np.abs(np.real(flat)) <= 0.5 + 1e-15):
            break
        flat = np.where(inside, -1.0 / flat, flat)
    else:
        raise MaxIterations("fundamental-domain reduction did not converge")
    return flat.reshape(z.shape)


@dataclass
class ModularPoint:
    z: complex
    word: tuple = dc_field(default_factory=tuple)   # (gen, power) pairs

    def __post_init__(self):
        if abs(self.z) < 1.0 - 1e-12 or abs(self.z.real) > 0.5 + 1e-12:
            raise InvalidParameter("point not reduced")


def reduce_point(z: complex, max_iter: int = 600) -> ModularPoint:
    """Scalar reduction with the word of moves applied (replay the word on the
    reduced point to recover z)."""
    if z.imag <= 0:
        raise InvalidParameter("need Im z > 0")
    cur = complex(z)
    word: list = []
    for _ in range(max_iter):
        n = round(cur.real)
        if n != 0:
            cur -= n
            word.append(("T", -int(n)))
        if abs(cur) < 1.0 - 1e-15:
            cur = -1.0 / cur
            word.append(("S", 1))
            continue
        if abs(cur.real) <= 0.5 + 1e-15:
            # applying the inverse word to cur returns z
            inv = tuple((g, -p) if g == "T" else (g, p)
                        for g, p in reversed(word))
            return ModularPoint(z=cur, word=inv)
    raise MaxIterations("reduction did not converge")


def apply_word(word, z: complex) -> complex:
    for gen, p in word:
        if gen == "T":
            z = z + p
        elif gen == "S":
            for _ in range(abs(p)):
                z = -1.0 / z
        else:
            raise InvalidParameter(f"unknown generator {gen!r}")
    return z


def d_hyp(z, w):
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    num = np.abs(z - w) ** 2
    arg = 1.0 + num / (2.0 * np.imag(z) * np.imag(w))
    return np.arccosh(np.maximum(arg, 1.0))


def profile_c2(u):
    """Quartic kernel (1-u)^3 (1+3u) on [0,1]; value 1 at 0, C^2 at 1."""
    t = np.clip(1.0 - np.asarray(u, dtype=float), 0.0, 1.0)
    return t * t * t * (4.0 - 3.0 * t)


PROFILE_SLOPE_MAX = 16.0 / 9.0   # max |d/du (1-u)^3(1+3u)| on [0,1]


def _orbit_ball(z0: complex, radius: int = 4):
    """Orbit points of z0 under short words in the two standard generators."""
    gens = [((0, -1), (1, 0)), ((1, 1), (0, 1)), ((1, -1), (0, 1))]
    mats = {((1, 0), (0, 1))}
    frontier = list(mats)
    for _ in range(radius):
        nxt = []
        for m in frontier:
            for g in gens:
                a = ((g[0][0] * m[0][0] + g[0][1] * m[1][0],
                      g[0][0] * m[0][1] + g[0][1] * m[1][1]),
                     (g[1][0] * m[0][0] + g[1][1] * m[1][0],
                      g[1][0] * m[0][1] + g[1][1] * m[1][1]))
                if a not in mats:
                    mats.add(a)
                    nxt.append(a)
        frontier = nxt
    return [mobius(m, z0) for m in mats]


@dataclass
class TestBump:
    """K-invariant bump on the quotient: profile of the hyperbolic distance
    from the reduced point to the center."""

    center: complex
    rho: float
    peak: float = 1.0

    def __post_init__(self):
        if self.rho <= 0:
            raise InvalidParameter("radius must be positive")
        self.center = complex(reduce_points([self.center])[0])
        x0, y0 = self.center.real, self.center.imag
        ball_r = y0 * math.sinh(self.rho)
        # the observable is continuous on the quotient when the support stays
        # inside the |Re| <= 1/2 strip, or hugs the symmetric axis
        if abs(x0) + ball_r > 0.5 + 1e-12 and abs(x0) > 1e-12:
            raise InvalidParameter(
                "support leaves the translation strip asymmetrically")
        # elliptic points: order 2 over i, order 3 over the corner
        corner = complex(0.5, math.sqrt(3) / 2)
        if abs(self.center - 1j) < 1e-9:
            self.stabilizer_order = 2
        elif min(abs(self.center - corner),
                 abs(self.center + corner.conjugate())) < 1e-9:
            self.stabilizer_order = 3
        else:
            self.stabilizer_order = 1
        # arc guard: support clear of the |z| = 1 fold unless S-symmetric
        ball_c = abs(complex(x0, y0 * math.cosh(self.rho)))
        arc_ok = (ball_c - ball_r >= 1.0 - 1e-12) or abs(self.center - 1j) < 1e-9
        if not arc_ok:
            raise InvalidParameter("support straddles the inversion arc "
                                   "away from the symmetric point")
        # ball-lift disjointness: needed by the unfolded (chord) evaluators
        orbit = _orbit_ball(self.center)
        sep = math.inf
        for w in orbit:
            shift = round((w - self.center).real)
            if abs(w - self.center - shift) < 1e-9:
                continue    # the center itself or a pure translate
            sep = min(sep, float(d_hyp(w, self.center)))
        self.orbit_separation = sep
        self.y_max = y0 * math.exp(self.rho)
        self.unfold_safe = (self.rho < sep / 2
                            and self.y_max * math.sinh(self.rho) < 0.5 - 1e-9)

    @property
    def lip(self) -> float:
        """Lipschitz constant w.r.t. hyperbolic distance (exact for the
        quartic kernel)."""
        return self.peak * PROFILE_SLOPE_MAX / self.rho

    def values_at(self, z) -> np.ndarray:
        """phi at already-reduced points."""
        return self.peak * profile_c2(d_hyp(z, self.center) / self.rho)

    def phi_points(self, z) -> np.ndarray:
        return self.values_at(reduce_points(z))

    def phi_mat(self, g) -> float:
        g = np.asarray(g, dtype=float)
        det = g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0]
        if abs(det - 1) > 1e-9:
            raise InvalidParameter("matrix must have determinant 1")
        inv = np.array([[g[1, 1], -g[0, 1]], [-g[1, 0], g[0, 0]]])
        z = mobius(inv, 1j)
        return float(self.phi_points(np.array([z]))[0])

    def ball_mass(self) -> float:
        """Hyperbolic-area integral of the profile over one ball (geodesic
        polar coordinates: 2 pi integral profile(r/rho) sinh r dr)."""
        x, w = gauss_legendre(64, 0.0, self.rho)
        return self.peak * 2 * math.pi * float(
            np.dot(w, profile_c2(x / self.rho) * np.sinh(x)))

    def haar_average_exact(self) -> float:
        """Mean over the probability measure: one ball per fundamental domain,
        divided by the center's stabilizer order."""
        if not self.unfold_safe:
            raise InvalidParameter("ball lifts overlap; polar closed form "
                                   "invalid for this bump")
        return self.ball_mass() / self.stabilizer_order / FUND_DOMAIN_AREA


def haar_average_grid(bump: TestBump, resolution: int = 800) -> float:
    """Quadrature of the bump over the fundamental domain (dx dy / y^2,
    normalized by pi/3).  Midpoint grid over the support box with the domain
    indicator; the polar closed form is the sharper route."""
    z0, rho = bump.center, bump.rho
    ball_c = z0.real + 1j * z0.imag * math.cosh(rho)
    ball_r = z0.imag * math.sinh(rho)
    xs = np.linspace(ball_c.real - ball_r, ball_c.real + ball_r, resolution)
    ys = np.linspace(ball_c.imag - ball_r, ball_c.imag + ball_r, resolution)
    dx = xs[1] - xs[0]
    dy = ys[1] - ys[0]
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    Z = X + 1j * Y
    in_dom = (np.abs(np.real(Z)) <= 0.5) & (np.abs(Z) >= 1.0) & (Y > 0)
    vals = np.where(in_dom, bump.values_at(Z) / Y ** 2, 0.0)
    return float(vals.sum() * dx * dy / FUND_DOMAIN_AREA)


# ---------------------------------------------------------------------------
# Closed-horocycle averages by unfolding
# ---------------------------------------------------------------------------

def _completion(c: int, d: int):
    """(a, b) with a*d - b*c = 1 for coprime (c, d)."""
    g, b, a = _ext_gcd(c, d)
    # g = 1 = b*c + a*d
    return a, -b


def _ext_gcd(a: int, b: int):
    if a == 0:
        return b, 0, 1
    g, x, y = _ext_gcd(b % a, a)
    return g, y - (b // a) * x, x


def _stab_row_action(center: complex):
    """Right-action matrices of the center's stabilizer on bottom rows."""
    if abs(center - 1j) < 1e-9:
        return [np.array([[0, -1], [1, 0]])]                  # order 2
    corner = complex(0.5, math.sqrt(3) / 2)
    if min(abs(center - corner), abs(center + corner.conjugate())) < 1e-9:
        if center.real > 0:
            m = np.array([[0, -1], [1, 1]])                   # order 3
        else:
            m = np.array([[1, -1], [1, 0]])
        return [m, m @ m]
    return []


def _normalize_rows(cd: np.ndarray) -> np.ndarray:
    """Sign-normalize rows mod +-1: first nonzero entry positive."""
    lead = np.where(cd[:, 0] != 0, cd[:, 0], cd[:, 1])
    return cd * np.sign(lead)[:, None]


_BAND_CACHE: dict = {}


def orbit_heights_in_band(z0: complex, y_lo: float, y_hi: float,
                          stab_mats=None) -> np.ndarray:
    """Heights Im w of the orbit points of z0 modulo unit x-translation with
    Im w in [y_lo, y_hi], one entry per point.

    Cosets are enumerated by coprime bottom rows (c, d) mod +-1, then rows
    related by the center's stabilizer (acting on the right) are deduped.
    Recent bands are memoized (the arc averages hit identical bands often).
    """
    key = (complex(z0), float(y_lo), float(y_hi), stab_mats is None)
    hit = _BAND_CACHE.get(key)
    if hit is not None:
        return hit
    out = _orbit_heights_uncached(z0, y_lo, y_hi, stab_mats)
    if len(_BAND_CACHE) > 64:
        _BAND_CACHE.clear()
    _BAND_CACHE[key] = out
    return out


def _orbit_heights_uncached(z0: complex, y_lo: float, y_hi: float,
                            stab_mats=None) -> np.ndarray:
    x0, y0 = z0.real, z0.imag
    if stab_mats is None:
        stab_mats = _stab_row_action(z0)
    rows = []
    if y_lo <= y0 * (1 + 1e-15) and y0 <= y_hi * (1 + 1e-15):
        rows.append(np.array([[0, 1]], dtype=np.int64))
    R2_hi = y0 / y_lo            # |c z0 + d|^2 <= R2_hi
    R2_lo = y0 / y_hi
    cmax = int(math.floor(math.sqrt(max(R2_hi, 0.0)) / y0))
    for c in range(1, cmax + 1):
        disc = R2_hi - (c * y0) ** 2
        if disc < 0:
            continue
        half = math.sqrt(disc)
        d = np.arange(int(math.ceil(-c * x0 - half)),
                      int(math.floor(-c * x0 + half)) + 1, dtype=np.int64)
        if d.size == 0:
            continue
        den = (c * x0 + d) ** 2 + (c * y0) ** 2
        d = d[(den >= R2_lo) & (den <= R2_hi)]
        if d.size:
            d = d[np.gcd(np.int64(c), d) == 1]
        if d.size:
            rows.append(np.column_stack([np.full(d.size, c, dtype=np.int64),
                                         d]))
    if not rows:
        return np.zeros(0)
    cd = _normalize_rows(np.concatenate(rows))
    if stab_mats:
        # keep a row only if it is the lexicographic minimum of its
        # stabilizer orbit (rows related by gamma -> gamma * stab coincide
        # as orbit points)
        images = [cd] + [_normalize_rows(cd @ m) for m in stab_mats]
        stacked = np.stack(images, axis=0)          # (orbit, n, 2)
        keys = stacked[:, :, 0] * (2 ** 31) + stacked[:, :, 1]
        keep = keys[0] == keys.min(axis=0)
        cd = cd[keep]
    den = (cd[:, 0] * x0 + cd[:, 1]) ** 2 + (cd[:, 0] * y0) ** 2
    return y0 / den


def orbit_reps_in_band(z0: complex, y_lo: float, y_hi: float):
    """Orbit points themselves (with real parts mod 1); the slower scalar
    path, kept for diagnostics and cross-checks."""
    x0, y0 = z0.real, z0.imag
    reps = {}

    def push(w: complex):
        key = (round(w.imag * 1e11), round((w.real % 1.0) * 1e11) % int(1e11))
        if key not in reps:
            reps[key] = complex(w.real % 1.0, w.imag)

    if y_lo <= y0 <= y_hi:
        push(z0)
    R2_hi = y0 / y_lo
    R2_lo = y0 / y_hi
    cmax = int(math.floor(math.sqrt(R2_hi) / y0))
    for c in range(1, cmax + 1):
        disc = R2_hi - (c * y0) ** 2
        if disc < 0:
            continue
        half = math.sqrt(disc)
        dlo = int(math.ceil(-c * x0 - half))
        dhi = int(math.floor(-c * x0 + half))
        for d in range(dlo, dhi + 1):
            if math.gcd(c, d) != 1:
                continue
            den = (c * x0 + d) ** 2 + (c * y0) ** 2
            if den < R2_lo or den > R2_hi:
                continue
            a, b = _completion(c, d)
            num = (a * z0 + b)
            w = num / (c * z0 + d)
            push(w)
    return list(reps.values())


# ---------------------------------------------------------------------------
# Scaled chord tables: with h = y_w e^eta the chord integral over a ball
# crossing is y_w * Jhat(eta) for a universal profile Jhat on [-rho, rho]
# (the center height cancels from the hyperbolic distance), so horocycle
# averages and their x-integrals reduce to weighted sums of orbit heights.
# ---------------------------------------------------------------------------

@lru_cache(maxsize=8)
def _jhat_tables(rho: float, n_grid: int = 8001, nodes: int = 48):
    eta = np.linspace(-rho, rho, n_grid)
    e = np.exp(eta)
    g2 = np.maximum(math.sinh(rho) ** 2 - (e - math.cosh(rho)) ** 2, 0.0)
    g = np.sqrt(g2)
    vi, wi = np.polynomial.legendre.leggauss(nodes)
    V = g[:, None] * vi[None, :]
    dist = np.arccosh(1.0 + (V * V + ((e - 1.0) ** 2)[:, None])
                      / (2.0 * e)[:, None])
    jhat = (profile_c2(dist / rho) @ wi) * g
    step = eta[1] - eta[0]
    cum0 = np.concatenate([[0.0], np.cumsum((jhat[1:] + jhat[:-1]) / 2)]) * step
    t1 = jhat * eta
    cum1 = np.concatenate([[0.0], np.cumsum((t1[1:] + t1[:-1]) / 2)]) * step
    return eta, jhat, cum0, cum1


def _cum_at(eta_grid, cum, q):
    return np.interp(np.clip(q, eta_grid[0], eta_grid[-1]), eta_grid, cum)


def closed_horocycle_average_table(bump: TestBump, h: float) -> float:
    """I(h) through the scaled chord table (fast path)."""
    if not bump.unfold_safe:
        raise InvalidParameter("ball lifts overlap; chord unfolding invalid")
    rho = bump.rho
    yw = orbit_heights_in_band(bump.center, h * math.exp(-rho),
                               h * math.exp(rho))
    if yw.size == 0:
        return 0.0
    eta_grid, jhat, _, _ = _jhat_tables(rho)
    return bump.peak * float(np.sum(
        yw * np.interp(np.log(h / yw), eta_grid, jhat)))


def arc_average_table(bump: TestBump, x: float, flip: float, eps0: float,
                      nodes: int = 24) -> float:
    """(1/2 eps0) integral over |xi| < eps0 of I(x^2 e^{flip xi}), summed per
    orbit point through the chord table."""
    if not bump.unfold_safe:
        raise InvalidParameter("ball lifts overlap; chord unfolding invalid")
    rho = bump.rho
    pad = abs(flip) * eps0
    yw = orbit_heights_in_band(bump.center, x * x * math.exp(-pad - rho),
                               x * x * math.exp(pad + rho))
    if yw.size == 0:
        return 0.0
    eta_grid, jhat, _, _ = _jhat_tables(rho)
    xi, wi = np.polynomial.legendre.leggauss(nodes)
    xi = xi * eps0
    wi = wi * eps0
    base = 2.0 * math.log(x) - np.log(yw)
    q = base[:, None] + flip * xi[None, :]
    vals = np.interp(np.clip(q, -rho, rho), eta_grid, jhat)
    # clip() parks out-of-window nodes at the endpoints where jhat vanishes
    per = vals @ wi
    return bump.peak * float(np.sum(yw * per)) / (2.0 * eps0)


def unfolded_d_integrals(bump: TestBump, eps0: float, flip: float,
                         x_lo: float, x_hi: float, nodes: int = 24):
    """The two boundary-distribution integrals over [x_lo, x_hi], unfolded
    per orbit point.

    Returns (direct_part, logderiv_part) where
      direct_part   = integral of F(x) dx/x over [x_lo, x_hi],
      logderiv_part = integral of F'(x) (-log x) dx over [x_lo, x_hi],
    with F the arc-smoothed transform.  Interior orbit points contribute the
    closed form y_w * M/2; window-clipped ones use the cumulative tables.
    """
    if not bump.unfold_safe:
        raise InvalidParameter("ball lifts overlap; chord unfolding invalid")
    rho = bump.rho
    a, b = 2.0 * math.log(x_lo), 2.0 * math.log(x_hi)
    pad = abs(flip) * eps0
    yw = orbit_heights_in_band(bump.center, math.exp(a - pad - rho),
                               math.exp(b + pad + rho))
    if yw.size == 0:
        return 0.0, 0.0
    eta_grid, jhat, cum0, cum1 = _jhat_tables(rho)
    M = cum0[-1]
    L = np.log(yw)
    interior = (L >= a + pad + rho) & (L <= b - pad - rho)
    direct = float(np.sum(yw[interior])) * M / 2.0
    logderiv = direct
    edge = ~interior
    if edge.any():
        ye, Le = yw[edge], L[edge]
        xi, wi = np.polynomial.legendre.leggauss(nodes)
        xi = xi * eps0
        wi = wi * eps0
        # direct: (1/2eps0) int dxi (1/2) [cum0(hi) - cum0(lo)]
        lo_q = a + flip * xi[None, :] - Le[:, None]
        hi_q = b + flip * xi[None, :] - Le[:, None]
        seg = _cum_at(eta_grid, cum0, hi_q) - _cum_at(eta_grid, cum0, lo_q)
        direct += float(np.sum(ye * (seg @ wi))) / (2.0 * eps0) / 2.0
        # logderiv: (1/(eps0*flip)) [A(+flip eps0) - A(-flip eps0)] with
        # A(sig) = sum y_w (1/2) int Jhat(eta) (-(eta - sig + L)/2) deta
        ld_edge = 0.0
        for sig in (flip * eps0, -flip * eps0):
            lo_q = np.maximum(a + sig - Le, -rho)
            hi_q = np.minimum(b + sig - Le, rho)
            c0 = _cum_at(eta_grid, cum0, hi_q) - _cum_at(eta_grid, cum0, lo_q)
            c1 = _cum_at(eta_grid, cum1, hi_q) - _cum_at(eta_grid, cum1, lo_q)
            A = -0.5 * float(np.sum(ye * 0.5 * (c1 + (Le - sig) * c0)))
            ld_edge += A if sig == flip * eps0 else -A
        logderiv += ld_edge / (eps0 * flip)
    return bump.peak * direct, bump.peak * logderiv


def arc_smoothed_horocycle_average(bump: TestBump, x: float, flip: float,
                                   eps0: float, nodes: int = 16) -> float:
    """(1/2 eps0) integral over |xi| < eps0 of the closed-horocycle average at
    height x^2 e^{flip * xi}, as one fused band computation.

    Per orbit point the (xi, chord) patch is smooth, so a tensor Gauss rule on
    each patch is exact to machine precision.
    """
    if x <= 0:
        raise InvalidParameter("x must be positive")
    if not bump.unfold_safe:
        raise InvalidParameter("ball lifts overlap; chord unfolding invalid")
    rho = bump.rho
    lo = x * x * math.exp(-abs(flip) * eps0 - rho)
    hi = x * x * math.exp(abs(flip) * eps0 + rho)
    yw = orbit_heights_in_band(bump.center, lo, hi)
    if yw.size == 0:
        return 0.0
    # xi-window of each orbit point: h(xi)/y_w within (e^-rho, e^rho)
    centers = (np.log(yw) - 2.0 * math.log(x)) / flip
    a = np.maximum(centers - rho / abs(flip), -eps0)
    b = np.minimum(centers + rho / abs(flip), eps0)
    keep = a < b
    if not keep.any():
        return 0.0
    yw, a, b = yw[keep], a[keep], b[keep]
    xi_nodes, xi_wts = np.polynomial.legendre.leggauss(nodes)
    u_nodes, u_wts = np.polynomial.legendre.leggauss(nodes)
    half = 0.5 * (b - a)
    XI = a[:, None] + half[:, None] * (xi_nodes[None, :] + 1.0)
    H = x * x * np.exp(flip * XI)                       # (reps, nodes)
    ecent = yw[:, None] * math.cosh(rho)
    erad = yw[:, None] * math.sinh(rho)
    X = np.sqrt(np.maximum(erad ** 2 - (H - ecent) ** 2, 0.0))
    # work = 1 + (U^2 + (H - y_w)^2) / (2 H y_w), minimal temporaries
    work = X[:, :, None] * u_nodes[None, None, :]
    work *= work
    work += ((H - yw[:, None]) ** 2)[:, :, None]
    work /= (2.0 * H * yw[:, None])[:, :, None]
    work += 1.0
    np.arccosh(work, out=work)
    work *= 1.0 / rho
    vals = profile_c2(work)
    chord = (vals @ u_wts) * X
    per_rep = (chord * xi_wts[None, :]).sum(axis=1) * half
    return bump.peak * float(per_rep.sum()) / (2.0 * eps0)


def closed_horocycle_average(bump: TestBump, h: float, nodes: int = 24) -> float:
    """Average of the bump over the closed horocycle at height h: the sum of
    chord integrals over the ball crossings of all orbit points in the band."""
    if h <= 0:
        raise InvalidParameter("height must be positive")
    if not bump.unfold_safe:
        raise InvalidParameter("ball lifts overlap; chord unfolding invalid")
    rho = bump.rho
    yw = orbit_heights_in_band(bump.center, h * math.exp(-rho),
                               h * math.exp(rho))
    if yw.size == 0:
        return 0.0
    ecent = yw * math.cosh(rho)
    erad = yw * math.sinh(rho)
    halfwidth_sq = erad ** 2 - (h - ecent) ** 2
    keep = halfwidth_sq > 0
    if not keep.any():
        return 0.0
    yw = yw[keep]
    X = np.sqrt(halfwidth_sq[keep])
    # Gauss-Legendre on each chord, same relative nodes for all
    xi, wi = np.polynomial.legendre.leggauss(nodes)
    u = X[:, None] * xi[None, :]
    dist = np.arccosh(1.0 + (u ** 2 + (h - yw[:, None]) ** 2)
                      / (2.0 * h * yw[:, None]))
    vals = profile_c2(dist / rho)
    chord = (vals * wi[None, :]).sum(axis=1) * X
    return bump.peak * float(chord.sum())
