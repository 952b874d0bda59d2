"""Elements of SL2 over the archimedean completion, and the constructive
subgroup decompositions used by the equidistribution experiments.

A GroupElement is a tuple of unimodular 2x2 blocks, real for the first l1
places and complex for the rest.  The three one-parameter families:

    a_s = [[(s+1/s)/2, (s-1/s)/2], [(s-1/s)/2, (s+1/s)/2]]   (s > 0, or complex)
    h_t = diag(t, 1/t)
    u_r = [[1, r], [0, 1]]   (sign +)      u_r^- = [[1, 0], [r, 1]]   (sign -)

The invariant big_T(g) = ||g.e1|| * ||g.e2|| (archimedean norms of the two
columns) is bi-invariant under the maximal compact on the left and the
diagonal subgroup on the right.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import InvalidParameter, OutOfRange, PreconditionNorm
from .util import wrap_angle

K45 = np.array([[1.0, -1.0], [1.0, 1.0]]) / math.sqrt(2.0)
_FLIP = np.array([[1.0, 0.0], [0.0, -1.0]])


class GroupElement:
    """Per-place 2x2 matrices; real for places < l1, complex after."""

    __slots__ = ("mats", "l1", "l2")

    def __init__(self, mats, l1: int, l2: int, check: bool = True):
        if len(mats) != l1 + l2:
            raise InvalidParameter("wrong number of places")
        self.mats = tuple(np.asarray(m) for m in mats)
        self.l1, self.l2 = l1, l2
        if check:
            for m in self.mats:
                if abs(np.linalg.det(m) - 1) > 1e-12:
                    raise InvalidParameter("component determinant != 1")

    @property
    def places(self) -> int:
        return self.l1 + self.l2

    def epsilons(self):
        return [1] * self.l1 + [2] * self.l2

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement([a @ b for a, b in zip(self.mats, other.mats)],
                            self.l1, self.l2, check=False)

    def inv(self) -> "GroupElement":
        out = []
        for m in self.mats:
            a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
            out.append(np.array([[d, -b], [-c, a]]))
        return GroupElement(out, self.l1, self.l2, check=False)

    def column(self, j: int):
        return [m[:, j] for m in self.mats]

    def max_abs_diff(self, other: "GroupElement") -> float:
        return max(float(np.max(np.abs(a - b)))
                   for a, b in zip(self.mats, other.mats))

    def to_json(self) -> str:
        payload = []
        for i, m in enumerate(self.mats):
            if i < self.l1:
                payload.append([[float(x) for x in row] for row in m])
            else:
                payload.append([[[float(x.real), float(x.imag)] for x in row]
                                for row in m])
        return json.dumps({"l1": self.l1, "l2": self.l2, "mats": payload})

    @staticmethod
    def from_json(text: str) -> "GroupElement":
        data = json.loads(text)
        mats = []
        for i, rows in enumerate(data["mats"]):
            if i < data["l1"]:
                mats.append(np.array(rows, dtype=float))
            else:
                mats.append(np.array([[complex(x[0], x[1]) for x in row]
                                      for row in rows]))
        return GroupElement(mats, data["l1"], data["l2"])

    def __repr__(self):
        return f"GroupElement(l1={self.l1}, l2={self.l2})"


def identity(l1: int, l2: int) -> GroupElement:
    mats = [np.eye(2) for _ in range(l1)] + \
           [np.eye(2, dtype=complex) for _ in range(l2)]
    return GroupElement(mats, l1, l2, check=False)


def _as_vec(x, places: int):
    if np.isscalar(x):
        return [x] * places
    x = list(x)
    if len(x) != places:
        raise InvalidParameter("parameter vector has wrong length")
    return x


def a_block(s) -> np.ndarray:
    dtype = complex if isinstance(s, complex) else float
    p, q = (s + 1 / s) / 2, (s - 1 / s) / 2
    return np.array([[p, q], [q, p]], dtype=dtype)


def h_block(t) -> np.ndarray:
    dtype = complex if isinstance(t, complex) else float
    return np.array([[t, 0], [0, 1 / t]], dtype=dtype)


def u_block(r, sign: str = "+") -> np.ndarray:
    dtype = complex if isinstance(r, complex) else float
    if sign == "+":
        return np.array([[1, r], [0, 1]], dtype=dtype)
    return np.array([[1, 0], [r, 1]], dtype=dtype)


def make_a(s_vec, l1: int = 1, l2: int = 0) -> GroupElement:
    vals = _as_vec(s_vec, l1 + l2)
    for i, s in enumerate(vals[:l1]):
        if not (np.isreal(s) and s > 0):
            raise InvalidParameter("real-place a parameter must be positive")
        vals[i] = float(np.real(s))
    if any(s == 0 for s in vals):
        raise InvalidParameter("zero a parameter")
    mats = [a_block(s) for s in vals[:l1]] + \
           [a_block(complex(s)) for s in vals[l1:]]
    return GroupElement(mats, l1, l2, check=False)


def make_h(t_vec, l1: int = 1, l2: int = 0) -> GroupElement:
    vals = _as_vec(t_vec, l1 + l2)
    if any(t == 0 for t in vals):
        raise InvalidParameter("zero diagonal parameter")
    mats = [h_block(float(np.real(t))) for t in vals[:l1]] + \
           [h_block(complex(t)) for t in vals[l1:]]
    return GroupElement(mats, l1, l2, check=False)


def make_u(r_vec, sign: str = "+", l1: int = 1, l2: int = 0) -> GroupElement:
    vals = _as_vec(r_vec, l1 + l2)
    mats = [u_block(float(np.real(r)), sign) for r in vals[:l1]] + \
           [u_block(complex(r), sign) for r in vals[l1:]]
    return GroupElement(mats, l1, l2, check=False)


def big_T(g: GroupElement) -> float:
    """Product of archimedean norms of the two column actions."""
    out = 1.0
    for m, eps in zip(g.mats, g.epsilons()):
        n1 = float(np.linalg.norm(m[:, 0]))
        n2 = float(np.linalg.norm(m[:, 1]))
        out *= (n1 * n2) ** eps
    return out


# ---------------------------------------------------------------------------
# KAU decomposition of a single real place: g = k a_lambda u_r^{sign}
# ---------------------------------------------------------------------------

@dataclass
class KAUResult:
    k: np.ndarray
    lam: float
    r: float
    sign: str

    def reconstruct(self) -> np.ndarray:
        return self.k @ a_block(self.lam) @ u_block(self.r, self.sign)


def _rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def kau_decompose(g, sign: str = "+") -> KAUResult:
    """Rotate the relevant column onto the unit-hyperbola branch traced by the
    a-family, then read off the diagonal part and solve for the unipotent.

    Among the candidate rotation angles the one of smallest absolute value is
    chosen (ties toward positive), which makes the output deterministic.
    """
    g = np.asarray(g, dtype=float)
    if abs(np.linalg.det(g) - 1) > 1e-9:
        raise InvalidParameter("input must have determinant 1")
    col = g[:, 0] if sign == "+" else g[:, 1]
    rho2 = float(col @ col)
    if rho2 < 1.0 - 1e-12:
        raise PreconditionNorm(
            f"column norm {math.sqrt(rho2):.6f} < 1 for sign {sign}")
    rho2 = max(rho2, 1.0)
    psi = math.atan2(col[1], col[0])
    if sign == "+":
        # branch {x^2 - y^2 = 1, x > 0}: rotated angle alpha has
        # cos(2 alpha) = 1/rho^2 with cos(alpha) > 0
        alpha0 = 0.5 * math.acos(min(1.0, 1.0 / rho2))
    else:
        # branch {y^2 - x^2 = 1, y > 0}: cos(2 alpha) = -1/rho^2, sin(alpha) > 0
        alpha0 = 0.5 * math.acos(max(-1.0, -1.0 / rho2))
    candidates = [wrap_angle(psi - alpha0), wrap_angle(psi + alpha0)]
    if sign == "-":
        candidates = [wrap_angle(psi - alpha0), wrap_angle(psi - (math.pi - alpha0))]
    theta = min(candidates, key=lambda t: (abs(t), -t))
    k = _rotation(theta)
    point = k.T @ col
    lam = float(point[0] + point[1]) if sign == "+" else float(point[1] + point[0])
    # for sign '-': point = (sinh w, cosh w) so lam = e^w = point[1] + point[0]
    if lam <= 0:
        raise PreconditionNorm("diagonal part not positive")
    u = a_block(1.0 / lam) @ k.T @ g
    r = float(u[0, 1]) if sign == "+" else float(u[1, 0])
    return KAUResult(k=k, lam=lam, r=r, sign=sign)


# ---------------------------------------------------------------------------
# KHU decomposition: g = b^{-1} h1^{-1} hdelta_s u      (u upper or lower)
# ---------------------------------------------------------------------------

@dataclass
class KHUResult:
    b: GroupElement          # maximal-compact part
    s: float                 # scalar-diagonal ray parameter
    h1: GroupElement         # norm-one diagonal part
    u: GroupElement          # unipotent part (sign decides upper/lower)
    sign: str

    def reconstruct(self) -> GroupElement:
        hd = make_h([self.s] * self.h1.places, self.h1.l1, self.h1.l2)
        return self.b.inv() @ self.h1.inv() @ hd @ self.u


def _compact_to_e1(col) -> tuple[np.ndarray, float]:
    """Rotation/unitary b with b @ col = lam * e1, lam > 0."""
    lam = float(np.linalg.norm(col))
    if lam == 0:
        raise InvalidParameter("zero column")
    if np.iscomplexobj(col):
        p, q = col[0], col[1]
        b = np.array([[np.conj(p), np.conj(q)], [-q, p]]) / lam
    else:
        psi = math.atan2(col[1], col[0])
        b = _rotation(-psi)
    return b, lam


def _compact_to_e2(col) -> tuple[np.ndarray, float]:
    lam = float(np.linalg.norm(col))
    if lam == 0:
        raise InvalidParameter("zero column")
    if np.iscomplexobj(col):
        p, q = col[0], col[1]
        b = np.array([[q, -p], [np.conj(p), np.conj(q)]]) / lam
    else:
        psi = math.atan2(col[1], col[0])
        b = _rotation(math.pi / 2 - psi)
    return b, lam


def khu_decompose(g: GroupElement, sign: str = "+") -> KHUResult:
    """Per place, find the compact element sending the pinned column to a
    positive multiple of the basis vector it stabilizes; the norm-one and
    scalar diagonal parts then balance the per-place scalings."""
    l = g.l1 + 2 * g.l2
    bs, lams = [], []
    for j, m in enumerate(g.mats):
        col = m[:, 0] if sign == "+" else m[:, 1]
        b, lam = (_compact_to_e1(col) if sign == "+" else _compact_to_e2(col))
        bs.append(b)
        lams.append(lam)
    eps = g.epsilons()
    lam_total = 1.0
    for lam, e in zip(lams, eps):
        lam_total *= lam ** e
    root = lam_total ** (1.0 / l)
    if sign == "+":
        s = root
        s_vec = [root / lam for lam in lams]
    else:
        s = 1.0 / root
        s_vec = [lam / root for lam in lams]
    b = GroupElement(bs, g.l1, g.l2, check=False)
    h1 = make_h(s_vec, g.l1, g.l2)
    hd = make_h([s] * g.places, g.l1, g.l2)
    # with s_vec as above, (hd^-1 h1 b g) fixes the pinned basis vector
    u = hd.inv() @ h1 @ b @ g
    return KHUResult(b=b, s=s, h1=h1, u=u, sign=sign)


# ---------------------------------------------------------------------------
# Thickening objects: w_r matrices, central-stable distance, local charts
# ---------------------------------------------------------------------------

def w_matrix(r: float, sign: str = "+") -> np.ndarray:
    """(1/floor|r|) u_r^{sign} diag(1,-1) (u_r^{sign})^{-1}; defined for |r| >= 100.

    The lower-triangular case carries +2r off the diagonal (the conjugation
    identity exp(eta w) = u h u^{-1} pins the sign)."""
    if abs(r) < 100:
        raise OutOfRange(f"|r| = {abs(r)} < 100")
    fl = math.floor(abs(r))
    if sign == "+":
        return np.array([[1.0 / fl, -2.0 * r / fl], [0.0, -1.0 / fl]])
    return np.array([[1.0 / fl, 0.0], [2.0 * r / fl, -1.0 / fl]])


def _central_stable_basis(varstar: str, complex_place: bool = False):
    dt = complex if complex_place else float
    b1 = K45 @ np.array([[1, 0], [0, -1]], dtype=dt) @ K45.T
    n = np.array([[0, 1], [0, 0]], dtype=dt) if varstar == "+" else \
        np.array([[0, 0], [1, 0]], dtype=dt)
    b2 = K45 @ n @ K45.T
    return b1, b2


def dist_to_central_stable(w, varstar: str = "+") -> float:
    """Frobenius distance (tr(AB^T) metric; real part of tr(AB*) on complex
    places) from w to the conjugated central-stable 2-plane."""
    w = np.asarray(w)
    cplx = np.iscomplexobj(w)
    b1, b2 = _central_stable_basis(varstar, cplx)

    def ip(a, b):
        return float(np.real(np.sum(a * np.conj(b))))

    # b1, b2 are orthogonal in this metric; project and measure the residue
    c1 = ip(w, b1) / ip(b1, b1)
    c2 = ip(w, b2) / ip(b2, b2)
    resid = w - c1 * b1 - c2 * b2
    return math.sqrt(ip(resid, resid))


def h_twisted_block(r: float, eta, varstar: str = "+") -> np.ndarray:
    """exp(eta * w_r^{varstar}) when |r| >= 100, else diag(e^eta, e^-eta)."""
    if abs(r) >= 100:
        return expm(eta * w_matrix(r, varstar).astype(
            complex if isinstance(eta, complex) else float))
    return h_block(np.exp(eta))


def v_block(gamma, star: str = "+") -> np.ndarray:
    return K45 @ u_block(gamma, star) @ K45.T


@dataclass
class ChartPoint:
    """Per-place chart coordinates, each bounded by eps0."""

    theta: tuple
    gamma: tuple
    eta: tuple
    l1: int = 1
    l2: int = 0

    def check_bounds(self, eps0: float):
        for tup in (self.theta, self.gamma, self.eta):
            for v in tup:
                if max(abs(np.real(v)), abs(np.imag(v))) >= eps0:
                    raise OutOfRange(f"chart coordinate {v} outside eps0={eps0}")


def chart(r_vec, star_vec, varstar_vec, p: ChartPoint,
          eps0: float = 0.1) -> GroupElement:
    """Local chart a_{e^theta} v_gamma^star h^{r,varstar}_{e^eta} per place."""
    places = p.l1 + p.l2
    rs = _as_vec(r_vec, places)
    stars = _as_vec(star_vec, places) if not isinstance(star_vec, str) \
        else [star_vec] * places
    varstars = _as_vec(varstar_vec, places) if not isinstance(varstar_vec, str) \
        else [varstar_vec] * places
    p.check_bounds(eps0)
    mats = []
    for j in range(places):
        cplx = j >= p.l1
        th = complex(p.theta[j]) if cplx else float(np.real(p.theta[j]))
        ga = complex(p.gamma[j]) if cplx else float(np.real(p.gamma[j]))
        et = complex(p.eta[j]) if cplx else float(np.real(p.eta[j]))
        m = a_block(np.exp(th)) @ v_block(ga, stars[j]) @ \
            h_twisted_block(float(rs[j]), et, varstars[j])
        mats.append(m)
    return GroupElement(mats, p.l1, p.l2, check=False)


def random_sl2(rng, bound: float = 5.0) -> np.ndarray:
    """Entries uniform in [-bound, bound], last entry solved for det 1."""
    for _ in range(1000):
        a, b, c = rng.uniform(-bound, bound, size=3)
        if abs(a) > 1e-3:
            d = (1 + b * c) / a
            if abs(d) <= bound * 4:
                return np.array([[a, b], [c, d]])
    raise InvalidParameter("failed to sample")
