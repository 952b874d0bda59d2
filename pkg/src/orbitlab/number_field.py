"""Number field data: archimedean embeddings, norms, integer lattice, units.

Only the rational field and quadratic fields are constructible.  Everything
downstream consumes the (l1, l2, embeddings, lattice, units) interface, so
other degrees would slot in additively.

Field elements carry exact rational coordinates in the integral basis
(1, omega) with omega = sqrt(d), or (1+sqrt(d))/2 when d = 1 mod 4; all
arithmetic is exact until an element is embedded.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .errors import ConfigInvalid, InvalidParameter, ZeroSlot

_EMBED_DIGITS = 50  # defining roots evaluated once at high precision, cached


@dataclass(frozen=True)
class FieldElement:
    """Exact rational coordinates in the integral basis."""

    coords: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords",
                           tuple(Fraction(c) for c in self.coords))


@dataclass(frozen=True)
class ArchVector:
    """A point of R^{l1} x C^{l2}, one slot per infinite place."""

    reals: tuple[float, ...]
    complexes: tuple[complex, ...]

    def slots(self):
        return list(self.reals) + list(self.complexes)


def _is_squarefree(n: int) -> bool:
    n = abs(n)
    k = 2
    while k * k <= n:
        if n % (k * k) == 0:
            return False
        k += 1
    return True


class NumberFieldSpec:
    """The rational field or a quadratic field Q(sqrt(d)), d squarefree."""

    def __init__(self, kind: str, d: int | None = None):
        if kind == "rational":
            self.kind, self.d = "rational", None
            self.l1, self.l2 = 1, 0
        elif kind == "quadratic":
            if d is None or d in (0, 1) or not _is_squarefree(d):
                raise InvalidParameter(f"d must be squarefree, not 0/1: {d}")
            self.kind, self.d = "quadratic", int(d)
            if d > 0:
                self.l1, self.l2 = 2, 0
            else:
                self.l1, self.l2 = 0, 1
        else:
            raise InvalidParameter(f"unknown field kind {kind!r}")
        self.degree = self.l1 + 2 * self.l2
        self._omega_embeddings = self._compute_omega_embeddings()
        self.integral_basis = self._integral_basis()
        self.fundamental_units = self._fundamental_units()
        self._check_invariants()

    # -- construction helpers -------------------------------------------------

    @property
    def places(self) -> int:
        return self.l1 + self.l2

    def _omega_is_half(self) -> bool:
        # integral basis uses omega = (1+sqrt(d))/2 iff d = 1 mod 4
        return self.kind == "quadratic" and self.d % 4 == 1

    def _compute_omega_embeddings(self):
        if self.kind == "rational":
            return ()
        with mpmath.workdps(_EMBED_DIGITS):
            root = mpmath.sqrt(abs(self.d))
            if self.d > 0:
                vals = (root, -root)
            else:
                vals = (mpmath.mpc(0, root),)
            if self._omega_is_half():
                vals = tuple((1 + v) / 2 for v in vals)
            if self.d > 0:
                return tuple(float(v) for v in vals)
            return tuple(complex(v) for v in vals)

    def _integral_basis(self):
        if self.kind == "rational":
            return [FieldElement((Fraction(1),))]
        return [FieldElement((Fraction(1), Fraction(0))),
                FieldElement((Fraction(0), Fraction(1)))]

    def _fundamental_units(self):
        if self.kind == "rational" or (self.d is not None and self.d < 0):
            return []
        return [self._real_quadratic_unit()]

    def _real_quadratic_unit(self) -> FieldElement:
        """Smallest unit > 1, from continued-fraction convergents of omega."""
        with mpmath.workdps(4 * _EMBED_DIGITS):
            omega = mpmath.sqrt(self.d)
            if self._omega_is_half():
                omega = (1 + omega) / 2
            candidates = []
            # basis coefficients of small elements with |Nm| = 1
            for a in range(0, 40):
                for b in range(-40, 41):
                    if (a, b) == (0, 0):
                        continue
                    el = FieldElement((Fraction(a), Fraction(b)))
                    if abs(self.field_norm(el)) == 1:
                        candidates.append(el)
            # continued-fraction convergents of omega for larger units
            x = omega
            h0, h1 = mpmath.mpf(1), mpmath.floor(x)
            k0, k1 = mpmath.mpf(0), mpmath.mpf(1)
            for _ in range(60):
                frac = x - mpmath.floor(x)
                if frac == 0:
                    break
                x = 1 / frac
                a_i = mpmath.floor(x)
                h0, h1 = h1, a_i * h1 + h0
                k0, k1 = k1, a_i * k1 + k0
                p, q = int(h1), int(k1)
                for coords in ((p, -q), (p, q), (-p, q)):
                    el = FieldElement((Fraction(coords[0]), Fraction(coords[1])))
                    if abs(self.field_norm(el)) == 1:
                        candidates.append(el)
            # high precision here: convergent candidates have huge coordinates
            # and their first embedding cancels catastrophically in doubles
            best = None
            best_val = None
            for el in candidates:
                a, b = el.coords
                v = abs(mpmath.mpf(a.numerator) / a.denominator
                        + (mpmath.mpf(b.numerator) / b.denominator) * omega)
                if v > 1 + mpmath.mpf("1e-30") and (best_val is None or v < best_val):
                    best, best_val = el, v
        if best is None:
            raise InvalidParameter(f"no fundamental unit found for d={self.d}")
        return best

    def _check_invariants(self):
        assert self.degree == self.l1 + 2 * self.l2
        for u in self.fundamental_units:
            assert abs(self.field_norm(u)) == 1

    # -- exact arithmetic ------------------------------------------------------

    def element(self, *coords) -> FieldElement:
        want = 1 if self.kind == "rational" else 2
        if len(coords) != want:
            raise InvalidParameter(f"expected {want} coordinates")
        return FieldElement(tuple(Fraction(c) for c in coords))

    def mul(self, x: FieldElement, y: FieldElement) -> FieldElement:
        if self.kind == "rational":
            return FieldElement((x.coords[0] * y.coords[0],))
        a, b = x.coords
        c, d_ = y.coords
        if self._omega_is_half():
            # omega^2 = omega + (d-1)/4
            t = Fraction(self.d - 1, 4)
            return FieldElement((a * c + b * d_ * t, a * d_ + b * c + b * d_))
        return FieldElement((a * c + b * d_ * self.d, a * d_ + b * c))

    def conj(self, x: FieldElement) -> FieldElement:
        """The nontrivial Galois conjugate (identity on Q)."""
        if self.kind == "rational":
            return x
        a, b = x.coords
        if self._omega_is_half():
            return FieldElement((a + b, -b))
        return FieldElement((a, -b))

    def field_norm(self, x: FieldElement) -> Fraction:
        if self.kind == "rational":
            return x.coords[0]
        a, b = x.coords
        if self._omega_is_half():
            return a * a + a * b + b * b * Fraction(1 - self.d, 4)
        return a * a - self.d * b * b

    def trace(self, x: FieldElement) -> Fraction:
        if self.kind == "rational":
            return x.coords[0]
        a, b = x.coords
        if self._omega_is_half():
            return 2 * a + b
        return 2 * a

    def discriminant(self) -> int:
        if self.kind == "rational":
            return 1
        return self.d if self._omega_is_half() else 4 * self.d

    # -- embeddings ------------------------------------------------------------

    def embed(self, x: FieldElement) -> ArchVector:
        """Archimedean embedding: one real slot per real place, one complex
        slot per conjugate pair."""
        if self.kind == "rational":
            return ArchVector((float(x.coords[0]),), ())
        a, b = float(x.coords[0]), float(x.coords[1])
        if self.d > 0:
            vals = tuple(a + b * w for w in self._omega_embeddings)
            return ArchVector(vals, ())
        w = self._omega_embeddings[0]
        return ArchVector((), (a + b * w,))

    # -- serialization ---------------------------------------------------------

    def to_json(self) -> str:
        if self.kind == "rational":
            return json.dumps({"kind": "rational"})
        return json.dumps({"kind": "quadratic", "d": self.d})

    @staticmethod
    def from_json(text: str) -> "NumberFieldSpec":
        data = json.loads(text)
        return NumberFieldSpec(data["kind"], data.get("d"))

    @staticmethod
    def parse(label: str) -> "NumberFieldSpec":
        """Parse CLI labels: 'rational' or 'quadratic:d'."""
        if label == "rational":
            return NumberFieldSpec("rational")
        if label.startswith("quadratic:"):
            try:
                return NumberFieldSpec("quadratic", int(label.split(":", 1)[1]))
            except ValueError as e:
                raise ConfigInvalid(f"bad field label {label!r}") from e
        raise ConfigInvalid(f"bad field label {label!r}")

    def __repr__(self):
        return f"NumberFieldSpec({self.kind}{'' if self.d is None else ', d=%d' % self.d})"


def rational_field() -> NumberFieldSpec:
    return NumberFieldSpec("rational")


def quadratic_field(d: int) -> NumberFieldSpec:
    return NumberFieldSpec("quadratic", d)


def arch_norm(spec: NumberFieldSpec, v) -> float:
    """Product over places of Euclidean norms, complex places squared.

    v is an ArchVector (a point of the field at infinity) or a sequence of
    ArchVectors read as a vector with one coordinate per ArchVector; at each
    place the Euclidean norm on R^n / C^n is taken.
    """
    vecs = [v] if isinstance(v, ArchVector) else list(v)
    out = 1.0
    for i in range(spec.l1):
        out *= math.sqrt(sum(w.reals[i] ** 2 for w in vecs))
    for j in range(spec.l2):
        out *= sum(abs(w.complexes[j]) ** 2 for w in vecs)
    return out


def nm_map(spec: NumberFieldSpec, t: ArchVector) -> float:
    """prod |t_i| * prod |t_{l1+j}|^2; the norm-one subgroup is its kernel."""
    out = 1.0
    for x in t.reals:
        if x == 0:
            raise ZeroSlot("zero real slot")
        out *= abs(x)
    for z in t.complexes:
        if z == 0:
            raise ZeroSlot("zero complex slot")
        out *= abs(z) ** 2
    return out


def embed(spec: NumberFieldSpec, x: FieldElement) -> ArchVector:
    return spec.embed(x)


def ok_lattice(spec: NumberFieldSpec):
    """Rank-l lattice spanned by the embedded integral basis (real basis
    e_1..e_{l1}, then Re/Im pairs for complex places)."""
    from .torus_lines import lattice_from_field
    return lattice_from_field(spec)
