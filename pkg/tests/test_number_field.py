import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from orbitlab.errors import InvalidParameter, ZeroSlot
from orbitlab.number_field import (ArchVector, NumberFieldSpec, arch_norm,
                                   nm_map, ok_lattice, quadratic_field,
                                   rational_field)


def bisect_sqrt(n, digits=15):
    """Independent root of x^2 = n by bisection."""
    lo, hi = 0.0, float(n) + 1.0
    for _ in range(200):
        mid = (lo + hi) / 2
        if mid * mid < n:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def test_embed_rational_identity():
    q = rational_field()
    v = q.embed(q.element(3))
    assert v.reals == (3.0,)


def test_embed_sqrt2():
    q2 = quadratic_field(2)
    v = q2.embed(q2.element(1, 1))
    root = bisect_sqrt(2)
    assert abs(v.reals[0] - (1 + root)) < 1e-12
    assert abs(v.reals[1] - (1 - root)) < 1e-12


def test_embed_gaussian():
    qi = quadratic_field(-1)
    v = qi.embed(qi.element(1, 1))
    assert v.complexes == (1 + 1j,)


def test_arch_norm_examples():
    q = rational_field()
    vec = [ArchVector((1.0,), ()), ArchVector((0.0,), ()), ArchVector((0.0,), ())]
    assert arch_norm(q, vec) == 1.0

    q2 = quadratic_field(2)
    v = q2.embed(q2.element(1, 1))
    # |Nm(1+sqrt2)| = 1 exactly
    assert abs(arch_norm(q2, v) - 1.0) < 1e-12
    assert abs(q2.field_norm(q2.element(1, 1))) == 1

    qi = quadratic_field(-1)
    vi = qi.embed(qi.element(1, 1))
    assert abs(arch_norm(qi, vi) - 2.0) < 1e-12
    assert qi.field_norm(qi.element(1, 1)) == 2


def test_nm_map_examples():
    q = rational_field()
    assert nm_map(q, ArchVector((5.0,), ())) == 5.0
    assert nm_map(q, ArchVector((-2.0,), ())) == 2.0
    q2 = quadratic_field(2)
    assert abs(nm_map(q2, q2.embed(q2.element(1, 1))) - 1.0) < 1e-12
    with pytest.raises(ZeroSlot):
        nm_map(q, ArchVector((0.0,), ()))


@settings(max_examples=200, deadline=None)
@given(st.integers(-30, 30), st.integers(-30, 30),
       st.integers(-30, 30), st.integers(-30, 30))
def test_arch_norm_multiplicative(a, b, c, d):
    q2 = quadratic_field(2)
    x, y = q2.element(a, b), q2.element(c, d)
    nx = arch_norm(q2, q2.embed(x))
    ny = arch_norm(q2, q2.embed(y))
    nxy = arch_norm(q2, q2.embed(q2.mul(x, y)))
    assert nxy == pytest.approx(nx * ny, rel=1e-10, abs=1e-12)


@pytest.mark.parametrize("d", [2, 3, 5, -1, -3])
def test_integer_norms_at_least_one(d):
    q = quadratic_field(d)
    rng = np.random.default_rng(5)
    for _ in range(200):
        a, b = rng.integers(-20, 21, size=2)
        if a == 0 and b == 0:
            continue
        assert arch_norm(q, q.embed(q.element(int(a), int(b)))) >= 1 - 1e-10


@pytest.mark.parametrize("d", [2, 3, 5, 13])
def test_fundamental_unit_norm_one(d):
    q = quadratic_field(d)
    assert q.fundamental_units
    for u in q.fundamental_units:
        assert abs(q.field_norm(u)) == 1
        assert nm_map(q, q.embed(u)) == pytest.approx(1.0, abs=1e-12)


def test_imaginary_quadratic_has_no_units():
    assert quadratic_field(-1).fundamental_units == []
    assert quadratic_field(-7).fundamental_units == []


@pytest.mark.parametrize("d,disc", [(2, 8), (3, 12), (5, 5), (-1, -4), (-3, -3)])
def test_lattice_covolume_is_sqrt_disc(d, disc):
    q = quadratic_field(d)
    assert q.discriminant() == disc
    lat = ok_lattice(q)
    # the (Re, Im) real basis carries the standard 2^-l2 convention factor
    expected = math.sqrt(abs(disc)) / 2 ** q.l2
    assert lat.covolume() == pytest.approx(expected, rel=1e-12)
    assert lat.L0 == abs(disc)


def test_lattice_examples():
    lat = ok_lattice(rational_field())
    assert lat.basis.shape == (1, 1) and lat.basis[0, 0] == 1.0
    lat2 = ok_lattice(quadratic_field(2))
    assert np.allclose(lat2.basis[:, 0], [1.0, 1.0])
    assert np.allclose(lat2.basis[:, 1], [math.sqrt(2), -math.sqrt(2)])
    lati = ok_lattice(quadratic_field(-1))
    assert np.allclose(lati.basis, np.eye(2))


def test_json_round_trip():
    for spec in (rational_field(), quadratic_field(2), quadratic_field(-1)):
        back = NumberFieldSpec.from_json(spec.to_json())
        assert back.kind == spec.kind and back.d == spec.d


def test_degree_invariant_and_validation():
    q2 = quadratic_field(2)
    assert q2.degree == q2.l1 + 2 * q2.l2 == 2
    qi = quadratic_field(-1)
    assert (qi.l1, qi.l2) == (0, 1)
    with pytest.raises(InvalidParameter):
        quadratic_field(4)    # not squarefree
    with pytest.raises(InvalidParameter):
        quadratic_field(1)


def test_trace_and_conj_consistency():
    for d in (2, 5, -1):
        q = quadratic_field(d)
        x = q.element(3, Fraction(7, 1))
        tr = q.trace(x)
        emb = q.embed(x)
        total = sum(emb.reals) + sum(2 * z.real for z in emb.complexes)
        assert float(tr) == pytest.approx(total, rel=1e-12)
