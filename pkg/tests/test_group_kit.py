import math

import numpy as np
import pytest

from orbitlab.errors import OutOfRange, PreconditionNorm
from orbitlab.group_kit import (GroupElement, KAUResult, a_block, big_T,
                                chart, ChartPoint, dist_to_central_stable,
                                h_block, h_twisted_block, identity,
                                kau_decompose, khu_decompose, make_a, make_h,
                                make_u, random_sl2, u_block, w_matrix)

RNG = np.random.default_rng(20240901)


def test_make_a_identity():
    assert np.allclose(make_a(1.0).mats[0], np.eye(2))


def test_make_h_example():
    assert np.allclose(make_h(2.0).mats[0], np.diag([2.0, 0.5]))


def test_make_a_three():
    m = make_a(3.0).mats[0]
    assert np.allclose(m, np.array([[5 / 3, 4 / 3], [4 / 3, 5 / 3]]))


def test_big_T_examples():
    assert big_T(identity(1, 0)) == pytest.approx(1.0)
    assert big_T(make_h(2.0)) == pytest.approx(1.0)
    assert big_T(make_a(3.0)) == pytest.approx(41 / 9)


def test_big_T_H_invariance():
    for _ in range(50):
        g = GroupElement([random_sl2(RNG)], 1, 0)
        h = make_h(float(RNG.uniform(0.2, 5.0)))
        assert big_T(g @ h) == pytest.approx(big_T(g), rel=1e-10)


def test_big_T_K0_invariance():
    for _ in range(50):
        g = GroupElement([random_sl2(RNG)], 1, 0)
        th = float(RNG.uniform(0, 2 * math.pi))
        k = GroupElement([np.array([[math.cos(th), -math.sin(th)],
                                    [math.sin(th), math.cos(th)]])], 1, 0)
        assert big_T(k @ g) == pytest.approx(big_T(g), rel=1e-10)


def test_kau_a2_trivial():
    res = kau_decompose(a_block(2.0), "+")
    assert np.allclose(res.k, np.eye(2), atol=1e-12)
    assert res.lam == pytest.approx(2.0)
    assert res.r == pytest.approx(0.0, abs=1e-12)


def test_kau_h2_reconstruction_and_angle():
    g = h_block(2.0)
    res = kau_decompose(g, "+")
    assert np.max(np.abs(res.reconstruct() - g)) < 1e-10
    # the rotation angle satisfies cos(2 theta) = 1/rho^2 = 1/4
    theta = math.atan2(res.k[1, 0], res.k[0, 0])
    assert math.cos(2 * theta) == pytest.approx(0.25, abs=1e-12)


def test_kau_precondition():
    with pytest.raises(PreconditionNorm):
        kau_decompose(h_block(0.05), "+")   # ||g.e1|| = 0.05 < 1
    # the mirrored decomposition exists
    res = kau_decompose(h_block(0.05), "-")
    assert np.max(np.abs(res.reconstruct() - h_block(0.05))) < 1e-10


def test_kau_lower_bound_on_r():
    # |r| + 1 >= t^-2 on an admissible grid, and t <= 1/11 forces |r| >= 100
    for s in np.geomspace(30.0, 300.0, 12):
        for t in np.geomspace(1 / 20, 1 / 11.5, 8):
            g = a_block(float(s)) @ h_block(float(t))
            if np.linalg.norm(g[:, 0]) < 1.0:
                continue
            res = kau_decompose(g, "+")
            assert abs(res.r) + 1 >= t ** -2 * (1 - 1e-9)
            assert abs(res.r) >= 100


def test_kau_random_roundtrip():
    done = 0
    while done < 300:
        g = random_sl2(RNG)
        for sign, col in (("+", 0), ("-", 1)):
            if np.linalg.norm(g[:, col]) >= 1.0:
                res = kau_decompose(g, sign)
                assert np.max(np.abs(res.reconstruct() - g)) < 1e-9
                done += 1


def test_khu_identity_and_u5():
    res = khu_decompose(identity(1, 0))
    assert res.s == pytest.approx(1.0)
    assert np.allclose(res.u.mats[0], np.eye(2))
    res5 = khu_decompose(make_u(5.0))
    assert res5.s == pytest.approx(1.0)
    assert np.allclose(res5.b.mats[0], np.eye(2))
    assert np.allclose(res5.h1.mats[0], np.eye(2))
    assert np.allclose(res5.u.mats[0], u_block(5.0))


def test_khu_two_places():
    g = make_a([3.0, 3.0], 2, 0)
    res = khu_decompose(g, "+")
    assert res.reconstruct().max_abs_diff(g) < 1e-12
    # nm of the norm-one part is 1
    prod = np.prod([m[0, 0] for m in res.h1.mats])
    assert prod == pytest.approx(1.0)


def test_khu_random_roundtrip_both_signs():
    for _ in range(200):
        g = GroupElement([random_sl2(RNG)], 1, 0)
        for sign in ("+", "-"):
            res = khu_decompose(g, sign)
            assert res.reconstruct().max_abs_diff(g) < 1e-9


def test_khu_complex_place():
    m = np.array([[1 + 0.5j, 0.3 - 0.2j], [0.1j, 0.0]], dtype=complex)
    m[1, 1] = (1 + m[0, 1] * m[1, 0]) / m[0, 0]
    g = GroupElement([m], 0, 1)
    for sign in ("+", "-"):
        res = khu_decompose(g, sign)
        assert res.reconstruct().max_abs_diff(g) < 1e-9


def test_w_matrix_values():
    assert np.allclose(w_matrix(100, "+"),
                       np.array([[0.01, -2.0], [0.0, -0.01]]))
    assert np.allclose(w_matrix(-150.5, "+"),
                       np.array([[1 / 150, 2 * 150.5 / 150], [0, -1 / 150]]))
    with pytest.raises(OutOfRange):
        w_matrix(50, "+")


def test_w_matrix_definition():
    # (1/floor|r|) u_r diag(1,-1) u_r^{-1}
    for r in (100.0, 123.456, -500.2):
        for sign in ("+", "-"):
            u = u_block(r, sign)
            ref = np.linalg.multi_dot([u, np.diag([1.0, -1.0]),
                                       np.linalg.inv(u)]) / math.floor(abs(r))
            assert np.allclose(w_matrix(r, sign), ref, atol=1e-12)


def test_dist_to_central_stable():
    assert dist_to_central_stable(np.zeros((2, 2)), "+") == 0.0
    d = dist_to_central_stable(np.array([[0.0, -2.0], [0.0, 0.0]]), "+")
    assert d >= 1 / 3 - 1e-10
    assert dist_to_central_stable(w_matrix(100, "+"), "+") >= 0.1


def test_wavefront_grid():
    rs = np.geomspace(100, 1e5, 500)
    for sign in ("+", "-"):
        for varstar in ("+", "-"):
            dmin = min(dist_to_central_stable(w_matrix(float(r), sign), varstar)
                       for r in rs)
            assert dmin >= 0.1


def test_h_twisted_consistency():
    # exp(eta w_r) = u_r h_{e^{eta/floor|r|}} u_r^{-1}
    for r in (100.0, 250.7):
        for sign in ("+", "-"):
            for eta in (0.05, -0.08):
                lhs = h_twisted_block(r, eta, sign)
                u = u_block(r, sign)
                rhs = u @ h_block(math.exp(eta / math.floor(abs(r)))) @ \
                    np.linalg.inv(u)
                assert np.max(np.abs(lhs - rhs)) < 1e-10


def test_chart_identity_and_degenerate():
    p0 = ChartPoint(theta=(0.0,), gamma=(0.0,), eta=(0.0,))
    g = chart([1.0], "+", "+", p0)
    assert np.allclose(g.mats[0], np.eye(2), atol=1e-14)
    p1 = ChartPoint(theta=(0.099,), gamma=(0.0,), eta=(0.0,))
    g1 = chart([1.0], "+", "+", p1)
    assert np.allclose(g1.mats[0], a_block(math.exp(0.099)), atol=1e-13)


def test_chart_product_and_determinant():
    p = ChartPoint(theta=(0.05,), gamma=(0.05,), eta=(0.05,))
    g = chart([200.0], "+", "+", p)
    m = g.mats[0]
    assert abs(np.linalg.det(m) - 1) < 1e-12
    from orbitlab.group_kit import v_block
    ref = a_block(math.exp(0.05)) @ v_block(0.05, "+") @ \
        h_twisted_block(200.0, 0.05, "+")
    assert np.max(np.abs(m - ref)) < 1e-12


def test_chart_bounds():
    p = ChartPoint(theta=(0.2,), gamma=(0.0,), eta=(0.0,))
    with pytest.raises(OutOfRange):
        chart([1.0], "+", "+", p, eps0=0.1)


def test_group_element_json_round_trip():
    g = GroupElement([random_sl2(RNG),
                      np.array([[1 + 1j, 0.5], [1j, (1 + 0.5j * 1j)]])
                      ], 1, 1, check=False)
    # fix the complex block to determinant one before serializing
    m = g.mats[1].copy()
    m[1, 1] = (1 + m[0, 1] * m[1, 0]) / m[0, 0]
    g = GroupElement([g.mats[0], m], 1, 1)
    back = GroupElement.from_json(g.to_json())
    assert back.max_abs_diff(g) < 1e-15
