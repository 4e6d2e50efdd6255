import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from extphase import qalg
from extphase.errors import ValidationError
from extphase.qalg import I, J, K, ONE, Direction, Quaternion

from conftest import random_unit

finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False)
quaternions = st.builds(Quaternion, finite, finite, finite, finite)


def close(a: Quaternion, b: Quaternion, tol=1e-12):
    return np.allclose(a.as_array(), b.as_array(), rtol=0.0, atol=tol)


@pytest.mark.parametrize("n, expected", [
    ((0.0, 0.0, 1.0), K),
    ((1.0, 0.0, 0.0), I),
    ((1 / math.sqrt(2), 1 / math.sqrt(2), 0.0), Quaternion(0.0, 0.7071067811865476, 0.7071067811865476, 0.0)),
])
def test_from_direction_axes(n, expected):
    q = qalg.from_direction(Direction(*n))
    assert close(q, expected, 1e-15)
    assert q.is_pure()
    assert abs(qalg.norm_sq(q) - 1.0) <= 1e-12


def test_from_direction_rejects_non_unit():
    with pytest.raises(ValidationError):
        qalg.from_direction(Direction(1.0, 1.0, 0.0))
    with pytest.raises(ValidationError):
        Direction(0.0, 0.0, 1.0 + 1e-9)


def test_hamilton_relations():
    assert qalg.mul(I, J) == K
    assert qalg.mul(J, K) == I
    assert qalg.mul(K, I) == J
    assert qalg.mul(J, I) == -K
    for u in (I, J, K):
        assert qalg.mul(u, u) == -ONE
    assert qalg.mul(qalg.mul(I, J), K) == -ONE


def test_conj_and_scale():
    q = Quaternion(1.0, 2.0, -3.0, 4.0)
    assert qalg.conj(q) == Quaternion(1.0, -2.0, 3.0, -4.0)
    assert qalg.scale(q, 2) == Quaternion(2.0, 4.0, -6.0, 8.0)
    assert qalg.add(q, qalg.conj(q)) == Quaternion(2.0, 0.0, 0.0, 0.0)
    assert qalg.norm_sq(q) == 30.0


def _expand_product(a, b):
    # term-by-term expansion over the basis table; independent of qalg.mul
    basis = ["1", "i", "j", "k"]
    table = {
        ("1", "1"): (1, "1"), ("1", "i"): (1, "i"), ("1", "j"): (1, "j"), ("1", "k"): (1, "k"),
        ("i", "1"): (1, "i"), ("i", "i"): (-1, "1"), ("i", "j"): (1, "k"), ("i", "k"): (-1, "j"),
        ("j", "1"): (1, "j"), ("j", "i"): (-1, "k"), ("j", "j"): (-1, "1"), ("j", "k"): (1, "i"),
        ("k", "1"): (1, "k"), ("k", "i"): (1, "j"), ("k", "j"): (-1, "i"), ("k", "k"): (-1, "1"),
    }
    out = dict.fromkeys(basis, 0.0)
    for p, ca in zip(basis, a):
        for q, cb in zip(basis, b):
            sign, r = table[(p, q)]
            out[r] += sign * ca * cb
    return np.array([out[b_] for b_ in basis])


def test_conj_product_of_directions_matches_dot_and_cross(rng):
    # 100 random direction pairs: conj(N1) N2 = n1.n2 - n1 x n2 and
    # N1 N2 = -n1.n2 + n1 x n2 under I^2 = J^2 = K^2 = IJK = -1
    for _ in range(100):
        n1, n2 = random_unit(rng), random_unit(rng)
        N1 = qalg.from_direction(Direction(*n1))
        N2 = qalg.from_direction(Direction(*n2))
        got = qalg.mul(qalg.conj(N1), N2).as_array()
        brute = _expand_product(qalg.conj(N1).as_array(), N2.as_array())
        dot = sum(x * y for x, y in zip(n1, n2))
        cross = [n1[1] * n2[2] - n1[2] * n2[1], n1[2] * n2[0] - n1[0] * n2[2], n1[0] * n2[1] - n1[1] * n2[0]]
        np.testing.assert_allclose(got, brute, atol=1e-15)
        np.testing.assert_allclose(got, [dot] + [-c for c in cross], atol=1e-15)
        plain = qalg.mul(N1, N2).as_array()
        np.testing.assert_allclose(plain, _expand_product(N1.as_array(), N2.as_array()), atol=1e-15)
        np.testing.assert_allclose(plain, [-dot] + cross, atol=1e-15)


def test_conj_product_planar_example():
    theta = 0.7
    N1 = qalg.from_direction(Direction(0.0, 0.0, 1.0))
    N2 = qalg.from_direction(Direction(math.sin(theta), 0.0, math.cos(theta)))
    # n1 x n2 = (0, sin, 0)
    assert close(qalg.mul(qalg.conj(N1), N2), Quaternion(math.cos(theta), 0.0, -math.sin(theta), 0.0), 1e-15)
    assert close(qalg.mul(N1, N2), Quaternion(-math.cos(theta), 0.0, math.sin(theta), 0.0), 1e-15)


@pytest.mark.parametrize("s1, s2", [(1, 1), (1, -1), (-1, 1), (-1, -1)])
def test_probability_kernel(rng, s1, s2):
    for _ in range(50):
        n1, n2 = random_unit(rng), random_unit(rng)
        N1 = qalg.from_direction(Direction(*n1))
        N2 = qalg.from_direction(Direction(*n2))
        lhs = qalg.norm_sq(s1 * N1 - s2 * N2)
        assert lhs == pytest.approx(2.0 * (1.0 - s1 * s2 * float(n1 @ n2)), abs=1e-12)
        if s1 == 1 and s2 == -1:
            assert qalg.norm_sq(qalg.add(N1, N2)) == pytest.approx(2.0 * (1.0 + float(n1 @ n2)), abs=1e-12)


@given(quaternions, quaternions)
def test_norm_multiplicative(a, b):
    lhs = qalg.norm_sq(a * b)
    rhs = qalg.norm_sq(a) * qalg.norm_sq(b)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-300)


@given(quaternions, quaternions)
def test_conj_antihomomorphism(a, b):
    lhs = qalg.conj(a * b).as_array()
    rhs = (qalg.conj(b) * qalg.conj(a)).as_array()
    scale = max(1.0, float(np.abs(lhs).max()))
    np.testing.assert_allclose(lhs, rhs, atol=1e-12 * scale)


@given(quaternions)
def test_conj_times_self_is_real_norm(q):
    p = qalg.conj(q) * q
    n = qalg.norm_sq(q)
    assert p.w == pytest.approx(n, rel=1e-14, abs=1e-300)
    assert max(abs(p.x), abs(p.y), abs(p.z)) <= 1e-14 * max(n, 1e-300) + 1e-300


def test_complex_embedding_matches_complex_product(rng):
    for _ in range(20):
        a, b = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
        got = Quaternion.from_complex(a) * Quaternion.from_complex(b)
        assert close(got, Quaternion.from_complex(a * b), 1e-14)
    z = Quaternion(0.3, -0.2, 0.5, 0.1)
    assert close(Quaternion.phase(0.0) * z, z, 0.0)


def test_array_forms_agree_with_scalar(rng):
    a = rng.normal(size=(10, 4))
    b = rng.normal(size=(10, 4))
    got = qalg.mul_arr(a, b)
    for x, y, g in zip(a, b, got):
        np.testing.assert_allclose(g, (Quaternion.from_array(x) * Quaternion.from_array(y)).as_array(), atol=1e-14)
    np.testing.assert_allclose(qalg.norm_sq_arr(a), (a * a).sum(axis=1))
    np.testing.assert_allclose(qalg.conj_arr(a)[:, 1:], -a[:, 1:])
