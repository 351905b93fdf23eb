import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from switchgrowth.core import (AffineTriangularMatrix, RationalAngle, SwitchingWord, SystemParams,
                               all_words, block_norm, build_generators, compose, matrix_power,
                               op_norm, rotation, word_product)

from conftest import random_params

entry = st.floats(-10, 10, allow_nan=False)
matrices = st.builds(lambda b, u: AffineTriangularMatrix(np.reshape(b, (2, 2)), u),
                     st.lists(entry, min_size=4, max_size=4), st.lists(entry, min_size=2, max_size=2))


def test_rational_angle_reduces_and_tracks_parity():
    a = RationalAngle(4, 6)
    assert (a.p, a.q) == (2, 3)
    assert a.parity == 0 and not a.odd
    assert RationalAngle(3, 4).odd
    assert math.isclose(a.value, 2 * math.pi / 3)


@pytest.mark.parametrize("p,q", [(0, 1), (2, 1), (5, 2), (1, 0), (-1, 3)])
def test_rational_angle_rejects_out_of_range(p, q):
    with pytest.raises(ValueError):
        RationalAngle(p, q)


@pytest.mark.parametrize("kw", [dict(lam=1.0, theta=1.0), dict(lam=-1.2, theta=1.0),
                                dict(lam=0.0, theta=0.0), dict(lam=0.0, theta=2 * math.pi),
                                dict(lam=0.0, theta=1.0, r=-0.1)])
def test_params_validation(kw):
    with pytest.raises(ValueError):
        SystemParams(**kw)


def test_polar_and_cartesian_offsets_agree(rng):
    for _ in range(50):
        u1 = rng.uniform(-3, 3, 2)
        p = SystemParams.from_offsets(0.1, 1.0, (0, 0), u1)
        assert np.allclose(p.u1, u1, atol=1e-12)


def test_generators_at_pi():
    p = SystemParams.from_rational(0.0, 1, 1, a=0, b=0, r=1, phi=0)
    a0, a1 = build_generators(p)
    assert np.array_equal(a0.block, np.diag([0.0, -1.0]))
    assert np.array_equal(a0.offset, [0.0, 0.0])
    assert np.allclose(a1.block, -np.eye(2), atol=1e-15)
    assert np.allclose(a1.offset, [1.0, 0.0])


def test_generator_rotation_entries():
    p = SystemParams.from_rational(0.5, 2, 3)
    _, a1 = build_generators(p)
    s = math.sqrt(3) / 2
    assert np.allclose(a1.block, [[-0.5, -s], [s, -0.5]], atol=1e-15)


def test_generator_blocks_have_unit_norm(rng):
    for _ in range(100):
        a0, a1 = build_generators(random_params(rng))
        assert abs(block_norm(a0.block) - 1) <= 1e-12
        assert abs(block_norm(a1.block) - 1) <= 1e-12


def test_compose_identity_and_translations():
    n = AffineTriangularMatrix([[1, 2], [3, 4]], [5, 6])
    i = AffineTriangularMatrix.identity()
    assert np.array_equal(compose(i, n).to_matrix(), n.to_matrix())
    t1 = AffineTriangularMatrix(np.eye(2), [1, 2])
    t2 = AffineTriangularMatrix(np.eye(2), [3, -1])
    assert np.array_equal(compose(t1, t2).offset, [4, 1])


def test_compose_matches_matrix_product(rng):
    for _ in range(50):
        m = AffineTriangularMatrix(rng.normal(size=(2, 2)), rng.normal(size=2))
        n = AffineTriangularMatrix(rng.normal(size=(2, 2)), rng.normal(size=2))
        assert np.allclose(compose(m, n).to_matrix(), m.to_matrix() @ n.to_matrix(), atol=1e-14)


def test_word_product_against_dense_product():
    p = SystemParams.from_rational(0.0, 1, 1, a=0, b=0, r=1, phi=0)
    a0, a1 = build_generators(p)
    w = word_product(SwitchingWord((1, 0, 1)), a0, a1)
    dense = a1.to_matrix() @ a0.to_matrix() @ a1.to_matrix()
    assert np.max(np.abs(w.to_matrix() - dense)) <= 1e-14


def test_word_product_ordering(rng):
    a0, a1 = build_generators(random_params(rng))
    assert np.array_equal(word_product(SwitchingWord(), a0, a1).to_matrix(), np.eye(3))
    assert np.array_equal(word_product((0,), a0, a1).to_matrix(), a0.to_matrix())
    assert np.array_equal(word_product((1,), a0, a1).to_matrix(), a1.to_matrix())
    assert np.allclose(word_product((0, 1), a0, a1).to_matrix(), a1.to_matrix() @ a0.to_matrix())


def test_matrix_power_matches_repeated_product(rng):
    m = AffineTriangularMatrix(rng.normal(size=(2, 2)) * 0.5, rng.normal(size=2))
    dense = np.linalg.matrix_power(m.to_matrix(), 13)
    assert np.allclose(matrix_power(m, 13).to_matrix(), dense, rtol=1e-12, atol=1e-12)
    assert np.array_equal((m ** 0).to_matrix(), np.eye(3))


def test_op_norm_simple_cases():
    assert op_norm(AffineTriangularMatrix.identity()) == pytest.approx(1.0, abs=1e-15)
    v = op_norm(AffineTriangularMatrix(np.eye(2), [3, 4]))
    assert 5 <= v <= 6


def test_op_norm_matches_svd(rng):
    for _ in range(300):
        m = AffineTriangularMatrix(rng.normal(size=(2, 2)) * rng.uniform(0.01, 10),
                                   rng.normal(size=2) * rng.uniform(0.01, 100))
        ref = np.linalg.norm(m.to_matrix(), 2)
        assert abs(op_norm(m) - ref) <= 1e-12 * ref


def test_op_norm_within_one_of_offset_for_contractions(rng):
    for _ in range(200):
        a0, a1 = build_generators(random_params(rng))
        w = word_product(rng.integers(0, 2, 9), a0, a1)
        gap = op_norm(w) - np.linalg.norm(w.offset)
        assert -1e-12 <= gap <= 1 + 1e-12


@given(matrices, matrices, matrices)
def test_compose_associative(m, n, k):
    lhs = compose(compose(m, n), k).to_matrix()
    rhs = compose(m, compose(n, k)).to_matrix()
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12 * max(1.0, np.abs(lhs).max()))


@given(matrices, matrices)
def test_op_norm_submultiplicative(m, n):
    assert op_norm(compose(m, n)) <= op_norm(m) * op_norm(n) * (1 + 1e-12) + 1e-9


@given(st.integers(0, 2**31), st.integers(0, 12))
def test_generator_words_contract_and_grow_at_most_linearly(seed, t):
    rng = np.random.default_rng(seed)
    params = random_params(rng)
    a0, a1 = build_generators(params)
    w = word_product(rng.integers(0, 2, t), a0, a1)
    assert block_norm(w.block) <= 1 + 1e-12
    assert np.linalg.norm(w.offset) <= t * params.u_max + 1e-12


def test_switching_word_parse_and_validation():
    assert SwitchingWord.parse("1 0 1").letters == (1, 0, 1)
    assert str(SwitchingWord((0, 1))) == "01"
    with pytest.raises(ValueError):
        SwitchingWord((0, 2))
    assert len(list(all_words(3))) == 8


def test_rotation_is_orthogonal():
    r = rotation(0.7)
    assert np.allclose(r @ r.T, np.eye(2), atol=1e-15)
