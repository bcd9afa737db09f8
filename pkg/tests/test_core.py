import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from stochfix import build, min_gain, op_norm, sample_draw, spectral_summary
from stochfix.core import (
    HALF_OPEN_UNIT, OPEN_UNIT, CoefficientDraw, EquationSystem, Interval, complex_matrices,
    embed_complex, finite_law_sampler, tail_bounded,
)
from stochfix.errors import DomainError
from stochfix.models import quicksort_toll, split2d_matrices
from stochfix.streams import stream

import oracles

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def test_quicksort_draw_has_two_complementary_terms():
    draw = sample_draw(build({"model": "quicksort"}), 0, stream(3))
    u = draw.matrices[0, 0, 0]
    assert draw.matrices.shape == (2, 1, 1)
    assert 0 < u < 1
    assert draw.matrices[1, 0, 0] == pytest.approx(1 - u, abs=1e-15)
    assert draw.shift[0] == pytest.approx(quicksort_toll(u), abs=1e-14)


def test_identity_draw():
    sampler = finite_law_sampler([1.0], [[[[1.0]]]], [[0.0]])
    system = EquationSystem(1, 1, ((0,),), (sampler,))
    draw = sample_draw(system, 0, stream(0))
    assert draw.alphas.tolist() == [1.0] and draw.opnorms.tolist() == [1.0]
    assert draw.shift.tolist() == [0.0]


def test_split_tree_even_split_has_zero_toll():
    system = build({"model": "split", "b": 2, "law": {"kind": "deterministic", "v": [0.5, 0.5]}})
    draw = sample_draw(system, 0, stream(0))
    assert draw.shift[0] == pytest.approx(0.0, abs=1e-15)


def test_unknown_equation_index():
    system = build({"model": "quicksort"})
    with pytest.raises(DomainError):
        sample_draw(system, 1, stream(0))


@pytest.mark.parametrize("matrix, lo, hi", [
    (np.eye(2), 1.0, 1.0),
    ([[0.3, 0.0], [0.0, 0.3]], 0.3, 0.3),
    ([[2.0, 0.0], [0.0, 0.5]], 0.5, 2.0),
    (split2d_matrices(0.5), oracles.SPLIT2D_MIN_GAIN_HALF, oracles.SPLIT2D_OP_NORM_HALF),
])
def test_singular_value_examples(matrix, lo, hi):
    assert min_gain(matrix) == pytest.approx(lo, abs=1e-12)
    assert op_norm(matrix) == pytest.approx(hi, abs=1e-12)


@pytest.mark.parametrize("bad", [[[np.nan]], [[1.0, np.inf], [0.0, 1.0]]])
def test_non_finite_matrix_rejected(bad):
    with pytest.raises(DomainError):
        min_gain(bad)
    with pytest.raises(DomainError):
        op_norm(bad)


@given(arrays(float, (2, 2), elements=finite))
def test_gain_norm_product_is_determinant(a):
    lo, hi = min_gain(a), op_norm(a)
    assert 0 <= lo <= hi
    with np.errstate(divide="ignore"):  # LAPACK det of a singular matrix
        det = abs(np.linalg.det(a))
    assert lo * hi == pytest.approx(det, abs=1e-10 * max(1.0, hi * hi))


@given(finite)
def test_scalar_matrix_stats(x):
    assert min_gain([[x]]) == op_norm([[x]]) == abs(x)


@given(st.floats(0, 2 * np.pi), st.floats(0.01, 5))
def test_equality_for_scaled_rotations(theta, s):
    R = s * np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    assert min_gain(R) == pytest.approx(op_norm(R), rel=1e-12)


def test_strict_inequality_off_conformal():
    rng = np.random.default_rng(0)
    for _ in range(100):
        a = rng.normal(size=(2, 2))
        a[0, 0] += 1.0  # keep away from conformal matrices
        if abs(a[0, 0] - a[1, 1]) + abs(a[0, 1] + a[1, 0]) > 1e-3:
            assert min_gain(a) < op_norm(a)


@pytest.mark.parametrize("alphas, opnorms, interval, expected", [
    ((0.3, 0.7), (0.3, 0.7), OPEN_UNIT, (0.7, 0.3, 2)),
    ((0.5,), (0.5,), OPEN_UNIT, (0.5, 0.0, 1)),
    ((1.0, 1.0), (1.0, 1.0), OPEN_UNIT, (1.0, 1.0, 0)),
    ((1.0, 1.0), (1.0, 1.0), HALF_OPEN_UNIT, (1.0, 1.0, 2)),
])
def test_spectral_summary_examples(alphas, opnorms, interval, expected):
    draw = CoefficientDraw(np.zeros((len(alphas), 1, 1)), np.zeros(1), np.array(alphas), np.array(opnorms))
    s = spectral_summary(draw, interval)
    assert (s.alpha_max, s.alpha_sec, s.n_interval) == expected


@settings(max_examples=50)
@given(st.lists(st.floats(-2, 2, allow_nan=False), min_size=1, max_size=8), st.randoms())
def test_spectral_summary_permutation_invariant(vals, rnd):
    draw = CoefficientDraw.from_arrays(np.array(vals).reshape(-1, 1, 1), [0.0])
    perm = list(range(len(vals)))
    rnd.shuffle(perm)
    other = CoefficientDraw.from_arrays(np.array(vals)[perm].reshape(-1, 1, 1), [0.0])
    for interval in (OPEN_UNIT, HALF_OPEN_UNIT, Interval(0.2, 0.9, closed_lo=True)):
        assert spectral_summary(draw, interval) == spectral_summary(other, interval)


def test_draw_invariants_hold_for_zoo_models():
    from stochfix.models import example_configs
    for name, cfg in example_configs().items():
        system = build(cfg)
        for r in range(system.m):
            draw = sample_draw(system, r, stream(1, r))
            assert len(draw.alphas) == len(draw.opnorms) == len(draw.matrices) <= system.truncation
            assert np.all(draw.alphas >= 0) and np.all(draw.alphas <= draw.opnorms + 1e-15), name


@pytest.mark.parametrize("V, matrix, stat", [
    (1j, [[0, -1], [1, 0]], 1.0),
    (0.6 + 0.8j, [[0.6, -0.8], [0.8, 0.6]], 1.0),
    (0.5, [[0.5, 0], [0, 0.5]], 0.5),
])
def test_complex_embedding_examples(V, matrix, stat):
    M = complex_matrices(V)
    np.testing.assert_allclose(M, matrix, atol=1e-15)
    assert min_gain(M) == pytest.approx(stat, abs=1e-15)
    assert op_norm(M) == pytest.approx(stat, abs=1e-15)


def test_complex_embedding_preserves_modulus():
    rng = np.random.default_rng(5)
    V = rng.normal(size=10_000) + 1j * rng.normal(size=10_000)

    def cs(rng_, n):
        return V[:n, None], np.zeros(n, dtype=complex)

    system = embed_complex([[0]], [cs])
    A, b = system.sample(0, rng, 10_000)
    s = np.linalg.svd(A[:, 0], compute_uv=False)
    np.testing.assert_allclose(s[:, 0], np.abs(V), rtol=1e-12)
    np.testing.assert_allclose(s[:, 1], np.abs(V), rtol=1e-12)


def test_system_validation():
    sampler = finite_law_sampler([1.0], [[[[0.5]]]], [[0.0]])
    with pytest.raises(DomainError):
        EquationSystem(1, 1, ((1,),), (sampler,))
    with pytest.raises(DomainError):
        EquationSystem(0, 1, (), ())
    with pytest.raises(DomainError):
        EquationSystem(1, 1, ((0, 0, 0),), (sampler,), truncation=2)
    with pytest.raises(DomainError):
        tail_bounded(0.0, "")


def test_sampler_shape_checked():
    def bad(rng, n):
        return np.zeros((n, 2, 1, 1)), np.zeros((n, 1))

    system = EquationSystem(1, 1, ((0,),), (bad,))
    with pytest.raises(DomainError):
        system.sample(0, stream(0), 4)
