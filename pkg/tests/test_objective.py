import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bcfw import (
    BlockShapeError,
    BlockVector,
    CollatedQuadraticDifference,
    QuadraticDistance,
    SmoothObjective,
    cqd_lipschitz,
    finite_diff_check,
    psd_project,
)

seeds = st.integers(0, 2**32 - 1)


def _cqd(n, seed):
    rng = np.random.default_rng(seed)
    return CollatedQuadraticDifference(psd_project(rng.standard_normal((n, n))), psd_project(rng.standard_normal((n, n))))


def _point(obj, rng):
    return BlockVector([rng.standard_normal(s) for s in obj.shapes])


def test_quadratic_distance_value_and_gradient():
    f = QuadraticDistance()
    x = BlockVector([[[1.0, 2.0]], [[0.0, 0.0]]])
    assert f.value(x) == pytest.approx(2.5)
    g = f.gradient(x)
    np.testing.assert_array_equal(g[0], [[1.0, 2.0]])
    np.testing.assert_array_equal(g[1], [[-1.0, -2.0]])
    assert f.lipschitz == 2.0


def test_quadratic_distance_shape_checks():
    with pytest.raises(BlockShapeError):
        QuadraticDistance().value(BlockVector([np.zeros(2), np.zeros(3)]))


def test_collate_roundtrip():
    obj = _cqd(4, 0)
    x = _point(obj, np.random.default_rng(1))
    X = obj.collate(x)
    assert X.shape == (8, 4)
    np.testing.assert_array_equal(X[2], x[2])
    np.testing.assert_array_equal(X[4:], x[4])
    back = obj.decollate(X)
    assert all(np.array_equal(a, b) for a, b in zip(back, x))


def test_collate_rejects_wrong_layout():
    obj = _cqd(3, 0)
    with pytest.raises(BlockShapeError):
        obj.collate(BlockVector([np.zeros(3)] * 3))
    with pytest.raises(BlockShapeError):
        obj.collate(BlockVector([np.zeros(3)] * 3 + [np.zeros((2, 2))]))


def test_cqd_value_matches_trace_form():
    obj = _cqd(5, 7)
    x = _point(obj, np.random.default_rng(8))
    X = obj.collate(x)
    ref = 0.5 * (np.trace(X.T @ X @ obj.A) - np.trace(X.T @ X @ obj.B))
    assert obj.value(x) == pytest.approx(ref, rel=1e-12)


def test_cqd_lipschitz_is_frobenius_norm():
    A, B = np.diag([3.0, 0.0]), np.diag([0.0, 4.0])
    assert cqd_lipschitz(A, B) == 5.0
    assert CollatedQuadraticDifference(A, B).lipschitz == 5.0


@given(seeds, st.integers(2, 6))
def test_cqd_gradient_is_lipschitz(seed, n):
    obj = _cqd(n, seed)
    rng = np.random.default_rng(seed + 1)
    x, y = _point(obj, rng), _point(obj, rng)
    dg = (obj.gradient(x) - obj.gradient(y)).flatten()
    assert np.linalg.norm(dg) <= obj.lipschitz * np.linalg.norm((x - y).flatten()) * (1 + 1e-12)


@given(seeds, st.integers(2, 5))
def test_finite_differences_agree(seed, n):
    rng = np.random.default_rng(seed)
    obj = _cqd(n, seed)
    assert finite_diff_check(obj, _point(obj, rng)) < 1e-6
    x = BlockVector([rng.standard_normal((n, n)), rng.standard_normal((n, n))])
    assert finite_diff_check(QuadraticDistance(), x) < 1e-6


def test_finite_differences_catch_a_wrong_gradient():
    class Wrong(SmoothObjective):
        def value(self, x):
            return float(np.sum(x[0] ** 2))

        def gradient(self, x):
            return BlockVector([x[0]])  # missing factor 2

    assert finite_diff_check(Wrong(), BlockVector([[1.0, -2.0]])) > 0.1


def test_is_indefinite():
    assert CollatedQuadraticDifference(np.diag([1.0, 0.0]), np.diag([0.0, 1.0])).is_indefinite()
    assert not CollatedQuadraticDifference(np.eye(2), np.zeros((2, 2))).is_indefinite()


def test_psd_project_examples():
    np.testing.assert_allclose(psd_project(np.diag([2.0, -1.0])), np.diag([2.0, 0.0]), atol=1e-14)
    np.testing.assert_allclose(psd_project(-np.eye(3)), np.zeros((3, 3)), atol=1e-14)
    # symmetric part [[1, 1], [1, 1]] is already PSD
    np.testing.assert_allclose(psd_project(np.array([[1.0, 2.0], [0.0, 1.0]])), np.ones((2, 2)), atol=1e-12)
    with pytest.raises(ValueError):
        psd_project(np.zeros((2, 3)))


@given(seeds, st.integers(1, 8))
def test_psd_project_properties(seed, n):
    W = np.random.default_rng(seed).standard_normal((n, n))
    P = psd_project(W)
    assert np.array_equal(P, P.T)
    assert np.linalg.eigvalsh(P)[0] >= -1e-12 * max(1.0, np.abs(P).max())
    np.testing.assert_allclose(psd_project(P), P, atol=1e-12 * max(1.0, np.abs(P).max()))
    # nearest point: no PSD competitor built from the input does better
    S = 0.5 * (W + W.T)
    for Q in (np.zeros((n, n)), np.eye(n), S @ S.T):
        assert np.linalg.norm(W - P) <= np.linalg.norm(W - Q) + 1e-12
