import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bcfw import BlockShapeError, BlockVector, Box, Spectraplex, as_index_set, blend_block, blended, inner, norm_sq, norm_sq_on


def _bv(seed=0):
    rng = np.random.default_rng(seed)
    return BlockVector([rng.standard_normal(3), rng.standard_normal((2, 2))])


def test_inner_matches_flat_dot():
    x, y = _bv(1), _bv(2)
    assert inner(x, y) == pytest.approx(float(x.flatten() @ y.flatten()), rel=1e-14)
    assert norm_sq(x) == pytest.approx(inner(x, x))


def test_norm_sq_on_subset():
    x = BlockVector([[3.0, 4.0], [[1.0, 0.0], [0.0, 2.0]]])
    assert norm_sq_on(x, [0]) == 25.0
    assert norm_sq_on(x, [1]) == 5.0
    assert norm_sq_on(x, [0, 1]) == norm_sq(x) == 30.0


def test_shape_mismatch_raises():
    x = BlockVector([np.zeros(3)])
    with pytest.raises(BlockShapeError):
        inner(x, BlockVector([np.zeros(4)]))
    with pytest.raises(BlockShapeError):
        inner(x, BlockVector([np.zeros(3), np.zeros(3)]))


def test_construction_validates():
    with pytest.raises(BlockShapeError):
        BlockVector([])
    with pytest.raises(BlockShapeError):
        BlockVector([np.zeros((2, 2, 2))])
    with pytest.raises(ValueError):
        BlockVector([np.array([1.0, np.nan])])


def test_copy_is_deep():
    x = _bv()
    y = x.copy()
    y.blocks[0][0] = 99.0
    assert x.blocks[0][0] != 99.0


def test_arithmetic():
    x, y = _bv(1), _bv(2)
    np.testing.assert_allclose((x + y - y).flatten(), x.flatten())
    np.testing.assert_allclose((2.0 * x).flatten(), 2 * x.flatten())


def test_as_index_set():
    assert as_index_set([2, 0, 2], 3) == (0, 2)
    with pytest.raises(ValueError):
        as_index_set([], 3)
    with pytest.raises(ValueError):
        as_index_set([3], 3)
    with pytest.raises(ValueError):
        as_index_set([-1], 3)


def test_blend_block_in_place_and_endpoints():
    x = BlockVector([[0.0, 0.0], [1.0]])
    blend_block(x, 0, np.array([2.0, 4.0]), 0.25)
    np.testing.assert_allclose(x[0], [0.5, 1.0])
    blend_block(x, 1, np.array([5.0]), 1.0)
    assert x[1][0] == 5.0
    blend_block(x, 1, np.array([7.0]), 0.0)
    assert x[1][0] == 5.0


def test_blend_block_rejects_bad_gamma_and_shape():
    x = BlockVector([[0.0, 0.0]])
    with pytest.raises(ValueError):
        blend_block(x, 0, np.zeros(2), 1.5)
    with pytest.raises(BlockShapeError):
        blend_block(x, 0, np.zeros(3), 0.5)


def test_blended_leaves_input_untouched():
    x = BlockVector([[1.0]])
    y = blended(x, 0, np.array([3.0]), 0.5)
    assert x[0][0] == 1.0 and y[0][0] == 2.0


@given(st.integers(0, 2**32 - 1), st.floats(0.0, 1.0))
def test_blend_preserves_membership(seed, gamma):
    rng = np.random.default_rng(seed)
    box = Box((3, 3), -1.0, 0.5)
    spx = Spectraplex(3)
    x = BlockVector([box.lmo(rng.standard_normal((3, 3))), spx.lmo(rng.standard_normal((3, 3)))])
    # a random interior point of the spectraplex: mix of vertices
    w = rng.dirichlet(np.ones(3))
    x.blocks[1] = sum(wk * spx.lmo(rng.standard_normal((3, 3))) for wk in w)
    blend_block(x, 0, box.lmo(rng.standard_normal((3, 3))), gamma)
    blend_block(x, 1, spx.lmo(rng.standard_normal((3, 3))), gamma)
    assert box.contains(x[0]) and spx.contains(x[1])
