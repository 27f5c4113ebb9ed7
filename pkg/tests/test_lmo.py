import itertools
import threading

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bcfw import (
    BlockVector,
    Box,
    LinfBall,
    NuclearBall,
    ProductDomain,
    Spectraplex,
    lmo_box,
    lmo_linf_ball,
    lmo_nuclear_ball,
    lmo_product,
    lmo_spectraplex,
    min_eigenpair,
    top_singular_triple,
)
from bcfw.lmo import contains, diameter

seeds = st.integers(0, 2**32 - 1)


def test_box_lmo_beats_every_vertex():
    rng = np.random.default_rng(3)
    c = rng.standard_normal(4)
    v = lmo_box(c, -1.0, 0.25)
    best = min(float(c @ np.array(p)) for p in itertools.product([-1.0, 0.25], repeat=4))
    assert float(c @ v) == pytest.approx(best)


def test_box_lmo_picks_lower_on_zero_cost():
    np.testing.assert_array_equal(lmo_box(np.zeros(2), -1.0, 2.0), [-1.0, -1.0])


def test_linf_lmo():
    np.testing.assert_array_equal(lmo_linf_ball(np.array([2.0, -1.0, 0.0]), 3.0), [-3.0, 3.0, -3.0])


def test_spectraplex_known_examples():
    v = lmo_spectraplex(np.diag([3.0, -1.0, 2.0]))
    np.testing.assert_allclose(v, np.diag([0.0, 1.0, 0.0]), atol=1e-12)
    # the symmetric part of [[0, 2], [0, 0]] has eigenvalues -1, 1
    c = np.array([[0.0, 2.0], [0.0, 0.0]])
    assert float(np.vdot(c, lmo_spectraplex(c))) == pytest.approx(-1.0, abs=1e-12)


@given(seeds, st.integers(1, 12))
def test_spectraplex_vertex_properties(seed, n):
    c = np.random.default_rng(seed).standard_normal((n, n))
    v = lmo_spectraplex(c)
    assert np.max(np.abs(v - v.T)) <= 1e-12
    assert np.linalg.eigvalsh(v)[0] >= -1e-10
    assert abs(np.trace(v) - 1.0) <= 1e-10
    assert np.linalg.matrix_rank(v, tol=1e-8) == 1
    assert float(np.vdot(c, v)) == pytest.approx(np.linalg.eigvalsh(0.5 * (c + c.T))[0], abs=1e-8)


@given(seeds, st.integers(1, 8), st.integers(1, 8), st.floats(0.1, 5.0))
def test_nuclear_lmo_optimal(seed, p, q, r):
    c = np.random.default_rng(seed).standard_normal((p, q))
    v = lmo_nuclear_ball(c, r)
    assert np.sum(np.linalg.svd(v, compute_uv=False)) == pytest.approx(r, rel=1e-9)
    assert float(np.vdot(c, v)) == pytest.approx(-r * np.linalg.svd(c, compute_uv=False)[0], abs=1e-8 * max(1, r))


def test_nuclear_lmo_zero_cost():
    np.testing.assert_array_equal(lmo_nuclear_ball(np.zeros((3, 2)), 1.0), np.zeros((3, 2)))
    assert top_singular_triple(np.zeros((2, 2)))[0] == 0.0


@pytest.mark.parametrize(
    "S",
    [
        np.zeros((4, 4)),
        np.eye(5),
        np.diag([1.0, 1.0, 1.0 + 1e-12, 2.0]),
        np.diag([-3.0, -3.0, 5.0, 5.0]),
        np.array([[2.0]]),
        np.ones((6, 6)),
    ],
    ids=["zero", "identity", "near-degenerate", "paired", "scalar", "rank-one"],
)
def test_min_eigenpair_degenerate_spectra(S):
    lam, u = min_eigenpair(S)
    assert lam == pytest.approx(np.linalg.eigvalsh(S)[0], abs=1e-10)
    assert np.linalg.norm(u) == pytest.approx(1.0)
    assert np.linalg.norm(S @ u - lam * u) <= 1e-8 * max(1.0, np.abs(S).max())


@given(seeds, st.integers(2, 40))
def test_min_eigenpair_random(seed, n):
    A = np.random.default_rng(seed).standard_normal((n, n))
    S = A + A.T
    lam, u = min_eigenpair(S)
    assert lam == pytest.approx(np.linalg.eigvalsh(S)[0], abs=1e-8)


def test_min_eigenpair_rejects_nonsquare():
    with pytest.raises(ValueError):
        min_eigenpair(np.zeros((2, 3)))


def test_membership():
    assert contains(Box((2,), -1, 1), np.array([1.0 + 1e-9, 0.0]))
    assert not contains(Box((2,), -1, 1), np.array([1.1, 0.0]))
    assert not contains(Box((2,), -1, 1), np.zeros(3))
    assert LinfBall((2,), 2.0).contains(np.array([-2.0, 1.0]))
    spx = Spectraplex(2)
    assert spx.contains(np.array([[0.5, 0.0], [0.0, 0.5]]))
    assert not spx.contains(np.array([[1.5, 0.0], [0.0, -0.5]]))
    assert not spx.contains(np.array([[0.5, 0.1], [0.0, 0.5]]))
    nb = NuclearBall((2, 2), 1.0)
    assert nb.contains(np.diag([0.5, 0.5]))
    assert not nb.contains(np.diag([0.75, 0.5]))


@given(seeds)
def test_midpoint_of_members_is_member(seed):
    rng = np.random.default_rng(seed)
    for s in (Box((3,), -1.0, 0.5), LinfBall((3,), 2.0), Spectraplex(3), NuclearBall((3, 2), 1.5)):
        a, b = s.lmo(rng.standard_normal(s.shape)), s.lmo(rng.standard_normal(s.shape))
        assert s.contains(a) and s.contains(b) and s.contains(0.5 * (a + b))


def test_diameters():
    assert diameter(Box((4, 4), -1.0, 0.25)) == pytest.approx(5.0)
    assert diameter(LinfBall((3,), 1.0)) == pytest.approx(2 * np.sqrt(3))
    assert diameter(Spectraplex(5)) == pytest.approx(np.sqrt(2))
    assert diameter(Spectraplex(1)) == 0.0
    assert diameter(NuclearBall((3, 3), 2.0)) == 4.0


def test_set_validation():
    with pytest.raises(ValueError):
        Box((2,), 1.0, 1.0)
    with pytest.raises(ValueError):
        LinfBall((2,), 0.0)
    with pytest.raises(ValueError):
        Spectraplex(0)
    with pytest.raises(ValueError):
        NuclearBall((2, 2), -1.0)


def test_product_domain_counts_calls():
    dom = ProductDomain([Box((2,), -1, 1), Spectraplex(2), LinfBall((3,), 1.0)])
    g = BlockVector([np.ones(2), np.eye(2), np.ones(3)])
    V = lmo_product(g, [2, 0], dom)
    assert sorted(V) == [0, 2]
    assert dom.counts == [1, 0, 1]
    dom.lmo_product(g, [1], count=False)
    assert dom.counts == [1, 0, 1]
    dom.reset_counts()
    assert dom.counts == [0, 0, 0]
    assert dom.diameter == pytest.approx(np.sqrt(8 + 2 + 12))


def test_product_domain_counts_are_thread_safe():
    dom = ProductDomain([Box((1,), -1, 1)])
    g = BlockVector([np.ones(1)])

    def work():
        for _ in range(500):
            dom.lmo_product(g, [0])

    threads = [threading.Thread(target=work) for _ in range(4)]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    assert dom.counts == [2000]


def test_block_violations():
    dom = ProductDomain([Box((1,), 0, 1), Box((1,), 0, 1)])
    assert dom.block_violations(BlockVector([[0.5], [2.0]])) == [1]
    assert dom.contains(BlockVector([[0.5], [1.0]]))
