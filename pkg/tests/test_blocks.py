import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bcfw import Custom, Cyclic, Full, PCyclic, PQLazy, QLazy, ScheduleSpecError, parse_schedule, verify_coverage


def test_full_and_cyclic():
    assert Full(3).sequence(2) == [(0, 1, 2), (0, 1, 2)]
    assert Cyclic(3).sequence(5) == [(0,), (1,), (2,), (0,), (1,)]
    assert Full(3).K == 1 and Cyclic(3).K == 3


def test_pcyclic_cycles_are_permutations():
    s = PCyclic(5, seed=3)
    seq = [a[0] for a in s.sequence(50)]
    for k in range(10):
        assert sorted(seq[5 * k: 5 * k + 5]) == list(range(5))
    assert s.K == 9


def test_seeded_schedules_are_reproducible():
    a = PQLazy(8, 3, 4, seed=11).sequence(200)
    assert a == PQLazy(8, 3, 4, seed=11).sequence(200)
    assert a != PQLazy(8, 3, 4, seed=12).sequence(200)
    assert PCyclic(6, 1).sequence(60) == PCyclic(6, 1).sequence(60)


def test_next_is_order_independent():
    s = PQLazy(6, 2, 3, seed=5)
    late = s.next(40)
    assert PQLazy(6, 2, 3, seed=5).sequence(41)[40] == late


def test_qlazy_expensive_calls():
    T, q = 1000, 7
    seq = QLazy(4, q).sequence(T)
    assert sum(3 in a for a in seq) == math.ceil(T / q)
    assert all(a == (0, 1, 2) for t, a in enumerate(seq) if t % q)


def test_pqlazy_lazy_iterations():
    s = PQLazy(11, 4, 5, expensive=10, seed=0)
    for t, a in enumerate(s.sequence(500)):
        if t % 5 == 0:
            assert a == tuple(range(11))
        else:
            assert len(a) == 4 and len(set(a)) == 4 and 10 not in a


def test_expensive_block_can_be_chosen():
    assert QLazy(3, 2, expensive=0).sequence(2) == [(0, 1, 2), (1, 2)]


@pytest.mark.parametrize(
    "spec,cls",
    [("full", Full), ("cyclic", Cyclic), ("pcyclic", PCyclic), ("qlazy:5", QLazy), ("PQLazy:2,3", PQLazy)],
)
def test_parse_schedule(spec, cls):
    assert isinstance(parse_schedule(spec, 6), cls)


@pytest.mark.parametrize("spec", ["bogus", "qlazy", "qlazy:x", "qlazy:0", "pqlazy:0,5", "pqlazy:9,5", "pqlazy:3", "full:2"])
def test_parse_schedule_rejects(spec):
    with pytest.raises(ScheduleSpecError):
        parse_schedule(spec, 6)


def test_verify_coverage_examples():
    assert verify_coverage(Cyclic(3).sequence(100), 3, 3).ok
    rep = verify_coverage(Cyclic(3).sequence(100), 2, 3)
    assert not rep and rep.first_violation == 0 and rep.missing == 2
    # a gap in the middle: block 1 absent from t=3..6
    seq = [(0, 1)] * 3 + [(0,)] * 4 + [(0, 1)] * 3
    rep = verify_coverage(seq, 3, 2)
    assert rep.first_violation == 3 and rep.missing == 1
    assert verify_coverage(seq, 5, 2).ok


def test_verify_coverage_needs_enough_history():
    with pytest.raises(ValueError):
        verify_coverage([(0,)], 2, 1)
    with pytest.raises(ValueError):
        verify_coverage([(0,)], 0, 1)


def _brute_force_first_violation(seq, K, m):
    for t in range(len(seq) - K + 1):
        seen = set().union(*seq[t: t + K])
        missing = sorted(set(range(m)) - seen)
        if missing:
            return t, missing[0]
    return None


@given(st.lists(st.sets(st.integers(0, 3), min_size=1), min_size=4, max_size=40), st.integers(1, 4))
def test_verify_coverage_matches_brute_force(sets, K):
    seq = [tuple(sorted(s)) for s in sets]
    rep = verify_coverage(seq, K, 4)
    ref = _brute_force_first_violation(seq, K, 4)
    if ref is None:
        assert rep.ok
    else:
        assert (rep.first_violation, rep.missing) == ref


@given(st.integers(2, 12), st.integers(1, 9), st.integers(0, 10_000))
def test_builtin_schedules_meet_their_window(m, q, seed):
    p = 1 + seed % (m - 1)
    for s in (Full(m), Cyclic(m), PCyclic(m, seed), QLazy(m, q), PQLazy(m, p, q, seed=seed)):
        assert verify_coverage(s.sequence(300), s.K, m).ok


def test_custom_schedule_warns_on_violation():
    s = Custom(3, lambda t: [0], K=2)
    s.sequence(10)
    with pytest.warns(RuntimeWarning, match="violates"):
        s.check(s.sequence(10))


def test_custom_schedule_from_list():
    s = Custom(2, [[1], [0, 1]], K=2)
    assert s.sequence(2) == [(1,), (0, 1)]
    with pytest.raises(ValueError):
        Custom(2, [[5]]).next(0)
