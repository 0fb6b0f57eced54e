import itertools
import random

from ramosaic import posets as P
from ramosaic.intervals import Interval, singleton
from ramosaic.litmus import Label
from ramosaic.posets import Event, poset
from ramosaic.states import AbstractState, StateSet, equal_sets, merge_state_list

A = Event("a", 1, "t1", "store", "x")
B = Event("b", 1, "t2", "store", "x")
L = Label("l")


def state(mo_x, x, r):
    return AbstractState.make(L, {"x": mo_x}, {"x": x, "t.r": r})


def test_insert_into_empty():
    ss = StateSet()
    s = state(P.TOP, singleton(0), singleton(0))
    ss.merge(s)
    assert ss.at(L) == (s,)


def test_same_mo_joins_memory():
    ss = StateSet()
    ss.merge(state(poset({A}), singleton(1), singleton(0)))
    ss.merge(state(poset({A}), singleton(2), singleton(0)))
    (merged,) = ss.at(L)
    assert merged.val("x") == Interval(1, 2)
    assert merged.po("x") == poset({A})


def test_same_memory_joins_posets():
    ss = StateSet()
    ss.merge(state(poset({A}), singleton(1), singleton(0)))
    ss.merge(state(poset({B}), singleton(1), singleton(0)))
    (merged,) = ss.at(L)
    assert merged.po("x") == P.TOP  # intersection of disjoint event sets


def test_memory_rule_guarded_by_critical_events():
    """States whose posets disagree on lock/rmw events stay separate, since
    joining would erase history the consistency checks rely on."""
    u = Event("u", 1, "t1", "rmw", "x")
    ss = StateSet()
    ss.merge(state(poset({u}), singleton(1), singleton(0)))
    ss.merge(state(poset({B}), singleton(1), singleton(0)))
    assert len(ss.at(L)) == 2


def test_bottom_states_dropped():
    ss = StateSet()
    ss.merge(state(P.BOTTOM, singleton(1), singleton(0)))
    assert ss.at(L) == ()


def test_merge_idempotent():
    s1 = state(poset({A}), singleton(1), singleton(0))
    s2 = state(poset({B}), singleton(2), singleton(2))
    once = StateSet()
    once.merge_all([s1, s2])
    twice = StateSet()
    twice.merge_all([s1, s2, s1, s2])
    assert equal_sets(once, twice)


def test_merge_insert_order_independent():
    states = [
        state(poset({A}), singleton(1), singleton(0)),
        state(poset({A}), singleton(2), singleton(0)),
        state(poset({B}), singleton(5), singleton(1)),
        state(P.TOP, singleton(0), singleton(0)),
        state(P.chain(A, B), singleton(5), singleton(1)),
    ]
    reference = None
    for perm in itertools.permutations(states):
        ss = StateSet()
        ss.merge_all(perm)
        if reference is None:
            reference = ss
        else:
            assert equal_sets(ss, reference)


def test_equal_sets():
    a, b = StateSet(), StateSet()
    assert equal_sets(a, b)
    a.merge(state(P.TOP, singleton(0), singleton(0)))
    assert not equal_sets(a, b)
    b.merge(state(P.TOP, singleton(0), singleton(0)))
    assert equal_sets(a, b)
    b2 = StateSet()
    b2.merge(state(P.TOP, Interval(0, 1), singleton(0)))
    assert not equal_sets(a, b2)


def test_merge_state_list_matches_stateset():
    rng = random.Random(9)
    pool = [state(p, singleton(rng.randint(0, 3)), singleton(rng.randint(0, 2)))
            for p in (P.TOP, poset({A}), poset({B}), P.chain(A, B), P.chain(B, A))
            for _ in range(2)]
    lst: list = []
    ss = StateSet()
    for s in pool:
        merge_state_list(lst, s)
        ss.merge(s)
    assert tuple(lst) == ss.at(L)


def test_dump_format():
    ss = StateSet()
    ss.merge(state(poset({A}), Interval(1, 2), singleton(0)))
    line = ss.dump()
    assert line == "l | x:{a.1} | t.r:[0,0] x:[1,2]"
