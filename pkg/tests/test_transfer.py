"""Transfer-function behavior on the message-passing walkthrough, rmw
success/failure splitting, lock handling, and the simple operations."""

import pytest

from ramosaic import posets as P
from ramosaic.engine import tmai
from ramosaic.intervals import singleton
from ramosaic.litmus import Label, build_cfg, parse
from ramosaic.states import StateSet
from ramosaic.transfer import (AnalysisContext, AnalysisError, TransferConfig,
                               apply_interference, check_assert, transfer_node)

from conftest import MP_SRC


def _ctx_for(src, **tc_kw):
    p = parse(src)
    cfg = build_cfg(p)
    ctx = AnalysisContext(p, cfg, TransferConfig(**tc_kw))
    return p, cfg, ctx


def _run(src, **tc_kw):
    return tmai(parse(src), TransferConfig(**tc_kw))


def test_store_transfer_mp_first():
    p, cfg, ctx = _ctx_for(MP_SRC)
    init = ctx.initial_state("t1", cfg.entries["t1"])
    (out,) = transfer_node(ctx, Label("a"), [init], StateSet(), {})
    assert str(out.po("x")) == "{a.1}"
    assert out.po("y") == P.TOP
    assert out.val("x") == singleton(1)


def test_second_store_forgets_older_in_abstract_mode():
    src = "vars x = 0;\nthread t { a: store x 1; c: store x 2; }"
    r_abs = _run(src, abstract_mo=True)
    (s,) = r_abs.states.at(Label("c"))
    assert str(s.po("x")) == "{c.1}"
    r_con = _run(src, abstract_mo=False)
    (s,) = r_con.states.at(Label("c"))
    assert str(s.po("x")) == "{a.1, c.1 | a.1<c.1}"


def test_apply_interference_mp():
    p, cfg, ctx = _ctx_for(MP_SRC)
    r = tmai(p)
    target = ctx.initial_state("t2", cfg.entries["t2"])
    (source,) = r.states.at(Label("b"))
    out = apply_interference(ctx, target, source, ctx.events[Label("b")])
    assert str(out.po("x")) == "{a.1}"
    assert str(out.po("y")) == "{b.1}"
    # the source has observed strictly more of x, so its value is current
    assert out.val("x") == singleton(1)


def test_apply_interference_infeasible_on_reappend():
    p, cfg, ctx = _ctx_for(MP_SRC)
    r = tmai(p)
    (source_a,) = r.states.at(Label("a"))
    targets = r.states.at(Label("c"))
    carried = [t for t in targets if not t.po("x").is_top]
    assert carried
    for t in carried:
        assert apply_interference(ctx, t, source_a, ctx.events[Label("a")]) is None


def test_load_ctx_and_interference():
    r = tmai(parse(MP_SRC))
    states_c = r.states.at(Label("c"))
    r1_vals = sorted(str(s.val("t2.r1")) for s in states_c)
    assert r1_vals == ["[0,0]", "[1,1]"]


def test_load_only_ctx_when_interference_infeasible():
    # at d the only interference (from a) re-appends a known event
    r = tmai(parse(MP_SRC))
    states_d = r.states.at(Label("d"))
    carried = [s for s in states_d if str(s.po("y")) == "{b.1}"]
    (s,) = carried
    assert s.val("t2.r1") == singleton(1)
    assert s.val("t2.r2") == singleton(1)


def test_cas_success_and_failure_split():
    src = "vars x = 0;\nthread t { a: r = cas x 0 1; }"
    r = _run(src)
    (s,) = r.states.at(Label("a"))
    assert str(s.po("x")) == "{a.1}"
    assert s.val("x") == singleton(1)
    assert s.val("t.r") == singleton(0)

    src = "vars x = 5;\nthread t { a: r = cas x 0 1; }"
    r = _run(src)
    (s,) = r.states.at(Label("a"))
    assert s.po("x") == P.TOP  # failure publishes no event
    assert s.val("t.r") == singleton(5)


def test_cas_both_branches_on_uncertain_value():
    src = """
vars x = 0, y = 0;
thread w { b: store x 1; }
thread t { c: r0 = load x; d: r = cas y r0 7; }
"""
    r = _run(src)
    states = r.states.at(Label("d"))
    posets = {str(s.po("y")) for s in states}
    assert "{d.1}" in posets  # success branch appended the rmw event
    assert "{}" in posets  # failure branch left the order alone


def test_fadd_transfer():
    src = "vars x = 2;\nthread t { a: r = fadd x 1; }"
    r = _run(src)
    (s,) = r.states.at(Label("a"))
    assert s.val("x") == singleton(3)
    assert s.val("t.r") == singleton(2)
    assert str(s.po("x")) == "{a.1}"


def test_fadd_against_oracle_single_thread():
    from ramosaic.oracle import enumerate_executions

    src = "vars x = 2;\nthread t { a: r = fadd x 1; b: q = load x; }"
    p = parse(src)
    (exe,) = enumerate_executions(p)
    regs = exe.register_map()
    r = tmai(p)
    (s,) = r.states.at(Label("b"))
    assert regs["t.r"] in s.val("t.r")
    assert regs["t.q"] in s.val("t.q")
    assert s.val("t.q") == singleton(3)


def test_assume_assign_assert():
    src = """
vars x = 0;
thread w { s: store x 1; }
thread t {
  c: r = load x;
  u: assume(r == 1);
  a: r2 = r + 1;
  z: assert(r2 == 2);
}
"""
    r = _run(src)
    assert r.verdicts[str(Label("z"))].proved
    states = r.states.at(Label("a"))
    assert all(s.val("t.r") == singleton(1) for s in states)
    assert all(s.val("t.r2") == singleton(2) for s in states)


def test_assume_false_drops_downstream():
    src = "vars x = 0;\nthread t { u: assume(false); a: store x 1; }"
    r = _run(src)
    assert r.states.at(Label("a")) == ()


def test_check_assert_trivial():
    from ramosaic.intervals import NameEnv
    from ramosaic.litmus import BoolLit

    p = parse("vars x = 0;\nthread t { a: store x 1; }")
    env = NameEnv(p, "t")
    assert check_assert([], BoolLit(True), env).proved
    r = tmai(p)
    v = check_assert(r.states.at(Label("a")), BoolLit(True), env)
    assert v.proved and not v.witnesses


def test_widening_threshold_validated():
    with pytest.raises(ValueError):
        TransferConfig(widening_threshold=0)


def test_interference_infeasible_on_conflicting_posets():
    """Interference application fails whenever any variable's posets carry
    opposite orderings."""
    from ramosaic.posets import Event, chain
    from ramosaic.states import AbstractState
    from ramosaic.intervals import singleton

    src = """
vars x = 0, y = 0;
thread t1 { a: store x 1; b: store x 2; }
thread t2 { w: store y 1; }
"""
    p, cfg, ctx = _ctx_for(src, abstract_mo=False)
    ea = Event("a", 1, "t1", "store", "x")
    eb = Event("b", 1, "t1", "store", "x")
    mem = {"x": singleton(0), "y": singleton(0)}
    target = AbstractState.make(Label("z"), {"x": chain(ea, eb), "y": P.TOP}, mem)
    source = AbstractState.make(Label("w"), {"x": chain(eb, ea), "y": P.TOP},
                                {"x": singleton(0), "y": singleton(1)})
    assert apply_interference(ctx, target, source, ctx.events[Label("w")]) is None


def test_frame_property():
    """A store to one variable leaves every other variable's poset intact."""
    src = """
vars x = 0, y = 0, z = 0;
thread w { wy: store y 5; }
thread t { c: r = load y; a: store x r; }
"""
    p, cfg, ctx = _ctx_for(src)
    r = tmai(p)
    for pre in r.states.at(Label("c")):
        for out in transfer_node(ctx, Label("a"), [pre], StateSet(), {}):
            assert out.po("y") == pre.po("y")
            assert out.po("z") == pre.po("z")


def test_lock_uncontended():
    src = "vars x = 0;\nlocks m;\nthread t { p: lock m; q: unlock m; }"
    r = _run(src)
    (s,) = r.states.at(Label("p"))
    assert str(s.po("m")) == "{p.1}"
    (s,) = r.states.at(Label("q"))
    assert str(s.po("m")) == "{p.1, q.1 | p.1<q.1}"


def test_lock_after_other_thread():
    src = """
vars x = 0;
locks m;
thread t1 { p1: lock m; w1: store x 1; q1: unlock m; }
thread t2 { p2: lock m; c2: r = load x; q2: unlock m; }
"""
    r = _run(src)
    posets = {str(s.po("m")) for s in r.states.at(Label("p2"))}
    assert "{p2.1}" in posets  # acquired first
    assert any("q1.1<p2.1" in p for p in posets)  # acquired after t1 released
    # lock events of one mutex stay serialized in every stored state
    for lbl in r.states.labels():
        for s in r.states.at(lbl):
            locks = [e for e in s.po("m").events if e.kind == "lock"]
            for i, l1 in enumerate(locks):
                for l2 in locks[i + 1:]:
                    assert (l1, l2) in s.po("m").pairs or (l2, l1) in s.po("m").pairs


def test_unlock_without_lock_is_an_error():
    src = "vars x = 0;\nlocks m;\nthread t { q: unlock m; }"
    with pytest.raises(AnalysisError):
        _run(src)


def test_rmw_critical_totality_on_fenced_corpus():
    """On the rmw-fenced benchmarks, every stored state keeps its rmw events
    totally ordered per variable."""
    from conftest import BENCH_DIR

    for name in ("dijkstra_fen.lit", "cas_mutex_fen.lit", "lock_mutex.lit"):
        r = tmai(parse((BENCH_DIR / name).read_text()))
        for lbl in r.states.labels():
            for s in r.states.at(lbl):
                for _, po in s.mo:
                    rmws = [e for e in po.events if e.kind == "rmw"]
                    for i, u1 in enumerate(rmws):
                        for u2 in rmws[i + 1:]:
                            assert (u1, u2) in po.pairs or (u2, u1) in po.pairs
