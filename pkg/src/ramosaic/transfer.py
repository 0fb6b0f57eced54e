"""Transfer functions for store, load, rmw, lock/unlock, assign, assume and
assertion checking, plus interference application.

Applying an interference appends the interfering write to the target's poset
for that variable, meets all per-variable posets, and combines memories
variable by variable: when one side's poset strictly extends the other's,
that side has observed every store the other has (and more), so its value for
the variable is the current one; incomparable or equal views fall back to the
interval hull.  The loaded variable always takes the source's value.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, Optional

from . import intervals, posets
from .intervals import Interval, NameEnv, eval_expr, exclude_value, refine, val_join, val_meet
from .litmus import (AssertInst, Assign, Assume, Cas, Cfg, Fadd, Label,
                     LoadInst, LockInst, Nop, Program, Store, UnlockInst)
from .interference import CTX
from .posets import Event, MoPoset, SbIndex
from .states import AbstractState, StateSet


class AnalysisError(Exception):
    pass


@dataclass(frozen=True)
class TransferConfig:
    abstract_mo: bool = True
    rmw_critical: bool = True
    widening_threshold: int = 3

    def __post_init__(self):
        if self.widening_threshold < 1:
            raise ValueError("widening threshold must be >= 1")


@dataclass(frozen=True)
class Verdict:
    proved: bool
    witnesses: tuple = ()

    def __str__(self) -> str:
        return "Proved" if self.proved else "PossiblyViolated"


class AnalysisContext:
    """Per-program immutable analysis data: CFG, sb index, events, lock pairing."""

    def __init__(self, program: Program, cfg: Cfg, tc: TransferConfig):
        self.program = program
        self.cfg = cfg
        self.tc = tc
        self.sb = SbIndex.from_cfg(cfg)
        self.envs = {t.name: NameEnv(program, t.name) for t in program.threads}
        self.events: Dict[Label, Event] = {}
        for lbl, instr in cfg.nodes.items():
            tname = cfg.thread_of[lbl]
            if isinstance(instr, Store):
                self.events[lbl] = Event(lbl.name, lbl.instance, tname, "store", instr.var)
            elif isinstance(instr, (Cas, Fadd)):
                self.events[lbl] = Event(lbl.name, lbl.instance, tname, "rmw", instr.var)
            elif isinstance(instr, LockInst):
                self.events[lbl] = Event(lbl.name, lbl.instance, tname, "lock", instr.mutex)
            elif isinstance(instr, UnlockInst):
                self.events[lbl] = Event(lbl.name, lbl.instance, tname, "unlock", instr.mutex)
        self.matching_lock = self._match(UnlockInst, LockInst)
        self.matching_unlock = self._match(LockInst, UnlockInst)
        for lbl, instr in cfg.nodes.items():
            if isinstance(instr, UnlockInst) and lbl not in self.matching_lock:
                raise AnalysisError(f"unlock {lbl} has no matching lock of "
                                    f"{instr.mutex!r} before it")
        self._ai_memo: dict = {}

    def _match(self, from_kind, to_kind) -> Dict[Label, Label]:
        """Nearest same-mutex counterpart in CFG order within the thread."""
        out: Dict[Label, Label] = {}
        nodes = self.cfg.nodes
        for lbl, instr in nodes.items():
            if not isinstance(instr, from_kind):
                continue
            mutex = instr.mutex
            forward = from_kind is LockInst
            cands = []
            for other, oinstr in nodes.items():
                if not isinstance(oinstr, to_kind) or oinstr.mutex != mutex:
                    continue
                if self.cfg.thread_of[other] != self.cfg.thread_of[lbl]:
                    continue
                reach = self.cfg.reaches(lbl, other) if forward else self.cfg.reaches(other, lbl)
                if reach:
                    cands.append(other)
            nearest = None
            for c in cands:
                # nearest: no other candidate strictly between lbl and c
                blocked = any((self.cfg.reaches(lbl, d) and self.cfg.reaches(d, c)) if forward
                              else (self.cfg.reaches(c, d) and self.cfg.reaches(d, lbl))
                              for d in cands if d != c)
                if not blocked:
                    nearest = c
                    break
            if nearest is not None:
                out[lbl] = nearest
        return out

    def event_at(self, lbl: Label, bump: int = 0) -> Event:
        ev = self.events[lbl]
        if bump:
            ev = Event(ev.label, ev.instance + bump, ev.thread, ev.kind, ev.var)
        return ev

    def po_keys(self) -> tuple:
        return tuple(self.program.shared_names()) + tuple(self.program.mutexes)

    def initial_state(self, tname: str, at: Label) -> AbstractState:
        mo = {v: posets.TOP for v in self.po_keys()}
        mem = {n: intervals.singleton(v) for n, v in self.program.shared}
        for r in self.program.thread_registers(tname):
            mem[self.program.register_key(tname, r)] = intervals.singleton(0)
        return AbstractState.make(at, mo, mem)


def apply_interference(ctx: AnalysisContext, target: AbstractState,
                       source: AbstractState, src_event: Event) -> Optional[AbstractState]:
    memo_key = (target, source, src_event)
    if memo_key in ctx._ai_memo:
        return ctx._ai_memo[memo_key]
    result = _apply_interference(ctx, target, source, src_event)
    ctx._ai_memo[memo_key] = result
    return result


def _apply_interference(ctx: AnalysisContext, target: AbstractState,
                        source: AbstractState, src_event: Event) -> Optional[AbstractState]:
    tc = ctx.tc
    t_mo, s_mo = target.mo_map(), source.mo_map()
    new_mo: Dict[str, MoPoset] = {}
    for v in t_mo:
        pt, ps = t_mo[v], s_mo[v]
        if v == src_event.var:
            appended = posets.append(pt, src_event, ctx.sb, tc.abstract_mo, tc.rmw_critical)
            if appended.bottom:
                return None
            met = posets.meet(appended, ps, ctx.sb, tc.abstract_mo, tc.rmw_critical)
        else:
            met = posets.meet(pt, ps, ctx.sb, tc.abstract_mo, tc.rmw_critical)
        if met.bottom:
            return None
        new_mo[v] = met
    new_mem: Dict[str, Interval] = {}
    s_mem = source.mem_map()
    for k, iv in target.mem_map().items():
        if k not in s_mo:  # a register of the target thread
            new_mem[k] = iv
            continue
        pt, ps = t_mo[k], s_mo[k]
        src_ahead = posets.less(ps, pt) and ps != pt
        tgt_ahead = posets.less(pt, ps) and ps != pt
        if k == src_event.var or src_ahead:
            new_mem[k] = s_mem[k]
        elif tgt_ahead:
            new_mem[k] = iv
        else:
            new_mem[k] = val_join(iv, s_mem[k])
    return AbstractState.make(target.at, new_mo, new_mem)


def _retarget(s: AbstractState, lbl: Label) -> AbstractState:
    return AbstractState(lbl, s.mo, s.mem)


def _load_bases(ctx, s, interfs, global_ss, var):
    """Yield (base state, loaded interval) per interference choice."""
    for src in interfs:
        if src == CTX:
            yield s, s.val(var)
        else:
            ev = ctx.events[src]
            for src_state in global_ss.at(src):
                r = apply_interference(ctx, s, src_state, ev)
                if r is not None:
                    yield r, src_state.val(var)


def transfer_node(ctx: AnalysisContext, lbl: Label, pre_states,
                  global_ss: StateSet, interf_map, bump: int = 0) -> list:
    instr = ctx.cfg.nodes[lbl]
    tname = ctx.cfg.thread_of[lbl]
    env = ctx.envs[tname]
    tc = ctx.tc
    out: list = []

    if isinstance(instr, (Nop, AssertInst)):
        return [_retarget(s, lbl) for s in pre_states]

    if isinstance(instr, Assume):
        for s in pre_states:
            m = refine(s.mem_map(), instr.cond, env)
            if m is not None:
                out.append(AbstractState.make(lbl, s.mo_map(), m))
        return out

    if isinstance(instr, Assign):
        key = ctx.program.register_key(tname, instr.reg)
        for s in pre_states:
            val = eval_expr(instr.value, s.mem_map(), env)
            if val.is_empty:
                continue
            mem = s.mem_map()
            mem[key] = val
            out.append(AbstractState.make(lbl, s.mo_map(), mem))
        return out

    if isinstance(instr, Store):
        ev = ctx.event_at(lbl, bump)
        for s in pre_states:
            p = posets.append(s.po(instr.var), ev, ctx.sb, tc.abstract_mo, tc.rmw_critical)
            if p.bottom:
                continue
            val = eval_expr(instr.value, s.mem_map(), env)
            if val.is_empty:
                continue
            mo = s.mo_map()
            mo[instr.var] = p
            mem = s.mem_map()
            mem[instr.var] = val
            out.append(AbstractState.make(lbl, mo, mem))
        return out

    if isinstance(instr, LoadInst):
        key = ctx.program.register_key(tname, instr.reg)
        interfs = interf_map.get(lbl, (CTX,))
        for s in pre_states:
            for base, loaded in _load_bases(ctx, s, interfs, global_ss, instr.var):
                mem = base.mem_map()
                mem[instr.var] = loaded
                mem[key] = loaded
                out.append(AbstractState.make(lbl, base.mo_map(), mem))
        return out

    if isinstance(instr, (Cas, Fadd)):
        return _transfer_rmw(ctx, lbl, instr, pre_states, global_ss, interf_map, bump)

    if isinstance(instr, LockInst):
        return _transfer_lock(ctx, lbl, instr, pre_states, global_ss, interf_map, bump)

    if isinstance(instr, UnlockInst):
        return _transfer_unlock(ctx, lbl, instr, pre_states, bump)

    raise TypeError(instr)


def _transfer_rmw(ctx, lbl, instr, pre_states, global_ss, interf_map, bump) -> list:
    tname = ctx.cfg.thread_of[lbl]
    env = ctx.envs[tname]
    tc = ctx.tc
    key = ctx.program.register_key(tname, instr.reg)
    var = instr.var
    interfs = interf_map.get(lbl, (CTX,))
    out: list = []
    for s in pre_states:
        for base, loaded in _load_bases(ctx, s, interfs, global_ss, var):
            if loaded.is_empty:
                continue
            if isinstance(instr, Fadd):
                addend = eval_expr(instr.addend, base.mem_map(), env)
                stored = intervals.add(loaded, addend)
                ev = ctx.event_at(lbl, bump)
                p = posets.append(base.po(var), ev, ctx.sb, tc.abstract_mo, tc.rmw_critical)
                if p.bottom or stored.is_empty:
                    continue
                mo = base.mo_map()
                mo[var] = p
                mem = base.mem_map()
                mem[var] = stored
                mem[key] = loaded
                out.append(AbstractState.make(lbl, mo, mem))
                continue
            expected = eval_expr(instr.expected, base.mem_map(), env)
            succ = val_meet(loaded, expected)
            if not succ.is_empty:
                stored = eval_expr(instr.new, base.mem_map(), env)
                ev = ctx.event_at(lbl, bump)
                p = posets.append(base.po(var), ev, ctx.sb, tc.abstract_mo, tc.rmw_critical)
                if not p.bottom and not stored.is_empty:
                    mo = base.mo_map()
                    mo[var] = p
                    mem = base.mem_map()
                    mem[var] = stored
                    mem[key] = succ
                    out.append(AbstractState.make(lbl, mo, mem))
            certain_success = (loaded.is_singleton() and expected.is_singleton()
                               and loaded.lo == expected.lo)
            if not certain_success:
                fail = exclude_value(loaded, expected.lo) if expected.is_singleton() else loaded
                if fail.is_empty:
                    continue
                # a failed cas reads (and synchronizes) but publishes no event
                mem = base.mem_map()
                mem[var] = fail
                mem[key] = fail
                out.append(AbstractState.make(lbl, base.mo_map(), mem))
    return out


def _ends_in_lock(p: MoPoset):
    return [e for e in sorted(p.lasts()) if e.kind == "lock"]


def _transfer_lock(ctx, lbl, instr, pre_states, global_ss, interf_map, bump) -> list:
    """Free the mutex first (apply the holding lock's unlock states), then
    consider re-orderings against every other thread's unlocks, then append."""
    mutex = instr.mutex
    freed: list = []
    for s in pre_states:
        holders = _ends_in_lock(s.po(mutex))
        if holders:
            for le in holders:
                ul = ctx.matching_unlock.get(Label(le.label, le.instance))
                if ul is None:
                    continue
                for u in global_ss.at(ul):
                    r = apply_interference(ctx, s, u, ctx.events[ul])
                    if r is not None:
                        freed.append(r)
        else:
            freed.append(s)
    out: list = []
    ev = ctx.event_at(lbl, bump)
    interfs = interf_map.get(lbl, (CTX,))
    for s in freed:
        candidates = [s]
        for src in interfs:
            if src == CTX:
                continue
            for u in global_ss.at(src):
                r = apply_interference(ctx, s, u, ctx.events[src])
                if r is not None:
                    candidates.append(r)
        for c in candidates:
            pm = c.po(mutex)
            if _ends_in_lock(pm):
                continue
            p = posets.append(pm, ev, ctx.sb, ctx.tc.abstract_mo, ctx.tc.rmw_critical)
            if p.bottom:
                continue
            mo = c.mo_map()
            mo[mutex] = p
            out.append(AbstractState.make(lbl, mo, c.mem_map()))
    return out


def _transfer_unlock(ctx, lbl, instr, pre_states, bump) -> list:
    """States whose mutex order does not end in the matching lock are
    unreachable here and dropped; a statically unmatched unlock was already
    rejected when the context was built."""
    mutex = instr.mutex
    lock_lbl = ctx.matching_lock[lbl]
    lock_ev = ctx.events[lock_lbl]
    ev = ctx.event_at(lbl, bump)
    out: list = []
    for s in pre_states:
        pm = s.po(mutex)
        if lock_ev not in pm.lasts():
            continue
        p = posets.append(pm, ev, ctx.sb, ctx.tc.abstract_mo, ctx.tc.rmw_critical)
        if p.bottom:
            continue
        mo = s.mo_map()
        mo[mutex] = p
        out.append(AbstractState.make(lbl, mo, s.mem_map()))
    return out


def check_assert(states, cond, env: NameEnv) -> Verdict:
    """Proved iff the negated condition is infeasible in every state."""
    from .litmus import negate
    neg = negate(cond)
    witnesses = []
    for s in states:
        if refine(s.mem_map(), neg, env) is not None:
            witnesses.append(s)
    return Verdict(not witnesses, tuple(witnesses))


def check_final_assert(ctx: AnalysisContext, ss: StateSet, cond) -> Verdict:
    """Evaluate the postcondition over every combination of per-thread exit
    states; it may only mention registers, which are disjoint across threads."""
    program = ctx.program
    env = NameEnv(program, None)
    from .litmus import negate
    neg = negate(cond)
    per_thread = []
    for t in program.threads:
        sts = ss.at(ctx.cfg.exits[t.name])
        regs = [program.register_key(t.name, r) for r in program.thread_registers(t.name)]
        per_thread.append([{k: s.val(k) for k in regs} for s in sts] or [{}])
    witnesses = []
    for combo in itertools.product(*per_thread):
        mem: Dict[str, Interval] = {}
        for part in combo:
            mem.update(part)
        if refine(mem, neg, env) is not None:
            witnesses.append(tuple(sorted((k, str(v)) for k, v in mem.items())))
    return Verdict(not witnesses, tuple(witnesses))
