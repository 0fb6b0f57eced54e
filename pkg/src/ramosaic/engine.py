"""Fixpoint driver: per-thread worklist analysis repeated over all threads
against the global state set until nothing changes, with assertions evaluated
on the fixpoint.  A combination-based variant runs each thread once per
feasible interference combination instead of per-load.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional

from . import interference, intervals, posets
from .intervals import val_widen
from .litmus import AssertInst, Cfg, Label, Program, build_cfg
from .states import AbstractState, StateBucket, StateSet, equal_sets
from .transfer import (AnalysisContext, TransferConfig, Verdict, check_assert,
                       check_final_assert, transfer_node)


class Divergence(Exception):
    pass


@dataclass
class AnalysisResult:
    states: StateSet
    verdicts: Dict[str, Verdict]
    iterations_total: int
    iterations_effective: int
    widened: frozenset

    @property
    def all_proved(self) -> bool:
        return all(v.proved for v in self.verdicts.values())


def _collapse(states) -> Optional[AbstractState]:
    """Fold a state list into a single state (variable-wise poset join,
    memory hull); used only when widening at loop headers."""
    if not states:
        return None
    cur = states[0]
    for s in states[1:]:
        mo = {v: posets.join(p, s.po(v)) for v, p in cur.mo}
        mem = {k: intervals.val_join(iv, s.val(k)) for k, iv in cur.mem}
        cur = AbstractState.make(cur.at, mo, mem)
    return cur


def _widen_states(old_states, new_states) -> list:
    old = _collapse(old_states)
    new = _collapse(new_states)
    if old is None:
        return list(new_states)
    if new is None:
        return list(old_states)
    mo = {v: posets.widen(p, new.po(v)) for v, p in old.mo}
    mem = {k: val_widen(iv, new.val(k)) for k, iv in old.mem}
    return [AbstractState.make(old.at, mo, mem)]


def seq_ai(ctx: AnalysisContext, tname: str, global_ss: StateSet,
           interfs: Dict[Label, tuple], widened: Optional[set] = None) -> Dict[Label, list]:
    """Worklist pass over one thread's CFG in reverse post-order, reading
    interference sources from the global state set."""
    cfg = ctx.cfg
    rpo = cfg.rpo[tname]
    index = {lbl: i for i, lbl in enumerate(rpo)}
    entry = cfg.entries[tname]
    local: Dict[Label, list] = {entry: [ctx.initial_state(tname, entry)]}
    visits: Dict[Label, int] = {}
    pending = set(rpo) - {entry}
    while pending:
        lbl = min(pending, key=index.__getitem__)
        pending.discard(lbl)
        pre_states = []
        for p in cfg.preds[lbl]:
            pre_states.extend(local.get(p, ()))
        visits[lbl] = visits.get(lbl, 0) + 1
        bump = visits[lbl] - 1 if lbl in cfg.loop_headers or visits[lbl] > 1 else 0
        bucket = StateBucket()
        for s in transfer_node(ctx, lbl, pre_states, global_ss, interfs, bump=bump):
            bucket.merge(s)
        new = list(bucket.states())
        if lbl in cfg.loop_headers and visits[lbl] > ctx.tc.widening_threshold:
            new = _widen_states(local.get(lbl, []), new)
            if widened is not None:
                widened.add(lbl)
        if new != local.get(lbl, []):
            local[lbl] = new
            pending.update(cfg.succs[lbl])
    local.pop(entry, None)
    return local


def _evaluate(ctx: AnalysisContext, ss: StateSet) -> Dict[str, Verdict]:
    verdicts: Dict[str, Verdict] = {}
    for lbl, instr in sorted(ctx.cfg.nodes.items()):
        if isinstance(instr, AssertInst):
            env = ctx.envs[ctx.cfg.thread_of[lbl]]
            verdicts[str(lbl)] = check_assert(ss.at(lbl), instr.cond, env)
    if ctx.program.postcondition is not None:
        verdicts["final"] = check_final_assert(ctx, ss, ctx.program.postcondition)
    return verdicts


def _fixpoint(ctx: AnalysisContext, run_round, max_iterations: int) -> AnalysisResult:
    """Accumulate per-thread results until the state set stops changing.

    The instruction-wise merge joins and replaces states, so the accumulator
    is not monotone and can in rare cases revisit an earlier value instead
    of settling (interacting merge chains).  Every merge output covers its
    inputs, so any revisited set already covers everything produced since;
    a repeat is therefore a sound stopping point.
    """
    sigma = StateSet()
    widened: set = set()
    rounds = 0
    effective = 0
    seen: set = set()
    while True:
        if rounds >= max_iterations:
            raise Divergence(f"no fixpoint after {max_iterations} rounds")
        snapshot = sigma.copy()
        seen.add(snapshot.dump())
        rounds += 1
        run_round(sigma, snapshot, widened)
        if equal_sets(sigma, snapshot):
            break
        if sigma.dump() in seen:
            effective += 1
            break
        effective += 1
    return AnalysisResult(sigma, _evaluate(ctx, sigma), rounds, effective,
                          frozenset(widened))


def tmai(program: Program, tc: TransferConfig = TransferConfig(),
         max_iterations: int = 1000, cfg: Optional[Cfg] = None) -> AnalysisResult:
    cfg = cfg or build_cfg(program)
    ctx = AnalysisContext(program, cfg, tc)
    interfs = interference.get_interfs(program, cfg)

    def run_round(sigma, snapshot, widened):
        for t in program.threads:
            local = seq_ai(ctx, t.name, snapshot, interfs[t.name], widened)
            for lbl in sorted(local):
                sigma.merge_all(local[lbl])

    return _fixpoint(ctx, run_round, max_iterations)


def analyze_with_combinations(program: Program, tc: TransferConfig = TransferConfig(),
                              max_iterations: int = 1000, prune: bool = True,
                              cap: int = 4096,
                              cfg: Optional[Cfg] = None) -> AnalysisResult:
    """Run each thread once per feasible interference combination, with its
    loads pinned to the chosen sources, and union the results."""
    cfg = cfg or build_cfg(program)
    ctx = AnalysisContext(program, cfg, tc)
    interfs = interference.get_interfs(program, cfg)
    combos = interference.feasible_combinations(program, cfg, prune=prune, cap=cap)

    def run_round(sigma, snapshot, widened):
        for t in program.threads:
            base = interfs[t.name]
            for combo in combos[t.name]:
                pinned = dict(base)
                for lbl, chosen in combo.items():
                    pinned[lbl] = (chosen,)
                local = seq_ai(ctx, t.name, snapshot, pinned, widened)
                for lbl in sorted(local):
                    sigma.merge_all(local[lbl])

    return _fixpoint(ctx, run_round, max_iterations)
