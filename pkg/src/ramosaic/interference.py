"""Per-thread interference maps and feasibility pruning of interference
combinations via the ppo/nrf rules.

A load's candidates are every other thread's writes of the same variable
plus ctx, which stands for reading the propagated in-thread state.  A
combination fixes one candidate per load of a thread; nrf rejects a
combination when one of its reads-from pairs is provably stale or redundant
given another pair and the reflexive-transitive per-thread order extended
over the implicit create/join structure.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

from .litmus import (Cas, Cfg, Fadd, Label, LoadInst, LockInst, Program,
                     Store, UnlockInst)

CTX = Label("%ctx")
INIT_LABEL = Label("%init")
FINAL_LABEL = Label("%final")


class CombinationBudgetExceeded(Exception):
    pass


def get_interfs(program: Program, cfg: Cfg) -> Dict[str, Dict[Label, Tuple[Label, ...]]]:
    """ctx plus all other-thread writes of the variable, per load/rmw label;
    for lock labels, other threads' unlocks of the mutex."""
    writes: Dict[str, list] = {}
    unlocks: Dict[str, list] = {}
    for lbl, instr in sorted(cfg.nodes.items()):
        if isinstance(instr, (Store, Cas, Fadd)):
            writes.setdefault(instr.var, []).append(lbl)
        elif isinstance(instr, UnlockInst):
            unlocks.setdefault(instr.mutex, []).append(lbl)
    out: Dict[str, Dict[Label, Tuple[Label, ...]]] = {t.name: {} for t in program.threads}
    for lbl, instr in sorted(cfg.nodes.items()):
        tname = cfg.thread_of[lbl]
        if isinstance(instr, (LoadInst, Cas, Fadd)):
            cands = [l for l in writes.get(instr.var, ())
                     if cfg.thread_of[l] != tname]
            out[tname][lbl] = (CTX, *cands)
        elif isinstance(instr, LockInst):
            cands = [l for l in unlocks.get(instr.mutex, ())
                     if cfg.thread_of[l] != tname]
            out[tname][lbl] = (CTX, *cands)
    return out


@dataclass(frozen=True)
class PpoRelation:
    """Reflexive-transitive order over labels, including the synthetic init
    and final blocks."""

    _succ: dict  # Label -> frozenset[Label]

    def holds(self, a: Label, b: Label) -> bool:
        return a == b or b in self._succ.get(a, frozenset())


def ppo_closure(program: Program, cfg: Cfg) -> PpoRelation:
    succ: Dict[Label, set] = {INIT_LABEL: set()}
    all_labels = list(cfg.nodes)
    for lbl in all_labels:
        succ[lbl] = set(l for l in all_labels
                        if cfg.thread_of[l] == cfg.thread_of[lbl] and cfg.reaches(lbl, l))
        succ[lbl].add(FINAL_LABEL)
    for lbl in all_labels:
        succ[INIT_LABEL].add(lbl)
    succ[INIT_LABEL].add(FINAL_LABEL)
    return PpoRelation({k: frozenset(v) for k, v in succ.items()})


def is_feasible(ic: Dict[Label, Label], ppo: PpoRelation,
                var_of: Optional[Dict[Label, str]] = None) -> bool:
    """False iff some rf pair rf(s',l') is derivable as not-reads-from: a
    distinct pair rf(s,l) exists with ppo(l,l') and ppo(s',s), where s and s'
    write the same variable.

    The variable side condition makes the staleness argument go through: s'
    before s in one thread's order puts s' before s in that variable's
    modification order, and reading s at l exposes s to the later l', so l'
    reading the overwritten s' breaks per-location coherence.  Across
    different variables no such modification-order link exists, and the
    unconditional rule prunes consistent executions.
    """
    rf_pairs = [(s, l) for l, s in sorted(ic.items()) if s != CTX]
    for s, l in rf_pairs:
        for s2, l2 in rf_pairs:
            if (s, l) == (s2, l2):
                continue
            if var_of is not None and var_of.get(s2) != var_of.get(s):
                continue
            if ppo.holds(l, l2) and ppo.holds(s2, s):
                return False
    return True


def write_vars(cfg: Cfg) -> Dict[Label, str]:
    return {lbl: instr.var for lbl, instr in cfg.nodes.items()
            if isinstance(instr, (Store, Cas, Fadd))}


def feasible_combinations(program: Program, cfg: Cfg, prune: bool = True,
                          cap: int = 4096) -> Dict[str, Tuple[Dict[Label, Label], ...]]:
    interfs = get_interfs(program, cfg)
    ppo = ppo_closure(program, cfg)
    var_of = write_vars(cfg)
    out: Dict[str, Tuple[Dict[Label, Label], ...]] = {}
    for t in program.threads:
        per_load = {lbl: cands for lbl, cands in sorted(interfs[t.name].items())
                    if not isinstance(cfg.nodes[lbl], LockInst)}
        size = 1
        for cands in per_load.values():
            size *= len(cands)
        if size > cap:
            raise CombinationBudgetExceeded(
                f"thread {t.name}: {size} interference combinations exceed cap {cap}")
        loads = list(per_load)
        combos = []
        for choice in itertools.product(*(per_load[l] for l in loads)):
            ic = dict(zip(loads, choice))
            if not prune or is_feasible(ic, ppo, var_of):
                combos.append(ic)
        out[t.name] = tuple(combos)
    return out
