"""The lattice of per-variable modification-order posets.

An element is a finite set of write events plus a strict partial order over
them, stored transitively closed; a dedicated bottom sits below everything
and the empty poset is top.  Two operator sets are provided: the
concrete-faithful one, and an upper-approximating one that forgets older
same-thread stores of the variable (newest-store abstraction).  The module
also hosts the abstraction/concretization pair bridging sets of total
modification orders (losets) to posets.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import FrozenSet, Iterable, Tuple

from .litmus import Cas, Cfg, Fadd, LockInst, Store, UnlockInst


class TooLarge(Exception):
    pass


@dataclass(frozen=True, order=True)
class Event:
    label: str
    instance: int
    thread: str
    kind: str  # store | rmw | lock | unlock
    var: str

    @property
    def key(self) -> tuple:
        return (self.label, self.instance)

    def __str__(self) -> str:
        return f"{self.label}.{self.instance}"


class SbIndex:
    """Same-thread, same-variable sequenced-before pairs, label-keyed.

    Queries are reflexive; `strict` excludes equal keys.
    """

    def __init__(self, pairs: Iterable[tuple] = ()):
        self._pairs = frozenset(pairs)

    def strict(self, a: tuple, b: tuple) -> bool:
        return (a, b) in self._pairs

    def sb(self, a: tuple, b: tuple) -> bool:
        return a == b or (a, b) in self._pairs

    @classmethod
    def from_cfg(cls, cfg: Cfg) -> "SbIndex":
        groups: dict = {}
        for lbl, instr in cfg.nodes.items():
            if isinstance(instr, Store):
                groups.setdefault((cfg.thread_of[lbl], instr.var), []).append(lbl)
            elif isinstance(instr, (Cas, Fadd)):
                groups.setdefault((cfg.thread_of[lbl], instr.var), []).append(lbl)
            elif isinstance(instr, (LockInst, UnlockInst)):
                groups.setdefault((cfg.thread_of[lbl], instr.mutex), []).append(lbl)
        pairs = set()
        for labels in groups.values():
            for a in labels:
                for b in labels:
                    if a != b and cfg.reaches(a, b):
                        pairs.add(((a.name, a.instance), (b.name, b.instance)))
        return cls(pairs)


EMPTY_SB = SbIndex()


def _closure(pairs: FrozenSet[tuple]) -> FrozenSet[tuple]:
    succ: dict = {}
    for a, b in pairs:
        succ.setdefault(a, set()).add(b)
    closed = set()
    for a in succ:
        seen: set = set()
        stack = list(succ[a])
        while stack:
            b = stack.pop()
            if b in seen:
                continue
            seen.add(b)
            stack.extend(succ.get(b, ()))
        closed.update((a, b) for b in seen)
    return frozenset(closed)


@dataclass(frozen=True)
class MoPoset:
    bottom: bool
    events: FrozenSet[Event]
    pairs: FrozenSet[tuple]  # (Event, Event), transitively closed

    def __str__(self) -> str:
        if self.bottom:
            return "⊥"
        evs = ", ".join(str(e) for e in sorted(self.events))
        prs = ", ".join(f"{a}<{b}" for a, b in sorted(self.pairs))
        return f"{{{evs} | {prs}}}" if prs else f"{{{evs}}}"

    @property
    def is_top(self) -> bool:
        return not self.bottom and not self.events

    def lasts(self) -> FrozenSet[Event]:
        """Maximal elements of the order."""
        if self.bottom:
            return frozenset()
        tails = {a for a, _ in self.pairs}
        return frozenset(e for e in self.events if e not in tails)

    def check(self):
        """Audit: irreflexive, acyclic, transitively closed, endpoints covered."""
        if self.bottom:
            assert not self.events and not self.pairs
            return
        for a, b in self.pairs:
            assert a != b, f"reflexive pair {a}"
            assert (b, a) not in self.pairs, f"cycle {a},{b}"
            assert a in self.events and b in self.events
        assert self.pairs == _closure(self.pairs), "order not transitively closed"


BOTTOM = MoPoset(True, frozenset(), frozenset())
TOP = MoPoset(False, frozenset(), frozenset())


def poset(events: Iterable[Event], pairs: Iterable[tuple] = ()) -> MoPoset:
    """Build a poset, closing the order; bottom when the input is cyclic."""
    evs = frozenset(events)
    closed = _closure(frozenset(pairs))
    if any(a == b for a, b in closed):
        return BOTTOM
    return MoPoset(False, evs, closed)


def chain(*events: Event) -> MoPoset:
    prs = {(events[i], events[j])
           for i in range(len(events)) for j in range(i + 1, len(events))}
    return MoPoset(False, frozenset(events), frozenset(prs))


def less(p1: MoPoset, p2: MoPoset) -> bool:
    """p1 is below p2: p1 has at least p2's events and all of p2's order."""
    if p1.bottom:
        return True
    if p2.bottom:
        return False
    return p1.events >= p2.events and p2.pairs <= p1.pairs


def consistent(p1: MoPoset, p2: MoPoset, sb: SbIndex = EMPTY_SB,
               abstract: bool = False, rmw_critical: bool = False) -> bool:
    """No conflicting pair between the two orders; bottom conflicts with all.

    Under the newest-store abstraction a pair (a,b) additionally forbids
    (c,a) in the other order for any c sequenced after b, since the ordering
    through forgotten intermediate stores is implied.

    Events of a kind that every execution orders totally (lock/unlock always;
    rmw when rmw_critical) conflict when both sides claim the first slot of
    the modification order: such an event with no predecessor on either side
    took its value from the initial state, and two of them cannot both be
    first.  Unordered pairs where some predecessor is known stay combinable,
    since a total order extending both sides exists.
    """
    if p1.bottom or p2.bottom:
        return False
    for pa, pb in ((p1, p2), (p2, p1)):
        for a, b in pa.pairs:
            if abstract:
                for c, a2 in pb.pairs:
                    if a2 == a and sb.sb(b.key, c.key):
                        return False
            elif (b, a) in pb.pairs:
                return False

    def critical(e: Event) -> bool:
        return e.kind in ("lock", "unlock") or (rmw_critical and e.kind == "rmw")

    def first_slot(e: Event) -> bool:
        return not any(b == e for _, b in p1.pairs) and \
            not any(b == e for _, b in p2.pairs)

    c1 = [e for e in p1.events if critical(e) and first_slot(e)]
    c2 = [e for e in p2.events if critical(e) and first_slot(e)]
    for u1 in c1:
        for u2 in c2:
            if u1 != u2:
                return False
    return True


def valid_extension(p: MoPoset, st: Event, sb: SbIndex = EMPTY_SB,
                    abstract: bool = False) -> bool:
    """st may be appended: nothing is ordered after it (and, abstractly,
    nothing sequenced after it is already present; sb is reflexive, so a
    re-append of a present event is rejected)."""
    if p.bottom:
        return False
    if any(a == st for a, _ in p.pairs):
        return False
    if abstract and any(sb.sb(st.key, b.key) for b in p.events):
        return False
    return True


def _forgettable(a: Event, rmw_critical: bool) -> bool:
    if a.kind in ("lock", "unlock"):
        return False
    if rmw_critical and a.kind == "rmw":
        return False
    return True


def append(p: MoPoset, st: Event, sb: SbIndex = EMPTY_SB,
           abstract: bool = False, rmw_critical: bool = False) -> MoPoset:
    """Append st as the new maximum; bottom when st is not a valid extension
    or is already present (the implied self-edge breaks acyclicity).

    Abstract mode forgets events strictly sequenced before st, except rmw
    events in rmw-critical mode and lock/unlock events, whose history the
    lock discipline checks need.
    """
    if p.bottom:
        return BOTTOM
    if st in p.events or not valid_extension(p, st, sb, abstract):
        return BOTTOM
    events = set(p.events)
    pairs = set(p.pairs)
    pairs.update((a, st) for a in events)
    events.add(st)
    if abstract:
        drop = {a for a in events
                if a != st and sb.strict(a.key, st.key) and _forgettable(a, rmw_critical)}
        if drop:
            events -= drop
            pairs = {(a, b) for a, b in pairs if a not in drop and b not in drop}
    return MoPoset(False, frozenset(events), frozenset(pairs))


def meet(p1: MoPoset, p2: MoPoset, sb: SbIndex = EMPTY_SB,
         abstract: bool = False, rmw_critical: bool = False) -> MoPoset:
    """Greatest lower bound: union of events and orderings when consistent.

    The pairwise consistency check misses alternating cycles longer than
    two, so the closed union is additionally audited for cycles; no partial
    order extends both sides in that case, hence bottom is the exact glb.
    """
    if p1.bottom or p2.bottom:
        return BOTTOM
    if not consistent(p1, p2, sb, abstract, rmw_critical):
        return BOTTOM
    closed = _closure(p1.pairs | p2.pairs)
    if any(a == b for a, b in closed):
        return BOTTOM
    return MoPoset(False, p1.events | p2.events, closed)


def join(p1: MoPoset, p2: MoPoset) -> MoPoset:
    """Least upper bound: common events with common orderings."""
    if p1.bottom:
        return p2
    if p2.bottom:
        return p1
    return MoPoset(False, p1.events & p2.events, p1.pairs & p2.pairs)


def widen(p1: MoPoset, p2: MoPoset) -> MoPoset:
    """Keep only the earliest common instance per instruction label."""
    if p1.bottom:
        return p2
    if p2.bottom:
        return p1
    common = p1.events & p2.events
    earliest: dict = {}
    for e in sorted(common):
        cur = earliest.get(e.label)
        if cur is None or e.instance < cur.instance:
            earliest[e.label] = e
    kept = frozenset(earliest.values())
    pairs = frozenset((a, b) for a, b in p1.pairs & p2.pairs
                      if a in kept and b in kept)
    return MoPoset(False, kept, pairs)


def abs_alpha(p: MoPoset, sb: SbIndex, rmw_critical: bool = False) -> MoPoset:
    """Forget events that have a strictly sequenced-after event present."""
    if p.bottom:
        return BOTTOM
    drop = {a for a in p.events
            if _forgettable(a, rmw_critical)
            and any(b != a and sb.strict(a.key, b.key) for b in p.events)}
    if not drop:
        return p
    events = p.events - drop
    pairs = frozenset((a, b) for a, b in p.pairs if a in events and b in events)
    return MoPoset(False, events, pairs)


def beta_related(p1: MoPoset, p2: MoPoset, sb: SbIndex) -> bool:
    """Soundness relation: p2 abstracts p1 (bottom relates to everything)."""
    if p1.bottom:
        return True
    if p2.bottom:
        return False
    allowed = {a for a in p1.events
               if not any(b != a and sb.strict(a.key, b.key) for b in p1.events)}
    return p2.events <= allowed and p2.pairs <= p1.pairs


# --------------------------------------------------------------------------
# Sets of total modification orders and the Galois bridge
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LosetSet:
    """A set of total orders (losets) over one shared event set."""

    bottom: bool
    events: FrozenSet[Event]
    losets: FrozenSet[Tuple[Event, ...]]

    def check(self):
        if self.bottom:
            assert not self.losets
            return
        for lo in self.losets:
            assert frozenset(lo) == self.events, "loset over a different event set"


LOSET_BOTTOM = LosetSet(True, frozenset(), frozenset())
LOSET_TOP = LosetSet(False, frozenset(), frozenset({()}))


def loset_set(losets: Iterable[Tuple[Event, ...]]) -> LosetSet:
    ls = frozenset(tuple(l) for l in losets)
    if not ls:
        return LOSET_BOTTOM
    events = frozenset(next(iter(ls)))
    out = LosetSet(False, events, ls)
    out.check()
    return out


def _loset_pairs(lo: Tuple[Event, ...]) -> FrozenSet[tuple]:
    return frozenset((lo[i], lo[j])
                     for i in range(len(lo)) for j in range(i + 1, len(lo)))


def loset_leq(t1: LosetSet, t2: LosetSet) -> bool:
    """t1 below t2: t1 constrains a superset of events, and each of its
    orders refines some order of t2 on the common events.  The empty set of
    constraints is a dedicated top above everything."""
    if t1.bottom:
        return True
    if t2.bottom:
        return False
    if not t2.events:
        return True
    if not (t1.events >= t2.events):
        return False
    for mo_i in t1.losets:
        restricted = [e for e in mo_i if e in t2.events]
        found = False
        for mo_j in t2.losets:
            if _loset_pairs(tuple(restricted)) <= _loset_pairs(mo_j):
                found = True
                break
        if not found:
            return False
    return True


def alpha(t: LosetSet) -> MoPoset:
    """Best poset abstraction: shared events, intersection of all orders."""
    if t.bottom:
        return BOTTOM
    pair_sets = [_loset_pairs(lo) for lo in t.losets]
    common = frozenset.intersection(*pair_sets) if pair_sets else frozenset()
    return MoPoset(False, t.events, common)


def gamma(p: MoPoset, guard: int = 8) -> LosetSet:
    """All linearizations of the order; test-only, guarded by event count."""
    if p.bottom:
        return LOSET_BOTTOM
    if len(p.events) > guard:
        raise TooLarge(f"{len(p.events)} events exceeds linearization guard {guard}")
    out = []
    for perm in itertools.permutations(sorted(p.events)):
        pos = {e: i for i, e in enumerate(perm)}
        if all(pos[a] < pos[b] for a, b in p.pairs):
            out.append(perm)
    return LosetSet(False, p.events, frozenset(out))
