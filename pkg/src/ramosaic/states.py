"""Program states (label, per-variable posets, interval memory) and the
instruction-wise merge that keeps per-label state sets in normal form:
two states at a label collapse when their poset maps agree (memories join)
or their memories agree (posets join variable-wise).

The normal form makes both the poset map and the memory a unique key within
a label's set, so buckets keep hash indexes on each.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, Tuple

from . import intervals, posets
from .litmus import Label
from .posets import MoPoset

_KEY_CACHE: dict = {}
_SIG_CACHE: dict = {}


@dataclass(frozen=True)
class AbstractState:
    at: Label
    mo: Tuple[Tuple[str, MoPoset], ...]  # sorted by variable name
    mem: Tuple[Tuple[str, intervals.Interval], ...]  # sorted by key

    @staticmethod
    def make(at: Label, mo: Dict[str, MoPoset], mem: Dict[str, intervals.Interval]) -> "AbstractState":
        return AbstractState(at,
                             tuple(sorted(mo.items())),
                             tuple(sorted(mem.items())))

    def mo_map(self) -> Dict[str, MoPoset]:
        return dict(self.mo)

    def mem_map(self) -> Dict[str, intervals.Interval]:
        return dict(self.mem)

    def po(self, var: str) -> MoPoset:
        for v, p in self.mo:
            if v == var:
                return p
        raise KeyError(var)

    def val(self, key: str) -> intervals.Interval:
        for k, v in self.mem:
            if k == key:
                return v
        raise KeyError(key)

    def has_bottom_po(self) -> bool:
        return any(p.bottom for _, p in self.mo)

    def sort_key(self) -> tuple:
        key = _KEY_CACHE.get(self)
        if key is None:
            key = (self.at,
                   tuple((v, p.bottom, tuple(sorted(p.events)),
                          tuple(sorted(p.pairs))) for v, p in self.mo),
                   tuple((k, iv.lo is None, iv.lo or 0, iv.hi is None, iv.hi or 0)
                         for k, iv in self.mem))
            _KEY_CACHE[self] = key
        return key

    def critical_signature(self) -> tuple:
        """Per-variable lock/unlock/rmw events; poset joins must not drop
        these, since consistency checks read them as authoritative history."""
        sig = _SIG_CACHE.get(self)
        if sig is None:
            sig = tuple(frozenset(e for e in p.events
                                  if e.kind in ("lock", "unlock", "rmw"))
                        for _, p in self.mo)
            _SIG_CACHE[self] = sig
        return sig

    def fmt(self) -> str:
        pos = " ".join(f"{v}:{p}" for v, p in self.mo)
        vals = " ".join(f"{k}:{iv}" for k, iv in self.mem)
        return f"{self.at} | {pos} | {vals}"


def _mo_join(a: Tuple, b: Tuple) -> Tuple:
    return tuple((v, posets.join(pa, pb))
                 for (v, pa), (_, pb) in zip(a, b))


def _mem_join(a: Tuple, b: Tuple) -> Tuple:
    return tuple((k, intervals.val_join(va, vb))
                 for (k, va), (_, vb) in zip(a, b))


class StateBucket:
    """Normal-form state set for one label, indexed by poset map and memory.

    The memory-equality rule joins posets, which intersects away events; it
    is therefore restricted to states that agree on their critical events
    (lock/unlock/rmw) per variable, whose presence later consistency checks
    rely on.  The poset-map index stays a unique key; the memory index maps
    to the states sharing that memory with differing critical signatures.
    """

    __slots__ = ("_by_mo", "_by_mem", "_sorted")

    def __init__(self):
        self._by_mo: dict = {}
        self._by_mem: dict = {}
        self._sorted = None

    def merge(self, s: AbstractState) -> None:
        if s.has_bottom_po():
            return
        cur = s
        while True:
            other = self._by_mo.get(cur.mo)
            if other is not None:
                self._remove(other)
                cur = AbstractState(cur.at, cur.mo, _mem_join(other.mem, cur.mem))
                continue
            other = None
            for cand in self._by_mem.get(cur.mem, ()):
                if cand.critical_signature() == cur.critical_signature():
                    other = cand
                    break
            if other is not None:
                self._remove(other)
                cur = AbstractState(cur.at, _mo_join(other.mo, cur.mo), cur.mem)
                continue
            self._by_mo[cur.mo] = cur
            self._by_mem.setdefault(cur.mem, []).append(cur)
            self._sorted = None
            return

    def _remove(self, s: AbstractState) -> None:
        del self._by_mo[s.mo]
        group = self._by_mem[s.mem]
        group.remove(s)
        if not group:
            del self._by_mem[s.mem]
        self._sorted = None

    def states(self) -> tuple:
        if self._sorted is None:
            self._sorted = tuple(sorted(self._by_mo.values(),
                                        key=AbstractState.sort_key))
        return self._sorted

    def __len__(self) -> int:
        return len(self._by_mo)

    def __eq__(self, other) -> bool:
        if not isinstance(other, StateBucket):
            return NotImplemented
        return self._by_mo.keys() == other._by_mo.keys() and all(
            self._by_mo[k] == other._by_mo[k] for k in self._by_mo)

    def copy(self) -> "StateBucket":
        out = StateBucket()
        out._by_mo = dict(self._by_mo)
        out._by_mem = {k: list(v) for k, v in self._by_mem.items()}
        out._sorted = self._sorted
        return out


def merge_state_list(states: list, s: AbstractState) -> None:
    """List-based variant of the merge, for small collections in tests."""
    bucket = StateBucket()
    for e in states:
        bucket.merge(e)
    bucket.merge(s)
    states[:] = bucket.states()


class StateSet:
    """Map from label to its normal-form set of states."""

    def __init__(self):
        self._by_label: Dict[Label, StateBucket] = {}

    def merge(self, s: AbstractState) -> None:
        self._by_label.setdefault(s.at, StateBucket()).merge(s)
        if not self._by_label[s.at]:
            del self._by_label[s.at]

    def merge_all(self, states: Iterable[AbstractState]) -> None:
        for s in states:
            self.merge(s)

    def at(self, label: Label) -> tuple:
        bucket = self._by_label.get(label)
        return bucket.states() if bucket is not None else ()

    def labels(self) -> tuple:
        return tuple(sorted(l for l, b in self._by_label.items() if len(b)))

    def copy(self) -> "StateSet":
        out = StateSet()
        out._by_label = {k: v.copy() for k, v in self._by_label.items()}
        return out

    def total_states(self) -> int:
        return sum(len(v) for v in self._by_label.values())

    def counts(self) -> Dict[str, int]:
        return {str(lbl): len(self._by_label[lbl]) for lbl in self.labels()}

    def __eq__(self, other) -> bool:
        if not isinstance(other, StateSet):
            return NotImplemented
        a = {k: v for k, v in self._by_label.items() if len(v)}
        b = {k: v for k, v in other._by_label.items() if len(v)}
        return a == b

    def dump(self) -> str:
        lines = []
        for lbl in self.labels():
            for s in self.at(lbl):
                lines.append(s.fmt())
        return "\n".join(lines)


def states_at(ss: StateSet, label: Label) -> tuple:
    return ss.at(label)


def equal_sets(a: StateSet, b: StateSet) -> bool:
    return a == b
