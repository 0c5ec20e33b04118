"""Transition labels and the global, context and local transition systems."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product
from typing import Iterable, NamedTuple, Optional

from .core import (
    Arm, Branch, Comm, End, EnRoute, GlobalType, Label, LocalType, Message, Rec, Role,
    Select, Sort, canonical_type, ground_subtype, normalize_queue, unfold,
)

SEND = "send"
RECV = "recv"


class ActionLabel(NamedTuple):
    """``send``: subject sends to peer.  ``recv``: subject receives from peer."""

    kind: str
    subject: Role
    peer: Role
    label: Label
    sort: Sort

    def __str__(self) -> str:
        op = "(+)" if self.kind == SEND else "&"
        pay = "" if self.sort == Sort.UNIT else f"({self.sort.value})"
        return f"{self.subject}{self.peer}{op}{self.label}{pay}"

    def to_json(self) -> dict:
        return {"kind": self.kind, "subject": self.subject, "peer": self.peer,
                "label": self.label, "sort": Sort(self.sort).value}


def send(p: Role, q: Role, label: Label, sort=Sort.UNIT) -> ActionLabel:
    return ActionLabel(SEND, p, q, label, Sort(sort))


def recv(p: Role, q: Role, label: Label, sort=Sort.UNIT) -> ActionLabel:
    """p receives ``label`` from q."""
    return ActionLabel(RECV, p, q, label, Sort(sort))


def label_subject(l: ActionLabel) -> Role:
    return l.subject


def same_action(l1: ActionLabel, l2: ActionLabel) -> bool:
    return l1[:4] == l2[:4]


def label_leq(l1: ActionLabel, l2: ActionLabel) -> bool:
    """Sends are covariant in the payload, receives contravariant."""
    if not same_action(l1, l2):
        return False
    if l1.kind == SEND:
        return ground_subtype(l1.sort, l2.sort)
    return ground_subtype(l2.sort, l1.sort)


# -- typing contexts ----------------------------------------------------------


@dataclass(frozen=True)
class TypingContext:
    """Finite map role -> (queue type, local type), stored sorted by role."""

    entries: tuple  # ((role, queue, type), ...)

    @staticmethod
    def of(m) -> "TypingContext":
        items = m.items() if hasattr(m, "items") else m
        return TypingContext(tuple(sorted((r, normalize_queue(h), t) for r, (h, t) in items)))

    def items(self):
        return [(r, (h, t)) for r, h, t in self.entries]

    def __getitem__(self, r: Role):
        for r2, h, t in self.entries:
            if r2 == r:
                return (h, t)
        raise KeyError(r)

    def __contains__(self, r: Role) -> bool:
        return any(r2 == r for r2, _, _ in self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def domain(self) -> frozenset:
        return frozenset(r for r, _, _ in self.entries)

    def update(self, **changes) -> "TypingContext":
        m = dict(self.items())
        m.update(changes)
        return TypingContext.of(m)

    def replace(self, changes: dict) -> "TypingContext":
        m = dict(self.items())
        m.update(changes)
        return TypingContext.of(m)

    def compose(self, other: "TypingContext") -> "TypingContext":
        if self.domain & other.domain:
            raise ValueError("composed contexts must have disjoint domains")
        return TypingContext.of(dict(self.items()) | dict(other.items()))

    def __str__(self) -> str:
        from .frontend.printer import print_context

        return print_context(self)


def context_transitions(ctx: TypingContext) -> list:
    """All one-step successors as (label, context) pairs, deterministic order."""
    out = []
    for p, (h, t) in ctx.items():
        u = unfold(t)
        if isinstance(u, Select):
            for a in u.branches:
                h2 = normalize_queue(h + (Message(u.peer, a.label, a.sort),))
                out.append((send(p, u.peer, a.label, a.sort), ctx.replace({p: (h2, a.cont)})))
        elif isinstance(u, Branch):
            q = u.peer
            if q not in ctx or q == p:
                continue
            hq, tq = ctx[q]
            idx = next((k for k, m in enumerate(hq) if m.dest == p), None)
            if idx is None:
                continue
            m = hq[idx]
            arms = {a.label: a for a in u.branches}
            a = arms.get(m.label)
            if a is None or not ground_subtype(m.sort, a.sort):
                continue
            hq2 = hq[:idx] + hq[idx + 1:]
            out.append((recv(p, q, a.label, a.sort), ctx.replace({p: (h, a.cont), q: (hq2, tq)})))
    return out


def context_step(ctx: TypingContext, l: ActionLabel) -> Optional[TypingContext]:
    for l2, c2 in context_transitions(ctx):
        if l2 == l:
            return c2
    return None


class LocalAction(NamedTuple):
    peer: Role
    direction: str  # send | recv
    label: Label
    sort: Sort


def local_transitions(t: LocalType) -> list:
    u = unfold(t)
    if isinstance(u, Select):
        return [(LocalAction(u.peer, SEND, a.label, a.sort), a.cont) for a in u.branches]
    if isinstance(u, Branch):
        return [(LocalAction(u.peer, RECV, a.label, a.sort), a.cont) for a in u.branches]
    return []


# -- global transition system ----------------------------------------------------


DEFAULT_DEPTH = 8


def global_transitions(g: GlobalType, depth_bound: int = DEFAULT_DEPTH, all_subsets: bool = False) -> set:
    """(label, successor) pairs derivable with at most ``depth_bound`` unfoldings.

    Successors are canonical ASTs, so set membership is bisimilarity.
    """
    return set(_moves(canonical_type(g), depth_bound, all_subsets))


@lru_cache(maxsize=200_000)
def _moves(g: GlobalType, b: int, all_subsets: bool) -> frozenset:
    if b < 0:
        return frozenset()
    out = set(_level(g, b, all_subsets))
    if b > 0:
        out |= _moves(g, b - 1, all_subsets)
    return frozenset(out)


def _canon_moves(g: GlobalType, b: int, all_subsets: bool) -> dict:
    """label -> set of successors of a (canonical) continuation."""
    by: dict = {}
    for l, s in _moves(g, b, all_subsets):
        by.setdefault(l, set()).add(s)
    return by


def _level(g: GlobalType, b: int, all_subsets: bool) -> set:
    if isinstance(g, End):
        return set()
    if isinstance(g, Rec):
        if b == 0:
            return set()
        return set(_moves(unfold(g), b - 1, all_subsets))
    out = set()
    if isinstance(g, EnRoute):
        out.add((recv(g.dst, g.src, g.label, g.sort), canonical_type(g.cont)))
        for l, s in _moves(canonical_type(g.cont), b, all_subsets):
            if l.kind == RECV and l.subject == g.dst and l.peer == g.src:
                continue
            out.add((l, canonical_type(EnRoute(g.src, g.dst, g.label, g.sort, s))))
        return out
    if not isinstance(g, Comm):
        return out
    p, q = g.src, g.dst
    for a in g.branches:
        out.add((send(p, q, a.label, a.sort), canonical_type(EnRoute(p, q, a.label, a.sort, a.cont))))
    per = [_canon_moves(canonical_type(a.cont), b, all_subsets) for a in g.branches]
    labels = set().union(*(set(m) for m in per))
    for l in labels:
        if l.subject != p:
            # context rule I: every branch moves by the same label
            if not all(l in m for m in per):
                continue
            for choice in product(*(sorted(m[l], key=repr) for m in per)):
                arms = tuple(Arm(a.label, a.sort, s) for a, s in zip(g.branches, choice))
                out.add((l, canonical_type(Comm(p, q, arms))))
        elif l.kind == SEND and l.peer != q:
            # context rule I': a send by p to another role, on a subset of branches
            jmax = [k for k, m in enumerate(per) if l in m]
            subsets = [jmax]
            if all_subsets:
                subsets = [list(c) for n in range(1, len(jmax) + 1) for c in combinations(jmax, n)]
            for J in subsets:
                for choice in product(*(sorted(per[k][l], key=repr) for k in J)):
                    arms = tuple(Arm(g.branches[k].label, g.branches[k].sort, s) for k, s in zip(J, choice))
                    out.add((l, canonical_type(Comm(p, q, arms))))
    return out


def global_step_matching(g: GlobalType, l: ActionLabel, depth_bound: int = DEFAULT_DEPTH,
                         all_subsets: bool = False) -> set:
    """Successors of g under some l2 with l <= l2 on the same action."""
    return {s for l2, s in global_transitions(g, depth_bound, all_subsets) if label_leq(l, l2)}


def can_move(g: GlobalType, depth_bound: int = DEFAULT_DEPTH) -> bool:
    return bool(global_transitions(g, depth_bound))
