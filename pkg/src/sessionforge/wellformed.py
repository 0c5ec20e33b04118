"""Depth functions, en-route counting and the balanced+ check."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import permutations
from typing import Optional

from .core import (
    Comm, End, EnRoute, GlobalType, Rec, Role, Var, canonical_type, free_vars, graph_of,
    role_sets, unfold,
)

# reachable states visited beyond the subterm closure, and the unfolding
# budget used when enumerating their transitions
REACH_CAP = 24
REACH_DEPTH = 3

DepthResult = Optional[int]  # None means undefined


def _graph_fixpoint(g: GlobalType, step) -> DepthResult:
    """Least fixpoint of a depth-like recursion on the minimal graph of ``g``.

    ``step(node, vals)`` returns the value of a node given current values of
    all nodes, or None while any needed child is still undefined.
    """
    gr = graph_of(g)
    vals: list = [None] * len(gr.nodes)
    changed = True
    while changed:
        changed = False
        for i, nd in enumerate(gr.nodes):
            if vals[i] is None:
                v = step(nd, vals)
                if v is not None:
                    vals[i] = v
                    changed = True
    return vals[gr.root]


def depth(g: GlobalType, r: Role) -> DepthResult:
    """Least n such that every path of length n from the root meets r."""

    def step(nd, vals):
        if nd.kind == "comm":
            if r in nd.data:
                return 1
            sub = [vals[c] for _, _, c in nd.edges]
            return None if None in sub else 1 + max(sub)
        if nd.kind == "enroute":
            if nd.data[1] == r:
                return 1
            v = vals[nd.edges[0][2]]
            return None if v is None else 1 + v
        return None

    return _graph_fixpoint(g, step)


def mdepth(g: GlobalType, p: Role, q: Role) -> DepthResult:
    """Distance to the nearest p ~> q transmission on every path."""

    def step(nd, vals):
        if nd.kind == "comm":
            sub = [vals[c] for _, _, c in nd.edges]
            return None if None in sub else 1 + max(sub)
        if nd.kind == "enroute":
            if nd.data == (p, q):
                return 1
            v = vals[nd.edges[0][2]]
            return None if v is None else 1 + v
        return None

    return _graph_fixpoint(g, step)


def depth_ast(g: GlobalType, r: Role) -> DepthResult:
    """Direct structural reading of the depth recursion on a finite AST.

    Variables and ``end`` are undefined.  Used as an oracle in tests; it
    agrees with ``depth`` because recursion always passes through a
    variable before revisiting a node.
    """
    if isinstance(g, Rec):
        return depth_ast(g.body, r)
    if isinstance(g, Comm):
        if r in (g.src, g.dst):
            return 1
        sub = [depth_ast(a.cont, r) for a in g.branches]
        return None if None in sub else 1 + max(sub)
    if isinstance(g, EnRoute):
        if r == g.dst:
            return 1
        v = depth_ast(g.cont, r)
        return None if v is None else 1 + v
    return None


@lru_cache(maxsize=None)
def mcount(g: GlobalType, p: Role, q: Role) -> Optional[int]:
    """Number of p ~> q messages in flight, or None when not uniform."""
    if isinstance(g, (End, Var)):
        return 0
    if isinstance(g, Rec):
        c = mcount(g.body, p, q)
        if c is None:
            return None
        if g.var not in free_vars(g.body) or c == 0:
            return c
        return None
    if isinstance(g, EnRoute):
        c = mcount(g.cont, p, q)
        if c is None:
            return None
        return c + 1 if (g.src, g.dst) == (p, q) else c
    if isinstance(g, Comm):
        if (g.src, g.dst) == (p, q):
            inner = frozenset().union(*(role_sets(a.cont).mroles for a in g.branches))
            return 0 if (p, q) not in inner else None
        counts = {mcount(a.cont, p, q) for a in g.branches}
        if len(counts) == 1 and None not in counts:
            return counts.pop()
        return None
    raise TypeError(f"not a global type: {g!r}")


@dataclass(frozen=True)
class Failure:
    subject: object  # role or (p, q) pair
    reason: str
    path: tuple  # labels from the root to the offending node

    def to_json(self) -> dict:
        subj = list(self.subject) if isinstance(self.subject, tuple) else self.subject
        return {"subject": subj, "reason": self.reason, "path": list(self.path)}


@dataclass
class BalanceReport:
    balanced: bool
    balanced_plus: bool
    failures: list = field(default_factory=list)
    method: str = "subterm-closure+reachable-sample"

    def to_json(self) -> dict:
        return {
            "balanced": self.balanced,
            "balanced_plus": self.balanced_plus,
            "failures": [f.to_json() for f in self.failures],
            "method": self.method,
        }


def subterm_closure(g: GlobalType) -> list:
    """(term, path) pairs closed under one-step unfolding and continuations."""
    seen = {g}
    out = []
    work = deque([(g, ())])
    while work:
        t, path = work.popleft()
        out.append((t, path))
        if isinstance(t, Rec):
            nxt = [(unfold(t), path)]
        elif isinstance(t, Comm):
            nxt = [(a.cont, path + (a.label,)) for a in t.branches]
        elif isinstance(t, EnRoute):
            nxt = [(t.cont, path + (t.label,))]
        else:
            nxt = []
        for s, pth in nxt:
            if s not in seen:
                seen.add(s)
                work.append((s, pth))
    return out


def _state_failures(t: GlobalType, path: tuple, all_roles: list) -> tuple:
    out = []
    bal_ok = count_ok = True
    for r in sorted(role_sets(t).aroles):
        if depth(t, r) is None:
            bal_ok = False
            out.append(Failure(r, f"depth of {r} undefined", path))
    for p, q in permutations(all_roles, 2):
        if mcount(t, p, q) is None:
            count_ok = False
            out.append(Failure((p, q), f"en-route count for ({p},{q}) undefined", path))
    return bal_ok, count_ok, out


def reachable_sample(g: GlobalType, cap: int = REACH_CAP):
    """(state, trace) pairs reachable by transitions, breadth-first, at most ``cap``."""
    from .semantics import global_transitions

    start = canonical_type(g)
    seen = {start}
    work = deque([(start, ())])
    out = []
    while work and len(out) < cap:
        t, trace = work.popleft()
        out.append((t, trace))
        for lab, t2 in sorted(global_transitions(t, REACH_DEPTH), key=str):
            c = canonical_type(t2)
            if c not in seen:
                seen.add(c)
                work.append((c, trace + (str(lab),)))
    return out


def check_balanced_plus(g: GlobalType) -> BalanceReport:
    """Depth and en-route counts over the subterm closure and a reachable sample.

    Failures found only in reachable states carry the transition labels
    leading there, prefixed with ``"~"``.
    """
    failures = []
    bal_ok = count_ok = True
    all_roles = sorted(role_sets(g).roles)
    closure = subterm_closure(g)
    for t, path in closure:
        b, c, fs = _state_failures(t, path, all_roles)
        bal_ok, count_ok = bal_ok and b, count_ok and c
        failures.extend(fs)
    if bal_ok and count_ok:
        known = {canonical_type(t) for t, _ in closure}
        for t, trace in reachable_sample(g):
            if t in known:
                continue
            b, c, fs = _state_failures(t, tuple("~" + l for l in trace), all_roles)
            bal_ok, count_ok = bal_ok and b, count_ok and c
            failures.extend(fs)
    return BalanceReport(bal_ok, bal_ok and count_ok, failures,
                         "subterm-closure+reachable-sample")


def is_balanced_plus(g: GlobalType) -> bool:
    return _bp_cached(g)


@lru_cache(maxsize=4096)
def _bp_cached(g: GlobalType) -> bool:
    return check_balanced_plus(g).balanced_plus
