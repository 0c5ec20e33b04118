"""Coinductive projection and full merging.

Both operations work on sets of graph nodes.  A local state is the set
of global (or member) nodes whose behaviour it must reconcile; merging
is then a union of sets, and nested merges flatten for free.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional

from .core import (
    END, GNode, LocalType, Message, Role, TypeGraph, GlobalType, graph_of, graph_to_type,
    minimize, normalize_queue, _canonical,
)
from .wellformed import is_balanced_plus


class NotBalancedError(ValueError):
    """Projection was asked for a global type that is not balanced+."""


class ProjectionFailure(Exception):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


@dataclass(frozen=True)
class Projection:
    queue: tuple
    local: LocalType

    def __iter__(self):
        return iter((self.queue, self.local))


_END_MARK = -1  # stands for a member that must behave as end


# -- per-node role information -------------------------------------------------


def _node_roles(gr: TypeGraph):
    """(aroles, sroles) for every node, by reachability."""
    n = len(gr.nodes)
    ar = [set() for _ in range(n)]
    sr = [set() for _ in range(n)]
    for i, nd in enumerate(gr.nodes):
        if nd.kind == "comm":
            ar[i] |= set(nd.data)
        elif nd.kind == "enroute":
            ar[i].add(nd.data[1])
            sr[i].add(nd.data[0])
    changed = True
    while changed:
        changed = False
        for i, nd in enumerate(gr.nodes):
            for _, _, c in nd.edges:
                if not ar[c] <= ar[i] or not sr[c] <= sr[i]:
                    ar[i] |= ar[c]
                    sr[i] |= sr[c]
                    changed = True
    return [frozenset(a) for a in ar], [frozenset(s) for s in sr]


class _GlobalView:
    def __init__(self, g: GlobalType, r: Role):
        self.gr = graph_of(g)
        self.r = r
        self.aroles, self.sroles = _node_roles(self.gr)

    def observable(self, i: int) -> bool:
        nd = self.gr.nodes[i]
        r = self.r
        if nd.kind == "comm":
            return r in nd.data
        if nd.kind == "enroute":
            return nd.data[1] == r
        return True  # end

    def closure(self, nodes: Iterable[int]) -> frozenset:
        """Frontier of r-observable nodes reached through uninvolved ones."""
        out = set()
        seen = set()
        stack = list(nodes)
        while stack:
            i = stack.pop()
            if i in seen:
                continue
            seen.add(i)
            if i == _END_MARK:
                out.add(i)
                continue
            if self.r not in self.aroles[i]:
                out.add(_END_MARK)
                continue
            if self.observable(i):
                out.add(i)
            else:
                stack.extend(c for _, _, c in self.gr.nodes[i].edges)
        return frozenset(out)

    def head(self, state: frozenset):
        """Return (kind, peer, {label: (sort, successor_state)}) or raise."""
        if not state:
            raise ProjectionFailure(f"role {self.r} has no observable behaviour on some path")
        if state == {_END_MARK}:
            return ("end", None, {})
        if _END_MARK in state:
            raise ProjectionFailure(f"cannot merge end with a non-end behaviour for {self.r}")
        nodes = [self.gr.nodes[i] for i in sorted(state)]
        r = self.r
        sends = [n for n in nodes if n.kind == "comm" and n.data[0] == r]
        if sends:
            if len(sends) != len(nodes):
                raise ProjectionFailure(f"cannot merge a selection with other behaviour for {r}")
            peers = {n.data[1] for n in sends}
            shapes = {tuple((l, s) for l, s, _ in n.edges) for n in sends}
            if len(peers) != 1 or len(shapes) != 1:
                raise ProjectionFailure(f"selections of {r} disagree on peer or labels")
            arms = {}
            for l, s, _ in sends[0].edges:
                kids = [c for n in sends for l2, _, c in n.edges if l2 == l]
                arms[l] = (s, self.closure(kids))
            return ("select", peers.pop(), arms)
        peers = {n.data[0] for n in nodes}
        if len(peers) != 1:
            raise ProjectionFailure(f"{r} would receive from different roles {sorted(peers)}")
        arms: dict = {}
        kids: dict = {}
        for n in nodes:
            for l, s, c in n.edges:
                if l in arms and arms[l] != s:
                    raise ProjectionFailure(f"payload sorts disagree on label {l} for {r}")
                arms[l] = s
                kids.setdefault(l, []).append(c)
        return ("branch", peers.pop(), {l: (arms[l], self.closure(kids[l])) for l in arms})

    def queue(self, i: int) -> tuple:
        memo: dict = {}
        on_stack: set = set()

        def go(i: int):
            if i in memo:
                return memo[i]
            if self.r not in self.sroles[i]:
                return ()
            if i in on_stack:
                return None  # unconstrained on a cycle
            on_stack.add(i)
            nd = self.gr.nodes[i]
            if nd.kind == "enroute":
                l, s, c = nd.edges[0]
                rest = go(c)
                if nd.data[0] == self.r:
                    out = None if rest is None else (Message(nd.data[1], l, s),) + rest
                else:
                    out = rest
            else:
                qs = {go(c) for _, _, c in nd.edges} - {None}
                if len(qs) > 1:
                    raise ProjectionFailure(f"queue disagreement for {self.r} across branches")
                out = qs.pop() if qs else None
            on_stack.discard(i)
            memo[i] = out
            return out

        q = go(i)
        return () if q is None else q


def _build_local(start, head) -> TypeGraph:
    """Explore states with ``head`` and return the minimal local graph."""
    index = {start: 0}
    nodes: list = [None]
    work = deque([start])
    while work:
        st = work.popleft()
        kind, peer, arms = head(st)
        edges = []
        for l in sorted(arms):
            s, nxt = arms[l]
            if nxt not in index:
                index[nxt] = len(nodes)
                nodes.append(None)
                work.append(nxt)
            edges.append((l, s, index[nxt]))
        data = () if kind == "end" else (peer,)
        nodes[index[st]] = GNode(kind, data, tuple(edges))
    return minimize(_canonical(nodes, 0))


def explain_projection(g: GlobalType, r: Role):
    """(Projection or None, reason or None); raises NotBalancedError."""
    if not is_balanced_plus(g):
        raise NotBalancedError("global type is not balanced+")
    return _project_cached(g, r)


@lru_cache(maxsize=4096)
def _project_cached(g: GlobalType, r: Role):
    view = _GlobalView(g, r)
    try:
        h = view.queue(view.gr.root)
        lg = _build_local(view.closure([view.gr.root]), view.head)
    except ProjectionFailure as e:
        return None, e.reason
    return Projection(normalize_queue(h), graph_to_type(lg)), None


def project(g: GlobalType, r: Role) -> Optional[Projection]:
    return explain_projection(g, r)[0]


def project_graph(g: GlobalType, r: Role) -> Optional[TypeGraph]:
    p = project(g, r)
    return None if p is None else graph_of(p.local)


def _product_check(start_sets, target: TypeGraph, head) -> bool:
    """Greatest-fixpoint check that ``target`` follows ``head`` from each start."""
    seen = set()
    work = [(s, target.root) for s in start_sets]
    while work:
        st, u = work.pop()
        if (st, u) in seen:
            continue
        seen.add((st, u))
        try:
            kind, peer, arms = head(st)
        except ProjectionFailure:
            return False
        nd = target.nodes[u]
        if nd.kind != kind or (kind != "end" and nd.data != (peer,)):
            return False
        tarms = {l: (s, c) for l, s, c in nd.edges}
        if set(tarms) != set(arms):
            return False
        for l, (s, nxt) in arms.items():
            if tarms[l][0] != s:
                return False
            work.append((nxt, tarms[l][1]))
    return True


def check_projection(g: GlobalType, r: Role, h, t: LocalType) -> bool:
    """Membership of (h, t) in the projection relation of g onto r."""
    view = _GlobalView(g, r)
    try:
        h0 = view.queue(view.gr.root)
    except ProjectionFailure:
        return False
    if normalize_queue(h0) != normalize_queue(h):
        return False
    return _product_check([view.closure([view.gr.root])], graph_of(t), view.head)


# -- merging ------------------------------------------------------------------


class _MergeView:
    """Disjoint union of member graphs; states are sets of (member, node)."""

    def __init__(self, ts: Iterable[LocalType]):
        self.graphs = [graph_of(t) for t in ts]
        if not self.graphs:
            raise ValueError("merge of an empty set")

    def start(self) -> frozenset:
        return frozenset((k, g.root) for k, g in enumerate(self.graphs))

    def head(self, state: frozenset):
        nodes = [(k, self.graphs[k].nodes[i]) for k, i in sorted(state)]
        kinds = {n.kind for _, n in nodes}
        if len(kinds) != 1:
            raise ProjectionFailure("members have different head kinds")
        kind = kinds.pop()
        if kind == "end":
            return ("end", None, {})
        peers = {n.data for _, n in nodes}
        if len(peers) != 1:
            raise ProjectionFailure("members interact with different peers")
        peer = peers.pop()[0]
        if kind == "select":
            shapes = {tuple((l, s) for l, s, _ in n.edges) for _, n in nodes}
            if len(shapes) != 1:
                raise ProjectionFailure("selections offer different labels")
        arms: dict = {}
        kids: dict = {}
        for k, n in nodes:
            for l, s, c in n.edges:
                if l in arms and arms[l] != s:
                    raise ProjectionFailure(f"payload sorts disagree on label {l}")
                arms[l] = s
                kids.setdefault(l, set()).add((k, c))
        return (kind, peer, {l: (arms[l], frozenset(kids[l])) for l in arms})


def merge(ts: Iterable[LocalType]) -> Optional[LocalType]:
    """Canonical member of the full merge of ``ts``, or None if unmergeable."""
    view = _MergeView(list(ts))
    try:
        lg = _build_local(view.start(), view.head)
    except ProjectionFailure:
        return None
    return graph_to_type(lg)


def check_merge(ts: Iterable[LocalType], t: LocalType) -> bool:
    view = _MergeView(list(ts))
    return _product_check([view.start()], graph_of(t), view.head)


def projected_context(g: GlobalType, roles_: Iterable[Role] | None = None):
    """Typing context of exact projections, or None if some role fails."""
    from .core import role_sets
    from .semantics import TypingContext

    rs = sorted(role_sets(g).roles if roles_ is None else roles_)
    entries = {}
    for r in rs:
        p = project(g, r)
        if p is None:
            return None
        entries[r] = (p.queue, p.local)
    return TypingContext.of(entries)
