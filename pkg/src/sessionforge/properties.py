"""Safety, deadlock-freedom and liveness of typing contexts.

All three checks share one bounded explicit-state graph.  Liveness looks
for a fair lasso along which some obligation is never discharged:

* an L1 obligation (receiver, sender, label) exists while a message is
  queued and is discharged by a matching receive;
* an L2 obligation (receiver, sender) exists while a type waits on a
  branch and is discharged by any receive from that sender.

Fairness is a Streett condition: inside a candidate component, every
send pair (F1) or exact receive (F2) enabled somewhere must be taken
somewhere, otherwise the states enabling it are pruned and the
component is split again.
"""
from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Optional

from .core import Branch, End, ground_subtype, unfold
from .semantics import RECV, SEND, ActionLabel, TypingContext, context_step, context_transitions

DEFAULT_QUEUE_BOUND = 4


@dataclass
class PropertyVerdict:
    holds: Optional[bool]  # None means unknown (bound reached)
    counterexample: Optional[list] = None  # [(label, context)]
    bound_hit: bool = False
    kind: str = ""
    reason: str = ""
    loop_start: Optional[int] = None  # index in counterexample where the cycle starts
    states: int = 0

    def to_json(self) -> dict:
        trace = None
        if self.counterexample is not None:
            trace = [{"label": l.to_json(), "state": str(c)} for l, c in self.counterexample]
        return {
            "holds": "unknown" if self.holds is None else self.holds,
            "kind": self.kind,
            "reason": self.reason,
            "bound_hit": self.bound_hit,
            "states": self.states,
            "loop_start": self.loop_start,
            "counterexample": trace,
        }


@dataclass
class StateGraph:
    init: TypingContext
    index: dict = field(default_factory=dict)
    states: list = field(default_factory=list)
    edges: list = field(default_factory=list)  # per state: [(label, target)]
    truncated: list = field(default_factory=list)  # per state: labels cut by the bound
    parent: dict = field(default_factory=dict)
    bound_hit: bool = False

    def path_to(self, i: int) -> list:
        out = []
        while i in self.parent:
            j, lab = self.parent[i]
            out.append((lab, self.states[i]))
            i = j
        return out[::-1]


def _pair_counts(ctx: TypingContext) -> Counter:
    return Counter((p, m.dest) for p, (h, _) in ctx.items() for m in h)


def explore(ctx: TypingContext, queue_bound: int = DEFAULT_QUEUE_BOUND,
            state_cap: int = 200_000) -> StateGraph:
    sg = StateGraph(ctx)
    sg.index[ctx] = 0
    sg.states.append(ctx)
    work = deque([0])
    while work:
        i = work.popleft()
        c = sg.states[i]
        out, cut = [], []
        for lab, c2 in context_transitions(c):
            if lab.kind == SEND and _pair_counts(c2)[(lab.subject, lab.peer)] > queue_bound:
                cut.append(lab)
                sg.bound_hit = True
                continue
            j = sg.index.get(c2)
            if j is None:
                if len(sg.states) >= state_cap:
                    sg.bound_hit = True
                    cut.append(lab)
                    continue
                j = len(sg.states)
                sg.index[c2] = j
                sg.states.append(c2)
                sg.parent[j] = (i, lab)
                work.append(j)
            out.append((lab, j))
        sg.edges.append(out)
        sg.truncated.append(cut)
    return sg


# -- per-state predicates ---------------------------------------------------------


def unsafe_reason(ctx: TypingContext) -> Optional[str]:
    for p, (h, _) in ctx.items():
        seen = set()
        for m in h:
            if m.dest in seen:
                continue
            seen.add(m.dest)
            if m.dest not in ctx:
                continue
            t = unfold(ctx[m.dest][1])
            if isinstance(t, Branch) and t.peer == p:
                arms = {a.label: a.sort for a in t.branches}
                if m.label not in arms:
                    return f"{m.dest} cannot accept label {m.label} from {p}"
                if not ground_subtype(m.sort, arms[m.label]):
                    return f"payload of {m.label} from {p} to {m.dest} has the wrong sort"
    return None


def _stuck_reason(ctx: TypingContext) -> Optional[str]:
    for p, (h, t) in ctx.items():
        if not isinstance(unfold(t), End):
            return f"{p} is stuck at a non-end type"
        if h:
            return f"queue of {p} still holds messages"
    return None


def _obligations(ctx: TypingContext) -> set:
    obs = set()
    for p, (h, t) in ctx.items():
        for m in h:
            obs.add(("L1", m.dest, p, m.label))
        u = unfold(t)
        if isinstance(u, Branch):
            obs.add(("L2", p, u.peer))
    return obs


def _discharges(ob, lab: ActionLabel) -> bool:
    if lab.kind != RECV:
        return False
    if ob[0] == "L1":
        return (lab.subject, lab.peer, lab.label) == ob[1:]
    return (lab.subject, lab.peer) == ob[1:]


def _fair_keys(ctx: TypingContext, labels) -> set:
    """Fairness requirements enabled by a state's outgoing labels."""
    keys = set()
    for lab in labels:
        if lab.kind == SEND:
            keys.add(("F1", lab.subject, lab.peer))
        else:
            keys.add(("F2",) + tuple(lab))
    return keys


def _taken_key(lab: ActionLabel):
    if lab.kind == SEND:
        return ("F1", lab.subject, lab.peer)
    return ("F2",) + tuple(lab)


# -- checks ------------------------------------------------------------------------


def _first_bad(sg: StateGraph, pred) -> Optional[tuple]:
    for i, c in enumerate(sg.states):
        r = pred(i, c)
        if r:
            return i, r
    return None


def _eps_closure(g, start: int, stop) -> set:
    """Nodes reachable from ``start`` through nodes where ``stop`` is false."""
    seen, work, hits = {start}, [start], set()
    while work:
        i = work.pop()
        nd = g.nodes[i]
        if stop(nd):
            hits.add(i)
            continue
        for _, _, j in nd.edges:
            if j not in seen:
                seen.add(j)
                work.append(j)
    return hits


def _channel_safe(ctx: TypingContext, p: str, q: str) -> bool:
    """Pairwise product of p's sends to q with q's receives from p.

    The k-th message p sends to q is the one q's k-th receive from p
    consumes, so pairing the two projections in lockstep covers every
    execution.  Other actions are treated as free moves, which only adds
    behaviour, so finding no mismatch proves the channel safe.
    """
    from .core import graph_of

    h, tp = ctx[p]
    gp, gq = graph_of(tp), graph_of(ctx[q][1])
    prefix = [(m.label, m.sort) for m in h if m.dest == q]
    sends = lambda nd: nd.kind == "select" and nd.data[0] == q
    recvs = lambda nd: nd.kind == "branch" and nd.data[0] == p
    start = (0, gp.root, gq.root)
    seen, work = {start}, [start]
    while work:
        i, pn, qn = work.pop()
        if i < len(prefix):
            msgs = [(prefix[i][0], prefix[i][1], (i + 1, gp.root))]
        else:
            msgs = [(l, srt, (i, j)) for n in _eps_closure(gp, pn, sends)
                    for l, srt, j in gp.nodes[n].edges]
        for b in _eps_closure(gq, qn, recvs):
            arms = {l: (srt, j) for l, srt, j in gq.nodes[b].edges}
            for l, srt, (i2, pn2) in msgs:
                if l not in arms or not ground_subtype(srt, arms[l][0]):
                    return False
                st = (min(i2, len(prefix)), pn2, arms[l][1])
                if st not in seen:
                    seen.add(st)
                    work.append(st)
    return True


def safety_certificate(ctx: TypingContext) -> bool:
    """Sound unbounded argument: every sender/receiver channel is safe in
    isolation (see ``_channel_safe``)."""
    return all(_channel_safe(ctx, p, q) for p in ctx.domain for q in ctx.domain if p != q)


def _perpetual_sender(t) -> bool:
    """True when every node reachable from ``t`` is a selection."""
    from .core import graph_of

    return all(nd.kind == "select" for nd in graph_of(t).nodes)


def deadlock_certificate(sg: StateGraph) -> bool:
    """Sound unbounded argument: every state on the exploration frontier has
    a role that can only ever select.  That role stays enabled in every
    state reachable from there, so no unexplored state is stuck."""
    for i, cut in enumerate(sg.truncated):
        if cut and not any(_perpetual_sender(t) for _, (_, t) in sg.states[i].items()):
            return False
    return True


def check_safety(ctx: TypingContext, queue_bound: int = DEFAULT_QUEUE_BOUND,
                 graph: StateGraph | None = None) -> PropertyVerdict:
    sg = graph or explore(ctx, queue_bound)
    bad = _first_bad(sg, lambda i, c: unsafe_reason(c))
    if bad:
        i, why = bad
        return PropertyVerdict(False, sg.path_to(i), sg.bound_hit, "unsafe", why, None, len(sg.states))
    if sg.bound_hit and safety_certificate(ctx):
        return PropertyVerdict(True, None, True, "", "certified channel by channel", None, len(sg.states))
    return PropertyVerdict(None if sg.bound_hit else True, None, sg.bound_hit, "", "", None, len(sg.states))


def check_deadlock_freedom(ctx: TypingContext, queue_bound: int = DEFAULT_QUEUE_BOUND,
                           graph: StateGraph | None = None) -> PropertyVerdict:
    sg = graph or explore(ctx, queue_bound)

    def stuck(i, c):
        if sg.edges[i] or sg.truncated[i]:
            return None
        return _stuck_reason(c)

    bad = _first_bad(sg, stuck)
    if bad:
        i, why = bad
        return PropertyVerdict(False, sg.path_to(i), sg.bound_hit, "deadlock", why, None, len(sg.states))
    if sg.bound_hit and deadlock_certificate(sg):
        return PropertyVerdict(True, None, True, "", "certified by a perpetual sender", None, len(sg.states))
    return PropertyVerdict(None if sg.bound_hit else True, None, sg.bound_hit, "", "", None, len(sg.states))


def _sccs(nodes: set, succ) -> list:
    """Tarjan's algorithm restricted to ``nodes`` (iterative)."""
    index, low, on, stack, out = {}, {}, set(), [], []
    counter = 0
    for root in sorted(nodes):
        if root in index:
            continue
        work = [(root, iter(succ(root)))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in nodes:
                    continue
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on.add(w)
                    work.append((w, iter(succ(w))))
                    advanced = True
                    break
                if w in on:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                low[work[-1][0]] = min(low[work[-1][0]], low[v])
            if low[v] == index[v]:
                comp = set()
                while True:
                    w = stack.pop()
                    on.discard(w)
                    comp.add(w)
                    if w == v:
                        break
                out.append(comp)
    return out


def _cycle_through(sg: StateGraph, comp: set, edge_ok) -> tuple:
    """A closed walk from the entry state covering every edge inside comp."""
    entry = min(comp)
    inner = [(v, lab, j) for v in sorted(comp) for lab, j in sg.edges[v] if j in comp and edge_ok(lab)]

    def path(a, b):
        if a == b:
            return []
        prev = {a: None}
        q = deque([a])
        while q:
            v = q.popleft()
            for lab, j in sg.edges[v]:
                if j in comp and edge_ok(lab) and j not in prev:
                    prev[j] = (v, lab)
                    if j == b:
                        q.clear()
                        break
                    q.append(j)
        out = []
        while b != a:
            v, lab = prev[b]
            out.append((lab, b))
            b = v
        return out[::-1]

    walk = []
    cur = entry
    for v, lab, j in inner:
        walk += path(cur, v)
        walk.append((lab, j))
        cur = j
    walk += path(cur, entry)
    return entry, walk


def check_liveness(ctx: TypingContext, queue_bound: int = DEFAULT_QUEUE_BOUND,
                   graph: StateGraph | None = None) -> PropertyVerdict:
    sg = graph or explore(ctx, queue_bound)
    n = len(sg.states)
    # finite fair paths end in stuck states; any open obligation there is a violation
    for i in range(n):
        if not sg.edges[i] and not sg.truncated[i]:
            obs = sorted(_obligations(sg.states[i]))
            if obs:
                return PropertyVerdict(False, sg.path_to(i), sg.bound_hit, obs[0][0],
                                       f"execution stops with open obligation {obs[0]}", None, n)
    all_obs = sorted(set().union(*(_obligations(c) for c in sg.states)) if sg.states else [])
    for ob in all_obs:
        edge_ok = lambda lab, ob=ob: not _discharges(ob, lab)
        holders = {i for i in range(n) if ob in _obligations(sg.states[i])}
        if not holders:
            continue
        # the component must contain a state where the obligation is open
        found = None
        for c in _all_fair_components(sg, set(range(n)), edge_ok):
            if c & holders:
                found = c
                break
        if found is None:
            continue
        entry, walk = _cycle_through(sg, found, edge_ok)
        walk = [(lab, sg.states[j]) for lab, j in walk]
        prefix = sg.path_to(entry)
        return PropertyVerdict(False, prefix + walk, sg.bound_hit, ob[0],
                               f"obligation {ob} is never discharged on a fair cycle", len(prefix), n)
    if sg.bound_hit:
        for i in range(n):
            ob = _doomed_obligation(sg.states[i])
            if ob is not None:
                return PropertyVerdict(False, sg.path_to(i), True, ob[0],
                                       f"obligation {ob} can never be discharged", None, n)
    return PropertyVerdict(None if sg.bound_hit else True, None, sg.bound_hit, "", "", None, n)


def _doomed_obligation(ctx: TypingContext) -> Optional[tuple]:
    """An open obligation that no continuation can discharge.

    Every fair path from such a state violates liveness, and a fair path
    always exists (schedule the roles round-robin), so the finite prefix
    leading here is a counterexample even when the lasso lies beyond the
    queue bound.
    """
    from .core import graph_of

    for ob in sorted(_obligations(ctx)):
        if ob[0] == "L1":
            q, p, label = ob[1:]
            if q not in ctx:
                return ob
            g = graph_of(ctx[q][1])
            if not any(nd.kind == "branch" and nd.data[0] == p and any(l == label for l, _, _ in nd.edges)
                       for nd in g.nodes):
                return ob
        else:
            q, p = ob[1:]
            if p not in ctx:
                return ob
            h, t = ctx[p]
            if any(m.dest == q for m in h):
                continue
            if not any(nd.kind == "select" and nd.data[0] == q for nd in graph_of(t).nodes):
                return ob
    return None


def _all_fair_components(sg: StateGraph, nodes: set, edge_ok):
    """Yield every maximal fair strongly connected set found by refinement."""
    def succ(v):
        return [j for lab, j in sg.edges[v] if edge_ok(lab)]

    pending = [nodes]
    while pending:
        cur = pending.pop()
        for comp in _sccs(cur, succ):
            inner = [lab for v in comp for lab, j in sg.edges[v] if j in comp and edge_ok(lab)]
            if not inner:
                continue
            taken = {_taken_key(lab) for lab in inner}
            bad = set()
            for v in comp:
                labels = [lab for lab, _ in sg.edges[v]] + sg.truncated[v]
                if not _fair_keys(sg.states[v], labels) <= taken:
                    bad.add(v)
            if not bad:
                yield comp
            elif comp - bad:
                pending.append(comp - bad)


def replay(ctx: TypingContext, trace: list, loop_start: Optional[int] = None) -> bool:
    """Check that a counterexample is a genuine path (and closes its loop)."""
    cur = ctx
    visited = [ctx]
    for lab, state in trace:
        nxt = context_step(cur, lab)
        if nxt is None or nxt != state:
            return False
        cur = nxt
        visited.append(cur)
    if loop_start is not None:
        return visited[loop_start] == cur and len(trace) > loop_start
    return True


def check_all(ctx: TypingContext, queue_bound: int = DEFAULT_QUEUE_BOUND) -> dict:
    sg = explore(ctx, queue_bound)
    return {
        "safety": check_safety(ctx, queue_bound, sg),
        "deadlock_freedom": check_deadlock_freedom(ctx, queue_bound, sg),
        "liveness": check_liveness(ctx, queue_bound, sg),
    }
