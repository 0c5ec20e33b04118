"""Synchronous, queue and bounded precise asynchronous subtyping.

The asynchronous check is a simulation game between the subtype ``T``
and a *residual* of the supertype ``T'``.  The residual records actions
of ``T'`` that ``T`` has overtaken (anticipated) but not yet performed:

    ('L', n)                   untouched supertype graph node n
    ('E',)                     end
    ('A', peer, l, S, rho)     committed receive, waiting to be matched
    ('B', peer, arms)          receive choice, every arm must stay viable
    ('S', peer, arms, lossy)   selection, any surviving arm may be used

Each anticipation skips at most ``window`` residual actions.  A failure
that does not depend on the window is a sound refutation; anything cut
off by the window degrades to Unknown.
"""
from __future__ import annotations

import enum
import sys
from dataclasses import dataclass, field
from typing import Optional

from .core import (
    LocalType, TypeGraph, graph_of, ground_subtype, normalize_queue,
)

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))


class Verdict3(enum.Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"

    def __str__(self) -> str:
        return self.value

    def __bool__(self) -> bool:
        raise TypeError("Verdict3 has no truth value; compare against Verdict3.YES")


YES, NO, UNKNOWN = Verdict3.YES, Verdict3.NO, Verdict3.UNKNOWN

DEFAULT_BOUND = 2


# -- synchronous subtyping --------------------------------------------------------


def sync_subtype(t1: LocalType, t2: LocalType) -> bool:
    """Coinductive check: more branch labels, fewer select labels."""
    g1 = t1 if isinstance(t1, TypeGraph) else graph_of(t1)
    g2 = t2 if isinstance(t2, TypeGraph) else graph_of(t2)
    seen = set()
    work = [(g1.root, g2.root)]
    while work:
        pair = work.pop()
        if pair in seen:
            continue
        seen.add(pair)
        a, b = g1.nodes[pair[0]], g2.nodes[pair[1]]
        if a.kind != b.kind or a.data != b.data:
            return False
        if a.kind == "end":
            continue
        ea = {l: (s, c) for l, s, c in a.edges}
        eb = {l: (s, c) for l, s, c in b.edges}
        if a.kind == "branch":
            if not set(eb) <= set(ea):
                return False
            for l in eb:
                if not ground_subtype(eb[l][0], ea[l][0]):
                    return False
                work.append((ea[l][1], eb[l][1]))
        else:
            if not ea or not set(ea) <= set(eb):
                return False
            for l in ea:
                if not ground_subtype(ea[l][0], eb[l][0]):
                    return False
                work.append((ea[l][1], eb[l][1]))
    return True


def queue_subtype(h1, h2) -> bool:
    """Same shape after normalisation, payloads covariant."""
    a, b = normalize_queue(h1), normalize_queue(h2)
    if len(a) != len(b):
        return False
    return all(x.dest == y.dest and x.label == y.label and ground_subtype(x.sort, y.sort)
               for x, y in zip(a, b))


# -- SISO helpers --------------------------------------------------------------------


def is_siso(t) -> bool:
    g = t if isinstance(t, TypeGraph) else graph_of(t)
    return all(n.kind == "end" or len(n.edges) == 1 for n in g.nodes)


def _reach_acts(g: TypeGraph) -> list:
    """For every node, the set of (role, '!'|'?') actions reachable from it."""
    acts = [set() for _ in g.nodes]
    for i, n in enumerate(g.nodes):
        if n.kind == "select":
            acts[i].add((n.data[0], "!"))
        elif n.kind == "branch":
            acts[i].add((n.data[0], "?"))
    changed = True
    while changed:
        changed = False
        for i, n in enumerate(g.nodes):
            for _, _, c in n.edges:
                if not acts[c] <= acts[i]:
                    acts[i] |= acts[c]
                    changed = True
    return [frozenset(a) for a in acts]


def act_set(w) -> frozenset:
    g = w if isinstance(w, TypeGraph) else graph_of(w)
    return _reach_acts(g)[g.root]


# -- the asynchronous game ------------------------------------------------------------

_OK, _FAIL, _CUT = "ok", "fail", "cut"


@dataclass
class AsyncResult:
    verdict: Verdict3
    window: Optional[int]  # window that decided the verdict
    trace: list = field(default_factory=list)
    reason: str = ""


class _Game:
    def __init__(self, g1: TypeGraph, g2: TypeGraph, window: int):
        self.g1, self.g2 = g1, g2
        self.window = window
        self.cap = 2 * window + 2
        self.acts1 = _reach_acts(g1)
        self.acts2 = _reach_acts(g2)
        self.memo: dict = {}
        self.index: dict = {}
        self.trace: list = []
        self.reason = ""

    # residual helpers

    def expand(self, rho):
        if rho[0] != "L":
            return rho
        n = self.g2.nodes[rho[1]]
        if n.kind == "end":
            return ("E",)
        arms = tuple((l, s, ("L", c)) for l, s, c in n.edges)
        if n.kind == "branch":
            return ("B", n.data[0], arms)
        return ("S", n.data[0], arms, False)

    def depth(self, rho) -> int:
        if rho[0] in ("L", "E"):
            return 0
        if rho[0] == "A":
            return 1 + self.depth(rho[4])
        return 1 + max(self.depth(a[2]) for a in rho[2])

    def pending(self, rho) -> frozenset:
        """Actions every completion of the residual still owes."""
        if rho[0] in ("L", "E"):
            return frozenset()
        if rho[0] == "A":
            return frozenset([(rho[1], "?")]) | self.pending(rho[4])
        tag = "?" if rho[0] == "B" else "!"
        head = frozenset([(rho[1], tag)])
        if rho[0] == "S" and rho[3]:
            return head
        common = None
        for a in rho[2]:
            p = self.pending(a[2])
            common = p if common is None else common & p
        return head | (common or frozenset())

    def reach(self, rho):
        """Actions the residual can still perform, or None if arms were dropped."""
        if rho[0] == "L":
            return self.acts2[rho[1]]
        if rho[0] == "E":
            return frozenset()
        if rho[0] == "A":
            rest = self.reach(rho[4])
            return None if rest is None else rest | {(rho[1], "?")}
        if rho[0] == "S" and rho[3]:
            return None
        out = {(rho[1], "?" if rho[0] == "B" else "!")}
        for a in rho[2]:
            sub = self.reach(a[2])
            if sub is None:
                return None
            out |= sub
        return frozenset(out)

    def _out_of_budget(self, rho, act):
        """CUT, unless the residual can never perform ``act`` at all."""
        r = self.reach(rho)
        return _FAIL if r is not None and act not in r else _CUT

    def rm_send(self, rho, q, l, s, budget):
        rho = self.expand(rho)
        tag = rho[0]
        if tag == "E":
            return _FAIL, None
        if tag == "S" and rho[1] == q:
            for l2, s2, nxt in rho[2]:
                if l2 == l:
                    if ground_subtype(s, s2):
                        return _OK, nxt
                    return _FAIL, None
            return (_CUT if rho[3] else _FAIL), None
        if budget == 0:
            return self._out_of_budget(rho, (q, "!")), None
        if tag == "A":
            st, nxt = self.rm_send(rho[4], q, l, s, budget - 1)
            return (st, (rho[0], rho[1], rho[2], rho[3], nxt) if st == _OK else None)
        if tag == "B":
            arms = []
            cut = False
            for l2, s2, sub in rho[2]:
                st, nxt = self.rm_send(sub, q, l, s, budget - 1)
                if st == _FAIL:
                    return _FAIL, None
                cut |= st == _CUT
                arms.append((l2, s2, nxt))
            if cut:
                return _CUT, None
            return _OK, ("B", rho[1], tuple(arms))
        # selection towards another role: keep the arms that still work
        arms = []
        lossy = rho[3]
        for l2, s2, sub in rho[2]:
            st, nxt = self.rm_send(sub, q, l, s, budget - 1)
            if st == _OK:
                arms.append((l2, s2, nxt))
            elif st == _CUT:
                lossy = True
        if arms:
            return _OK, ("S", rho[1], tuple(arms), lossy)
        return (_CUT if lossy else _FAIL), None

    def rm_recv(self, rho, p, budget):
        rho = self.expand(rho)
        tag = rho[0]
        if tag in ("E", "S"):
            return _FAIL, None
        if tag == "A":
            if rho[1] == p:
                return _OK, [(rho[2], rho[3], rho[4])]
            if budget == 0:
                return self._out_of_budget(rho, (p, "?")), None
            st, alts = self.rm_recv(rho[4], p, budget - 1)
            if st != _OK:
                return st, None
            return _OK, [(l, s, ("A", rho[1], rho[2], rho[3], r)) for l, s, r in alts]
        if rho[1] == p:
            return _OK, [(l, s, nxt) for l, s, nxt in rho[2]]
        if budget == 0:
            return self._out_of_budget(rho, (p, "?")), None
        out = []
        cut = False
        for l2, s2, sub in rho[2]:
            st, alts = self.rm_recv(sub, p, budget - 1)
            if st == _FAIL:
                return _FAIL, None
            if st == _CUT:
                cut = True
                continue
            out.extend((l, s, ("A", rho[1], l2, s2, r)) for l, s, r in alts)
        if cut:
            return _CUT, None
        return _OK, out

    # obligations of one state

    def obligations(self, state):
        """List of (status, successor_state, note)."""
        t, rho = state
        n = self.g1.nodes[t]
        if n.kind == "end":
            r = self.expand(rho)
            if r[0] == "E":
                return []
            return [(_FAIL, None, "subtype ends while the supertype continues")]
        out = []
        peer = n.data[0]
        if n.kind == "select":
            for l, s, c in n.edges:
                st, nxt = self.rm_send(rho, peer, l, s, self.window)
                if st != _OK:
                    out.append((st, None, f"cannot match send {peer}!{l}"))
                else:
                    out.append(self.successor(c, nxt, f"{peer}!{l}"))
            return out
        st, alts = self.rm_recv(rho, peer, self.window)
        if st != _OK:
            return [(st, None, f"cannot match a receive from {peer}")]
        mine = {l: (s, c) for l, s, c in n.edges}
        for l, s2, nxt in alts:
            if l not in mine:
                out.append((_FAIL, None, f"subtype lacks receive {peer}?{l}"))
            elif not ground_subtype(s2, mine[l][0]):
                out.append((_FAIL, None, f"payload of {peer}?{l} not contravariant"))
            else:
                out.append(self.successor(mine[l][1], nxt, f"{peer}?{l}"))
        return out

    def successor(self, t, rho, note):
        if self.depth(rho) > self.cap:
            return (_CUT, None, "residual grew past the window")
        if not self.pending(rho) <= self.acts1[t]:
            return (_FAIL, None, f"anticipated actions never performed after {note}")
        return (_OK, (t, rho), note)

    def solve(self, state, stack: list):
        """Returns (verdict, lowest stack index this verdict depends on)."""
        if state in self.memo:
            return self.memo[state], len(stack)
        if state in self.index:
            idx = self.index[state]
            # a loop is a valid witness only if it catches up with the
            # supertype somewhere, so every anticipation is eventually paid
            synced = any(stack[j][1][0] in ("L", "E") for j in range(idx, len(stack)))
            return (YES if synced else UNKNOWN), idx
        my = len(stack)
        self.index[state] = my
        stack.append(state)
        verdict = YES
        low = my
        for st, nxt, note in self.obligations(state):
            if st == _FAIL:
                verdict = NO
                self.reason = note
                break
            if st == _CUT:
                verdict = UNKNOWN
                continue
            v, l2 = self.solve(nxt, stack)
            low = min(low, l2)
            if v == NO:
                verdict = NO
                break
            if v == UNKNOWN:
                verdict = UNKNOWN
            elif len(self.trace) < 200:
                self.trace.append(note)
        stack.pop()
        del self.index[state]
        if verdict == NO or low >= my:
            self.memo[state] = verdict
        return verdict, low

    def run(self) -> Verdict3:
        return self.solve((self.g1.root, ("L", self.g2.root)), [])[0]


def async_subtype_check(t1, t2, k: int = DEFAULT_BOUND) -> AsyncResult:
    """Bounded precise asynchronous subtyping with iterative deepening."""
    g1 = t1 if isinstance(t1, TypeGraph) else graph_of(t1)
    g2 = t2 if isinstance(t2, TypeGraph) else graph_of(t2)
    for w in range(k + 1):
        game = _Game(g1, g2, w)
        v = game.run()
        if v == YES:
            rule = "Ref-In/Out" if w == 0 else "Ref-A/B"
            return AsyncResult(YES, w, [f"{rule} within window {w}"] + game.trace)
        if v == NO:
            return AsyncResult(NO, w, [], game.reason)
    return AsyncResult(UNKNOWN, None, [], f"undecided within window {k}")


_ASYNC_CACHE: dict = {}


def async_subtype_bounded(t1, t2, k: int = DEFAULT_BOUND) -> Verdict3:
    key = (t1, t2, k)
    v = _ASYNC_CACHE.get(key)
    if v is None:
        v = async_subtype_check(t1, t2, k).verdict
        if len(_ASYNC_CACHE) < 100_000:
            _ASYNC_CACHE[key] = v
    return v


def siso_refine_bounded(w1, w2, k: int = DEFAULT_BOUND) -> Verdict3:
    if not (is_siso(w1) and is_siso(w2)):
        raise ValueError("both arguments must be single-input single-output")
    return async_subtype_bounded(w1, w2, k)
