"""Association of typing contexts with global types, plus bounded probes.

The probes explore pairs (context, global type) and check that every
step on one side is matched by a step on the other with association
preserved.  Exploration is breadth-first up to a state cap; any step
budget left over is spent on seeded random walks from the start pair.
"""
from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .core import GlobalType, canonical_type, role_sets
from .projection import NotBalancedError, project
from .semantics import (
    TypingContext, context_transitions, global_step_matching, global_transitions, label_leq,
)
from .subtyping import NO, UNKNOWN, YES, Verdict3, async_subtype_bounded, queue_subtype
from .wellformed import is_balanced_plus

DEPTH_LADDER = (8, 16, 32)
STATE_CAP = 10_000


def explain_association(ctx: TypingContext, g: GlobalType, k: int = 2):
    """(Verdict3, reason) for the association of ``ctx`` with ``g``."""
    if not is_balanced_plus(g):
        raise NotBalancedError("association needs a balanced+ global type")
    rs = sorted(role_sets(g).roles)
    missing = [r for r in rs if r not in ctx]
    if missing:
        return NO, f"context lacks roles {missing}"
    verdict, reason = YES, ""
    for r in rs:
        pr = project(g, r)
        if pr is None:
            return NO, f"{r} has no projection"
        h, t = ctx[r]
        if not queue_subtype(h, pr.queue):
            return NO, f"queue of {r} is not a subtype of its projected queue"
        v = async_subtype_bounded(t, pr.local, k)
        if v == NO:
            return NO, f"type of {r} is not a subtype of its projection"
        if v == UNKNOWN and verdict == YES:
            verdict, reason = UNKNOWN, f"subtyping for {r} undecided within bound {k}"
    return verdict, reason


def associated(ctx: TypingContext, g: GlobalType, k: int = 2) -> Verdict3:
    return explain_association(ctx, g, k)[0]


@dataclass
class Violation:
    state: str
    label: str
    reason: str

    def to_json(self) -> dict:
        return {"state": self.state, "label": self.label, "reason": self.reason}


@dataclass
class ProbeReport:
    steps_checked: int = 0
    states_explored: int = 0
    violations: list = field(default_factory=list)
    inconclusive: list = field(default_factory=list)
    regime: str = "exhaustive"
    max_depth_used: int = DEPTH_LADDER[0]

    @property
    def verdict(self) -> str:
        if self.violations:
            return "fail"
        return "inconclusive" if self.inconclusive else "pass"

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "steps_checked": self.steps_checked,
            "states_explored": self.states_explored,
            "regime": self.regime,
            "max_depth_used": self.max_depth_used,
            "violations": [v.to_json() for v in self.violations],
            "inconclusive": list(self.inconclusive),
        }


def _complete_step(ctx2, g, lab, k, report):
    """Matching global successors for one context step, escalating depth."""
    saw_unknown = False
    for d in DEPTH_LADDER:
        found = []
        for g2 in sorted(global_step_matching(g, lab, d), key=str):
            v = associated(ctx2, g2, k)
            if v == YES:
                found.append(g2)
            elif v == UNKNOWN:
                saw_unknown = True
        if found:
            report.max_depth_used = max(report.max_depth_used, d)
            return found, saw_unknown
    return [], saw_unknown


def _sound_step(ctx, g, k, report):
    """Matched (label, context, global) triples when g can move."""
    ctx_moves = context_transitions(ctx)
    saw_unknown = False
    for d in DEPTH_LADDER:
        gmoves = sorted(global_transitions(g, d), key=str)
        found = []
        for l1, c2 in ctx_moves:
            for l2, g2 in gmoves:
                if not label_leq(l1, l2):
                    continue
                v = associated(c2, g2, k)
                if v == YES:
                    found.append((l1, c2, g2))
                elif v == UNKNOWN:
                    saw_unknown = True
        if found:
            report.max_depth_used = max(report.max_depth_used, d)
            return found, saw_unknown
    return [], saw_unknown


def _probe(ctx, g, steps, k, seed, direction, state_cap) -> ProbeReport:
    report = ProbeReport()
    start = (ctx, canonical_type(g))
    seen = {start}
    work = deque([start])
    rng = random.Random(seed)

    def expand(c, gg):
        """Check one pair; returns successor pairs."""
        if direction == "completeness":
            succ = []
            for lab, c2 in context_transitions(c):
                if report.steps_checked >= steps:
                    break
                report.steps_checked += 1
                matches, unk = _complete_step(c2, gg, lab, k, report)
                if not matches:
                    msg = (f"context step {lab} undecided" if unk
                           else f"no global step matches {lab}")
                    if unk:
                        report.inconclusive.append(msg)
                    else:
                        report.violations.append(Violation(f"{c} ~ {gg}", str(lab), msg))
                    continue
                succ.extend((c2, m) for m in matches)
            return succ
        if not global_transitions(gg, DEPTH_LADDER[0]):
            return []
        report.steps_checked += 1
        found, unk = _sound_step(c, gg, k, report)
        if not found:
            msg = "global type moves but no matching context step keeps association"
            if unk:
                report.inconclusive.append(msg)
            else:
                report.violations.append(Violation(f"{c} ~ {gg}", "-", msg))
        return [(c2, g2) for _, c2, g2 in found]

    while work and report.steps_checked < steps and len(seen) <= state_cap:
        c, gg = work.popleft()
        report.states_explored += 1
        for pair in expand(c, gg):
            if pair not in seen:
                seen.add(pair)
                work.append(pair)
    if not work:
        report.regime = "exhaustive"
        if report.steps_checked < steps:
            report.regime = "exhaustive+random"
    else:
        report.regime = "bfs+random" if len(seen) > state_cap else "bfs"
    # spend the remaining budget on seeded random walks
    stalled = 0
    cur = start
    while report.steps_checked < steps and stalled < 3 and report.regime.endswith("random"):
        before = report.steps_checked
        succ = expand(*cur)
        report.states_explored += 1
        if report.steps_checked == before:
            stalled += 1
        else:
            stalled = 0
        cur = rng.choice(succ) if succ else start
    return report


def completeness_probe(ctx: TypingContext, g: GlobalType, steps: int = 200, k: int = 2,
                       seed: int = 0, state_cap: int = STATE_CAP) -> ProbeReport:
    return _probe(ctx, g, steps, k, seed, "completeness", state_cap)


def soundness_probe(ctx: TypingContext, g: GlobalType, steps: int = 200, k: int = 2,
                    seed: int = 0, state_cap: int = STATE_CAP) -> ProbeReport:
    return _probe(ctx, g, steps, k, seed, "soundness", state_cap)
