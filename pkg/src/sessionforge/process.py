"""Typing, reduction and fair simulation of asynchronous sessions."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .core import (
    END, Arm, Branch, GlobalType, LocalType, Message, Rec, Role, Select, Sort, Var,
    ground_subtype, role_sets, unfold,
)
from .process_syntax import (
    UNIT, Add, BoolLit, Compare, EVar, If, Inact, IntLit, NondetBool, PRec, PVar, Recv,
    RecvArm, RMsg, Send, Sub, UnitLit, sort_of_value,
)
from .projection import NotBalancedError, project
from .semantics import ActionLabel, TypingContext, recv, send
from .subtyping import NO, UNKNOWN, YES, Verdict3, async_subtype_bounded, queue_subtype
from .wellformed import is_balanced_plus

ERR = "ERR"


# -- expressions -----------------------------------------------------------------

_NUM = (Sort.INT, Sort.REAL)


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def eval_all(e, env: dict | None = None) -> set:
    """Every value ``e`` may evaluate to; empty when it cannot evaluate."""
    env = env or {}
    if isinstance(e, IntLit):
        return {e.value}
    if isinstance(e, BoolLit):
        return {e.value}
    if isinstance(e, UnitLit):
        return {UNIT}
    if isinstance(e, NondetBool):
        return {False, True}
    if isinstance(e, EVar):
        return {env[e.name]} if e.name in env else set()
    if isinstance(e, (Add, Sub)):
        out = set()
        for a in eval_all(e.left, env):
            for b in eval_all(e.right, env):
                if _is_num(a) and _is_num(b):
                    out.add(a + b if isinstance(e, Add) else a - b)
        return out
    if isinstance(e, Compare):
        out = set()
        for a in eval_all(e.left, env):
            for b in eval_all(e.right, env):
                if e.op in ("==", "!="):
                    if type(a) is not type(b) and not (_is_num(a) and _is_num(b)):
                        continue
                    out.add((a == b) == (e.op == "=="))
                elif _is_num(a) and _is_num(b):
                    out.add({"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[e.op])
        return out
    raise TypeError(f"not an expression: {e!r}")


def eval_expr(e, env: dict | None = None, seed: int = 0):
    """One value of ``e`` (non-determinism resolved by ``seed``), or None."""
    vals = sorted(eval_all(e, env), key=repr)
    if not vals:
        return None
    return vals[0] if len(vals) == 1 else random.Random(seed).choice(vals)


class _TypeFail(Exception):
    pass


class _Undecided(Exception):
    pass


def expr_sort(e, venv: dict) -> Sort:
    if isinstance(e, IntLit):
        return Sort.INT
    if isinstance(e, (BoolLit, NondetBool)):
        return Sort.BOOL
    if isinstance(e, UnitLit):
        return Sort.UNIT
    if isinstance(e, EVar):
        if e.name not in venv:
            raise _TypeFail(f"unbound variable {e.name}")
        return venv[e.name]
    if isinstance(e, (Add, Sub)):
        a, b = expr_sort(e.left, venv), expr_sort(e.right, venv)
        if a not in _NUM or b not in _NUM:
            raise _TypeFail("arithmetic on non-numeric operands")
        return Sort.REAL if Sort.REAL in (a, b) else Sort.INT
    if isinstance(e, Compare):
        a, b = expr_sort(e.left, venv), expr_sort(e.right, venv)
        if e.op in ("==", "!=") and (a == b or (a in _NUM and b in _NUM)):
            return Sort.BOOL
        if a in _NUM and b in _NUM:
            return Sort.BOOL
        raise _TypeFail(f"cannot compare {a.value} with {b.value}")
    raise TypeError(f"not an expression: {e!r}")


def _usage_sort(x: str, p) -> Optional[Sort]:
    """Sort suggested by how ``x`` is used inside ``p`` (arithmetic or test)."""

    def in_expr(e, ctx: Optional[Sort]):
        if isinstance(e, EVar):
            return ctx if e.name == x else None
        if isinstance(e, (Add, Sub)):
            return in_expr(e.left, Sort.INT) or in_expr(e.right, Sort.INT)
        if isinstance(e, Compare):
            c = Sort.INT if e.op not in ("==", "!=") else None
            return in_expr(e.left, c) or in_expr(e.right, c)
        return None

    def walk(q):
        if isinstance(q, Send):
            return in_expr(q.expr, None) or walk(q.cont)
        if isinstance(q, If):
            return in_expr(q.cond, Sort.BOOL) or walk(q.then) or walk(q.orelse)
        if isinstance(q, PRec):
            return walk(q.body)
        if isinstance(q, Recv):
            for a in q.branches:
                if a.var != x:
                    s = walk(a.cont)
                    if s:
                        return s
        return None

    return walk(p)


# -- typing ------------------------------------------------------------------------


@dataclass
class TypingEnv:
    procs: dict = field(default_factory=dict)  # process variable -> LocalType
    exprs: dict = field(default_factory=dict)  # expression variable -> Sort

    def with_proc(self, x: str, t) -> "TypingEnv":
        return TypingEnv({**self.procs, x: t}, self.exprs)

    def with_expr(self, x: Optional[str], s: Sort) -> "TypingEnv":
        if x is None:
            return self
        return TypingEnv(self.procs, {**self.exprs, x: s})


def _join_sort(a: Sort, b: Sort, up: bool) -> Sort:
    if a == b:
        return a
    if {a, b} == {Sort.INT, Sort.REAL}:
        return Sort.REAL if up else Sort.INT
    raise _Undecided(f"no common sort for {a.value} and {b.value}")


def lub(a, b):
    """Least common supertype under synchronous subtyping, structurally."""
    if a == b:
        return a
    if isinstance(a, Select) and isinstance(b, Select) and a.peer == b.peer:
        ma = {x.label: x for x in a.branches}
        mb = {x.label: x for x in b.branches}
        arms = []
        for l in list(ma) + [l for l in mb if l not in ma]:
            if l in ma and l in mb:
                arms.append(Arm(l, _join_sort(ma[l].sort, mb[l].sort, True), lub(ma[l].cont, mb[l].cont)))
            else:
                arms.append(ma.get(l) or mb[l])
        return Select(a.peer, arms)
    if isinstance(a, Branch) and isinstance(b, Branch) and a.peer == b.peer:
        mb = {x.label: x for x in b.branches}
        arms = [Arm(x.label, _join_sort(x.sort, mb[x.label].sort, False), lub(x.cont, mb[x.label].cont))
                for x in a.branches if x.label in mb]
        if not arms:
            raise _Undecided("branches share no labels")
        return Branch(a.peer, arms)
    if isinstance(a, Rec) and isinstance(b, Rec) and a.var == b.var:
        return Rec(a.var, lub(a.body, b.body))
    raise _Undecided("conditional branches have incompatible types")


def infer_type(p, env: TypingEnv | None = None) -> LocalType:
    """Minimal syntax-directed type; raises on failure."""
    env = env or TypingEnv()
    if isinstance(p, Inact):
        return END
    if isinstance(p, PVar):
        if p.name not in env.procs:
            raise _TypeFail(f"unbound process variable {p.name}")
        return env.procs[p.name]
    if isinstance(p, PRec):
        return Rec(p.var, infer_type(p.body, env.with_proc(p.var, Var(p.var))))
    if isinstance(p, Send):
        s = expr_sort(p.expr, env.exprs)
        return Select(p.peer, [Arm(p.label, s, infer_type(p.cont, env))])
    if isinstance(p, Recv):
        arms = []
        for a in p.branches:
            s = a.sort or _usage_sort(a.var, a.cont) if a.var else a.sort
            s = s or (Sort.INT if a.var else Sort.UNIT)
            arms.append(Arm(a.label, s, infer_type(a.cont, env.with_expr(a.var, s))))
        return Branch(p.peer, arms)
    if isinstance(p, If):
        if expr_sort(p.cond, env.exprs) != Sort.BOOL:
            raise _TypeFail("condition is not boolean")
        return lub(infer_type(p.then, env), infer_type(p.orelse, env))
    raise TypeError(f"not a process: {p!r}")


def _both(a: Verdict3, b: Verdict3) -> Verdict3:
    if NO in (a, b):
        return NO
    if UNKNOWN in (a, b):
        return UNKNOWN
    return YES


def _either(a: Verdict3, b: Verdict3) -> Verdict3:
    if YES in (a, b):
        return YES
    if a == b == NO:
        return NO
    return UNKNOWN


def _check_by_inference(env, p, t, k) -> Verdict3:
    try:
        ti = infer_type(p, env)
    except _TypeFail:
        return NO
    except _Undecided:
        return UNKNOWN
    return async_subtype_bounded(ti, t, k)


def _check_structural(env, p, t, k) -> Optional[Verdict3]:
    """Syntax-directed rules against the expected type; None if none applies."""
    u = unfold(t) if not isinstance(t, Var) else t
    if isinstance(p, If):
        try:
            if expr_sort(p.cond, env.exprs) != Sort.BOOL:
                return NO
        except _TypeFail:
            return NO
        return _both(check_process(env, p.then, t, k), check_process(env, p.orelse, t, k))
    if isinstance(p, PRec):
        return check_process(env.with_proc(p.var, t), p.body, t, k)
    if isinstance(p, Inact):
        return YES if u == END else None
    if isinstance(p, Send) and isinstance(u, Select) and u.peer == p.peer:
        arm = next((a for a in u.branches if a.label == p.label), None)
        try:
            s = expr_sort(p.expr, env.exprs)
        except _TypeFail:
            return NO
        if arm is None or not ground_subtype(s, arm.sort):
            return None
        return check_process(env, p.cont, arm.cont, k)
    if isinstance(p, Recv) and isinstance(u, Branch) and u.peer == p.peer:
        mine = {a.label: a for a in p.branches}
        if not all(a.label in mine for a in u.branches):
            return None
        v = YES
        for a in u.branches:
            arm = mine[a.label]
            s = a.sort
            if arm.sort is not None:
                if not ground_subtype(a.sort, arm.sort):
                    return None
                s = arm.sort
            v = _both(v, check_process(env.with_expr(arm.var, s), arm.cont, a.cont, k))
        return v
    return None


def check_process(env: TypingEnv, p, t: LocalType, k: int) -> Verdict3:
    v = _check_by_inference(env, p, t, k)
    if v == YES:
        return v
    w = _check_structural(env, p, t, k)
    return v if w is None else _either(v, w)


def type_process(env: TypingEnv | None, p, t: LocalType, k: int = 2) -> Verdict3:
    return check_process(env or TypingEnv(), p, t, k)


def type_queue(h) -> tuple:
    out = []
    for m in h:
        s = sort_of_value(m.value if isinstance(m, RMsg) else m[2])
        if s is None:
            raise ValueError(f"value {m[2]!r} has no sort")
        out.append(Message(m[0], m[1], s))
    return tuple(out)


# -- sessions ----------------------------------------------------------------------


def _normalize_rqueue(h) -> tuple:
    return tuple(sorted((RMsg(*m) for m in h), key=lambda m: m.dest))


@dataclass(frozen=True)
class Session:
    """role -> (process, runtime queue), stored sorted by role."""

    parts: tuple  # ((role, process, queue), ...)

    @staticmethod
    def of(m) -> "Session":
        items = m.items() if hasattr(m, "items") else m
        return Session(tuple(sorted((r, p, _normalize_rqueue(h)) for r, (p, h) in items)))

    def items(self):
        return [(r, (p, h)) for r, p, h in self.parts]

    @property
    def roles(self) -> list:
        return [r for r, _, _ in self.parts]

    def __getitem__(self, r: Role):
        for r2, p, h in self.parts:
            if r2 == r:
                return (p, h)
        raise KeyError(r)

    def __contains__(self, r: Role) -> bool:
        return any(r2 == r for r2, _, _ in self.parts)

    def replace(self, changes: dict) -> "Session":
        m = dict(self.items())
        m.update(changes)
        return Session.of(m).idle()

    def idle(self) -> "Session":
        """Drop finished roles with empty queues."""
        return Session(tuple(x for x in self.parts if not (isinstance(x[1], Inact) and not x[2])))

    def __str__(self) -> str:
        from .frontend.printer import print_process

        def q(h):
            return " . ".join(f"<{m.dest}, {m.label}({m.value!r})>" for m in h) or "eps"

        return " | ".join(f"{r} <| {print_process(p)} | {r} <| {q(h)}" for r, p, h in self.parts) or "0"


def _literal(v):
    if isinstance(v, bool):
        return BoolLit(v)
    if isinstance(v, int):
        return IntLit(v)
    if v == UNIT:
        return UnitLit()
    raise ValueError(f"no literal for {v!r}")


def _subst_expr(e, x, lit):
    if isinstance(e, EVar):
        return lit if e.name == x else e
    if isinstance(e, (Add, Sub)):
        return type(e)(_subst_expr(e.left, x, lit), _subst_expr(e.right, x, lit))
    if isinstance(e, Compare):
        return Compare(e.op, _subst_expr(e.left, x, lit), _subst_expr(e.right, x, lit))
    return e


def subst_value(p, x: str, v):
    """Replace expression variable ``x`` with the value ``v`` (values are closed)."""
    lit = _literal(v)

    def go(q):
        if isinstance(q, Send):
            return Send(q.peer, q.label, _subst_expr(q.expr, x, lit), go(q.cont))
        if isinstance(q, If):
            return If(_subst_expr(q.cond, x, lit), go(q.then), go(q.orelse))
        if isinstance(q, PRec):
            return PRec(q.var, go(q.body))
        if isinstance(q, Recv):
            return Recv(q.peer, tuple(a if a.var == x else a._replace(cont=go(a.cont)) for a in q.branches))
        return q

    return go(p)


def subst_proc(p, x: str, repl):
    if isinstance(p, PVar):
        return repl if p.name == x else p
    if isinstance(p, PRec):
        return p if p.var == x else PRec(p.var, subst_proc(p.body, x, repl))
    if isinstance(p, Send):
        return Send(p.peer, p.label, p.expr, subst_proc(p.cont, x, repl))
    if isinstance(p, If):
        return If(p.cond, subst_proc(p.then, x, repl), subst_proc(p.orelse, x, repl))
    if isinstance(p, Recv):
        return Recv(p.peer, tuple(a._replace(cont=subst_proc(a.cont, x, repl)) for a in p.branches))
    return p


def unfold_process(p):
    while isinstance(p, PRec):
        p = subst_proc(p.body, p.var, p)
    return p


class Step(NamedTuple):
    rule: str
    role: Role
    action: Optional[ActionLabel]
    result: object  # Session or ERR


def role_steps(m: Session, p: Role) -> list:
    proc, h = m[p]
    proc = unfold_process(proc)
    out = []
    if isinstance(proc, Send):
        vals = sorted(eval_all(proc.expr), key=repr)
        if not vals:
            return [Step("Err-Eval", p, None, ERR)]
        for v in vals:
            h2 = h + (RMsg(proc.peer, proc.label, v),)
            lab = send(p, proc.peer, proc.label, sort_of_value(v))
            out.append(Step("R-Send", p, lab, m.replace({p: (proc.cont, h2)})))
    elif isinstance(proc, Recv):
        q = proc.peer
        if q not in m:
            return []
        pq, hq = m[q]
        idx = next((i for i, msg in enumerate(hq) if msg.dest == p), None)
        if idx is None:
            return []
        msg = hq[idx]
        arm = next((a for a in proc.branches if a.label == msg.label), None)
        s = sort_of_value(msg.value)
        if arm is None or (arm.sort is not None and not ground_subtype(s, arm.sort)):
            return [Step("Err-Mism", p, None, ERR)]
        cont = subst_value(arm.cont, arm.var, msg.value) if arm.var else arm.cont
        hq2 = hq[:idx] + hq[idx + 1:]
        lab = recv(p, q, msg.label, s)
        out.append(Step("R-Rcv", p, lab, m.replace({p: (cont, h), q: (pq, hq2)})))
    elif isinstance(proc, If):
        vals = eval_all(proc.cond)
        if not vals or not all(isinstance(v, bool) for v in vals):
            return [Step("Err-Eval", p, None, ERR)]
        if True in vals:
            out.append(Step("R-Cond-T", p, None, m.replace({p: (proc.then, h)})))
        if False in vals:
            out.append(Step("R-Cond-F", p, None, m.replace({p: (proc.orelse, h)})))
    return out


def session_step(m: Session, seed: int = 0) -> list:
    """All one-step reductions of ``m`` (non-deterministic conditions give both)."""
    m = m.idle()
    return [s for r in m.roles for s in role_steps(m, r)]


@dataclass
class RunResult:
    verdict: str  # ok | err | terminated | stuck
    trace: list
    steps: int
    final: Session
    max_queue: int = 0

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "steps": self.steps, "max_queue": self.max_queue,
                "final": str(self.final)}


def run_fair(m: Session, steps: int = 100, seed: int = 0) -> RunResult:
    """Round-robin over roles; a role's own choices are drawn from ``seed``."""
    rng = random.Random(seed)
    m = m.idle()
    trace: list = []
    last: Optional[Role] = None
    max_q = max((_max_pair(h) for _, (_, h) in m.items()), default=0)
    for i in range(steps):
        if not m.parts:
            return RunResult("terminated", trace, i, m, max_q)
        roles = m.roles
        start = 0 if last is None else next((j for j, r in enumerate(roles) if r > last), 0)
        order = roles[start:] + roles[:start]
        chosen = None
        for r in order:
            opts = role_steps(m, r)
            if opts:
                chosen = opts[0] if len(opts) == 1 else rng.choice(opts)
                break
        if chosen is None:
            return RunResult("stuck", trace, i, m, max_q)
        trace.append({"step": i, "role": chosen.role, "rule": chosen.rule,
                      "label": None if chosen.action is None else str(chosen.action)})
        if chosen.result == ERR:
            return RunResult("err", trace, i + 1, m, max_q)
        m = chosen.result
        last = chosen.role
        max_q = max([max_q] + [_max_pair(h) for _, (_, h) in m.items()])
    if not m.parts:
        return RunResult("terminated", trace, steps, m, max_q)
    return RunResult("ok", trace, steps, m, max_q)


def _max_pair(h) -> int:
    counts: dict = {}
    for msg in h:
        counts[msg.dest] = counts.get(msg.dest, 0) + 1
    return max(counts.values(), default=0)


# -- sessions against global types ----------------------------------------------------


@dataclass
class SessionTyping:
    verdict: Verdict3
    per_role: dict
    context: Optional[TypingContext]

    def to_json(self) -> dict:
        return {"verdict": str(self.verdict),
                "roles": {r: {"verdict": str(v), "reason": why} for r, (v, why) in self.per_role.items()},
                "context": None if self.context is None else str(self.context)}


def explain_session(m: Session, g: GlobalType, k: int = 2) -> SessionTyping:
    if not is_balanced_plus(g):
        raise NotBalancedError("session typing needs a balanced+ global type")
    rs = role_sets(g).roles
    per: dict = {}
    verdict = YES
    ctx = {}
    for r, (p, h) in m.items():
        if r not in rs and not (isinstance(unfold_process(p), Inact) and not h):
            per[r] = (NO, "role does not occur in the global type")
            verdict = NO
    for r in sorted(rs):
        if r not in m:
            per[r] = (NO, "role missing from the session")
            verdict = NO
            continue
        p, h = m[r]
        pr = project(g, r)
        if pr is None:
            per[r] = (NO, "global type has no projection here")
            verdict = NO
            continue
        try:
            qt = type_queue(h)
        except ValueError as e:
            per[r] = (NO, str(e))
            verdict = NO
            continue
        if not queue_subtype(qt, pr.queue):
            per[r] = (NO, "queue does not match the projected queue")
            verdict = NO
            continue
        v = type_process(None, p, pr.local, k)
        per[r] = (v, "" if v == YES else "process does not check against its projection")
        verdict = _both(verdict, v)
        ctx[r] = (qt, pr.local)
    return SessionTyping(verdict, per, TypingContext.of(ctx) if verdict == YES else None)


def type_session(m: Session, g: GlobalType, k: int = 2) -> Verdict3:
    return explain_session(m, g, k).verdict
