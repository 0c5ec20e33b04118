"""Pretty printer; output re-parses to an equal AST."""
from __future__ import annotations

from ..core import Branch, Comm, End, EnRoute, Rec, Select, Sort, Var
from ..process_syntax import (
    Add, BoolLit, Compare, EVar, If, Inact, IntLit, NondetBool, PRec, PVar, Recv, Send, Sub,
    UnitLit,
)


def _payload(sort) -> str:
    return "" if Sort(sort) == Sort.UNIT else f"({Sort(sort).value})"


def print_type(t) -> str:
    if isinstance(t, End):
        return "end"
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Rec):
        return f"rec {t.var} . {print_type(t.body)}"
    if isinstance(t, EnRoute):
        return f"{t.src} ~> {t.dst} {{ {t.label}{_payload(t.sort)} . {print_type(t.cont)} }}"
    arms = ", ".join(f"{a.label}{_payload(a.sort)} . {print_type(a.cont)}" for a in t.branches)
    if isinstance(t, Comm):
        return f"{t.src} -> {t.dst} {{ {arms} }}"
    if isinstance(t, Select):
        return f"{t.peer} (+) {{ {arms} }}"
    if isinstance(t, Branch):
        return f"{t.peer} & {{ {arms} }}"
    raise TypeError(f"not a type: {t!r}")


def print_queue(h) -> str:
    if not h:
        return "eps"
    return " . ".join(f"<{m[0]}, {m[1]}{_payload(m[2])}>" for m in h)


def print_context(ctx) -> str:
    body = ", ".join(f"{r} : ({print_queue(h)}, {print_type(t)})" for r, (h, t) in ctx.items())
    return "{ " + body + " }" if body else "{ }"


def print_expr(e) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, UnitLit):
        return "unit"
    if isinstance(e, NondetBool):
        return "nondet"
    if isinstance(e, EVar):
        return e.name
    if isinstance(e, (Add, Sub)):
        op = "+" if isinstance(e, Add) else "-"
        right = print_expr(e.right)
        if isinstance(e.right, (Add, Sub, Compare)) or (isinstance(e.right, IntLit) and e.right.value < 0):
            right = f"({right})"
        left = print_expr(e.left)
        if isinstance(e.left, Compare):
            left = f"({left})"
        return f"{left} {op} {right}"
    if isinstance(e, Compare):
        return f"{_paren_cmp(e.left)} {e.op} {_paren_cmp(e.right)}"
    raise TypeError(f"not an expression: {e!r}")


def _paren_cmp(e) -> str:
    s = print_expr(e)
    return f"({s})" if isinstance(e, Compare) else s


def _send_expr(e) -> str:
    s = print_expr(e)
    return f"({s})" if isinstance(e, Compare) else s


def print_process(p) -> str:
    if isinstance(p, Inact):
        return "0"
    if isinstance(p, PVar):
        return p.name
    if isinstance(p, PRec):
        return f"rec {p.var} . {print_process(p.body)}"
    if isinstance(p, Send):
        payload = "" if isinstance(p.expr, UnitLit) else f"<{_send_expr(p.expr)}>"
        return f"{p.peer}!{p.label}{payload} . {_cont(p.cont)}"
    if isinstance(p, Recv):
        arms = []
        for a in p.branches:
            binder = ""
            if a.var is not None:
                binder = f"({a.var}: {a.sort.value})" if a.sort is not None else f"({a.var})"
            arms.append(f"{p.peer}?{a.label}{binder} . {_cont(a.cont)}")
        if len(arms) == 1:
            return arms[0]
        return "sum { " + ", ".join(arms) + " }"
    if isinstance(p, If):
        return f"if {print_expr(p.cond)} then {_cont(p.then)} else {_cont(p.orelse)}"
    raise TypeError(f"not a process: {p!r}")


def _cont(p) -> str:
    s = print_process(p)
    # a trailing sum or conditional inside a sum arm needs no brackets, but a
    # nested if in a then-branch would swallow the else, so bracket it
    return f"({s})" if isinstance(p, If) else s
