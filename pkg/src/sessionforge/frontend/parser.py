"""Recursive-descent parser for types, queues, contexts and processes.

Concrete syntax (ASCII)::

    G ::= end | t | rec t . G | p -> q { l(S) . G, ... } | p ~> q { l(S) . G }
    T ::= end | t | rec t . T | p (+) { l(S) . T, ... } | p & { l(S) . T, ... }
    h ::= eps | <q, l(S)> . <r, l2> ...
    ctx ::= { p : (h, T), q : (h, T) }
    P ::= 0 | X | rec X . P | q!l<e>.P | q?l(x:S).P | sum { q?l(x).P, ... }
        | if e then P else Q | (P)

An omitted payload means ``unit``; an omitted continuation means ``end``
(or ``0`` for processes).
"""
from __future__ import annotations

from ..core import (
    END, Arm, Branch, Comm, EnRoute, Message, Rec, Select, Sort, Var, normalize_queue,
)
from ..process_syntax import (
    Add, BoolLit, Compare, EVar, If, Inact, IntLit, NondetBool, PRec, PVar, Recv, RecvArm,
    Send, Sub, UnitLit,
)
from .lexer import ParseError, Span, TokenStream

_SORTS = {s.value for s in Sort}


class _Parser:
    def __init__(self, src: str, file: str = "<input>"):
        self.ts = TokenStream(src, file)
        self.spans: dict = {}

    # -- shared pieces --

    def sort_opt(self) -> Sort:
        if not self.ts.at("("):
            return Sort.UNIT
        self.ts.next()
        t = self.ts.peek()
        if t.kind != "ident" or t.text not in _SORTS:
            raise ParseError(t.span, sorted(_SORTS))
        self.ts.next()
        self.ts.expect(")")
        return Sort(t.text)

    def label(self) -> str:
        return self.ts.ident("label").text

    # -- types --

    def type_(self, mode: str, path: tuple, bound: frozenset, unguarded: frozenset):
        ts = self.ts
        start = ts.peek()
        if ts.accept("end"):
            self.spans[path] = start.span
            return END
        if ts.accept("rec"):
            v = ts.ident("recursion variable").text
            ts.expect(".")
            body = self.type_(mode, path + (0,), bound | {v}, unguarded | {v})
            self.spans[path] = start.span
            return Rec(v, body)
        if ts.accept("("):
            t = self.type_(mode, path, bound, unguarded)
            ts.expect(")")
            return t
        first = ts.ident("role, variable, 'end' or 'rec'")
        nxt = ts.peek()
        if nxt.text in ("->", "~>") and nxt.kind == "sym":
            if mode == "local":
                raise ParseError(nxt.span, ["(+)", "&"], "global arrow in a local type")
            ts.next()
            dst = ts.ident("role").text
            if dst == first.text:
                raise ParseError(first.span.to(self.ts.peek(-1).span), [], f"self-communication on role {dst}")
            arms = self.arms(mode, path, bound)
            self.spans[path] = first.span
            if nxt.text == "->":
                return Comm(first.text, dst, arms)
            if len(arms) != 1:
                raise ParseError(first.span, [], "en-route transmission carries exactly one message")
            a = arms[0]
            return EnRoute(first.text, dst, a.label, a.sort, a.cont)
        if nxt.text in ("(+)", "&") and nxt.kind == "sym":
            if mode == "global":
                raise ParseError(nxt.span, ["->", "~>"], "local choice in a global type")
            ts.next()
            arms = self.arms(mode, path, bound)
            self.spans[path] = first.span
            return (Select if nxt.text == "(+)" else Branch)(first.text, arms)
        if first.text not in bound:
            raise ParseError(first.span, [], f"unbound recursion variable {first.text}")
        if first.text in unguarded:
            raise ParseError(first.span, [], f"unguarded recursion on {first.text}")
        self.spans[path] = first.span
        return Var(first.text)

    def arms(self, mode: str, path: tuple, bound: frozenset) -> tuple:
        ts = self.ts
        ts.expect("{")
        out = []
        seen = set()
        while True:
            lt = ts.peek()
            lab = self.label()
            if lab in seen:
                raise ParseError(lt.span, [], f"duplicate label {lab}")
            seen.add(lab)
            sort = self.sort_opt()
            if ts.accept("."):
                cont = self.type_(mode, path + (len(out),), bound, frozenset())
            else:
                cont = END
            out.append(Arm(lab, sort, cont))
            if ts.accept(","):
                continue
            ts.expect("}")
            return tuple(out)

    # -- queues / contexts --

    def queue(self) -> tuple:
        ts = self.ts
        if ts.accept("eps"):
            return ()
        msgs = []
        while True:
            ts.expect("<")
            dest = ts.ident("role").text
            ts.expect(",")
            lab = self.label()
            sort = self.sort_opt()
            ts.expect(">")
            msgs.append(Message(dest, lab, sort))
            if ts.at(".") and ts.at("<", 1):
                ts.next()
                continue
            return tuple(msgs)

    def context(self):
        from ..semantics import TypingContext

        ts = self.ts
        braced = ts.accept("{")
        entries = {}
        while ts.peek().kind == "ident":
            rt = ts.ident("role")
            if rt.text in entries:
                raise ParseError(rt.span, [], f"duplicate role {rt.text}")
            ts.expect(":")
            ts.expect("(")
            h = self.queue()
            ts.expect(",")
            t = self.type_("local", (rt.text,), frozenset(), frozenset())
            ts.expect(")")
            entries[rt.text] = (normalize_queue(h), t)
            if not (ts.accept(",") or ts.accept(";")):
                break
        if braced:
            ts.expect("}")
        return TypingContext.of(entries)

    # -- processes and expressions --

    def process(self, bound: frozenset, unguarded: frozenset):
        ts = self.ts
        t = ts.peek()
        if t.kind == "int" and t.text == "0":
            ts.next()
            return Inact()
        if ts.accept("("):
            p = self.process(bound, unguarded)
            ts.expect(")")
            return p
        if ts.accept("rec"):
            v = ts.ident("process variable").text
            ts.expect(".")
            return PRec(v, self.process(bound | {v}, unguarded | {v}))
        if ts.accept("if"):
            c = self.expr(True)
            ts.expect("then")
            p = self.process(bound, unguarded)
            ts.expect("else")
            q = self.process(bound, unguarded)
            return If(c, p, q)
        if ts.accept("sum"):
            ts.expect("{")
            arms = []
            peer = None
            while True:
                pt = ts.peek()
                r, arm = self.recv_arm(bound)
                if peer is not None and r != peer:
                    raise ParseError(pt.span, [], "all arms of a sum must receive from the same role")
                if any(a.label == arm.label for a in arms):
                    raise ParseError(pt.span, [], f"duplicate label {arm.label}")
                peer = r
                arms.append(arm)
                if not ts.accept(","):
                    break
            ts.expect("}")
            return Recv(peer, tuple(arms))
        first = ts.ident("process")
        if ts.at("!"):
            ts.next()
            lab = self.label()
            if ts.accept("<"):
                e = self.expr(False)
                ts.expect(">")
            else:
                e = UnitLit()
            cont = self.process(bound, frozenset()) if ts.accept(".") else Inact()
            return Send(first.text, lab, e, cont)
        if ts.at("?"):
            ts.i -= 1
            r, arm = self.recv_arm(bound)
            return Recv(r, (arm,))
        if first.text not in bound:
            raise ParseError(first.span, [], f"unbound process variable {first.text}")
        if first.text in unguarded:
            raise ParseError(first.span, [], f"unguarded recursion on {first.text}")
        return PVar(first.text)

    def recv_arm(self, bound: frozenset):
        ts = self.ts
        r = ts.ident("role").text
        ts.expect("?")
        lab = self.label()
        var, sort = None, None
        if ts.accept("("):
            if not ts.at(")"):
                var = ts.ident("variable").text
                if ts.accept(":"):
                    st = ts.next()
                    if st.text not in _SORTS:
                        raise ParseError(st.span, sorted(_SORTS))
                    sort = Sort(st.text)
            ts.expect(")")
        cont = self.process(bound, frozenset()) if ts.accept(".") else Inact()
        return r, RecvArm(lab, var, sort, cont)

    def expr(self, allow_cmp: bool):
        left = self.additive()
        if allow_cmp:
            for op in ("==", "!=", "<=", ">=", "<", ">"):
                if self.ts.at(op):
                    self.ts.next()
                    return Compare(op, left, self.additive())
        return left

    def additive(self):
        e = self.atom()
        while self.ts.at("+") or self.ts.at("-"):
            op = self.ts.next().text
            r = self.atom()
            e = Add(e, r) if op == "+" else Sub(e, r)
        return e

    def atom(self):
        ts = self.ts
        t = ts.peek()
        if t.kind == "int":
            ts.next()
            return IntLit(int(t.text))
        if ts.accept("-"):
            n = ts.peek()
            if n.kind != "int":
                raise ParseError(n.span, ["integer"])
            ts.next()
            return IntLit(-int(n.text))
        if ts.accept("true"):
            return BoolLit(True)
        if ts.accept("false"):
            return BoolLit(False)
        if ts.accept("nondet") or ts.accept("*"):
            return NondetBool()
        if ts.accept("unit"):
            return UnitLit()
        if ts.accept("("):
            if ts.accept(")"):
                return UnitLit()
            e = self.expr(True)
            ts.expect(")")
            return e
        if t.kind == "ident" and t.text not in ("then", "else"):
            ts.next()
            return EVar(t.text)
        raise ParseError(t.span, ["expression"])


def _run(src: str, file: str, fn):
    p = _Parser(src, file)
    out = fn(p)
    p.ts.eof()
    return out, p.spans


def parse_global_with_spans(src: str, file: str = "<input>"):
    return _run(src, file, lambda p: p.type_("global", (), frozenset(), frozenset()))


def parse_global(src: str, file: str = "<input>"):
    return parse_global_with_spans(src, file)[0]


def parse_local(src: str, file: str = "<input>"):
    return _run(src, file, lambda p: p.type_("local", (), frozenset(), frozenset()))[0]


def parse_type(src: str, file: str = "<input>"):
    """Either kind of type, decided by the connectives used."""
    return _run(src, file, lambda p: p.type_("any", (), frozenset(), frozenset()))[0]


def parse_queue(src: str, file: str = "<input>"):
    return _run(src, file, lambda p: normalize_queue(p.queue()))[0]


def parse_context(src: str, file: str = "<input>"):
    return _run(src, file, lambda p: p.context())[0]


def parse_process(src: str, file: str = "<input>"):
    return _run(src, file, lambda p: p.process(frozenset(), frozenset()))[0]


def parse_expr(src: str, file: str = "<input>"):
    return _run(src, file, lambda p: p.expr(True))[0]


__all__ = [
    "ParseError", "Span", "parse_global", "parse_global_with_spans", "parse_local", "parse_type",
    "parse_queue", "parse_context", "parse_process", "parse_expr",
]
