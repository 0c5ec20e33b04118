"""Type syntax, canonical graphs and queue algebra.

Global and local types share the ``End``/``Var``/``Rec`` constructors.
Choice nodes keep their branches in source order but compare as
unordered maps.  Every node caches its hash at construction time, so
large terms can be used as dictionary keys cheaply.
"""
from __future__ import annotations

import enum
import itertools
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, NamedTuple, Union

Role = str
Label = str


class Sort(str, enum.Enum):
    INT = "int"
    BOOL = "bool"
    REAL = "real"
    UNIT = "unit"

    def __str__(self) -> str:
        return self.value


class IllFormedType(ValueError):
    """Raised when a type violates a syntactic invariant."""


def ground_subtype(s1: Sort, s2: Sort) -> bool:
    """Subsorting on payloads: reflexive, plus int <: real."""
    return s1 == s2 or (s1 == Sort.INT and s2 == Sort.REAL)


class Arm(NamedTuple):
    label: Label
    sort: Sort
    cont: "Type"


class _Node:
    """Mixin giving structural equality with a cached hash."""

    __slots__ = ()

    def _key(self) -> tuple:
        raise NotImplementedError

    def __post_init__(self) -> None:
        object.__setattr__(self, "_hash", hash(self._key()))

    def __hash__(self) -> int:
        return self._hash  # type: ignore[attr-defined]

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if type(self) is not type(other):
            return False
        if self._hash != other._hash:  # type: ignore[attr-defined]
            return False
        return self._key() == other._key()  # type: ignore[attr-defined]

    def __ne__(self, other: object) -> bool:
        return not self.__eq__(other)

    def __str__(self) -> str:
        from .frontend.printer import print_type

        return print_type(self)


def _arms(branches: Iterable) -> tuple[Arm, ...]:
    out = []
    for b in branches:
        label, sort, cont = b
        out.append(Arm(label, Sort(sort), cont))
    return tuple(out)


@dataclass(frozen=True, eq=False, repr=False)
class End(_Node):
    _hash: int = field(default=0, init=False, compare=False)

    def _key(self) -> tuple:
        return ("end",)

    def __repr__(self) -> str:
        return "End()"


@dataclass(frozen=True, eq=False)
class Var(_Node):
    name: str
    _hash: int = field(default=0, init=False, compare=False, repr=False)

    def _key(self) -> tuple:
        return ("var", self.name)


@dataclass(frozen=True, eq=False)
class Rec(_Node):
    var: str
    body: "Type"
    _hash: int = field(default=0, init=False, compare=False, repr=False)

    def _key(self) -> tuple:
        return ("rec", self.var, self.body)


@dataclass(frozen=True, eq=False)
class Comm(_Node):
    """p -> q { l_i(S_i) . G_i }"""

    src: Role
    dst: Role
    branches: tuple[Arm, ...]
    _hash: int = field(default=0, init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "branches", _arms(self.branches))
        _Node.__post_init__(self)

    def _key(self) -> tuple:
        return ("comm", self.src, self.dst, frozenset(self.branches))


@dataclass(frozen=True, eq=False)
class EnRoute(_Node):
    """p ~> q : l(S) . G, a message already sent by p and not yet received by q."""

    src: Role
    dst: Role
    label: Label
    sort: Sort
    cont: "Type"
    _hash: int = field(default=0, init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "sort", Sort(self.sort))
        _Node.__post_init__(self)

    def _key(self) -> tuple:
        return ("enroute", self.src, self.dst, self.label, self.sort, self.cont)


@dataclass(frozen=True, eq=False)
class Branch(_Node):
    """p & { l_i(S_i) . T_i }"""

    peer: Role
    branches: tuple[Arm, ...]
    _hash: int = field(default=0, init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "branches", _arms(self.branches))
        _Node.__post_init__(self)

    def _key(self) -> tuple:
        return ("branch", self.peer, frozenset(self.branches))


@dataclass(frozen=True, eq=False)
class Select(_Node):
    """p (+) { l_i(S_i) . T_i }"""

    peer: Role
    branches: tuple[Arm, ...]
    _hash: int = field(default=0, init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "branches", _arms(self.branches))
        _Node.__post_init__(self)

    def _key(self) -> tuple:
        return ("select", self.peer, frozenset(self.branches))


GlobalType = Union[End, Var, Rec, Comm, EnRoute]
LocalType = Union[End, Var, Rec, Branch, Select]
Type = Union[End, Var, Rec, Comm, EnRoute, Branch, Select]

END = End()


def arm_map(t: Type) -> dict[Label, Arm]:
    return {a.label: a for a in t.branches}  # type: ignore[union-attr]


def children(t: Type) -> list[Type]:
    if isinstance(t, (Comm, Branch, Select)):
        return [a.cont for a in t.branches]
    if isinstance(t, EnRoute):
        return [t.cont]
    if isinstance(t, Rec):
        return [t.body]
    return []


# -- queues -----------------------------------------------------------------


class Message(NamedTuple):
    dest: Role
    label: Label
    sort: Sort


QueueType = tuple  # tuple[Message, ...]


def normalize_queue(h: Iterable) -> QueueType:
    """Canonical representative: destinations in lexicographic order, FIFO kept per destination."""
    msgs = [Message(m[0], m[1], Sort(m[2])) for m in h]
    return tuple(sorted(msgs, key=lambda m: m.dest))


def queue_equiv(h1: Iterable, h2: Iterable) -> bool:
    return normalize_queue(h1) == normalize_queue(h2)


def queue_for(h: QueueType, dest: Role) -> list[Message]:
    return [m for m in h if m.dest == dest]


# -- substitution and unfolding ----------------------------------------------


def free_vars(t: Type) -> frozenset[str]:
    return _fv(t)


@lru_cache(maxsize=None)
def _fv(t: Type) -> frozenset[str]:
    if isinstance(t, Var):
        return frozenset([t.name])
    if isinstance(t, Rec):
        return _fv(t.body) - {t.var}
    out: frozenset[str] = frozenset()
    for c in children(t):
        out |= _fv(c)
    return out


_fresh = itertools.count()


def substitute(t: Type, var: str, repl: Type) -> Type:
    """Capture-avoiding t[repl/var]."""
    if var not in free_vars(t):
        return t
    if isinstance(t, Var):
        return repl
    if isinstance(t, Rec):
        if t.var in free_vars(repl):
            new = f"{t.var}_{next(_fresh)}"
            body = substitute(t.body, t.var, Var(new))
            return Rec(new, substitute(body, var, repl))
        return Rec(t.var, substitute(t.body, var, repl))
    if isinstance(t, EnRoute):
        return EnRoute(t.src, t.dst, t.label, t.sort, substitute(t.cont, var, repl))
    arms = tuple(Arm(a.label, a.sort, substitute(a.cont, var, repl)) for a in t.branches)  # type: ignore[union-attr]
    if isinstance(t, Comm):
        return Comm(t.src, t.dst, arms)
    return type(t)(t.peer, arms)  # type: ignore[union-attr]


def unfold(t: Type) -> Type:
    """Strip top-level binders by substitution; terminates on guarded types."""
    while isinstance(t, Rec):
        t = substitute(t.body, t.var, t)
    return t


unfold_global = unfold
unfold_local = unfold


# -- role functions -----------------------------------------------------------


class RoleSets(NamedTuple):
    roles: frozenset
    sroles: frozenset
    aroles: frozenset
    mroles: frozenset


@lru_cache(maxsize=None)
def role_sets(g: GlobalType) -> RoleSets:
    if isinstance(g, (End, Var)):
        e: frozenset = frozenset()
        return RoleSets(e, e, e, e)
    if isinstance(g, Rec):
        return role_sets(g.body)
    if isinstance(g, EnRoute):
        r = role_sets(g.cont)
        return RoleSets(
            r.roles | {g.src, g.dst},
            r.sroles | {g.src},
            r.aroles | {g.dst},
            r.mroles | {(g.src, g.dst)},
        )
    if isinstance(g, Comm):
        subs = [role_sets(a.cont) for a in g.branches]
        return RoleSets(
            frozenset({g.src, g.dst}).union(*(s.roles for s in subs)),
            frozenset().union(*(s.sroles for s in subs)),
            frozenset({g.src, g.dst}).union(*(s.aroles for s in subs)),
            frozenset().union(*(s.mroles for s in subs)),
        )
    raise TypeError(f"not a global type: {g!r}")


def roles(g: GlobalType) -> frozenset:
    return role_sets(g).roles


# -- validation ------------------------------------------------------------------


def validate(t: Type, kind: str = "any") -> None:
    """Check binding, guardedness, self-communication and label distinctness."""
    glob = (Comm, EnRoute)
    loc = (Branch, Select)

    def go(t: Type, bound: frozenset, unguarded: frozenset) -> None:
        if isinstance(t, End):
            return
        if isinstance(t, Var):
            if t.name not in bound:
                raise IllFormedType(f"unbound variable {t.name}")
            if t.name in unguarded:
                raise IllFormedType(f"unguarded recursion on {t.name}")
            return
        if isinstance(t, Rec):
            go(t.body, bound | {t.var}, unguarded | {t.var})
            return
        if kind == "global" and isinstance(t, loc) or kind == "local" and isinstance(t, glob):
            raise IllFormedType(f"unexpected {type(t).__name__} in a {kind} type")
        if isinstance(t, (Comm, EnRoute)) and t.src == t.dst:
            raise IllFormedType(f"self-communication on role {t.src}")
        if isinstance(t, EnRoute):
            go(t.cont, bound, frozenset())
            return
        if not t.branches:
            raise IllFormedType("empty choice")
        labels = [a.label for a in t.branches]
        if len(set(labels)) != len(labels):
            raise IllFormedType(f"duplicate labels in choice: {labels}")
        for a in t.branches:
            go(a.cont, bound, frozenset())

    go(t, frozenset(), frozenset())


def is_global(t: Type) -> bool:
    return not any(isinstance(s, (Branch, Select)) for s in _subterms(t))


def _subterms(t: Type):
    stack = [t]
    while stack:
        s = stack.pop()
        yield s
        stack.extend(children(s))


# -- graphs -----------------------------------------------------------------------


class GNode(NamedTuple):
    kind: str  # end | comm | enroute | branch | select
    data: tuple  # (src, dst) or (peer,) or ()
    edges: tuple  # ((label, sort, target), ...) in label order


@dataclass(frozen=True)
class TypeGraph:
    nodes: tuple
    root: int

    def __len__(self) -> int:
        return len(self.nodes)

    def shape(self, i: int) -> tuple:
        n = self.nodes[i]
        return (n.kind, n.data, tuple((l, s) for l, s, _ in n.edges))

    def succ(self, i: int) -> dict:
        return {l: (s, c) for l, s, c in self.nodes[i].edges}


def _raw_graph(t: Type) -> TypeGraph:
    nodes: list = []  # entries are GNode or ("alias", idx)

    def build(t: Type, env: dict) -> int:
        if isinstance(t, Var):
            return env[t.name]
        idx = len(nodes)
        nodes.append(None)
        if isinstance(t, Rec):
            env2 = dict(env)
            env2[t.var] = idx
            nodes[idx] = ("alias", build(t.body, env2))
            return idx
        if isinstance(t, End):
            nodes[idx] = GNode("end", (), ())
        elif isinstance(t, EnRoute):
            nodes[idx] = GNode("enroute", (t.src, t.dst), ((t.label, t.sort, build(t.cont, env)),))
        else:
            edges = tuple(sorted((a.label, a.sort, build(a.cont, env)) for a in t.branches))
            if isinstance(t, Comm):
                nodes[idx] = GNode("comm", (t.src, t.dst), edges)
            else:
                nodes[idx] = GNode(type(t).__name__.lower(), (t.peer,), edges)
        return idx

    root = build(t, {})

    def resolve(i: int) -> int:
        seen = set()
        while isinstance(nodes[i], tuple) and nodes[i][0] == "alias":
            if i in seen:
                raise IllFormedType("unguarded recursion")
            seen.add(i)
            i = nodes[i][1]
        return i

    out = []
    for n in nodes:
        if n[0] == "alias":
            out.append(None)
        else:
            out.append(GNode(n.kind, n.data, tuple((l, s, resolve(c)) for l, s, c in n.edges)))
    return _canonical(out, resolve(root))


def _canonical(nodes: list, root: int) -> TypeGraph:
    """Renumber reachable nodes by BFS from the root in label order."""
    order = {root: 0}
    q = deque([root])
    seq = []
    while q:
        i = q.popleft()
        seq.append(i)
        for _, _, c in nodes[i].edges:
            if c not in order:
                order[c] = len(order)
                q.append(c)
    new = tuple(
        GNode(nodes[i].kind, nodes[i].data, tuple((l, s, order[c]) for l, s, c in nodes[i].edges))
        for i in seq
    )
    return TypeGraph(new, 0)


def minimize(g: TypeGraph) -> TypeGraph:
    """Quotient by bisimilarity (Moore refinement) and renumber canonically."""
    n = len(g.nodes)
    block = {}
    ids: dict = {}
    for i in range(n):
        block[i] = ids.setdefault(g.shape(i), len(ids))
    while True:
        ids = {}
        new = {}
        for i in range(n):
            sig = (block[i], tuple(block[c] for _, _, c in g.nodes[i].edges))
            new[i] = ids.setdefault(sig, len(ids))
        if len(ids) == len(set(block.values())):
            block = new
            break
        block = new
    rep: dict = {}
    for i in range(n):
        rep.setdefault(block[i], i)
    nodes = [None] * n
    for b, i in rep.items():
        nd = g.nodes[i]
        nodes[i] = GNode(nd.kind, nd.data, tuple((l, s, rep[block[c]]) for l, s, c in nd.edges))
    return _canonical(nodes, rep[block[g.root]])


@lru_cache(maxsize=4096)
def graph_of(t: Type) -> TypeGraph:
    """Minimal canonical graph of the infinite unfolding of ``t``."""
    if isinstance(t, TypeGraph):
        return t
    return minimize(_raw_graph(t))


def raw_graph_of(t: Type) -> TypeGraph:
    """Graph mirroring the AST shape, without quotienting."""
    return _raw_graph(t)


def bisimilar(a, b) -> bool:
    """Coinductive pairwise check; independent of ``minimize``."""
    ga = a if isinstance(a, TypeGraph) else _raw_graph(a)
    gb = b if isinstance(b, TypeGraph) else _raw_graph(b)
    seen = set()
    stack = [(ga.root, gb.root)]
    while stack:
        pair = stack.pop()
        if pair in seen:
            continue
        seen.add(pair)
        i, j = pair
        if ga.shape(i) != gb.shape(j):
            return False
        for (_, _, c1), (_, _, c2) in zip(ga.nodes[i].edges, gb.nodes[j].edges):
            stack.append((c1, c2))
    return True


def graph_to_type(g: TypeGraph, i: int | None = None) -> Type:
    """Fold a graph back into an AST, binding ``rec tN`` only where a cycle closes."""
    start = g.root if i is None else i

    def emit(n: int, path: tuple, used: set) -> Type:
        if n in path:
            used.add(n)
            return Var(f"t{n}")
        nd = g.nodes[n]
        inner: set = set()
        p2 = path + (n,)
        if nd.kind == "end":
            body: Type = END
        elif nd.kind == "enroute":
            l, s, c = nd.edges[0]
            body = EnRoute(nd.data[0], nd.data[1], l, s, emit(c, p2, inner))
        else:
            arms = tuple(Arm(l, s, emit(c, p2, inner)) for l, s, c in nd.edges)
            if nd.kind == "comm":
                body = Comm(nd.data[0], nd.data[1], arms)
            elif nd.kind == "branch":
                body = Branch(nd.data[0], arms)
            else:
                body = Select(nd.data[0], arms)
        if n in inner:
            inner.discard(n)
            body = Rec(f"t{n}", body)
        used |= inner
        return body

    return emit(start, (), set())


@lru_cache(maxsize=16384)
def canonical_type(t: Type) -> Type:
    """AST of the minimal graph: a normal form for bisimilarity."""
    return graph_to_type(graph_of(t))


def type_size(t: Type) -> int:
    return sum(1 for _ in _subterms(t))
