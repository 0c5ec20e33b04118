"""Expressions, processes and runtime sessions of the asynchronous calculus."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

from .core import Label, Role, Sort


# -- expressions --


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class UnitLit:
    pass


@dataclass(frozen=True)
class EVar:
    name: str


@dataclass(frozen=True)
class Add:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Sub:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Compare:
    op: str  # == != < <= > >=
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class NondetBool:
    """Opaque boolean resolved from the scheduler's random stream."""


Expr = Union[IntLit, BoolLit, UnitLit, EVar, Add, Sub, Compare, NondetBool]


# -- processes --


@dataclass(frozen=True)
class Inact:
    pass


@dataclass(frozen=True)
class PVar:
    name: str


@dataclass(frozen=True)
class PRec:
    var: str
    body: "Process"


@dataclass(frozen=True)
class Send:
    peer: Role
    label: Label
    expr: Expr
    cont: "Process"


class RecvArm(NamedTuple):
    label: Label
    var: Optional[str]
    sort: Optional[Sort]  # binder annotation, if written
    cont: "Process"


@dataclass(frozen=True)
class Recv:
    peer: Role
    branches: tuple  # tuple[RecvArm, ...]


@dataclass(frozen=True)
class If:
    cond: Expr
    then: "Process"
    orelse: "Process"


Process = Union[Inact, PVar, PRec, Send, Recv, If]


# -- runtime --

UNIT = ()  # the unit value


class RMsg(NamedTuple):
    dest: Role
    label: Label
    value: object


def sort_of_value(v) -> Optional[Sort]:
    if isinstance(v, bool):
        return Sort.BOOL
    if isinstance(v, int):
        return Sort.INT
    if isinstance(v, float):
        return Sort.REAL
    if v == UNIT:
        return Sort.UNIT
    return None
