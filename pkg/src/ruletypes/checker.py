"""The decorated type-checking system as a deterministic, syntax-directed
algorithm.

Each term gets its structural derivation first (leaf rules, operator rules,
or the list rules that peel the last argument), then at most one
decoration-erasing step and one subtype step coerce the structural type to
the expected one; the coercion rules are applied only when no structural
rule fits, which is what makes the algorithm deterministic.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Union

from .context import Context
from .core import (
    Cond,
    Conj,
    DecoratedSort,
    Derivation,
    GroundType,
    ListApp,
    Match,
    Rule,
    StarVar,
    SynApp,
    Term,
    TypeVar,
    Var,
    WT,
)


class ErrKind(enum.Enum):
    NO_RANK = "NoRank"
    ARITY_MISMATCH = "ArityMismatch"
    NOT_SUBTYPE = "NotSubtype"
    UNDECLARED_VARIABLE = "UndeclaredVariable"
    STAR_OUTSIDE_LIST = "StarOutsideList"
    EXPECTED_LIST_TYPE = "ExpectedListType"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class WellTyped:
    derivation: Derivation


@dataclass(frozen=True)
class CheckErr:
    kind: ErrKind
    path: str
    detail: str

    def __str__(self) -> str:
        return f"{self.kind} at {self.path}: {self.detail}"


CheckOutcome = Union[WellTyped, CheckErr]


class _Failure(Exception):
    def __init__(self, err: CheckErr):
        super().__init__(str(err))
        self.err = err


def _fail(kind: ErrKind, path: str, detail: str) -> None:
    raise _Failure(CheckErr(kind, path, detail))


# ---------------------------------------------------------------------------
# Decorated system

def _declared_dsort(ctx: Context, e: Term, path: str) -> DecoratedSort:
    tt = ctx.raw_typing(e)
    if isinstance(tt, GroundType):
        return tt.dsort
    if isinstance(tt, TypeVar):
        _fail(ErrKind.UNDECLARED_VARIABLE, path,
              f"{e} is typed by a type variable; checking needs a ground typing")
    _fail(ErrKind.UNDECLARED_VARIABLE, path, f"{e} has no declared type")
    raise AssertionError  # unreachable


def _structural(ctx: Context, e: Term, path: str, star_ok: bool = False) -> Derivation:
    if isinstance(e, Var):
        return Derivation("T-Var", e, GroundType(_declared_dsort(ctx, e, path)))

    if isinstance(e, StarVar):
        if not star_ok:
            _fail(ErrKind.STAR_OUTSIDE_LIST, path,
                  f"star variable {e} may only appear directly inside a list application")
        return Derivation("T-SVar", e, GroundType(_declared_dsort(ctx, e, path)))

    if isinstance(e, SynApp):
        rank = ctx.syn_ranks.get(e.op)
        if rank is None:
            _fail(ErrKind.NO_RANK, path, f"operator {e.op} has no declared rank")
        if len(e.args) != len(rank.domain):
            _fail(ErrKind.ARITY_MISMATCH, path,
                  f"{e.op} expects {len(rank.domain)} arguments, got {len(e.args)}")
        premises = tuple(
            _check(ctx, arg, rank.domain[i], f"{path}.arg[{i}]")
            for i, arg in enumerate(e.args)
        )
        return Derivation("T-Fun", e, GroundType(rank.codomain), premises)

    if isinstance(e, ListApp):
        rank = ctx.var_ranks.get(e.op)
        if rank is None:
            _fail(ErrKind.NO_RANK, path, f"variadic operator {e.op} has no declared rank")
        codomain = rank.codomain
        if not e.args:
            return Derivation("T-Empty", e, GroundType(codomain))
        last = e.args[-1]
        spine = ListApp(e.op, e.args[:-1])
        last_path = f"{path}.arg[{len(e.args) - 1}]"
        if isinstance(last, StarVar):
            declared = _declared_dsort(ctx, last, last_path)
            if declared != codomain:
                _fail(ErrKind.EXPECTED_LIST_TYPE, last_path,
                      f"star variable {last} is typed {declared}, but {e.op} builds {codomain}")
            premises = (
                _check(ctx, spine, codomain, path),
                _check(ctx, last, codomain, last_path, star_ok=True),
            )
            return Derivation("T-Merge", e, GroundType(codomain), premises)
        if ctx.sortof(last) == codomain:
            premises = (
                _check(ctx, spine, codomain, path),
                _check(ctx, last, codomain, last_path),
            )
            return Derivation("T-Merge", e, GroundType(codomain), premises)
        premises = (
            _check(ctx, spine, codomain, path),
            _check(ctx, last, rank.elem, last_path),
        )
        return Derivation("T-Elem", e, GroundType(codomain), premises)

    raise TypeError(f"unexpected term {e!r}")


def _coerce(ctx: Context, e: Term, d: Derivation, expected: DecoratedSort, path: str) -> Derivation:
    assert isinstance(d.type, GroundType)
    t = d.type.dsort
    if t == expected:
        return d
    structural = t
    if expected.deco.is_any and not t.deco.is_any:
        # Decoration erasure applies only to a term sitting at its own
        # declared type, with a real operator decoration.
        t = DecoratedSort(t.sort)
        d = Derivation("Gen", e, GroundType(t), (d,))
        if t == expected:
            return d
    if ctx.subtype_holds(t, expected):
        return Derivation("Sub", e, GroundType(expected), (d,))
    _fail(ErrKind.NOT_SUBTYPE, path, f"cannot use {structural} where {expected} is required")
    raise AssertionError  # unreachable


def _check(ctx: Context, e: Term, expected: DecoratedSort, path: str, star_ok: bool = False) -> Derivation:
    return _coerce(ctx, e, _structural(ctx, e, path, star_ok), expected, path)


def _check_cond(ctx: Context, c: Cond, path: str) -> Derivation:
    if isinstance(c, Match):
        if not isinstance(c.at, GroundType):
            raise ValueError(f"checking needs a ground match annotation at {path}, got {c.at}")
        at = c.at.dsort
        premises = (
            _check(ctx, c.pattern, at, f"{path}.pattern"),
            _check(ctx, c.subject, at, f"{path}.subject"),
        )
        return Derivation("T-Match", c, WT, premises)
    if isinstance(c, Conj):
        premises = tuple(
            _check_cond(ctx, member, f"{path}[{i}]") for i, member in enumerate(c.conds)
        )
        return Derivation("T-Conj", c, WT, premises)
    raise TypeError(f"unexpected condition {c!r}")


def check_term(ctx: Context, e: Term, expected: DecoratedSort) -> CheckOutcome:
    """Check one term against an expected decorated sort."""
    try:
        return WellTyped(_check(ctx, e, expected, "term"))
    except _Failure as f:
        return f.err


def check_cond(ctx: Context, c: Cond) -> CheckOutcome:
    """Check a condition: both sides of every match against its annotation."""
    try:
        return WellTyped(_check_cond(ctx, c, "cond"))
    except _Failure as f:
        return f.err


def check_rule(ctx: Context, r: Rule) -> CheckOutcome:
    """Check a rule: its condition, plus each action term against the term's
    own declared type."""
    try:
        premises = [_check_cond(ctx, r.cond, "cond")]
        for i, action in enumerate(r.actions):
            path = f"action[{i}]"
            expected = ctx.sortof(action)
            if expected is None:
                _fail(ErrKind.UNDECLARED_VARIABLE, path, f"{action} has no declared type")
            premises.append(_check(ctx, action, expected, path))
        return WellTyped(Derivation("T-Rule", r, WT, tuple(premises)))
    except _Failure as f:
        return f.err


# ---------------------------------------------------------------------------
# Baseline system (no subtyping, no decorations, no lists)

def _simple_term(ctx: Context, e: Term, expected: DecoratedSort, path: str) -> Derivation:
    if isinstance(e, StarVar):
        _fail(ErrKind.STAR_OUTSIDE_LIST, path, "star variables are outside the simple fragment")
    if isinstance(e, ListApp):
        _fail(ErrKind.NO_RANK, path, f"variadic operator {e.op} is outside the simple fragment")

    if isinstance(e, Var):
        declared = _declared_dsort(ctx, e, path)
        if declared.sort != expected.sort:
            _fail(ErrKind.NOT_SUBTYPE, path, f"{e} has sort {declared.sort}, expected {expected.sort}")
        return Derivation("T-Var", e, GroundType(DecoratedSort(declared.sort)))

    if isinstance(e, SynApp):
        rank = ctx.syn_ranks.get(e.op)
        if rank is None:
            _fail(ErrKind.NO_RANK, path, f"operator {e.op} has no declared rank")
        if len(e.args) != len(rank.domain):
            _fail(ErrKind.ARITY_MISMATCH, path,
                  f"{e.op} expects {len(rank.domain)} arguments, got {len(e.args)}")
        if rank.codomain.sort != expected.sort:
            _fail(ErrKind.NOT_SUBTYPE, path,
                  f"{e.op} builds sort {rank.codomain.sort}, expected {expected.sort}")
        premises = tuple(
            _simple_term(ctx, arg, rank.domain[i], f"{path}.arg[{i}]")
            for i, arg in enumerate(e.args)
        )
        return Derivation("T-Fun", e, GroundType(DecoratedSort(rank.codomain.sort)), premises)

    raise TypeError(f"unexpected term {e!r}")


def _simple_cond(ctx: Context, c: Cond, path: str) -> Derivation:
    if isinstance(c, Match):
        if not isinstance(c.at, GroundType):
            raise ValueError(f"checking needs a ground match annotation at {path}, got {c.at}")
        at = DecoratedSort(c.at.dsort.sort)
        premises = (
            _simple_term(ctx, c.pattern, at, f"{path}.pattern"),
            _simple_term(ctx, c.subject, at, f"{path}.subject"),
        )
        return Derivation("T-Match", c, WT, premises)
    if isinstance(c, Conj):
        premises = tuple(
            _simple_cond(ctx, member, f"{path}[{i}]") for i, member in enumerate(c.conds)
        )
        return Derivation("T-Conj", c, WT, premises)
    raise TypeError(f"unexpected condition {c!r}")


def check_simple(ctx: Context, r: Rule) -> CheckOutcome:
    """The baseline checking system: plain many-sorted checking with exact
    sort equality, used for differential testing of the common fragment."""
    try:
        premises = [_simple_cond(ctx, r.cond, "cond")]
        for i, action in enumerate(r.actions):
            path = f"action[{i}]"
            expected = ctx.sortof(action)
            if expected is None:
                _fail(ErrKind.UNDECLARED_VARIABLE, path, f"{action} has no declared type")
            premises.append(_simple_term(ctx, action, expected, path))
        return WellTyped(Derivation("T-Rule", r, WT, tuple(premises)))
    except _Failure as f:
        return f.err
