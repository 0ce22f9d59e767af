"""Constraint generation: walks a rule expression, allocates fresh type
variables, and emits the equality/subtype constraints whose solutions are
exactly the valid typings.

List applications thread one spine variable through their whole spine: the
premise for the leading sublist, and for a trailing star variable or
same-operator list, concludes at the same variable as the application
itself, so no extra equalities are emitted for the sharing.
"""

from __future__ import annotations

from dataclasses import dataclass

from .checker import ErrKind
from .context import Context
from .core import (
    Cond,
    Conj,
    Constraint,
    ConstraintSet,
    Derivation,
    Eq,
    GroundType,
    ListApp,
    Match,
    Rule,
    StarVar,
    Sub,
    SynApp,
    Term,
    TypeTerm,
    TypeVar,
    Var,
    WT,
)


class FreshSupply:
    """Hands out strictly increasing type-variable ids within one inference
    session; ids are never reissued."""

    def __init__(self, start: int = 1):
        if start < 0:
            raise ValueError("fresh supply must start at a nonnegative id")
        self._next = start

    @property
    def counter(self) -> int:
        return self._next

    def fresh(self) -> TypeVar:
        v = TypeVar(self._next)
        self._next += 1
        return v


@dataclass(frozen=True)
class InferResult:
    """An inferred judgment: the type (a variable for terms, ``wt`` for
    conditions and rules), its constraint set, and the derivation."""

    type: TypeTerm
    constraints: ConstraintSet
    derivation: Derivation


class InferError(Exception):
    """Raised when inference meets an undeclared symbol or a malformed term."""

    def __init__(self, kind: ErrKind, path: str, detail: str):
        super().__init__(f"{kind} at {path}: {detail}")
        self.kind = kind
        self.path = path
        self.detail = detail


def _names_in_order(rule: Rule) -> list[tuple[bool, str]]:
    # (is_star, name) pairs, first occurrence only, pattern before subject
    # before action.
    seen: dict[tuple[bool, str], None] = {}

    def walk_term(e: Term) -> None:
        if isinstance(e, Var):
            seen.setdefault((False, e.name))
        elif isinstance(e, StarVar):
            seen.setdefault((True, e.name))
        elif isinstance(e, (SynApp, ListApp)):
            for a in e.args:
                walk_term(a)

    def walk_cond(c: Cond) -> None:
        if isinstance(c, Match):
            walk_term(c.pattern)
            walk_term(c.subject)
        elif isinstance(c, Conj):
            for member in c.conds:
                walk_cond(member)

    walk_cond(rule.cond)
    for action in rule.actions:
        walk_term(action)
    return list(seen)


def init_context(signature: Context, rule: Rule, fresh: FreshSupply) -> Context:
    """Build the inference context: the signature's subsort declarations and
    ranks, plus one fresh type variable for every variable or star variable
    occurring in the rule that the signature does not already type with a
    ground type.  Names are collected left to right, each getting exactly one
    variable."""
    var_types = dict(signature.var_types)
    star_types = dict(signature.star_types)
    for is_star, name in _names_in_order(rule):
        table = star_types if is_star else var_types
        if not isinstance(table.get(name), GroundType):
            table[name] = fresh.fresh()
    return Context(
        sorts=signature.sorts,
        subsorts=signature.subsort_decls,
        ranks=list(signature.syn_ranks.values()) + list(signature.var_ranks.values()),
        var_types=var_types,
        star_types=star_types,
    )


def _infer_term(
    ctx: Context,
    e: Term,
    fresh: FreshSupply,
    path: str,
    pin: TypeVar | None = None,
) -> tuple[TypeVar, list[Constraint], Derivation]:
    if isinstance(e, Var):
        binding = ctx.var_types.get(e.name)
        if binding is None:
            raise InferError(ErrKind.UNDECLARED_VARIABLE, path, f"{e} has no typing")
        alpha = pin or fresh.fresh()
        constraints = [Eq(alpha, binding)]
        return alpha, constraints, Derivation("CT-Var", e, alpha, (), ConstraintSet(constraints))

    if isinstance(e, StarVar):
        binding = ctx.star_types.get(e.name)
        if binding is None:
            raise InferError(ErrKind.UNDECLARED_VARIABLE, path, f"{e} has no typing")
        alpha = pin or fresh.fresh()
        constraints = [Eq(alpha, binding)]
        return alpha, constraints, Derivation("CT-SVar", e, alpha, (), ConstraintSet(constraints))

    if isinstance(e, SynApp):
        rank = ctx.syn_ranks.get(e.op)
        if rank is None:
            raise InferError(ErrKind.NO_RANK, path, f"operator {e.op} has no declared rank")
        if len(e.args) != len(rank.domain):
            raise InferError(ErrKind.ARITY_MISMATCH, path,
                             f"{e.op} expects {len(rank.domain)} arguments, got {len(e.args)}")
        alpha = pin or fresh.fresh()
        constraints: list[Constraint] = []
        premises = []
        arg_vars = []
        for i, arg in enumerate(e.args):
            if isinstance(arg, StarVar):
                raise InferError(ErrKind.STAR_OUTSIDE_LIST, f"{path}.arg[{i}]",
                                 f"star variable {arg} inside a syntactic application")
            av, ac, ad = _infer_term(ctx, arg, fresh, f"{path}.arg[{i}]")
            arg_vars.append(av)
            constraints.extend(ac)
            premises.append(ad)
        constraints.append(Eq(alpha, GroundType(rank.codomain)))
        for i, av in enumerate(arg_vars):
            constraints.append(Sub(av, GroundType(rank.domain[i])))
        return alpha, constraints, Derivation("CT-Fun", e, alpha, tuple(premises), ConstraintSet(constraints))

    if isinstance(e, ListApp):
        rank = ctx.var_ranks.get(e.op)
        if rank is None:
            raise InferError(ErrKind.NO_RANK, path, f"variadic operator {e.op} has no declared rank")
        codomain = GroundType(rank.codomain)
        alpha = pin or fresh.fresh()

        if not e.args:
            constraints = [Eq(alpha, codomain)]
            return alpha, constraints, Derivation("CT-Empty", e, alpha, (), ConstraintSet(constraints))

        last = e.args[-1]
        spine = ListApp(e.op, e.args[:-1])
        last_path = f"{path}.arg[{len(e.args) - 1}]"
        _, spine_constraints, spine_d = _infer_term(ctx, spine, fresh, path, pin=alpha)

        if isinstance(last, StarVar):
            # The star premise concludes at the spine's own variable.
            _, last_constraints, last_d = _infer_term(ctx, last, fresh, last_path, pin=alpha)
            constraints = spine_constraints + last_constraints + [Eq(alpha, codomain)]
            return alpha, constraints, Derivation(
                "CT-Star", e, alpha, (spine_d, last_d), ConstraintSet(constraints))

        if ctx.sortof(last) == rank.codomain:
            _, last_constraints, last_d = _infer_term(ctx, last, fresh, last_path, pin=alpha)
            constraints = spine_constraints + last_constraints + [Eq(alpha, codomain)]
            return alpha, constraints, Derivation(
                "CT-Merge", e, alpha, (spine_d, last_d), ConstraintSet(constraints))

        last_var, last_constraints, last_d = _infer_term(ctx, last, fresh, last_path)
        constraints = spine_constraints + last_constraints + [
            Eq(alpha, codomain),
            Sub(last_var, GroundType(rank.elem)),
        ]
        return alpha, constraints, Derivation(
            "CT-Elem", e, alpha, (spine_d, last_d), ConstraintSet(constraints))

    raise TypeError(f"unexpected term {e!r}")


def infer_term(ctx: Context, e: Term, fresh: FreshSupply) -> InferResult:
    """Infer one term: a fresh conclusion variable plus its constraint set."""
    alpha, constraints, d = _infer_term(ctx, e, fresh, "term")
    return InferResult(alpha, ConstraintSet(constraints), d)


def _infer_cond(ctx: Context, c: Cond, fresh: FreshSupply, path: str) -> tuple[list[Constraint], Derivation]:
    if isinstance(c, Match):
        annotation: TypeTerm = c.at if c.at is not None else fresh.fresh()
        pat_var, pat_constraints, pat_d = _infer_term(ctx, c.pattern, fresh, f"{path}.pattern")
        sub_var, sub_constraints, sub_d = _infer_term(ctx, c.subject, fresh, f"{path}.subject")
        constraints = pat_constraints + sub_constraints + [
            Sub(pat_var, annotation),
            Eq(sub_var, annotation),
        ]
        subject = Match(c.pattern, c.subject, annotation)
        return constraints, Derivation(
            "CT-Match", subject, WT, (pat_d, sub_d), ConstraintSet(constraints))

    if isinstance(c, Conj):
        constraints: list[Constraint] = []
        premises = []
        members = []
        for i, member in enumerate(c.conds):
            mc, md = _infer_cond(ctx, member, fresh, f"{path}[{i}]")
            constraints.extend(mc)
            premises.append(md)
            members.append(md.subject)
        subject = Conj(tuple(members))
        return constraints, Derivation("CT-Conj", subject, WT, tuple(premises), ConstraintSet(constraints))

    raise TypeError(f"unexpected condition {c!r}")


def infer_cond(ctx: Context, c: Cond, fresh: FreshSupply) -> InferResult:
    """Infer a condition; a missing match annotation gets a fresh variable."""
    constraints, d = _infer_cond(ctx, c, fresh, "cond")
    return InferResult(WT, ConstraintSet(constraints), d)


def infer_rule(ctx: Context, r: Rule, fresh: FreshSupply) -> InferResult:
    """Infer a whole rule: the condition's constraints, each action term's
    constraints, and one reflexive equality recording the declared typing of
    every variable-headed action term."""
    constraints, cond_d = _infer_cond(ctx, r.cond, fresh, "cond")
    premises = [cond_d]
    action_typings: list[TypeTerm] = []
    for i, action in enumerate(r.actions):
        path = f"action[{i}]"
        if isinstance(action, StarVar):
            raise InferError(ErrKind.STAR_OUTSIDE_LIST, path,
                             f"star variable {action} cannot be an action term")
        typing = ctx.raw_typing(action)
        if typing is None:
            raise InferError(ErrKind.UNDECLARED_VARIABLE, path, f"{action} has no declared typing")
        action_typings.append(typing)
        _, ac, ad = _infer_term(ctx, action, fresh, path)
        constraints = constraints + ac
        premises.append(ad)
    for typing in action_typings:
        if isinstance(typing, TypeVar):
            constraints.append(Eq(typing, typing))
    subject = Rule(cond_d.subject, r.actions)
    return InferResult(WT, ConstraintSet(constraints),
                       Derivation("CT-Rule", subject, WT, tuple(premises), ConstraintSet(constraints)))
