"""Symbolic values shared by the checker, the inference engine, and the
constraint solver: sorts, decorations, terms, type terms, constraints,
substitutions, and derivation trees.

Everything here is immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Iterator, Union

if TYPE_CHECKING:
    from .context import Context


# ---------------------------------------------------------------------------
# Sorts and decorations

@dataclass(frozen=True)
class Sort:
    """A base sort, compared by name."""

    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Decoration:
    """Head-operator decoration on a sort; ``symbol=None`` is the don't-care
    decoration, printed ``?``."""

    symbol: str | None = None

    @property
    def is_any(self) -> bool:
        return self.symbol is None

    def __str__(self) -> str:
        return self.symbol if self.symbol is not None else "?"


ANY = Decoration()


@dataclass(frozen=True)
class DecoratedSort:
    """A sort paired with a decoration, e.g. ``Z^l`` or ``N^?``."""

    sort: Sort
    deco: Decoration = ANY

    def __str__(self) -> str:
        return f"{self.sort}^{self.deco}"


def dsort(sort_name: str, deco: str | None = None) -> DecoratedSort:
    """Shorthand constructor: ``dsort("Z", "l")`` is ``Z^l``, ``dsort("Z")``
    is ``Z^?``."""
    return DecoratedSort(Sort(sort_name), Decoration(deco))


# ---------------------------------------------------------------------------
# Type terms: variables, ground decorated sorts, and the well-typed sort

class TypeTerm:
    """Base class for type terms."""

    __slots__ = ()


@dataclass(frozen=True)
class TypeVar(TypeTerm):
    """A type variable, printed ``α<n>``."""

    id: int

    def __str__(self) -> str:
        return f"α{self.id}"


@dataclass(frozen=True)
class GroundType(TypeTerm):
    """A ground type term: a decorated sort."""

    dsort: DecoratedSort

    def __str__(self) -> str:
        return str(self.dsort)


@dataclass(frozen=True)
class WtType(TypeTerm):
    """The special sort concluding condition- and rule-level judgments."""

    def __str__(self) -> str:
        return "wt"


WT = WtType()


def type_vars(t: TypeTerm) -> set[int]:
    return {t.id} if isinstance(t, TypeVar) else set()


# ---------------------------------------------------------------------------
# Terms of the rule language

class Term:
    """Base class for terms."""

    __slots__ = ()


@dataclass(frozen=True)
class Var(Term):
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class StarVar(Term):
    """A variable standing for a sublist segment; printed with a ``*``."""

    name: str

    def __str__(self) -> str:
        return f"{self.name}*"


@dataclass(frozen=True)
class SynApp(Term):
    """Application of a syntactic (fixed-arity) operator."""

    op: str
    args: tuple[Term, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "args", tuple(self.args))

    def __str__(self) -> str:
        return f"{self.op}({','.join(str(a) for a in self.args)})"


@dataclass(frozen=True)
class ListApp(Term):
    """Application of a variadic (associative list) operator."""

    op: str
    args: tuple[Term, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "args", tuple(self.args))

    def __str__(self) -> str:
        return f"{self.op}({','.join(str(a) for a in self.args)})"


class Cond:
    """Base class for rule conditions."""

    __slots__ = ()


@dataclass(frozen=True)
class Match(Cond):
    """A matching condition ``pattern << [at] subject``.

    ``at`` is a ground decorated sort in checking mode, a type variable in
    inference mode, or ``None`` for a surface ``[?]`` annotation that the
    inference engine has not freshened yet.
    """

    pattern: Term
    subject: Term
    at: TypeTerm | None

    def __str__(self) -> str:
        ann = "?" if self.at is None else str(self.at)
        return f"{self.pattern} << [{ann}] {self.subject}"


@dataclass(frozen=True)
class Conj(Cond):
    """A conjunction of at least two conditions (single conditions stay bare)."""

    conds: tuple[Cond, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "conds", tuple(self.conds))
        if len(self.conds) < 1:
            raise ValueError("empty conjunction")

    def __str__(self) -> str:
        return " /\\ ".join(str(c) for c in self.conds)


@dataclass(frozen=True)
class Rule:
    """A rule ``cond -> (e1, ..., en)``; the action may be empty."""

    cond: Cond
    actions: tuple[Term, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "actions", tuple(self.actions))

    def __str__(self) -> str:
        return f"{self.cond} -> ({', '.join(str(a) for a in self.actions)})"


# ---------------------------------------------------------------------------
# Constraints

class Constraint:
    """Base class for constraints; both variants have ``lhs`` and ``rhs``."""

    __slots__ = ()
    lhs: TypeTerm
    rhs: TypeTerm


def _reject_wt(t: TypeTerm) -> None:
    if isinstance(t, WtType):
        raise ValueError("wt cannot appear inside a constraint")


@dataclass(frozen=True)
class Eq(Constraint):
    """Equality constraint ``lhs =_s rhs``."""

    lhs: TypeTerm
    rhs: TypeTerm

    def __post_init__(self) -> None:
        _reject_wt(self.lhs)
        _reject_wt(self.rhs)

    def __str__(self) -> str:
        return f"{self.lhs} =_s {self.rhs}"


@dataclass(frozen=True)
class Sub(Constraint):
    """Subtype constraint ``lhs <:_s rhs``."""

    lhs: TypeTerm
    rhs: TypeTerm

    def __post_init__(self) -> None:
        _reject_wt(self.lhs)
        _reject_wt(self.rhs)

    def __str__(self) -> str:
        return f"{self.lhs} <:_s {self.rhs}"


class ConstraintSet:
    """An insertion-ordered, duplicate-free collection of constraints.

    Membership and equality follow set semantics; iteration order is the
    stable insertion order the solver scans in.
    """

    __slots__ = ("_items",)

    def __init__(self, items: Iterable[Constraint] = ()):
        object.__setattr__(self, "_items", tuple(dict.fromkeys(items)))

    def union(self, *others: Iterable[Constraint]) -> "ConstraintSet":
        merged: list[Constraint] = list(self._items)
        for other in others:
            merged.extend(other)
        return ConstraintSet(merged)

    def __or__(self, other: Iterable[Constraint]) -> "ConstraintSet":
        return self.union(other)

    def __iter__(self) -> Iterator[Constraint]:
        return iter(self._items)

    def __len__(self) -> int:
        return len(self._items)

    def __contains__(self, c: object) -> bool:
        return c in self._items

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ConstraintSet):
            return NotImplemented
        return frozenset(self._items) == frozenset(other._items)

    def __hash__(self) -> int:
        return hash(frozenset(self._items))

    def __str__(self) -> str:
        return "{" + ", ".join(str(c) for c in self._items) + "}"

    def __repr__(self) -> str:
        return f"ConstraintSet({list(self._items)!r})"


def free_type_vars(constraints: Iterable[Constraint]) -> set[int]:
    """The type variables occurring on either side of any constraint."""
    out: set[int] = set()
    for c in constraints:
        out |= type_vars(c.lhs)
        out |= type_vars(c.rhs)
    return out


# ---------------------------------------------------------------------------
# Substitutions

class Substitution:
    """A finite map from type-variable ids to type terms.

    Normalized eagerly: variable chains are path-compressed to a fixed point,
    identity bindings are dropped, and cyclic inputs are rejected, so equality
    of solutions is syntactic and application is idempotent.
    """

    __slots__ = ("_map",)

    def __init__(self, mapping: Iterable[tuple[int, TypeTerm]] | dict[int, TypeTerm] = ()):
        raw = dict(mapping)
        normal: dict[int, TypeTerm] = {}
        for var in raw:
            image = raw[var]
            seen = {var}
            while isinstance(image, TypeVar) and image.id in raw:
                if image.id in seen:
                    raise ValueError(f"cyclic substitution through α{image.id}")
                seen.add(image.id)
                image = raw[image.id]
            if not (isinstance(image, TypeVar) and image.id == var):
                normal[var] = image
        object.__setattr__(self, "_map", normal)

    def get(self, var: int) -> TypeTerm | None:
        return self._map.get(var)

    def items(self) -> list[tuple[int, TypeTerm]]:
        return sorted(self._map.items())

    def __contains__(self, var: object) -> bool:
        return var in self._map

    def __len__(self) -> int:
        return len(self._map)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Substitution):
            return NotImplemented
        return self._map == other._map

    def __hash__(self) -> int:
        return hash(frozenset(self._map.items()))

    def __str__(self) -> str:
        return "{" + ", ".join(f"α{v} ↦ {t}" for v, t in self.items()) + "}"

    def __repr__(self) -> str:
        return f"Substitution({self._map!r})"


def apply_subst(subst: Substitution, t: TypeTerm) -> TypeTerm:
    """Replace every bound variable in ``t`` by its image; ground type terms
    and unbound variables are unchanged."""
    if isinstance(t, TypeVar):
        image = subst.get(t.id)
        return t if image is None else image
    return t


def subst_satisfies(subst: Substitution, c: Constraint, ctx: "Context") -> bool:
    """Whether the substitution satisfies one constraint under a context.

    An equality holds when both images are syntactically equal.  A subtype
    constraint holds when the images are syntactically equal (the relation is
    reflexive on type terms) or when both are ground and the context's
    decorated-subtype relation holds.
    """
    lhs = apply_subst(subst, c.lhs)
    rhs = apply_subst(subst, c.rhs)
    if isinstance(c, Eq):
        return lhs == rhs
    if lhs == rhs:
        return True
    if isinstance(lhs, GroundType) and isinstance(rhs, GroundType):
        return ctx.subtype_holds(lhs.dsort, rhs.dsort)
    return False


# ---------------------------------------------------------------------------
# Derivations

RULE_LABELS = frozenset({
    "T-Var", "T-SVar", "T-Fun", "T-Empty", "T-Elem", "T-Merge", "Sub", "Gen",
    "T-Match", "T-Conj", "T-Rule",
    "CT-Var", "CT-SVar", "CT-Fun", "CT-Empty", "CT-Elem", "CT-Merge",
    "CT-Star", "CT-Match", "CT-Conj", "CT-Rule",
})

Subject = Union[Term, Cond, Rule]


@dataclass(frozen=True)
class Derivation:
    """One applied rule instance: label, concluded judgment, premises.

    Checking derivations carry ``constraints=None``; inference derivations
    carry the full constraint set of their subtree.
    """

    rule: str
    subject: Subject
    type: TypeTerm
    premises: tuple["Derivation", ...] = ()
    constraints: ConstraintSet | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "premises", tuple(self.premises))
        if self.rule not in RULE_LABELS:
            raise ValueError(f"unknown rule label {self.rule!r}")

    def walk(self) -> Iterator["Derivation"]:
        yield self
        for p in self.premises:
            yield from p.walk()
