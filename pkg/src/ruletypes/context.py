"""Typing contexts: subsort declarations, operator ranks, and variable
typings, with the decorated-subtype and sort-lookup queries that the
checking, inference, and resolution rules key on.

Contexts are immutable after construction; the subsort closure is computed
once and cached, so a validated context can be shared across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Union

from .core import (
    ANY,
    DecoratedSort,
    Decoration,
    GroundType,
    ListApp,
    Sort,
    StarVar,
    SynApp,
    Term,
    TypeTerm,
    Var,
)


@dataclass(frozen=True)
class SynRank:
    """Rank of a syntactic operator: domain sorts (don't-care decorated) and
    a codomain decorated with the operator itself."""

    op: str
    domain: tuple[DecoratedSort, ...]
    codomain: DecoratedSort

    def __post_init__(self) -> None:
        object.__setattr__(self, "domain", tuple(self.domain))
        if self.codomain.deco != Decoration(self.op):
            raise ValueError(f"codomain of {self.op} must be decorated with {self.op}")
        if any(not d.deco.is_any for d in self.domain):
            raise ValueError(f"domain sorts of {self.op} must carry the ? decoration")

    @classmethod
    def make(cls, op: str, domain_sorts: Iterable[Sort], codomain_sort: Sort) -> "SynRank":
        return cls(
            op,
            tuple(DecoratedSort(s) for s in domain_sorts),
            DecoratedSort(codomain_sort, Decoration(op)),
        )

    def __str__(self) -> str:
        doms = " ".join(str(d.sort) for d in self.domain)
        return f"{self.op} : {doms}{' ' if doms else ''}-> {self.codomain.sort}"


@dataclass(frozen=True)
class VariadicRank:
    """Rank of a variadic operator: one element sort and a codomain decorated
    with the operator itself."""

    op: str
    elem: DecoratedSort
    codomain: DecoratedSort

    def __post_init__(self) -> None:
        if self.codomain.deco != Decoration(self.op):
            raise ValueError(f"codomain of {self.op} must be decorated with {self.op}")
        if not self.elem.deco.is_any:
            raise ValueError(f"element sort of {self.op} must carry the ? decoration")

    @classmethod
    def make(cls, op: str, elem_sort: Sort, codomain_sort: Sort) -> "VariadicRank":
        return cls(op, DecoratedSort(elem_sort), DecoratedSort(codomain_sort, Decoration(op)))

    def __str__(self) -> str:
        return f"{self.op} : {self.elem.sort}* -> {self.codomain.sort}"


Rank = Union[SynRank, VariadicRank]


@dataclass(frozen=True)
class Violation:
    """One well-formedness defect, named after the offending declaration."""

    kind: str
    detail: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.detail}"


class Context:
    """The typing context: sorts, declared subsort edges, ranks, and
    variable/star-variable typings.

    Duplicate declarations are kept first-wins but recorded so that
    :func:`validate` can report them.
    """

    def __init__(
        self,
        sorts: Iterable[Sort] = (),
        subsorts: Iterable[tuple[Sort, Sort]] = (),
        ranks: Iterable[Rank] = (),
        var_types: Iterable[tuple[str, TypeTerm]] | Mapping[str, TypeTerm] = (),
        star_types: Iterable[tuple[str, TypeTerm]] | Mapping[str, TypeTerm] = (),
    ):
        self._sorts: tuple[Sort, ...] = tuple(dict.fromkeys(sorts))
        self._subsorts: tuple[tuple[Sort, Sort], ...] = tuple(dict.fromkeys(subsorts))
        self._construction_violations: list[Violation] = []

        self._syn_ranks: dict[str, SynRank] = {}
        self._var_ranks: dict[str, VariadicRank] = {}
        for rank in ranks:
            if rank.op in self._syn_ranks or rank.op in self._var_ranks:
                self._construction_violations.append(
                    Violation("overloading", f"operator {rank.op} declared more than once")
                )
                continue
            if isinstance(rank, SynRank):
                self._syn_ranks[rank.op] = rank
            else:
                self._var_ranks[rank.op] = rank

        self._var_types: dict[str, TypeTerm] = {}
        for name, tt in dict(var_types).items() if isinstance(var_types, Mapping) else var_types:
            if name in self._var_types:
                self._construction_violations.append(
                    Violation("duplicate-typing", f"variable {name} typed more than once")
                )
                continue
            self._var_types[name] = tt

        self._star_types: dict[str, TypeTerm] = {}
        for name, tt in dict(star_types).items() if isinstance(star_types, Mapping) else star_types:
            if name in self._star_types:
                self._construction_violations.append(
                    Violation("duplicate-typing", f"star variable {name}* typed more than once")
                )
                continue
            self._star_types[name] = tt

        # Declared direct supersorts, first-declared first; single inheritance
        # means the list should have length <= 1 (validate reports otherwise).
        self._parents: dict[Sort, list[Sort]] = {s: [] for s in self._sorts}
        for child, parent in self._subsorts:
            self._parents.setdefault(child, [])
            if parent not in self._parents[child]:
                self._parents[child].append(parent)

        self._chains: dict[Sort, tuple[Sort, ...]] = {}
        for s in self._parents:
            self._chains[s] = self._chain(s)

    # -- construction views -------------------------------------------------

    @property
    def sorts(self) -> tuple[Sort, ...]:
        return self._sorts

    @property
    def subsort_decls(self) -> tuple[tuple[Sort, Sort], ...]:
        return self._subsorts

    @property
    def syn_ranks(self) -> Mapping[str, SynRank]:
        return dict(self._syn_ranks)

    @property
    def var_ranks(self) -> Mapping[str, VariadicRank]:
        return dict(self._var_ranks)

    @property
    def var_types(self) -> Mapping[str, TypeTerm]:
        return dict(self._var_types)

    @property
    def star_types(self) -> Mapping[str, TypeTerm]:
        return dict(self._star_types)

    def _chain(self, s: Sort) -> tuple[Sort, ...]:
        # Ancestor chain, self first; guards against cycles and multiple
        # parents so closure queries stay total on ill-formed input.
        chain = [s]
        seen = {s}
        cur = s
        while True:
            parents = self._parents.get(cur, [])
            if not parents:
                break
            cur = parents[0]
            if cur in seen:
                break
            seen.add(cur)
            chain.append(cur)
        return tuple(chain)

    # -- queries ------------------------------------------------------------

    def sort_leq(self, s1: Sort, s2: Sort) -> bool:
        """Reflexive-transitive closure of the declared subsort edges."""
        return s2 in self._chains.get(s1, (s1,))

    def subtype_holds(self, a: DecoratedSort, b: DecoratedSort) -> bool:
        """The decorated order: sorts related by the closure and decorations
        equal, unless the target decoration is the don't-care one."""
        return self.sort_leq(a.sort, b.sort) and (a.deco == b.deco or b.deco.is_any)

    def supersort_chain(self, s: Sort) -> tuple[Sort, ...]:
        return self._chains.get(s, (s,))

    def common_supersort(self, a: DecoratedSort, b: DecoratedSort) -> DecoratedSort | None:
        """The least sort above both, don't-care decorated; ``None`` when the
        hierarchies are disjoint.  Least is unique under single inheritance."""
        above_b = set(self._chains.get(b.sort, (b.sort,)))
        for s in self._chains.get(a.sort, (a.sort,)):
            if s in above_b:
                return DecoratedSort(s)
        return None

    def sortof(self, e: Term) -> DecoratedSort | None:
        """The declared decorated sort of a term, or ``None`` when the term
        has no ground typing (undeclared, or typed by a type variable)."""
        tt = self.raw_typing(e)
        return tt.dsort if isinstance(tt, GroundType) else None

    def raw_typing(self, e: Term) -> TypeTerm | None:
        """The declared type term of a term's head: the full typing for
        variables (ground or type variable), the rank codomain for
        applications."""
        if isinstance(e, Var):
            return self._var_types.get(e.name)
        if isinstance(e, StarVar):
            return self._star_types.get(e.name)
        if isinstance(e, SynApp):
            rank = self._syn_ranks.get(e.op)
            return GroundType(rank.codomain) if rank else None
        if isinstance(e, ListApp):
            rank = self._var_ranks.get(e.op)
            return GroundType(rank.codomain) if rank else None
        return None


def validate(ctx: Context) -> list[Violation]:
    """Check the context's well-formedness clauses.

    Reports subsort cycles (antisymmetry), multiple inheritance, operator
    overloading, duplicate typings, and references to undeclared sorts or
    operators; an empty list means the context is well-formed.
    """
    violations = list(ctx._construction_violations)
    declared = set(ctx.sorts)

    for child, parent in ctx.subsort_decls:
        for s in (child, parent):
            if s not in declared:
                violations.append(Violation("unknown-sort", f"sort {s} is not declared"))

    for s, parents in ctx._parents.items():
        if len(parents) > 1:
            names = ", ".join(p.name for p in parents)
            violations.append(
                Violation("multiple-inheritance", f"sort {s} has several supersorts: {names}")
            )

    # Cycle detection over declared edges (union of all parents).
    color: dict[Sort, int] = {}

    def visit(s: Sort, stack: list[Sort]) -> None:
        color[s] = 1
        for p in ctx._parents.get(s, []):
            if color.get(p) == 1:
                cycle = stack[stack.index(p):] + [p] if p in stack else [s, p]
                names = " <: ".join(x.name for x in cycle)
                violations.append(Violation("subsort-cycle", f"subsort cycle through {names}"))
            elif color.get(p, 0) == 0:
                visit(p, stack + [p])
        color[s] = 2

    for s in ctx._parents:
        if color.get(s, 0) == 0:
            visit(s, [s])

    ranks: list[Rank] = list(ctx.syn_ranks.values()) + list(ctx.var_ranks.values())
    for rank in ranks:
        mentioned = list(rank.domain) if isinstance(rank, SynRank) else [rank.elem]
        mentioned.append(rank.codomain)
        for d in mentioned:
            if d.sort not in declared:
                violations.append(
                    Violation("unknown-sort", f"rank of {rank.op} mentions undeclared sort {d.sort}")
                )

    for name, tt in ctx.var_types.items():
        if isinstance(tt, GroundType) and tt.dsort.sort not in declared:
            violations.append(
                Violation("unknown-sort", f"variable {name} typed at undeclared sort {tt.dsort.sort}")
            )

    for name, tt in ctx.star_types.items():
        if not isinstance(tt, GroundType):
            continue
        ds = tt.dsort
        if ds.sort not in declared:
            violations.append(
                Violation("unknown-sort", f"star variable {name}* typed at undeclared sort {ds.sort}")
            )
        if ds.deco.is_any or ds.deco.symbol not in ctx.var_ranks:
            violations.append(
                Violation(
                    "bad-star-typing",
                    f"star variable {name}* must be typed at a variadic operator's list type, got {ds}",
                )
            )

    return violations
