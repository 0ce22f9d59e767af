import pytest
from hypothesis import given, strategies as st

import support
from support import a, g

from ruletypes import (
    ConstraintSet,
    Eq,
    Sub,
    Substitution,
    WT,
    apply_subst,
    dsort,
    free_type_vars,
    subst_satisfies,
)
from ruletypes.core import GroundType, TypeVar


# ---------------------------------------------------------------------------
# apply_subst

def test_apply_binds_variable():
    s = Substitution({5: g("Z", "l")})
    assert apply_subst(s, a(5)) == g("Z", "l")


def test_apply_identity_substitution():
    assert apply_subst(Substitution(), a(1)) == a(1)


def test_apply_chain_is_path_compressed():
    s = Substitution({1: a(2), 2: g("N")})
    # iterating application by hand reaches the same fixed point
    image = a(1)
    for _ in range(3):
        image = apply_subst(Substitution({1: a(2)}), image)
        image = apply_subst(Substitution({2: g("N")}), image)
    assert apply_subst(s, a(1)) == g("N") == image


def test_ground_and_unbound_unchanged():
    s = Substitution({1: g("Z")})
    assert apply_subst(s, g("N", "one")) == g("N", "one")
    assert apply_subst(s, a(9)) == a(9)


# ---------------------------------------------------------------------------
# Substitution normalization

def test_identity_bindings_dropped():
    assert len(Substitution({1: a(1)})) == 0


def test_cyclic_substitution_rejected():
    with pytest.raises(ValueError):
        Substitution({1: a(2), 2: a(1)})


def test_items_sorted_by_variable():
    s = Substitution({7: g("Z"), 2: g("N")})
    assert [v for v, _ in s.items()] == [2, 7]


# ---------------------------------------------------------------------------
# subst_satisfies

def test_satisfies_subtype_from_resolution_example(gamma_ex):
    s = Substitution({2: g("Z")})
    assert subst_satisfies(s, Sub(a(2), g("Z")), gamma_ex)


def test_satisfies_reflexive_ground_equality(gamma_ex):
    assert subst_satisfies(Substitution(), Eq(g("Z", "l"), g("Z", "l")), gamma_ex)


def test_unsatisfied_when_decorations_clash(gamma_ex):
    s = Substitution({1: g("N", "one")})
    assert not subst_satisfies(s, Sub(a(1), g("Z", "l")), gamma_ex)
    # independent check via the closure-walking predicate
    assert not support.naive_subtype(gamma_ex, dsort("N", "one"), dsort("Z", "l"))


def test_subtype_with_distinct_residual_variables_is_undecided(gamma_ex):
    assert not subst_satisfies(Substitution(), Sub(a(1), a(2)), gamma_ex)
    assert subst_satisfies(Substitution({1: a(2)}), Sub(a(1), a(2)), gamma_ex)


# ---------------------------------------------------------------------------
# free_type_vars

def test_free_vars_single():
    assert free_type_vars([Eq(a(1), g("Z", "l"))]) == {1}


def test_free_vars_empty():
    assert free_type_vars([]) == set()


def test_free_vars_of_resolution_example_listing():
    listing = support.resolution_example_constraints()
    assert free_type_vars(listing) == set(range(1, 11))


# ---------------------------------------------------------------------------
# ConstraintSet semantics

def test_insertion_order_and_deduplication():
    c1, c2 = Eq(a(1), g("Z")), Sub(a(2), g("Z"))
    s = ConstraintSet([c1, c2, c1, c2])
    assert list(s) == [c1, c2]
    assert len(s) == 2


def test_set_equality_ignores_order():
    c1, c2 = Eq(a(1), g("Z")), Sub(a(2), g("Z"))
    assert ConstraintSet([c1, c2]) == ConstraintSet([c2, c1])


def test_wt_never_inside_constraints():
    with pytest.raises(ValueError):
        Eq(WT, a(1))
    with pytest.raises(ValueError):
        Sub(a(1), WT)


# ---------------------------------------------------------------------------
# Properties

type_terms = st.one_of(
    st.integers(1, 6).map(TypeVar),
    st.sampled_from([g("Z"), g("N"), g("Z", "l"), g("N", "one")]),
)
substitutions = st.dictionaries(st.integers(1, 6), type_terms, max_size=5).map(
    lambda raw: _safe_subst(raw)
)


def _safe_subst(raw):
    try:
        return Substitution(raw)
    except ValueError:
        return Substitution()


@given(substitutions, type_terms)
def test_application_is_idempotent(s, t):
    once = apply_subst(s, t)
    assert apply_subst(s, once) == once


@given(substitutions, type_terms)
def test_reflexive_equality_always_satisfied(s, t):
    assert subst_satisfies(s, Eq(t, t), support.gamma_ex())


@given(st.lists(st.tuples(type_terms, type_terms), max_size=6),
       st.lists(st.tuples(type_terms, type_terms), max_size=6))
def test_free_vars_distribute_over_union(left, right):
    c_left = [Eq(l, r) for l, r in left]
    c_right = [Sub(l, r) for l, r in right]
    union = ConstraintSet(c_left).union(c_right)
    assert free_type_vars(union) == free_type_vars(c_left) | free_type_vars(c_right)
