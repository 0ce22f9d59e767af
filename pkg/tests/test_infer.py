import pytest

import support
from support import a, g

from ruletypes import (
    Conj,
    Context,
    Eq,
    ErrKind,
    FreshSupply,
    InferError,
    ListApp,
    Match,
    Rule,
    Sort,
    StarVar,
    Sub,
    SynApp,
    Var,
    infer_cond,
    infer_rule,
    infer_term,
    init_context,
)
from ruletypes.core import ConstraintSet, GroundType, TypeVar, free_type_vars
from ruletypes.oracle import gen_instance


def inference_context():
    sig = support.example_signature()
    rule = support.example_rule(annotated=False)
    fresh = FreshSupply()
    return init_context(sig, rule, fresh), rule, fresh


# ---------------------------------------------------------------------------
# init_context

def test_variables_collected_left_to_right():
    gamma, _, fresh = inference_context()
    assert gamma.star_types["x"] == a(1)
    assert gamma.var_types["y"] == a(2)
    assert gamma.star_types["z"] == a(3)
    assert fresh.counter == 4


def test_rule_without_variables_adds_nothing():
    sig = support.example_signature()
    rule = Rule(Match(SynApp("one"), SynApp("one"), g("N")), ())
    gamma = init_context(sig, rule, FreshSupply())
    assert gamma.var_types == {} and gamma.star_types == {}


def test_repeated_variable_gets_one_binding():
    sig = support.example_signature()
    cond = Conj((Match(Var("v"), Var("v"), g("Z")), Match(Var("v"), SynApp("one"), g("Z"))))
    gamma = init_context(sig, Rule(cond, ()), FreshSupply())
    assert gamma.var_types == {"v": a(1)}


def test_ground_typings_are_kept():
    sig = support.gamma_ex()
    gamma = init_context(sig, support.example_rule(annotated=False), FreshSupply())
    assert gamma.var_types["y"] == g("Z")
    assert gamma.star_types["x"] == g("Z", "l")


# ---------------------------------------------------------------------------
# infer_term

def test_empty_list():
    gamma, _, fresh = inference_context()
    res = infer_term(gamma, ListApp("l"), fresh)
    assert res.constraints == ConstraintSet([Eq(res.type, g("Z", "l"))])
    assert res.derivation.rule == "CT-Empty"


def test_constant():
    gamma, _, fresh = inference_context()
    res = infer_term(gamma, SynApp("one"), fresh)
    assert res.constraints == ConstraintSet([Eq(res.type, g("N", "one"))])


def test_singleton_list_of_a_constant():
    gamma, _, fresh = inference_context()
    res = infer_term(gamma, ListApp("l", (SynApp("one"),)), fresh)
    alpha, d = res.type, res.derivation
    assert d.rule == "CT-Elem"
    elem_var = d.premises[1].type
    assert res.constraints == ConstraintSet([
        Eq(alpha, g("Z", "l")),
        Eq(elem_var, g("N", "one")),
        Sub(elem_var, g("Z")),
    ])


def test_variable_lookup_schema_instance():
    ctx = Context(sorts=[Sort("Z")], var_types={"x": a(1)})
    fresh = FreshSupply(start=2)
    res = infer_term(ctx, Var("x"), fresh)
    assert res.type == a(2)
    assert res.constraints == ConstraintSet([Eq(a(2), a(1))])


def test_spine_variable_is_shared_down_the_whole_spine():
    gamma, rule, fresh = inference_context()
    pattern = rule.cond.pattern
    res = infer_term(gamma, pattern, fresh)
    spine = res.type
    by_subject = {str(node.subject): node for node in res.derivation.walk()}
    for subject in ("l(x*,y,z*)", "l(x*,y)", "l(x*)", "l()", "x*", "z*"):
        assert by_subject[subject].type == spine
    assert by_subject["y"].type != spine


def test_star_inside_syntactic_application_is_an_error():
    gamma, _, fresh = inference_context()
    with pytest.raises(InferError) as exc:
        infer_term(gamma, SynApp("one", (StarVar("x"),)), fresh)
    assert exc.value.kind is ErrKind.STAR_OUTSIDE_LIST


def test_undeclared_symbols_raise():
    gamma, _, fresh = inference_context()
    with pytest.raises(InferError):
        infer_term(gamma, Var("nope"), fresh)
    with pytest.raises(InferError):
        infer_term(gamma, SynApp("missing"), fresh)


# ---------------------------------------------------------------------------
# infer_cond / infer_rule

def test_match_links_both_sides_to_the_annotation():
    gamma, rule, fresh = inference_context()
    res = infer_cond(gamma, rule.cond, fresh)
    d = res.derivation
    annotation = d.subject.at
    assert isinstance(annotation, TypeVar)
    pattern_var, subject_var = d.premises[0].type, d.premises[1].type
    assert Sub(pattern_var, annotation) in res.constraints
    assert Eq(subject_var, annotation) in res.constraints


def test_conjunction_unions_member_sets():
    gamma, _, fresh = inference_context()
    m = Match(Var("y"), Var("y"), g("Z"))
    single = infer_cond(gamma, m, FreshSupply(start=fresh.counter))
    double = infer_cond(gamma, Conj((m, m)), fresh)
    # same schema twice: distinct fresh variables, union without duplicates
    assert len(double.constraints) == 2 * len(single.constraints)


def test_rule_emits_reflexive_typing_for_variable_actions():
    gamma, rule, fresh = inference_context()
    res = infer_rule(gamma, rule, fresh)
    y_typing = gamma.var_types["y"]
    assert Eq(y_typing, y_typing) in res.constraints


def test_rule_with_empty_action_adds_nothing():
    gamma, rule, fresh = inference_context()
    bare = Rule(rule.cond, ())
    res_bare = infer_rule(gamma, bare, FreshSupply(start=4))
    res_cond = infer_cond(gamma, rule.cond, FreshSupply(start=4))
    assert res_bare.constraints == res_cond.constraints


def test_rule_with_constant_action():
    gamma, rule, fresh = inference_context()
    res = infer_rule(gamma, Rule(rule.cond, (SynApp("one"),)), fresh)
    action_var = res.derivation.premises[1].type
    assert Eq(action_var, g("N", "one")) in res.constraints
    # ground action typings do not add a reflexive ground equality
    assert all(
        isinstance(c.lhs, TypeVar) or isinstance(c.rhs, TypeVar)
        for c in res.constraints
    )


def test_rule_with_undeclared_action():
    gamma, rule, fresh = inference_context()
    with pytest.raises(InferError) as exc:
        infer_rule(gamma, Rule(rule.cond, (Var("w"),)), fresh)
    assert exc.value.kind is ErrKind.UNDECLARED_VARIABLE


# ---------------------------------------------------------------------------
# Invariants

def test_every_constraint_keeps_a_variable_side():
    for seed in range(60):
        ctx, rule = gen_instance(seed)
        sig = Context(sorts=ctx.sorts, subsorts=ctx.subsort_decls,
                      ranks=list(ctx.syn_ranks.values()) + list(ctx.var_ranks.values()))
        fresh = FreshSupply()
        gamma = init_context(sig, rule, fresh)
        res = infer_rule(gamma, rule, fresh)
        for c in res.constraints:
            assert isinstance(c.lhs, TypeVar) or isinstance(c.rhs, TypeVar), str(c)


def test_fresh_conclusions_never_collide_across_subtrees():
    gamma, rule, fresh = inference_context()
    res = infer_rule(gamma, rule, fresh)
    match = res.derivation.premises[0]
    pattern_var = match.premises[0].type
    subject_var = match.premises[1].type
    annotation = match.subject.at
    action_var = res.derivation.premises[1].type
    distinct = {pattern_var, subject_var, annotation, action_var}
    assert len(distinct) == 4


def test_inference_is_deterministic():
    gamma, rule, _ = inference_context()
    r1 = infer_rule(gamma, rule, FreshSupply(start=4))
    r2 = infer_rule(gamma, rule, FreshSupply(start=4))
    assert r1 == r2
