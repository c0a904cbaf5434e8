"""
Тесты разбора, печати, вычисления и проверки принадлежности нелинейностей.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from errors import (
    ArityError, DomainViolationError, ExpressionSyntaxError, HierarchyConstraintError, UnknownFunctionError,
)
from expr import (
    HIERARCHIES, PARSE_FUNCTIONS, antiderivative, check_membership, diff_nonlin, eval_nonlin,
    generate_hierarchy, identity_residual, parse_nonlin, print_nonlin, theta_power_identity,
    vanishing_order, witness_residual,
)
from models import Add, Const, Div, Func, Mul, Neg, NonlinExpr, Pow, RealPow, Sub, Var


W = Var("w")

PRIMITIVES = [
    "w^3", "sinh(w)", "tanh(w)", "sin(w)", "tan(w)",
    "arcsin(w)", "arctan(w)", "arcsinh(w)", "arctanh(w)", "ln(1+w)",
]
NON_MEMBERS = ["exp(w)", "cos(w)", "cosh(w)", "w+1", "arccos(w)", "arccot(w)"]
UNKNOWN = ["cot(w)", "coth(w)", "arccosh(w)", "arccoth(w)"]


# ==================== РАЗБОР ====================

def test_parse_product_and_sum():
    expr = parse_nonlin("sinh(w)^2 * tanh(w) + w^4")
    expected = Add(Mul(Pow(Func("sinh", W), 2), Func("tanh", W)), Pow(W, 4))
    assert expr == NonlinExpr(expected)


def test_parse_unclosed_paren_reports_offset():
    with pytest.raises(ExpressionSyntaxError) as info:
        parse_nonlin("ln(1+w")
    assert info.value.offset == 7


def test_power_chain_is_rejected():
    assert parse_nonlin("w^(-2)") == NonlinExpr(Pow(W, -2))
    with pytest.raises(ExpressionSyntaxError) as info:
        parse_nonlin("w^2^3")
    assert info.value.offset == 4


def test_parse_unknown_function_and_arity():
    with pytest.raises(UnknownFunctionError) as info:
        parse_nonlin("foo(w)")
    assert info.value.name == "foo"
    assert info.value.offset == 1

    with pytest.raises(ArityError) as info:
        parse_nonlin("sin(w, w)")
    assert info.value.count == 2

    with pytest.raises(ArityError):
        parse_nonlin("sin()")


def test_parse_errors_are_value_errors():
    for source in ["", "w +", "2 ** w", "w^w", "(w", "w)", "w $ 2"]:
        with pytest.raises(ValueError):
            parse_nonlin(source)


def test_ln_shapes():
    assert parse_nonlin("ln(1+w)").root == Func("ln1p", W)
    assert parse_nonlin("ln(w + 1)").root == Func("ln1p", W)
    assert parse_nonlin("ln(w)").root == Func("ln", W)
    assert print_nonlin(parse_nonlin("ln(1 + w^2)")) == "ln(1 + w^2)"


def test_negative_literal_folds_into_constant():
    assert parse_nonlin("-2*w").root == Mul(Const(-2.0), W)
    assert parse_nonlin("-w").root == Neg(W)
    assert parse_nonlin("w^-1").root == Pow(W, -1)
    assert parse_nonlin("w^0.5").root == RealPow(W, 0.5)


def test_parse_over_time_variable():
    expr = parse_nonlin("cos(t) + 1", variable="t")
    assert expr.variable == "t"
    assert eval_nonlin(expr, 0.0) == pytest.approx(2.0)
    with pytest.raises(UnknownFunctionError):
        parse_nonlin("cos(w)", variable="t")


# ==================== ПЕЧАТЬ ====================

def test_print_canonical_forms():
    assert print_nonlin(parse_nonlin("w^3+w^2")) == "w^3 + w^2"
    assert print_nonlin(parse_nonlin("(w^3 + w^2)^2")) == "(w^3 + w^2)^2"
    assert print_nonlin(parse_nonlin("w - (w - 1)")) == "w - (w - 1)"
    assert print_nonlin(parse_nonlin("(-2)^2")) == "(-2)^2"
    assert print_nonlin(parse_nonlin("w^2.0")) == "w^2.0"
    assert str(parse_nonlin("sinh(w)^2/w")) == "sinh(w)^2/w"


def _negate(node):
    return Const(-node.value) if isinstance(node, Const) else Neg(node)


finite = st.floats(allow_nan=False, allow_infinity=False)
leaves = st.one_of(st.just(W), finite.map(Const))
names = st.sampled_from(sorted((PARSE_FUNCTIONS - {"ln"}) | {"ln1p"}))


def _extend(children):
    return st.one_of(
        st.builds(Add, children, children),
        st.builds(Sub, children, children),
        st.builds(Mul, children, children),
        st.builds(Div, children, children),
        children.map(_negate),
        st.builds(Pow, children, st.integers(-4, 6)),
        st.builds(RealPow, children, finite),
        st.builds(Func, names, children),
    )


trees = st.recursive(leaves, _extend, max_leaves=12)


@settings(max_examples=300)
@given(trees)
def test_parse_print_round_trip(root):
    expr = NonlinExpr(root)
    assert parse_nonlin(print_nonlin(expr)) == expr


@given(trees)
def test_print_parse_is_stable_on_canonical_source(root):
    text = print_nonlin(NonlinExpr(root))
    assert print_nonlin(parse_nonlin(text)) == text


# ==================== ВЫЧИСЛЕНИЕ И ПРОИЗВОДНЫЕ ====================

def test_eval_examples():
    assert eval_nonlin(parse_nonlin("w^3"), 2.0) == 8.0
    assert eval_nonlin(parse_nonlin("sinh(w)"), 0.0) == 0.0
    assert eval_nonlin(parse_nonlin("ln(1+w)"), math.e - 1.0) == pytest.approx(1.0, rel=1e-15)
    assert eval_nonlin(diff_nonlin(parse_nonlin("arctan(w)")), 1.0) == pytest.approx(0.5)


def test_eval_removable_quotient():
    assert eval_nonlin(parse_nonlin("sinh(w)^2/w"), 0.0) == 0.0
    assert eval_nonlin(parse_nonlin("sin(w)/w"), 0.0) == pytest.approx(1.0)
    with pytest.raises(DomainViolationError):
        eval_nonlin(parse_nonlin("1/w"), 0.0)


def test_eval_domain_violations_name_the_node():
    with pytest.raises(DomainViolationError) as info:
        eval_nonlin(parse_nonlin("ln(w)"), 0.0)
    assert info.value.node == Func("ln", W)
    with pytest.raises(DomainViolationError):
        eval_nonlin(parse_nonlin("arcsin(w)"), 2.0)
    with pytest.raises(DomainViolationError):
        eval_nonlin(parse_nonlin("w^0.5"), -1.0)
    with pytest.raises(DomainViolationError):
        eval_nonlin(parse_nonlin("exp(w)"), 1000.0)


def test_diff_examples():
    assert diff_nonlin(parse_nonlin("w^3")).root == Mul(Const(3.0), Pow(W, 2))
    assert diff_nonlin(parse_nonlin("sinh(w)")).root == Func("cosh", W)


@pytest.mark.parametrize("source", [
    "w^3 + w^2", "sinh(w)^2*tanh(w) + w^4", "sin(w)/(2 + cos(w))", "arcsin(w) + arctanh(w)",
    "ln(1 + w^2)", "w^2.5 + arcsinh(w)", "tan(w)*exp(w)", "arctan(w)/cosh(w)",
])
def test_diff_matches_central_differences(source):
    expr = parse_nonlin(source)
    derivative = diff_nonlin(expr)
    rng = np.random.default_rng(7)
    h = 1e-5
    for w in rng.uniform(0.05, 0.9, 100):
        numeric = (eval_nonlin(expr, w + h) - eval_nonlin(expr, w - h)) / (2 * h)
        exact = eval_nonlin(derivative, w)
        assert abs(exact - numeric) <= 1e-6 * max(1.0, abs(exact))


def test_vanishing_order():
    assert vanishing_order(parse_nonlin("w")) == 1
    assert vanishing_order(parse_nonlin("sinh(w)^2")) == 2
    assert vanishing_order(parse_nonlin("cos(w)")) == 0
    assert vanishing_order(parse_nonlin("0")) is None


def test_antiderivative():
    primitive = antiderivative(parse_nonlin("w^3"))
    assert eval_nonlin(primitive, 2.0) == pytest.approx(4.0)
    primitive = antiderivative(parse_nonlin("sin(w) + 2*w"))
    assert eval_nonlin(primitive, 1.0) - eval_nonlin(primitive, 0.0) == pytest.approx(1 - math.cos(1.0) + 1.0)
    assert antiderivative(parse_nonlin("w*cos(w)")) is None


# ==================== ПРИНАДЛЕЖНОСТЬ ====================

@pytest.mark.parametrize("source", PRIMITIVES)
def test_primitives_are_structural_members(source):
    expr = parse_nonlin(source)
    verdict = check_membership(expr)
    assert verdict.status == "member-structural"
    assert verdict.rule_trace
    assert eval_nonlin(expr, 0.0) == 0.0


@pytest.mark.parametrize("source", PRIMITIVES)
def test_identity_holds_on_member_paths(source):
    expr = parse_nonlin(source)
    rng = np.random.default_rng(20180521)
    grid = np.linspace(-1.0, 1.0, 200)
    for _ in range(8):
        coeffs = rng.uniform(-2.0, 2.0, 3)
        try:
            worst, _, n_max = identity_residual(expr, coeffs, grid)
        except DomainViolationError:
            continue
        assert worst <= 1e-9 * (1.0 + n_max)


@pytest.mark.parametrize("source", NON_MEMBERS)
def test_non_members_have_witnesses(source):
    expr = parse_nonlin(source)
    verdict = check_membership(expr)
    assert verdict.status == "non-member"
    assert verdict.witness is not None
    assert verdict.witness.t < 0
    assert verdict.witness.residual > 1e-9
    assert witness_residual(expr, verdict.witness) == pytest.approx(verdict.witness.residual)


@pytest.mark.parametrize("source", UNKNOWN)
def test_singular_at_origin_is_unknown(source):
    assert check_membership(parse_nonlin(source)).status == "unknown"


def test_closure_rules():
    verdict = check_membership(parse_nonlin("tanh(w)+w^2"))
    assert verdict.status == "member-structural"
    assert any("линейная комбинация" in step for step in verdict.rule_trace)
    assert check_membership(parse_nonlin("sinh(w)^2/w")).status == "member-structural"
    assert check_membership(parse_nonlin("sin(arctan(w))^3")).status == "member-structural"
    assert check_membership(parse_nonlin("w*cos(w)")).status == "member-numeric"


@pytest.mark.parametrize("source", ["sinh(w)/tanh(w)", "sinh(w)/w", "sinh(w)^2/w^2"])
def test_quotient_with_equal_zero_orders_is_not_member(source):
    """При равных порядках нуля частное в нуле не обращается в ноль."""
    expr = parse_nonlin(source)
    assert eval_nonlin(expr, 0.0) == pytest.approx(1.0)
    verdict = check_membership(expr)
    assert verdict.status == "non-member"
    assert verdict.witness.t < 0.0
    assert verdict.witness.residual == pytest.approx(1.0)


@pytest.mark.parametrize("family, params", [
    ("sinh_over_tanh", (1, 1)), ("sinh_over_power", (2, 2)), ("mixed", (2, 2, 1, 1, 1, 1, 1, 1)),
])
def test_quotient_families_require_strict_order(family, params):
    with pytest.raises(HierarchyConstraintError, match="n > m"):
        generate_hierarchy(family, params)


@pytest.mark.parametrize("family, params", [
    ("sinh_over_tanh", (2, 1)), ("sinh_over_power", (3, 1)), ("sinh_times_tanh", (1, 1)),
])
def test_structural_members_vanish_at_origin(family, params):
    expr = generate_hierarchy(family, params)
    assert check_membership(expr).status == "member-structural"
    assert eval_nonlin(expr, 0.0) == 0.0


def test_real_power_is_numeric_with_caveat():
    assert check_membership(parse_nonlin("w^2.5")).status == "member-numeric"
    verdict = check_membership(parse_nonlin("w^0.5"))
    assert verdict.status == "member-numeric"
    assert verdict.notes


def test_membership_is_deterministic():
    expr = parse_nonlin("exp(w)")
    assert check_membership(expr, seed=3) == check_membership(expr, seed=3)


def test_membership_rejects_bad_arguments():
    with pytest.raises(ValueError):
        check_membership(parse_nonlin("w"), tol=0.0)
    with pytest.raises(ValueError):
        check_membership(parse_nonlin("w"), samples=0)


# ==================== θ-ТОЖДЕСТВА И ИЕРАРХИИ ====================

def test_theta_power_identity():
    grid = [t for t in np.linspace(-1.0, 1.0, 50)]
    for n in range(1, 33):
        assert theta_power_identity(n, grid)
    wide = [sign * 10.0 ** p for p in range(-6, 7) for sign in (-1.0, 1.0)]
    assert theta_power_identity(7, wide)
    assert theta_power_identity(1, [-1.0, 1.0])
    with pytest.raises(ValueError):
        theta_power_identity(3, [-1.0, 0.0, 1.0])
    with pytest.raises(ValueError):
        theta_power_identity(0, [1.0])


@given(st.integers(1, 64), st.lists(st.floats(-10, 10).filter(lambda t: t != 0), min_size=1, max_size=20))
def test_theta_power_identity_property(n, grid):
    assert theta_power_identity(n, grid)


def test_hierarchy_examples():
    assert print_nonlin(generate_hierarchy("power_sum_power", (3, 2, 2))) == "(w^3 + w^2)^2"
    assert print_nonlin(generate_hierarchy("sinh_over_power", (2, 1))) == "sinh(w)^2/w"
    assert print_nonlin(generate_hierarchy("power", (3,), (-1,))) == "-w^3"
    assert print_nonlin(generate_hierarchy("power_sum", (3, 1), (1, -1))) == "w^3 - w"
    with pytest.raises(HierarchyConstraintError):
        generate_hierarchy("sinh_over_tanh", (1, 2))
    with pytest.raises(HierarchyConstraintError):
        generate_hierarchy("power", (0,))
    with pytest.raises(HierarchyConstraintError):
        generate_hierarchy("unknown", (1,))


@pytest.mark.parametrize("family", sorted(HIERARCHIES))
def test_every_family_generates_members(family):
    arity = HIERARCHIES[family][0]
    params = (3, 2) + (1,) * (arity - 2) if arity >= 2 else (2,)
    expr = generate_hierarchy(family, params)
    assert check_membership(expr).status == "member-structural"
    assert parse_nonlin(print_nonlin(expr)) == expr
