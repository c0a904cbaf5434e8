"""
Тесты разложения по малым временам: ряды Тейлора, стратегии подгонки α
и порядок точности усечённого ряда.
"""

import math

import numpy as np
import pytest

from errors import FitError
from expr import parse_nonlin
from forcing import derivatives_at_zero, parse_forcing
from green import green_catalog, green_numeric
from models import CauchyProblem, Forcing, QuadratureSpec
from ode_solver import solve_ivp
from shorttime import (
    convolve_term, evaluate_expansion, fit_alphas_derivative_matching, fit_alphas_least_squares,
    matching_system, solve_expansion, solve_impulse, taylor_data, taylor_from_ode, taylor_value,
)


# нелинейность -> (запись каталога, s)
CATALOG_CASES = {"w^3": ("cubic", None), "sin(w)": ("sine", None), "sinh(w)": ("sinh", 1.0)}
# окно оценки порядка [1e-3, 1e-1]
ORDER_TIMES = np.geomspace(1e-3, 1e-1, 9)
# ошибки ниже этой доли |w| неотличимы от округления
ROUNDOFF = 100 * np.finfo(float).eps


def _taylor_reference(nonlin, forcing, order=16):
    derivs = taylor_from_ode(nonlin, derivatives_at_zero(forcing, order), 0.0, 0.0, order)
    return lambda t: taylor_value(derivs, t)


# ==================== РЯДЫ ТЕЙЛОРА ====================

def test_taylor_linear_forced():
    derivs = taylor_from_ode(parse_nonlin("w"), [1.0, 0.0, 0.0, 0.0], 0.0, 0.0, 4)
    assert derivs == pytest.approx((0.0, 0.0, 1.0, 0.0, -1.0))


def test_taylor_homogeneous():
    derivs = taylor_from_ode(parse_nonlin("sin(w)"), [0.0] * 4, 0.0, 2.0, 4)
    assert derivs == pytest.approx((0.0, 2.0, 0.0, -2.0, 0.0))
    derivs = taylor_from_ode(parse_nonlin("w^3"), [0.0] * 6, 0.0, 2.0, 5)
    assert derivs == pytest.approx((0.0, 2.0, 0.0, 0.0, 0.0, -48.0))


def test_taylor_value_approximates_solution():
    derivs = taylor_from_ode(parse_nonlin("w"), derivatives_at_zero(parse_forcing("1"), 14), 0.0, 0.0, 14)
    assert taylor_value(derivs, 0.5) == pytest.approx(1.0 - math.cos(0.5), abs=1e-14)


def test_taylor_arguments():
    with pytest.raises(ValueError):
        taylor_from_ode(parse_nonlin("w"), [], 0.0, 0.0, 0)
    with pytest.raises(ValueError):
        taylor_from_ode(parse_nonlin("w"), [1.0], 0.0, 0.0, 4)


def test_taylor_data_and_matching_system_shape():
    nonlin = parse_nonlin("sinh(w)")
    forcing = parse_forcing("cos(t)")
    data = taylor_data(nonlin, forcing, 1.0, 5)
    assert data.g_derivs[1] == 1.0
    assert data.w_derivs[2] == pytest.approx(1.0)
    C, b = matching_system(data, derivatives_at_zero(forcing, 5), 3)
    assert C.shape == (4, 4) and b.shape == (4,)
    assert np.all(np.triu(C, 1) == 0.0)
    assert np.all(np.diag(C) != 0.0)


# ==================== СВЁРТКИ ====================

def test_delta_sifting():
    green = green_catalog("cubic")
    for k in range(4):
        assert convolve_term(green, k, Forcing("delta"), 0.7) == 0.7 ** k * green.value(0.7)
    assert convolve_term(green, 2, Forcing("zero"), 0.7) == 0.0


def test_mollified_term_approaches_sifting():
    green = green_catalog("cubic")
    value = convolve_term(green, 1, Forcing("mollified", eta=1e-3), 0.5)
    assert value == pytest.approx(0.5 * green.value(0.5), abs=1e-6)


def test_convolution_is_linear_in_forcing():
    green = green_catalog("sinh", 1.0)
    quad = QuadratureSpec(tol=1e-13)
    whole = convolve_term(green, 2, parse_forcing("1 + cos(t)"), 0.3, quad)
    parts = convolve_term(green, 2, parse_forcing("1"), 0.3, quad) + convolve_term(green, 2, parse_forcing("cos(t)"), 0.3, quad)
    assert whole == pytest.approx(parts, rel=1e-12)


def test_expansion_is_linear_in_alphas():
    green = green_catalog("sine")
    forcing = parse_forcing("cos(t)")
    grid = np.linspace(0.0, 0.5, 6)
    single = solve_expansion(green, (1.0, 0.5), forcing, grid)
    double = solve_expansion(green, (2.0, 1.0), forcing, grid)
    assert np.allclose(double.values, 2.0 * single.values, rtol=1e-12, atol=0.0)
    assert single.values[0] == 0.0
    assert single.terms.shape == (6, 2)


# ==================== ПОДГОНКА КОЭФФИЦИЕНТОВ ====================

def test_leading_alpha_is_reciprocal_scale():
    green = green_numeric(parse_nonlin("w^3"), 2.0, 0.5)
    solution = fit_alphas_derivative_matching(green, parse_nonlin("w^3"), parse_forcing("1"), 2)
    assert solution.alphas[0] == pytest.approx(0.5, rel=1e-12)
    assert dict(solution.fit_meta)["strategy"] == "match"


def test_linear_problem_needs_only_leading_term():
    green = green_numeric(parse_nonlin("w"), 1.0, 0.5)
    solution = fit_alphas_derivative_matching(green, parse_nonlin("w"), parse_forcing("1 + t"), 3)
    assert solution.alphas == pytest.approx((1.0, 0.0, 0.0, 0.0), abs=1e-12)


@pytest.mark.parametrize("source", sorted(CATALOG_CASES))
@pytest.mark.parametrize("forcing_text", ["1", "cos(t)"])
def test_taylor_reference_agrees_with_integrator(source, forcing_text):
    nonlin = parse_nonlin(source)
    forcing = parse_forcing(forcing_text)
    reference = _taylor_reference(nonlin, forcing)
    traj = solve_ivp(CauchyProblem.driven(nonlin, forcing, 0.1), 1e-12, 1e-22)
    for t in ORDER_TIMES:
        assert traj.value_at(float(t)) == pytest.approx(reference(t), rel=1e-9)


@pytest.mark.parametrize("source", sorted(CATALOG_CASES))
@pytest.mark.parametrize("forcing_text", ["1", "cos(t)"])
def test_error_order_of_derivative_matching(source, forcing_text):
    nonlin = parse_nonlin(source)
    forcing = parse_forcing(forcing_text)
    name, s = CATALOG_CASES[source]
    green = green_catalog(name, s)
    reference = _taylor_reference(nonlin, forcing)
    quad = QuadratureSpec(tol=1e-13)

    errors_at_end = []
    for K in range(4):
        solution = fit_alphas_derivative_matching(green, nonlin, forcing, K, quad)
        points = [(t, abs(evaluate_expansion(solution, t) - reference(t))) for t in ORDER_TIMES]
        resolved = [(t, e) for t, e in points if e > ROUNDOFF * abs(reference(t))]
        assert len(resolved) >= 3
        ts, errors = zip(*resolved)
        slope = np.polyfit(np.log(ts), np.log(errors), 1)[0]
        assert slope >= K + 1.5
        errors_at_end.append(points[-1][1])
    # при чётных f и нечётной N решение чётно и нечётные α_k равны нулю
    assert all(b <= a * (1 + 1e-6) for a, b in zip(errors_at_end, errors_at_end[1:]))
    assert all(c < a for a, c in zip(errors_at_end, errors_at_end[2:]))


def test_least_squares_recovers_linear_solution():
    green = green_numeric(parse_nonlin("w"), 1.0, 0.2)
    forcing = parse_forcing("1")
    solution = fit_alphas_least_squares(green, forcing, 2, lambda t: 1.0 - math.cos(t), t_fit=0.1)
    assert solution.alphas[0] == pytest.approx(1.0, abs=1e-6)
    meta = dict(solution.fit_meta)
    assert meta["strategy"] == "lsq"
    assert meta["rank"] == 3
    for t in (0.02, 0.05, 0.1):
        assert abs(solution.evaluate(t) - (1.0 - math.cos(t))) <= 1e-10


def test_fit_errors():
    green = green_catalog("cubic")
    nonlin = parse_nonlin("w^3")
    with pytest.raises(FitError):
        fit_alphas_derivative_matching(green, nonlin, parse_forcing("sin(t)"), 2)
    with pytest.raises(FitError):
        fit_alphas_derivative_matching(green, nonlin, Forcing("delta"), 2)
    with pytest.raises(FitError):
        fit_alphas_least_squares(green, parse_forcing("1"), 3, lambda t: t, n_points=2)
    with pytest.raises(FitError):
        fit_alphas_least_squares(green, parse_forcing("1"), 1, lambda t: t, t_fit=0.0)
    with pytest.raises(ValueError):
        fit_alphas_derivative_matching(green, nonlin, parse_forcing("1"), 9)


# ==================== ИМПУЛЬС ====================

def test_impulse_solution_is_green_function():
    grid = np.linspace(0.0, 1.0, 11)
    table = solve_impulse(parse_nonlin("w^3"), 1.0, grid)
    catalog = green_catalog("cubic")
    assert table.alphas == (1.0,)
    assert np.allclose(table.values, catalog.values(grid), atol=1e-7, rtol=0.0)


def test_impulse_before_zero():
    table = solve_impulse(parse_nonlin("w^3"), 1.0, [-0.5, 0.0])
    assert np.all(table.values == 0.0)
