"""
Тесты функций Грина: каталог замкнутых форм, численное построение,
запись Лиувилля и проверка со сглаженным импульсом.
"""

import math

import numpy as np
import pytest

from errors import CatalogError, GreenBlowUpError, MembershipError
from expr import parse_nonlin
from green import (
    catalog_entries, catalog_nonlin, catalog_residual, empirical_rate, green_catalog, green_numeric,
    liouville_green, validate_distributional,
)
from models import DistributionalRow


def _sup_gap(first, second, window):
    ts = np.linspace(window[0], window[1], 201)[1:]
    return max(abs(first.value(float(t)) - second.value(float(t))) for t in ts)


# ==================== КАТАЛОГ ====================

@pytest.mark.parametrize("name", ["cubic", "sine", "sinh"])
def test_catalog_matches_numeric(name):
    entry = green_catalog(name)
    numeric = green_numeric(catalog_nonlin(name), entry.s, entry.window[1])
    assert _sup_gap(entry, numeric, entry.window) <= 1e-7


@pytest.mark.parametrize("s", [0.5, 2.0, -1.0])
def test_sinh_catalog_for_any_scale(s):
    entry = green_catalog("sinh", s)
    numeric = green_numeric(parse_nonlin("sinh(w)"), s, 2.0)
    assert _sup_gap(entry, numeric, (0.0, 2.0)) <= 1e-7


@pytest.mark.parametrize("name", ["cubic", "sine", "sinh"])
def test_catalog_residual(name):
    entry = green_catalog(name)
    ts = np.linspace(0.01, entry.window[1], 150)
    assert catalog_residual(entry, catalog_nonlin(name), ts) <= 1e-8


def test_catalog_is_causal():
    entry = green_catalog("cubic")
    assert entry.value(-0.5) == 0.0
    assert entry.value(0.0) == 0.0
    assert entry.derivative(-0.5) == 0.0
    assert entry.w0_prime(0.0) == pytest.approx(1.0)
    assert green_catalog("sine").w0_prime(0.0) == pytest.approx(math.sqrt(2.0))


def test_catalog_entries_listing():
    entries = catalog_entries()
    assert [e.name for e in entries] == ["cubic", "sine", "sinh", "liouville"]
    liouville = entries[-1]
    assert not liouville.zero_initial_data
    assert math.isfinite(dict(liouville.params)["phi"])
    assert math.isnan(dict(catalog_entries(0.05)[-1].params)["phi"])


def test_catalog_errors():
    with pytest.raises(CatalogError):
        green_catalog("quartic")
    with pytest.raises(CatalogError):
        green_catalog("cubic", s=2.0)
    with pytest.raises(CatalogError):
        green_catalog("sinh", s=0.0)
    with pytest.raises(CatalogError):
        catalog_nonlin("quartic")
    with pytest.raises(ValueError):
        catalog_residual(green_catalog("cubic"), parse_nonlin("w^3"), [0.001])


# ==================== ЛИУВИЛЛЬ ====================

@pytest.mark.parametrize("epsilon", [1.0, 0.25, 4.0])
def test_liouville_branches_solve_equation(epsilon):
    green = liouville_green(epsilon)
    ts = [t for t in np.linspace(-3.0, 3.0, 121) if abs(t) > 0.01]
    assert catalog_residual(green, parse_nonlin("exp(w)"), ts) <= 1e-9


@pytest.mark.parametrize("epsilon", [1.0, 0.25, 4.0])
def test_liouville_jump_and_continuity(epsilon):
    green = liouville_green(epsilon)
    assert green.jump() == pytest.approx(1.0, abs=1e-10)
    assert green.left(0.0) == pytest.approx(green.w0(0.0), abs=1e-15)
    assert green.value(0.0) != 0.0
    phi = dict(green.params)["phi"]
    assert -4.0 * math.sqrt(epsilon) * math.tanh(phi) == pytest.approx(1.0, abs=1e-12)


def test_liouville_requires_large_epsilon():
    with pytest.raises(CatalogError):
        liouville_green(1.0 / 16.0)
    with pytest.raises(CatalogError):
        liouville_green(0.01)
    assert green_catalog("liouville").name == "liouville"


# ==================== ЧИСЛЕННОЕ ПОСТРОЕНИЕ ====================

def test_numeric_green_rejects_non_members():
    with pytest.raises(MembershipError):
        green_numeric(parse_nonlin("exp(w)"), 1.0, 1.0)
    with pytest.raises(ValueError):
        green_numeric(parse_nonlin("w^3"), 0.0, 1.0)
    with pytest.raises(ValueError):
        green_numeric(parse_nonlin("w^3"), 1.0, 0.0)


def test_numeric_green_blow_up():
    with pytest.raises(GreenBlowUpError) as info:
        green_numeric(parse_nonlin("-w^3"), 1.0, 10.0)
    assert info.value.t_reached < 10.0
    assert info.value.partial is not None


def test_numeric_green_shape():
    green = green_numeric(parse_nonlin("sinh(w)^2*tanh(w) + w^4"), 1.0, 1.0)
    assert green.source == "numeric"
    assert green.value(-0.1) == 0.0
    assert green.value(1e-4) == pytest.approx(1e-4, rel=1e-6)
    assert green.jump() == pytest.approx(1.0)
    assert len(green.values([0.0, 0.5, 1.0])) == 3


# ==================== СГЛАЖЕННЫЙ ИМПУЛЬС ====================

@pytest.mark.parametrize("source", ["w^3", "sin(w)", "sinh(w)"])
def test_mollified_solutions_converge(source):
    nonlin = parse_nonlin(source)
    green = green_numeric(nonlin, 1.0, 1.0)
    rows = validate_distributional(green, nonlin, [1e-2, 3e-3, 1e-3])
    errors = [row.sup_error for row in rows]
    assert all(row.failure is None for row in rows)
    assert errors[0] > errors[1] > errors[2]
    assert empirical_rate(rows) > 0.5


def test_validate_distributional_arguments():
    nonlin = parse_nonlin("w^3")
    green = green_catalog("cubic")
    with pytest.raises(ValueError):
        validate_distributional(green, nonlin, [1e-3, 1e-2])
    with pytest.raises(ValueError):
        validate_distributional(green, nonlin, [])
    with pytest.raises(ValueError):
        validate_distributional(green, nonlin, [0.5], t_start=-0.2)


def test_empirical_rate():
    rows = [DistributionalRow(1e-2, 1e-4), DistributionalRow(1e-3, 1e-6)]
    assert empirical_rate(rows) == pytest.approx(2.0)
    assert empirical_rate([DistributionalRow(1e-2, None, "сбой")]) is None
