"""
Правые части уравнения: ноль, дельта-импульс, сглаженная дельта δ_η и
гладкие выражения от t.
"""

import math
from functools import lru_cache
from typing import List, Tuple

import numpy as np

from errors import DomainViolationError, ExpressionError
from expr import derivatives_at, eval_nonlin, parse_nonlin
from models import Forcing


@lru_cache(maxsize=None)
def mollifier_norm() -> float:
    """
    Нормировка Z = ∫_{-1}^{1} exp(-1/(1-x²)) dx (≈ 0.4439938161680794).

    Составная квадратура Гаусса-Лежандра с удвоением числа панелей до
    совпадения двух последовательных значений с точностью 1e-15.
    """
    nodes, weights = np.polynomial.legendre.leggauss(20)

    def integrate(panels: int) -> float:
        edges = np.linspace(-1.0, 1.0, panels + 1)
        total = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            x = 0.5 * (b - a) * nodes + 0.5 * (a + b)
            inside = np.abs(x) < 1.0
            values = np.zeros_like(x)
            values[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
            total += 0.5 * (b - a) * float(weights @ values)
        return total

    panels = 8
    previous = integrate(panels)
    while panels < 4096:
        panels *= 2
        current = integrate(panels)
        if abs(current - previous) <= 1e-15:
            return current
        previous = current
    return previous


def mollifier(t: float, eta: float) -> float:
    """Сглаженная дельта δ_η(t) = c/η·exp(-1/(1-(t/η)²)) при |t| < η, иначе 0."""
    x = t / eta
    if abs(x) >= 1.0:
        return 0.0
    return math.exp(-1.0 / (1.0 - x * x)) / (mollifier_norm() * eta)


def parse_forcing(text: str, eta: float = 1e-3) -> Forcing:
    """
    Разбор описания правой части.

    Args:
        text: "zero", "delta", "delta_eta" (сглаженная дельта) или выражение от t
        eta: Ширина сглаживания для "delta_eta"

    Raises:
        ExpressionError: Некорректное выражение от t
    """
    source = text.strip()
    if source in ("zero", "0"):
        return Forcing("zero")
    if source == "delta":
        return Forcing("delta")
    if source == "delta_eta":
        return Forcing("mollified", eta=eta)
    return Forcing("smooth", expr=parse_nonlin(source, variable="t"))


def forcing_value(forcing: Forcing, t: float, s: float = 1.0) -> float:
    """
    Значение правой части F(t); для сглаженной дельты F = s·δ_η.

    Raises:
        ValueError: Точная дельта не имеет поточечных значений
        DomainViolationError: Выражение не определено в t
    """
    if forcing.kind == "zero":
        return 0.0
    if forcing.kind == "mollified":
        return s * mollifier(t, forcing.eta)
    if forcing.kind == "smooth":
        return eval_nonlin(forcing.expr, t)
    raise ValueError("Точная дельта не имеет поточечных значений: используйте свойство фильтрации")


def breakpoints(forcing: Forcing) -> Tuple[float, ...]:
    """Моменты, на которых интегратор обязан закончить шаг (границы носителя δ_η)."""
    if forcing.kind == "mollified":
        return (-forcing.eta, forcing.eta)
    return ()


def derivatives_at_zero(forcing: Forcing, order: int) -> List[float]:
    """
    Производные f(0), f'(0), ..., f^(order)(0) гладкой правой части.

    Raises:
        ValueError: Правая часть не гладкая
    """
    if forcing.kind == "zero":
        return [0.0] * (order + 1)
    if forcing.kind != "smooth":
        raise ValueError(f"Производные в нуле определены только для гладкой правой части, получено '{forcing.kind}'")
    try:
        return derivatives_at(forcing.expr, 0.0, order)
    except DomainViolationError as e:
        raise ExpressionError(f"Правая часть не аналитична в t = 0: {e}")
