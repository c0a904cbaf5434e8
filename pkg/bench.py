"""
Исследование ошибки Er(K; t) = ln|w_K(t) - w_ref(t)| разложения по малым
временам и запись отчёта в CSV.
"""

import csv
import io
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, TextIO

import numpy as np

from errors import FitError
from expr import parse_nonlin
from green import green_catalog, green_numeric, liouville_green
from models import (
    CauchyProblem, ErrorReport, ErrorRow, ExpansionSolution, Forcing, GreenFn, NonlinExpr, QuadratureSpec,
)
from ode_solver import solve_ivp
from shorttime import MAX_K, fit_alphas_derivative_matching, fit_alphas_least_squares, solve_expansion


CSV_HEADER = ["nonlin", "forcing", "strategy", "K", "t", "wK", "wref", "Er", "flag"]
EXACT_THRESHOLD = 1e-300
# эталон должен быть точнее измеряемой ошибки хотя бы в 100 раз
REFERENCE_MARGIN = 100.0
REFERENCE_START = -0.2


@dataclass(frozen=True)
class BenchSetup:
    """Готовая постановка эксперимента."""

    name: str
    nonlin: NonlinExpr
    forcing: Forcing
    s: float
    strategy: str
    green: GreenFn


def default_setup(name: str, epsilon: float = 1.0) -> BenchSetup:
    """
    Стандартные постановки с импульсной правой частью:
        sinh-gordon - N = sinh(w), s = 1, G в замкнутой форме;
        liouville   - N = exp(w), двухветвевая G с параметром ε.

    Raises:
        ValueError: Неизвестное имя постановки
    """
    if name == "sinh-gordon":
        return BenchSetup(name, parse_nonlin("sinh(w)"), Forcing("delta"), 1.0, "lsq",
                          green_catalog("sinh", 1.0))
    if name == "liouville":
        return BenchSetup(name, parse_nonlin("exp(w)"), Forcing("delta"), 1.0, "lsq",
                          liouville_green(epsilon))
    raise ValueError(f"Неизвестная постановка '{name}', доступны: sinh-gordon, liouville")


def reference_solution(nonlin: NonlinExpr, forcing: Forcing, green: GreenFn, horizon: float,
                       eta: float, rtol: float, atol: float):
    """
    Эталон: для импульсов - решение с s·δ_η из t = -0.2 на ветви G до импульса
    (для точной дельты ширина η), иначе - задача D_f из покоя в t = 0.

    Raises:
        StepSizeUnderflowError: Сбой эталонного интегрирования
    """
    if forcing.is_impulse:
        pulse = forcing if forcing.kind == "mollified" else Forcing("mollified", eta=eta)
        problem = CauchyProblem(
            nonlin=nonlin, forcing=pulse, horizon=horizon, s=green.s,
            w0=green.value(REFERENCE_START), v0=green.derivative(REFERENCE_START), t0=REFERENCE_START,
        )
    else:
        problem = CauchyProblem.driven(nonlin, forcing, horizon)
    return solve_ivp(problem, rtol, atol)


def run_benchmark(nonlin: NonlinExpr, forcing: Forcing, s: float, K_max: int, grid: Sequence[float],
                  strategy: str = "lsq", green: Optional[GreenFn] = None, eta: float = 1e-3,
                  ref_rtol: float = 1e-13, ref_atol: float = 1e-15,
                  quad: Optional[QuadratureSpec] = None) -> ErrorReport:
    """
    Er(K; t) для K = 1..K_max на сетке.

    Args:
        nonlin: Нелинейность N
        forcing: Правая часть (delta, zero или гладкая)
        s: Масштаб импульса
        K_max: Наибольший порядок (<= 8)
        grid: Сетка t >= 0
        strategy: match или lsq
        green: Функция Грина (по умолчанию - численная)
        eta: Ширина сглаживания эталонного импульса
        ref_rtol: Относительный допуск эталона
        ref_atol: Абсолютный допуск эталона

    Returns:
        ErrorReport; ячейки, где |w_K - w_ref| не превосходит 100·(rtol·|w_ref| + atol)
        эталона, помечены флагом ref-limited

    Raises:
        FitError: Стратегия не может определить коэффициенты
        StepSizeUnderflowError: Сбой эталонного интегрирования
    """
    if not 0 <= K_max <= MAX_K:
        raise ValueError(f"K_max должно быть из [0, {MAX_K}], получено {K_max!r}")
    if strategy not in ("match", "lsq"):
        raise ValueError(f"Неизвестная стратегия '{strategy}'")
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0 or np.any(grid < 0.0):
        raise ValueError("Сетка должна быть непустой и лежать в t >= 0")
    if strategy == "match" and forcing.kind not in ("smooth", "zero"):
        raise FitError("match", f"для правой части '{forcing.describe()}' используйте стратегию lsq")

    if forcing.kind == "mollified":
        eta = forcing.eta
    horizon = float(grid[-1]) if grid[-1] > 0.0 else 1.0
    if green is None:
        green = green_numeric(nonlin, s, horizon)
    reference = reference_solution(nonlin, forcing, green, horizon, eta, ref_rtol, ref_atol)
    wref = np.array([reference.value_at(float(t)) for t in grid])

    k_values = tuple(range(1, K_max + 1))
    rows: List[ErrorRow] = []
    alphas: Dict[int, tuple] = {}
    medians: Dict[int, float] = {}
    t_min = 2.0 * eta if forcing.is_impulse else 0.0

    for K in k_values:
        if forcing.kind == "zero":
            solution = ExpansionSolution(green, K, (0.0,) * (K + 1), forcing, quad or QuadratureSpec())
        elif strategy == "match":
            solution = fit_alphas_derivative_matching(green, nonlin, forcing, K, quad)
        else:
            solution = fit_alphas_least_squares(
                green, forcing, K, reference.value_at, t_fit=horizon,
                n_points=max(50, grid.size), t_min=t_min, quad=quad,
            )
        alphas[K] = solution.alphas
        table = solve_expansion(green, solution.alphas, forcing, grid, solution.quad)
        errors = []
        for t, wk, wr in zip(grid, table.values, wref):
            gap = abs(float(wk) - float(wr))
            if gap < EXACT_THRESHOLD:
                rows.append(ErrorRow(K, float(t), float(wk), float(wr), None, "exact"))
                continue
            er = math.log(gap)
            errors.append(er)
            floor = REFERENCE_MARGIN * (ref_rtol * abs(float(wr)) + ref_atol)
            rows.append(ErrorRow(K, float(t), float(wk), float(wr), er, "ref-limited" if gap <= floor else ""))
        medians[K] = float(np.median(errors)) if errors else -math.inf

    meta = (
        ("solver", "dormand-prince 5(4)"),
        ("rtol", ref_rtol),
        ("atol", ref_atol),
        ("eta", eta if forcing.is_impulse else None),
        ("t_start", REFERENCE_START if forcing.is_impulse else 0.0),
        ("green", green.name),
        ("ref_limited", sum(1 for row in rows if row.flag == "ref-limited")),
    )
    return ErrorReport(str(nonlin), forcing.describe(), strategy, k_values,
                       tuple(float(t) for t in grid), tuple(rows), alphas, meta, medians)


def run_setup(setup: BenchSetup, K_max: int, grid: Sequence[float], eta: float = 1e-3,
              ref_rtol: float = 1e-13, ref_atol: float = 1e-15) -> ErrorReport:
    """Запуск стандартной постановки."""
    return run_benchmark(setup.nonlin, setup.forcing, setup.s, K_max, grid, setup.strategy,
                         setup.green, eta, ref_rtol, ref_atol)


def reference_limited(report: ErrorReport) -> int:
    """Число ячеек, в которых ошибка неотличима от погрешности эталона."""
    return sum(1 for row in report.rows if row.flag == "ref-limited")


def is_monotone_improvement(report: ErrorReport) -> bool:
    """Медиана Er строго убывает с ростом K."""
    medians = [report.medians[K] for K in report.k_values]
    return all(b < a for a, b in zip(medians, medians[1:]))


def _g(value: float) -> str:
    return format(value, ".17g")


def write_report(report: ErrorReport, stream: TextIO) -> None:
    """Запись CSV отчёта в поток (17 значащих цифр, LF)."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in report.rows:
        writer.writerow([
            report.nonlin_name, report.forcing_desc, report.strategy, row.K,
            _g(row.t), _g(row.wK), _g(row.wref),
            "" if row.er is None else _g(row.er), row.flag,
        ])


def format_report(report: ErrorReport) -> str:
    buffer = io.StringIO()
    write_report(report, buffer)
    return buffer.getvalue()


def emit_report(report: ErrorReport, path: str) -> None:
    """
    Запись отчёта в файл (UTF-8, LF).

    Raises:
        OSError: Ошибка ввода-вывода
    """
    with open(path, "w", encoding="utf-8", newline="") as handle:
        write_report(report, handle)
