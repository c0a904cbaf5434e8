"""
Backend API для командной строки: проверка нелинейностей, построение
функций Грина, решение разложением по малым временам и бенчмарки.
Каждая подкоманда CLI соответствует одному методу класса Backend.
"""

import math
from typing import List, Optional, Tuple

import numpy as np

from bench import default_setup, run_benchmark, run_setup, reference_solution
from config import Settings, grid_points
from errors import CatalogError, FitError
from expr import check_membership, parse_nonlin
from forcing import parse_forcing
from green import CATALOG_NONLIN, catalog_entries, green_catalog, green_numeric, liouville_green
from models import (
    CatalogEntry, CauchyProblem, ErrorReport, ExpansionSolution, ExpansionTable, Forcing, GreenFn,
    MembershipVerdict, NonlinExpr, QuadratureSpec, RunConfig, Trajectory,
)
from ode_solver import solve_ivp
from shorttime import fit_alphas_derivative_matching, fit_alphas_least_squares, solve_expansion


class Backend:
    """Backend класс для подкоманд check, green, solve, bench и catalog."""

    def __init__(self, settings: Optional[Settings] = None):
        """
        Инициализация backend с настройками из окружения.

        Args:
            settings: Настройки (по умолчанию Settings.from_env())
        """
        self.settings = settings or Settings.from_env()

    @property
    def quad(self) -> QuadratureSpec:
        return QuadratureSpec(tol=self.settings.quad_tol)

    # ==================== CHECK ====================

    def check(self, source: str, tol: Optional[float] = None, samples: Optional[int] = None,
              seed: Optional[int] = None) -> Tuple[NonlinExpr, MembershipVerdict]:
        """
        Проверка принадлежности N классу мультипликативности.

        Args:
            source: Текст выражения N(w)
            tol: Допуск численной проверки
            samples: Число тестовых путей
            seed: Зерно генератора путей

        Returns:
            Кортеж (разобранное выражение, вердикт)

        Raises:
            ExpressionError: Ошибка разбора
        """
        nonlin = parse_nonlin(source)
        verdict = check_membership(
            nonlin,
            tol=tol if tol is not None else self.settings.membership_tol,
            samples=samples if samples is not None else self.settings.samples,
            seed=seed if seed is not None else self.settings.seed,
        )
        return nonlin, verdict

    # ==================== GREEN ====================

    def horizon(self, config: RunConfig) -> float:
        _, _, t1 = config.grid
        return max(t1, config.t_max or 0.0)

    def build_green(self, config: RunConfig) -> GreenFn:
        """
        Функция Грина для конфигурации: двухветвевая запись при --liouville,
        иначе численная через однородную задачу.

        Raises:
            MembershipError: N не принадлежит классу
            GreenBlowUpError: Решение разрушилось до горизонта
        """
        if config.liouville:
            return liouville_green(config.epsilon)
        nonlin = parse_nonlin(config.nonlin)
        horizon = self.horizon(config)
        if horizon <= 0.0:
            horizon = 1.0
        return green_numeric(nonlin, config.s, horizon, config.rtol, config.atol)

    def green_table(self, config: RunConfig) -> Tuple[np.ndarray, np.ndarray, GreenFn]:
        """Таблица (t, G(t)) на сетке конфигурации."""
        grid = grid_points(config.grid)
        green = self.build_green(config)
        return grid, green.values(grid), green

    def partial_green_table(self, trajectory: Optional[Trajectory],
                            config: RunConfig) -> Tuple[np.ndarray, np.ndarray]:
        """Строки таблицы до момента разрушения решения."""
        grid = grid_points(config.grid)
        if trajectory is None:
            keep = grid[grid <= 0.0]
            return keep, np.zeros(keep.size)
        keep = grid[grid <= trajectory.t_end]
        values = np.array([trajectory.value_at(float(t)) if t > 0.0 else 0.0 for t in keep])
        return keep, values

    def catalog_cross_check(self, config: RunConfig, green: GreenFn,
                            grid: np.ndarray) -> Optional[Tuple[str, float]]:
        """
        Сравнение с записью каталога, если N и s совпадают с ней.

        Returns:
            (имя записи, max|G - G_каталог| на окне записи) или None
        """
        if config.liouville:
            return None
        printed = str(parse_nonlin(config.nonlin))
        for name, source in CATALOG_NONLIN.items():
            if name == "liouville" or str(parse_nonlin(source)) != printed:
                continue
            try:
                entry = green_catalog(name, config.s)
            except CatalogError:
                return None
            lo, hi = entry.window
            points = [float(t) for t in grid if lo < t <= hi]
            if not points:
                return None
            return name, max(abs(green.value(t) - entry.value(t)) for t in points)
        return None

    # ==================== SOLVE ====================

    def fit(self, config: RunConfig, green: GreenFn, forcing: Forcing, nonlin: NonlinExpr) -> ExpansionSolution:
        """
        Коэффициенты α по стратегии конфигурации.

        Для дельты стратегия match даёт точное импульсное решение α = (1, 0, ..., 0).

        Raises:
            FitError: Стратегия не может определить коэффициенты
        """
        K = config.K
        if forcing.kind == "zero":
            return ExpansionSolution(green, K, (0.0,) * (K + 1), forcing, self.quad, (("strategy", "zero"),))
        if config.strategy == "match":
            if forcing.kind == "delta":
                alphas = (1.0,) + (0.0,) * K
                return ExpansionSolution(green, K, alphas, forcing, self.quad, (("strategy", "match"), ("sifting", True)))
            return fit_alphas_derivative_matching(green, nonlin, forcing, K, self.quad)
        if config.strategy != "lsq":
            raise FitError(config.strategy, "неизвестная стратегия, доступны match и lsq")

        if forcing.is_impulse:
            eta = forcing.eta if forcing.kind == "mollified" else config.eta
            t_fit = max(self.horizon(config), 4 * eta)
            reference = reference_solution(nonlin, forcing, green, t_fit, eta,
                                           self.settings.ref_rtol, self.settings.ref_atol)
            t_min = 2 * eta
        else:
            t_fit = self.settings.t_fit
            reference = solve_ivp(CauchyProblem.driven(nonlin, forcing, t_fit),
                                  self.settings.ref_rtol, self.settings.ref_atol)
            t_min = 0.0
        return fit_alphas_least_squares(green, forcing, K, reference.value_at, t_fit=t_fit,
                                        t_min=t_min, quad=self.quad)

    def solve(self, config: RunConfig) -> Tuple[ExpansionTable, ExpansionSolution]:
        """
        Решение w'' + N(w) = f разложением порядка K на сетке.

        Raises:
            FitError: Стратегия не может определить коэффициенты
        """
        forcing = parse_forcing(config.forcing, config.eta)
        nonlin = parse_nonlin("exp(w)") if config.liouville else parse_nonlin(config.nonlin)
        green = self.build_green(config)
        solution = self.fit(config, green, forcing, nonlin)
        grid = grid_points(config.grid)
        table = solve_expansion(green, solution.alphas, forcing, grid, solution.quad)
        return table, solution

    # ==================== BENCH ====================

    def bench(self, config: RunConfig) -> ErrorReport:
        """Отчёт Er(K; t) для стандартной постановки или для N и f из конфигурации."""
        grid = grid_points(config.grid)
        K_max = config.K if config.K > 0 else 4
        if config.setup:
            setup = default_setup(config.setup, config.epsilon)
            return run_setup(setup, K_max, grid, config.eta, self.settings.ref_rtol, self.settings.ref_atol)
        forcing = parse_forcing(config.forcing, config.eta)
        green = liouville_green(config.epsilon) if config.liouville else None
        nonlin = parse_nonlin("exp(w)") if config.liouville else parse_nonlin(config.nonlin)
        return run_benchmark(nonlin, forcing, config.s, K_max, grid, config.strategy, green,
                             config.eta, self.settings.ref_rtol, self.settings.ref_atol, self.quad)

    # ==================== CATALOG ====================

    def catalog(self, epsilon: Optional[float] = None) -> List[CatalogEntry]:
        """Записи каталога функций Грина."""
        return catalog_entries(epsilon if epsilon is not None else self.settings.epsilon)

    def catalog_rows(self, epsilon: Optional[float] = None) -> List[List[str]]:
        """Строки CSV каталога: name, parameters, s, t_min, t_max, notes."""
        rows = []
        for entry in self.catalog(epsilon):
            params = ";".join(
                f"{key}={format(value, '.17g') if isinstance(value, float) else value}"
                for key, value in entry.params
            )
            s = "any" if entry.s is None else format(entry.s, ".17g")
            t_min, t_max = entry.window
            rows.append([entry.name, params, s, format(t_min, ".17g"), format(t_max, ".17g"), entry.notes])
        return rows


def describe_verdict(nonlin: NonlinExpr, verdict: MembershipVerdict) -> List[str]:
    """Текстовое описание вердикта для вывода в консоль."""
    lines = [f"N(w) = {nonlin}", f"status: {verdict.status}"]
    for step in verdict.rule_trace:
        lines.append(f"  rule: {step}")
    if verdict.witness is not None:
        w = verdict.witness
        lines.append(
            f"  witness: t={w.t!r} path=t*({w.coeffs[0]!r} + {w.coeffs[1]!r}*t + {w.coeffs[2]!r}*t^2)"
            f" residual={w.residual!r}"
        )
    for note in verdict.notes:
        lines.append(f"  note: {note}")
    if verdict.paths_checked or verdict.paths_skipped:
        lines.append(f"  paths: checked={verdict.paths_checked} skipped={verdict.paths_skipped}")
    return lines


def finite_or_blank(value: float) -> str:
    return format(value, ".17g") if math.isfinite(value) else ""
