"""
Адаптивный явный интегратор Дорманда-Принса 5(4) с плотным выходом
и решение задач Коши w'' + N(w) = F(t).
"""

import math
from typing import Callable, List, Optional, Sequence

import numpy as np

from errors import DomainViolationError, StepSizeUnderflowError
from expr import antiderivative, compile_nonlin, eval_nonlin
from forcing import breakpoints, forcing_value
from models import CauchyProblem, Trajectory


# ==================== ТАБЛИЦА БУТЧЕРА ====================

C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
B_STAR = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
E = B - B_STAR

# Плотный выход четвёртого порядка: y(t + θh) = y + h·(Kᵀ P)·[θ, θ², θ³, θ⁴]
P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

ORDER = 5
ERROR_ORDER = 4


def _rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(x * x)))


class DormandPrinceSolver:
    """
    Вложенная пара Рунге-Кутты 5(4) с PI-регулятором шага.

    Шаг принимается, если среднеквадратичная ошибка, нормированная на
    atol + rtol·max(|y|, |y_new|), не превосходит 1.
    """

    def __init__(self, rtol: float = 1e-10, atol: float = 1e-12, safety: float = 0.9,
                 min_factor: float = 0.2, max_factor: float = 5.0, max_steps: int = 1_000_000,
                 max_step: float = math.inf):
        """
        Args:
            rtol: Относительный допуск (> 0)
            atol: Абсолютный допуск (> 0)
            safety: Коэффициент запаса регулятора
            min_factor: Нижняя граница изменения шага
            max_factor: Верхняя граница изменения шага
            max_steps: Предельное число попыток шага
            max_step: Максимальная длина шага

        Raises:
            ValueError: Некорректные допуски
        """
        if not (rtol > 0 and atol > 0):
            raise ValueError(f"Допуски должны быть положительными: rtol={rtol!r}, atol={atol!r}")
        if not 0.0 < min_factor < 1.0 < max_factor:
            raise ValueError(f"Нужно 0 < min_factor < 1 < max_factor, получено {min_factor!r}, {max_factor!r}")
        self.rtol = rtol
        self.atol = atol
        self.safety = safety
        self.min_factor = min_factor
        self.max_factor = max_factor
        self.max_steps = max_steps
        self.max_step = max_step

    def _initial_step(self, rhs, t0: float, y0: np.ndarray, f0: np.ndarray, span: float) -> float:
        scale = self.atol + self.rtol * np.abs(y0)
        d0, d1 = _rms(y0 / scale), _rms(f0 / scale)
        h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
        h0 = min(h0, span)
        try:
            f1 = np.asarray(rhs(t0 + h0, y0 + h0 * f0), dtype=float)
            d2 = _rms((f1 - f0) / scale) / h0
        except DomainViolationError:
            return h0
        if max(d1, d2) <= 1e-15:
            h1 = max(1e-6, h0 * 1e-3)
        else:
            h1 = (0.01 / max(d1, d2)) ** (1.0 / ORDER)
        return min(100 * h0, h1, span, self.max_step)

    def _stages(self, rhs, t: float, y: np.ndarray, f: np.ndarray, h: float) -> np.ndarray:
        K = np.empty((7, y.size))
        K[0] = f
        for i in range(1, 7):
            K[i] = rhs(t + C[i] * h, y + h * (A[i] @ K[:i]))
        return K

    def integrate(self, rhs: Callable[[float, np.ndarray], np.ndarray], t0: float,
                  y0: Sequence[float], t_end: float, stops: Sequence[float] = ()) -> Trajectory:
        """
        Интегрирование системы y' = rhs(t, y) от t0 до t_end > t0.

        Args:
            rhs: Правая часть системы
            t0: Начальный момент
            y0: Начальное состояние
            t_end: Конечный момент
            stops: Моменты, на которых шаг обязан закончиться (точки излома F)

        Returns:
            Trajectory с плотным выходом

        Raises:
            StepSizeUnderflowError: Шаг стал меньше машинного разрешения
                (в исключении - частичная траектория)
            DomainViolationError: Правая часть не определена в начальной точке
        """
        if not t_end > t0:
            raise ValueError(f"Конечный момент {t_end!r} должен быть больше начального {t0!r}")
        t = float(t0)
        y = np.array(y0, dtype=float)
        f = np.asarray(rhs(t, y), dtype=float)

        nodes: List[float] = [t]
        states: List[np.ndarray] = [y.copy()]
        dense: List[np.ndarray] = []

        def partial() -> Optional[Trajectory]:
            if len(nodes) < 2:
                return None
            return Trajectory(np.array(nodes), np.array(states), np.array(dense), complete=False)

        targets = sorted(b for b in set(stops) if t0 < b < t_end) + [float(t_end)]
        h = self._initial_step(rhs, t, y, f, t_end - t0)
        err_prev = 1e-4
        attempts = 0
        last_violation: Optional[DomainViolationError] = None

        for target in targets:
            while t < target:
                attempts += 1
                if attempts > self.max_steps:
                    raise StepSizeUnderflowError(t, partial(), "превышено число шагов")
                h = min(h, self.max_step)
                landing = t + h >= target or target - (t + h) < 1e-3 * h
                if landing:
                    h = target - t
                if h < 10 * np.spacing(max(abs(t), 1.0)):
                    reason = f"нарушение области определения: {last_violation}" if last_violation else ""
                    raise StepSizeUnderflowError(t, partial(), reason)

                try:
                    K = self._stages(rhs, t, y, f, h)
                except DomainViolationError as e:
                    last_violation = e
                    h *= self.min_factor
                    continue
                y_new = y + h * (B @ K)
                if not np.all(np.isfinite(y_new)):
                    h *= self.min_factor
                    continue

                scale = self.atol + self.rtol * np.maximum(np.abs(y), np.abs(y_new))
                err = _rms(h * (E @ K) / scale)
                if err > 1.0:
                    h *= max(self.min_factor, self.safety * err ** (-1.0 / ORDER))
                    continue

                dense.append(K.T @ P)
                t = target if landing else t + h
                y = y_new
                f = K[6]
                nodes.append(t)
                states.append(y.copy())
                last_violation = None

                if err == 0.0:
                    factor = self.max_factor
                else:
                    factor = self.safety * err ** (-0.7 / ORDER) * err_prev ** (0.4 / ORDER)
                    factor = min(self.max_factor, max(self.min_factor, factor))
                err_prev = max(err, 1e-4)
                h *= factor

        return Trajectory(np.array(nodes), np.array(states), np.array(dense))


# ==================== ЗАДАЧИ КОШИ ====================

def _second_order_rhs(problem: CauchyProblem) -> Callable[[float, np.ndarray], np.ndarray]:
    n = compile_nonlin(problem.nonlin)
    forcing = problem.forcing
    s = problem.s

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        return np.array([y[1], forcing_value(forcing, t, s) - n(y[0])])

    return rhs


def solve_ivp(problem: CauchyProblem, rtol: float = 1e-10, atol: float = 1e-12) -> Trajectory:
    """
    Решение задачи Коши w'' + N(w) = F(t) на [t0, horizon].

    Args:
        problem: Задача Коши
        rtol: Относительный допуск
        atol: Абсолютный допуск

    Returns:
        Trajectory: столбцы состояния (w, w')

    Raises:
        StepSizeUnderflowError: Разрушение решения или выход из области определения N
    """
    solver = DormandPrinceSolver(rtol=rtol, atol=atol)
    return solver.integrate(
        _second_order_rhs(problem),
        problem.t0,
        (problem.w0, problem.v0),
        problem.horizon,
        stops=breakpoints(problem.forcing),
    )


def potential(problem: CauchyProblem) -> Callable[[float], float]:
    """Потенциал V(w) = ∫₀ʷ N: символьно, если первообразная найдена, иначе квадратурой."""
    nonlin = problem.nonlin
    primitive = antiderivative(nonlin)
    if primitive is not None:
        try:
            offset = eval_nonlin(primitive, 0.0)
            return lambda w: eval_nonlin(primitive, w) - offset
        except DomainViolationError:
            pass

    nodes, weights = np.polynomial.legendre.leggauss(20)
    n = compile_nonlin(nonlin)

    def quadrature(w: float) -> float:
        if w == 0.0:
            return 0.0
        edges = np.linspace(0.0, w, 9)
        total = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            x = 0.5 * (b - a) * nodes + 0.5 * (a + b)
            total += 0.5 * (b - a) * sum(wt * n(xi) for wt, xi in zip(weights, x))
        return total

    return quadrature


def energy(problem: CauchyProblem, traj: Trajectory) -> List[float]:
    """
    Энергия E = ½w'² + V(w) в узлах траектории однородной задачи.

    Raises:
        ValueError: Правая часть не равна нулю
    """
    if problem.forcing.kind != "zero":
        raise ValueError("Энергия сохраняется только при F = 0")
    v = potential(problem)
    return [0.5 * float(dw) ** 2 + v(float(w)) for w, dw in zip(traj.values, traj.derivs)]
