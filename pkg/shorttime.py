"""
Разложение по малым временам w(t) = Σ α_k ∫₀ᵗ (t-τ)^k G(t-τ) f(τ) dτ.

Коэффициенты α_k определяются двумя стратегиями:
    match - сопоставление производных в t = 0 (треугольная система);
    lsq   - наименьшие квадраты против эталонной траектории на [t_min, t_fit].
"""

import math
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from errors import DomainViolationError, FitError, NotDifferentiableError, QuadratureError
from expr import derivatives_at
from forcing import derivatives_at_zero, forcing_value
from green import green_numeric
from models import ExpansionSolution, ExpansionTable, Forcing, GreenFn, NonlinExpr, QuadratureSpec, TaylorData


MAX_K = 8


# ==================== РЯДЫ ТЕЙЛОРА ====================

def _truncated_product(a: np.ndarray, b: np.ndarray, order: int) -> np.ndarray:
    return np.convolve(a, b)[: order + 1]


def taylor_from_ode(nonlin: NonlinExpr, forcing_derivs: Sequence[float], w0: float, v0: float,
                    M: int) -> Tuple[float, ...]:
    """
    Производные w(0), w'(0), ..., w^(M)(0) решения w'' = f - N(w).

    Рекуррентность на нормированных коэффициентах c_n = w^(n)(0)/n!:
        c_{n+2} = (f^(n)(0)/n! - [N∘w]_n) / ((n+1)(n+2)),
    где [N∘w]_n - n-й коэффициент ряда N(w(t)), собранный из N^(j)(w0)/j!
    и степеней (w - w0).

    Args:
        nonlin: Нелинейность N
        forcing_derivs: f(0), f'(0), ... (не меньше M-1 значений)
        w0: Начальное значение
        v0: Начальная производная
        M: Порядок (>= 1)

    Raises:
        NotDifferentiableError: N не дифференцируема M раз в w0
    """
    if M < 1:
        raise ValueError(f"Порядок M должен быть >= 1, получено {M!r}")
    if len(forcing_derivs) < M - 1:
        raise ValueError(f"Нужно не меньше {M - 1} производных правой части, получено {len(forcing_derivs)}")
    try:
        n_derivs = derivatives_at(nonlin, w0, max(M - 2, 0))
    except DomainViolationError as e:
        raise NotDifferentiableError(f"N не дифференцируема {M - 2} раз в w = {w0!r}: {e}")

    c = np.zeros(M + 1)
    c[0] = w0
    c[1] = v0
    for n in range(M - 1):
        delta = c[: n + 1].copy()
        delta[0] = 0.0
        composed = n_derivs[0] if n == 0 else 0.0
        power = np.zeros(n + 1)
        power[0] = 1.0
        for j in range(1, n + 1):
            power = _truncated_product(power, delta, n)
            composed += n_derivs[j] / math.factorial(j) * power[n]
        c[n + 2] = (forcing_derivs[n] / math.factorial(n) - composed) / ((n + 1) * (n + 2))
    return tuple(float(c[n] * math.factorial(n)) for n in range(M + 1))


def taylor_data(nonlin: NonlinExpr, forcing: Forcing, s: float, M: int) -> TaylorData:
    """Производные обеих задач: D_f (w(0)=w'(0)=0) и H_s (w0(0)=0, w0'(0)=s)."""
    f_derivs = derivatives_at_zero(forcing, M)
    w_derivs = taylor_from_ode(nonlin, f_derivs, 0.0, 0.0, M)
    g_derivs = taylor_from_ode(nonlin, [0.0] * (M + 1), 0.0, s, M)
    return TaylorData(w_derivs, g_derivs, M, s)


def taylor_value(derivs: Sequence[float], t: float) -> float:
    """Значение многочлена Тейлора Σ d_n tⁿ/n!."""
    return float(sum(d * t ** n / math.factorial(n) for n, d in enumerate(derivs)))


# ==================== КОЭФФИЦИЕНТЫ ====================

def _check_order(K: int) -> None:
    if isinstance(K, bool) or not isinstance(K, int) or not 0 <= K <= MAX_K:
        raise ValueError(f"Порядок K должен быть целым из [0, {MAX_K}], получено {K!r}")


def matching_system(data: TaylorData, f_derivs: Sequence[float], K: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Нижнетреугольная система C·α = b для порядков tⁿ, n = 2..K+2.

    C[n-2, k] = Σ_{j>=1, i>=0, j+k+i+1=n} g_j/j! · f_i · (j+k)!/n!,  b[n-2] = w_n/n!.
    """
    g = data.g_derivs
    C = np.zeros((K + 1, K + 1))
    b = np.zeros(K + 1)
    for row, n in enumerate(range(2, K + 3)):
        b[row] = data.w_derivs[n] / math.factorial(n)
        for k in range(row + 1):
            total = 0.0
            for j in range(1, n - k):
                i = n - j - k - 1
                total += g[j] / math.factorial(j) * f_derivs[i] * math.factorial(j + k) / math.factorial(n)
            C[row, k] = total
    return C, b


def fit_alphas_derivative_matching(green: GreenFn, nonlin: NonlinExpr, forcing: Forcing, K: int,
                                   quad: Optional[QuadratureSpec] = None) -> ExpansionSolution:
    """
    α_k из совпадения коэффициентов Тейлора Σ α_k (H_k * f) и w до порядка K+2.

    Raises:
        FitError: f(0) = 0 (система вырождена) или невязка решения велика
    """
    _check_order(K)
    if forcing.kind != "smooth":
        raise FitError("match", f"нужна гладкая правая часть, получено '{forcing.kind}'")
    M = K + 2
    f_derivs = derivatives_at_zero(forcing, M)
    if f_derivs[0] == 0.0:
        raise FitError("match", "f(0) = 0, треугольная система вырождена; используйте стратегию lsq")
    data = taylor_data(nonlin, forcing, green.s, M)
    C, b = matching_system(data, f_derivs, K)
    alphas = np.linalg.solve(C, b)
    residual = float(np.linalg.norm(C @ alphas - b))
    if residual > 1e-12 * max(float(np.linalg.norm(b)), 1e-300) and residual > 1e-300:
        raise FitError("match", f"относительная невязка {residual!r} превышает 1e-12")
    if not np.all(np.isfinite(alphas)):
        raise FitError("match", "коэффициенты не конечны")
    meta = (
        ("strategy", "match"),
        ("M", M),
        ("w_derivs", data.w_derivs),
        ("g_derivs", data.g_derivs),
        ("f_derivs", tuple(f_derivs)),
    )
    return ExpansionSolution(green, K, tuple(float(a) for a in alphas), forcing,
                             quad or QuadratureSpec(), meta)


def fit_alphas_least_squares(green: GreenFn, forcing: Forcing, K: int,
                             reference: Callable[[float], float], t_fit: float = 0.1,
                             n_points: int = 50, t_min: float = 0.0,
                             quad: Optional[QuadratureSpec] = None) -> ExpansionSolution:
    """
    α_k методом наименьших квадратов по точкам t_i ∈ [t_min, t_fit].

    Args:
        green: Функция Грина
        forcing: Правая часть
        K: Порядок усечения
        reference: Эталон t -> w_ref(t)
        t_fit: Правый конец окна подгонки
        n_points: Число равноотстоящих точек на (0, t_fit]
        t_min: Точки с t < t_min исключаются (носитель импульса)

    Raises:
        FitError: Недостаточно точек или вырожденный базис
    """
    _check_order(K)
    quad = quad or QuadratureSpec()
    if not t_fit > 0:
        raise FitError("lsq", f"окно подгонки должно быть положительным, получено {t_fit!r}")
    ts = np.linspace(t_fit / n_points, t_fit, n_points)
    ts = ts[ts >= t_min]
    if ts.size < K + 1:
        raise FitError("lsq", f"в окне [{t_min!r}, {t_fit!r}] {ts.size} точек, нужно не меньше {K + 1}")
    A = np.array([[convolve_term(green, k, forcing, float(t), quad) for k in range(K + 1)] for t in ts])
    b = np.array([float(reference(float(t))) for t in ts])
    alphas, residuals, rank, _ = np.linalg.lstsq(A, b, rcond=None)
    if rank < K + 1:
        raise FitError("lsq", f"базис вырожден (ранг {rank} < {K + 1})")
    if not np.all(np.isfinite(alphas)):
        raise FitError("lsq", "коэффициенты не конечны")
    meta = (
        ("strategy", "lsq"),
        ("t_fit", float(t_fit)),
        ("t_min", float(t_min)),
        ("n_points", int(ts.size)),
        ("rank", int(rank)),
        ("residual", float(residuals[0]) if residuals.size else 0.0),
    )
    return ExpansionSolution(green, K, tuple(float(a) for a in alphas), forcing, quad, meta)


# ==================== СВЁРТКИ ====================

def _panel_sum(integrand: Callable[[float], float], a: float, b: float, panels: int,
               nodes: np.ndarray, weights: np.ndarray) -> float:
    edges = np.linspace(a, b, panels + 1)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        for x, wt in zip(half * nodes + mid, weights):
            value = integrand(float(x))
            if not math.isfinite(value):
                raise QuadratureError(f"Неконечное значение подынтегральной функции в τ = {x!r}")
            total += half * wt * value
    return total


def integrate(integrand: Callable[[float], float], a: float, b: float, quad: QuadratureSpec) -> float:
    """
    Составная квадратура Гаусса-Лежандра с удвоением панелей до
    |I_2n - I_n| <= tol·(1 + |I_2n|).

    Raises:
        QuadratureError: Нет сходимости до max_panels
    """
    if b <= a:
        return 0.0
    nodes, weights = np.polynomial.legendre.leggauss(quad.points)
    panels = quad.panels
    previous = _panel_sum(integrand, a, b, panels, nodes, weights)
    while panels < quad.max_panels:
        panels *= 2
        current = _panel_sum(integrand, a, b, panels, nodes, weights)
        if abs(current - previous) <= quad.tol * (1.0 + abs(current)):
            return current
        previous = current
    raise QuadratureError(f"Квадратура на [{a!r}, {b!r}] не сошлась за {quad.max_panels} панелей")


def convolve_term(green: GreenFn, k: int, forcing: Forcing, t: float,
                  quad: Optional[QuadratureSpec] = None) -> float:
    """
    k-й член свёртки ∫₀ᵗ (t-τ)^k G(t-τ) f(τ) dτ.

    Для дельты - tᵏ·G(t) без квадратуры; для сглаженной дельты интеграл
    берётся по носителю [-η, min(t, η)].

    Raises:
        QuadratureError: Неконечное значение подынтегральной функции
    """
    if forcing.kind == "zero":
        return 0.0
    if forcing.kind == "delta":
        return t ** k * green.value(t)
    if t < 0:
        raise ValueError(f"Свёртка определена при t >= 0, получено {t!r}")
    quad = quad or QuadratureSpec()

    def integrand(tau: float) -> float:
        u = t - tau
        return u ** k * green.value(u) * forcing_value(forcing, tau)

    if forcing.kind == "mollified":
        return integrate(integrand, -forcing.eta, min(t, forcing.eta), quad)
    return integrate(integrand, 0.0, t, quad)


def solve_expansion(green: GreenFn, alphas: Sequence[float], forcing: Forcing, grid: Sequence[float],
                    quad: Optional[QuadratureSpec] = None) -> ExpansionTable:
    """
    Таблица w_K(t) = Σ α_k·convolve_term(k, t) на сетке; при t <= 0
    квадратурные члены равны нулю.
    """
    if len(alphas) < 1:
        raise ValueError("Нужен хотя бы один коэффициент α")
    grid = np.asarray(grid, dtype=float)
    terms = np.zeros((grid.size, len(alphas)))
    for i, t in enumerate(grid):
        if t <= 0.0 and forcing.kind != "delta":
            continue
        for k in range(len(alphas)):
            terms[i, k] = convolve_term(green, k, forcing, float(t), quad)
    values = terms @ np.asarray(alphas, dtype=float)
    return ExpansionTable(grid, values, terms, tuple(float(a) for a in alphas))


def evaluate_expansion(solution: ExpansionSolution, t: float) -> float:
    """Значение w_K(t) для подогнанного решения."""
    table = solve_expansion(solution.green, solution.alphas, solution.forcing, [t], solution.quad)
    return float(table.values[0])


def solve_impulse(nonlin: NonlinExpr, s: float, grid: Sequence[float],
                  rtol: float = 1e-10, atol: float = 1e-12) -> ExpansionTable:
    """
    Решение при f = s·δ: ряд схлопывается в G(t) с α_0 = 1.

    Старшие α_k импульсными данными не определяются; зависимость ошибки
    от K воспроизводится только стратегией lsq со сглаженным импульсом.

    Raises:
        MembershipError, GreenBlowUpError: как у green_numeric
    """
    grid = np.asarray(grid, dtype=float)
    horizon = float(np.max(grid))
    if horizon <= 0.0:
        values = np.zeros(grid.size)
        return ExpansionTable(grid, values, values.reshape(-1, 1), (1.0,))
    green = green_numeric(nonlin, s, horizon, rtol, atol)
    return solve_expansion(green, (1.0,), Forcing("delta"), grid)
