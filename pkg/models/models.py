"""
Модели данных задачи о нелинейных функциях Грина.
Используются dataclasses для простоты и типобезопасности.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Literal, Optional, Tuple

import numpy as np

from .nodes import NonlinExpr


Status = Literal["member-structural", "member-numeric", "non-member", "unknown"]
ForcingKind = Literal["zero", "delta", "mollified", "smooth"]
Strategy = Literal["match", "lsq"]


# ==================== ВЫРАЖЕНИЯ ====================

@dataclass(frozen=True)
class Witness:
    """Точка, в которой тождество N(θ·w) = θ·N(w) нарушено."""

    t: float
    coeffs: Tuple[float, float, float]
    residual: float
    nonnegative: bool = False

    def path(self, t: float) -> float:
        """Тестовый путь w(t) = t·(c0 + c1·t + c2·t²), по модулю для неотрицательных путей."""
        c0, c1, c2 = self.coeffs
        value = t * (c0 + t * (c1 + t * c2))
        return abs(value) if self.nonnegative else value


@dataclass(frozen=True)
class MembershipVerdict:
    """Вердикт о принадлежности нелинейности классу мультипликативности."""

    status: Status
    witness: Optional[Witness] = None
    rule_trace: Tuple[str, ...] = ()
    notes: Tuple[str, ...] = ()
    paths_checked: int = 0
    paths_skipped: int = 0

    @property
    def is_member(self) -> bool:
        return self.status in ("member-structural", "member-numeric")


# ==================== ПРАВАЯ ЧАСТЬ И ЗАДАЧА КОШИ ====================

@dataclass(frozen=True)
class Forcing:
    """
    Правая часть f(t) уравнения.

    kind:
        zero      - f ≡ 0
        delta     - дельта-функция (в разложении - точное свойство фильтрации)
        mollified - сглаженная дельта δ_η с компактным носителем |t| < η
        smooth    - гладкое выражение expr от переменной t
    """

    kind: ForcingKind
    expr: Optional[NonlinExpr] = None
    eta: Optional[float] = None

    def __post_init__(self):
        if self.kind == "smooth" and self.expr is None:
            raise ValueError("Для гладкой правой части нужно выражение от t")
        if self.kind == "mollified" and (self.eta is None or not self.eta > 0):
            raise ValueError(f"Ширина сглаживания η должна быть положительной, получено {self.eta!r}")

    @property
    def is_impulse(self) -> bool:
        return self.kind in ("delta", "mollified")

    def describe(self) -> str:
        if self.kind == "smooth":
            return str(self.expr)
        if self.kind == "mollified":
            return f"delta_eta({self.eta!r})"
        return self.kind


@dataclass(frozen=True)
class CauchyProblem:
    """
    Задача Коши w'' + N(w) = F(t), w(t0) = w0, w'(t0) = v0 на [t0, horizon].

    Для импульсных правых частей F = s·δ_η, для гладких F = f(t).
    """

    nonlin: NonlinExpr
    forcing: Forcing
    horizon: float
    s: float = 1.0
    w0: float = 0.0
    v0: float = 0.0
    t0: float = 0.0

    def __post_init__(self):
        if not self.horizon > self.t0:
            raise ValueError(f"Горизонт {self.horizon!r} должен быть больше начального момента {self.t0!r}")
        if self.forcing.kind == "delta":
            raise ValueError("Точная дельта не интегрируется численно: используйте сглаженную δ_η")

    @classmethod
    def homogeneous(cls, nonlin: NonlinExpr, s: float, horizon: float) -> "CauchyProblem":
        """Задача множества H_s: f = 0, w(0) = 0, w'(0) = s."""
        return cls(nonlin=nonlin, forcing=Forcing("zero"), horizon=horizon, s=s, w0=0.0, v0=s)

    @classmethod
    def driven(cls, nonlin: NonlinExpr, forcing: Forcing, horizon: float) -> "CauchyProblem":
        """Задача множества D_f: w(0) = w'(0) = 0."""
        return cls(nonlin=nonlin, forcing=forcing, horizon=horizon)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    Решение на сетке принятых шагов с плотным выходом.

    states[i] - вектор состояния в узле nodes[i]; для уравнений второго
    порядка столбцы - (w, w'). dense[i] - коэффициенты интерполянта
    на шаге [nodes[i], nodes[i+1]].
    """

    nodes: np.ndarray
    states: np.ndarray
    dense: np.ndarray
    interpolant_order: int = 4
    complete: bool = True

    @property
    def t_start(self) -> float:
        return float(self.nodes[0])

    @property
    def t_end(self) -> float:
        return float(self.nodes[-1])

    @property
    def values(self) -> np.ndarray:
        return self.states[:, 0]

    @property
    def derivs(self) -> np.ndarray:
        return self.states[:, 1]

    def at(self, t: float) -> np.ndarray:
        """
        Состояние в момент t.

        Raises:
            ValueError: Если t вне отрезка интегрирования
        """
        nodes = self.nodes
        if not nodes[0] <= t <= nodes[-1]:
            raise ValueError(f"t = {t!r} вне отрезка [{nodes[0]!r}, {nodes[-1]!r}]")
        i = int(np.searchsorted(nodes, t, side="right")) - 1
        if nodes[i] == t:
            return self.states[i].copy()
        h = nodes[i + 1] - nodes[i]
        theta = (t - nodes[i]) / h
        powers = np.array([theta, theta ** 2, theta ** 3, theta ** 4])
        return self.states[i] + h * (self.dense[i] @ powers)

    def value_at(self, t: float) -> float:
        return float(self.at(t)[0])

    def deriv_at(self, t: float) -> float:
        return float(self.at(t)[1])


# ==================== ЭЛЛИПТИЧЕСКИЕ ФУНКЦИИ ====================

@dataclass(frozen=True)
class EllipticParam:
    """
    Параметр m = k² и цепочка преобразований к каноническому 0 <= m <= 1.

    chain - шаги ("negative", μ) для m = -μ < 0 и ("reciprocal", m) для m > 1;
    arg_scale - множитель аргумента u_c = arg_scale·u.
    """

    m: float
    canonical_m: float
    arg_scale: float = 1.0
    chain: Tuple[Tuple[str, float], ...] = ()

    def restore(self) -> float:
        """Обратное преобразование канонического параметра в исходный."""
        m = self.canonical_m
        for kind, _ in reversed(self.chain):
            if kind == "negative":
                m = -m / (1.0 - m)
            elif kind == "reciprocal":
                m = 1.0 / m
        return m

    def restore_argument(self, u_canonical: float) -> float:
        return u_canonical / self.arg_scale


# ==================== ФУНКЦИИ ГРИНА ====================

@dataclass(frozen=True)
class CatalogEntry:
    """Запись каталога функций Грина в замкнутой форме."""

    name: str
    params: Tuple[Tuple[str, float], ...]
    s: Optional[float]
    window: Tuple[float, float]
    notes: str = ""
    zero_initial_data: bool = True


@dataclass(frozen=True, eq=False)
class GreenFn:
    """
    Нелинейная функция Грина G(t) = θ(t)·w0(t).

    Для записи Лиувилля задана также левая ветвь (left), и G(0) равно
    общему пределу обеих ветвей.
    """

    name: str
    source: Literal["catalog", "numeric"]
    s: float
    w0: Callable[[float], float]
    w0_prime: Callable[[float], float]
    window: Tuple[float, float]
    params: Tuple[Tuple[str, float], ...] = ()
    left: Optional[Callable[[float], float]] = None
    left_prime: Optional[Callable[[float], float]] = None
    trajectory: Optional[Trajectory] = None
    zero_initial_data: bool = True

    def __call__(self, t: float) -> float:
        return self.value(t)

    def value(self, t: float) -> float:
        if t > 0.0:
            return self.w0(t)
        if self.left is None:
            return 0.0
        if t == 0.0:
            return self.w0(0.0)
        return self.left(t)

    def derivative(self, t: float) -> float:
        """Производная G'(t); в t = 0 - левый предел."""
        if t > 0.0:
            return self.w0_prime(t)
        if self.left_prime is None:
            return 0.0
        return self.left_prime(t)

    def values(self, ts) -> np.ndarray:
        return np.array([self.value(float(t)) for t in ts])

    def jump(self) -> float:
        """Скачок производной G'(0+) - G'(0-)."""
        return self.w0_prime(0.0) - self.derivative(0.0)


@dataclass(frozen=True)
class DistributionalRow:
    """Строка таблицы проверки с регуляризованным импульсом."""

    eta: float
    sup_error: Optional[float]
    failure: Optional[str] = None
    t_reached: Optional[float] = None


# ==================== РАЗЛОЖЕНИЕ ПО МАЛЫМ ВРЕМЕНАМ ====================

@dataclass(frozen=True)
class QuadratureSpec:
    """Составная квадратура Гаусса-Лежандра с удвоением панелей."""

    points: int = 8
    panels: int = 1
    tol: float = 1e-10
    max_panels: int = 4096


@dataclass(frozen=True)
class TaylorData:
    """Производные в нуле решения задачи D_f (w) и задачи H_s (w0)."""

    w_derivs: Tuple[float, ...]
    g_derivs: Tuple[float, ...]
    M: int
    s: float


@dataclass(frozen=True, eq=False)
class ExpansionSolution:
    """Усечённое разложение w_K(t) = Σ α_k ∫ (t-τ)^k G(t-τ) f(τ) dτ."""

    green: GreenFn
    K: int
    alphas: Tuple[float, ...]
    forcing: Forcing
    quad: QuadratureSpec = field(default_factory=QuadratureSpec)
    fit_meta: Tuple[Tuple[str, Any], ...] = ()

    def __post_init__(self):
        if len(self.alphas) != self.K + 1:
            raise ValueError(f"Ожидалось {self.K + 1} коэффициентов, получено {len(self.alphas)}")
        if not all(math.isfinite(a) for a in self.alphas):
            raise ValueError(f"Коэффициенты должны быть конечными: {self.alphas!r}")

    def evaluate(self, t: float) -> float:
        from shorttime import evaluate_expansion
        return evaluate_expansion(self, t)

    def table(self, grid) -> "ExpansionTable":
        from shorttime import solve_expansion
        return solve_expansion(self.green, self.alphas, self.forcing, grid, self.quad)


@dataclass(frozen=True, eq=False)
class ExpansionTable:
    """Табулированное решение: terms[i, k] - k-й член свёртки в grid[i]."""

    grid: np.ndarray
    values: np.ndarray
    terms: np.ndarray
    alphas: Tuple[float, ...]


# ==================== БЕНЧМАРК ====================

@dataclass(frozen=True)
class ErrorRow:
    """Одна ячейка (K, t) отчёта об ошибке."""

    K: int
    t: float
    wK: float
    wref: float
    er: Optional[float]
    flag: str = ""


@dataclass(frozen=True)
class ErrorReport:
    """Логарифмическая ошибка Er(K; t) = ln|w_K - w_ref| и метаданные эталона."""

    nonlin_name: str
    forcing_desc: str
    strategy: str
    k_values: Tuple[int, ...]
    grid: Tuple[float, ...]
    rows: Tuple[ErrorRow, ...]
    alphas: Dict[int, Tuple[float, ...]]
    reference: Tuple[Tuple[str, Any], ...]
    medians: Dict[int, float]


# ==================== КОНФИГУРАЦИЯ ЗАПУСКА ====================

@dataclass(frozen=True)
class RunConfig:
    """Полная конфигурация одного запуска CLI (сериализуется как key=value)."""

    subcommand: str = "check"
    nonlin: str = ""
    forcing: str = "delta"
    s: float = 1.0
    K: int = 0
    strategy: Strategy = "match"
    rtol: float = 1e-10
    atol: float = 1e-12
    grid: Tuple[int, float, float] = (101, 0.0, 1.0)
    eta: float = 1e-3
    out: str = ""
    seed: int = 20180521
    samples: int = 8
    tol: float = 1e-9
    epsilon: float = 1.0
    liouville: bool = False
    t_max: Optional[float] = None
    setup: str = ""
