"""
Нелинейные функции Грина G(t) = θ(t)·w0(t).

Каталог замкнутых форм (кубическая, синусная, sinh и Лиувилля),
численное построение через однородную задачу Коши и проверка
распределительного уравнения со сглаженным импульсом.
"""

import math
from typing import Dict, List, Optional, Sequence

import numpy as np

from elliptic import jacobi_am, jacobi_sn_cn_dn
from errors import (
    CatalogError, GreenBlowUpError, MembershipError, StepSizeUnderflowError,
)
from expr import check_membership, compile_nonlin, parse_nonlin
from models import CatalogEntry, CauchyProblem, DistributionalRow, Forcing, GreenFn, NonlinExpr
from ode_solver import solve_ivp


SQRT2 = math.sqrt(2.0)
QUARTIC_ROOT2 = 2.0 ** 0.25
RESIDUAL_STEP = 1e-3

CATALOG_NONLIN: Dict[str, str] = {
    "cubic": "w^3",
    "sine": "sin(w)",
    "sinh": "sinh(w)",
    "liouville": "exp(w)",
}


def catalog_entries(epsilon: float = 1.0) -> List[CatalogEntry]:
    """Список записей каталога с параметрами и проверенными окнами."""
    phi = _liouville_phi(epsilon) if epsilon > 1.0 / 16.0 else math.nan
    return [
        CatalogEntry("cubic", (("m", -1.0),), 1.0, (0.0, 3.0),
                     "N=w^3; G=2^(1/4)·sn(t/2^(1/4) | m=-1)"),
        CatalogEntry("sine", (("m", 2.0),), SQRT2, (0.0, 3.0),
                     "N=sin(w); G=2·am(t/√2 | m=2)"),
        CatalogEntry("sinh", (("m", "-s^2/4"),), None, (0.0, 2.0),
                     "N=sinh(w); G=2·arcsinh((s/2)·sn(t | -s²/4)), любое s"),
        CatalogEntry("liouville", (("epsilon", epsilon), ("phi", phi)), 1.0, (-3.0, 3.0),
                     "N=exp(w); две ветви, G(0)≠0, требуется ε > 1/16", zero_initial_data=False),
    ]


def catalog_nonlin(name: str) -> NonlinExpr:
    """Нелинейность, для которой построена запись каталога."""
    if name not in CATALOG_NONLIN:
        raise CatalogError(f"Неизвестная запись каталога '{name}', доступны: {', '.join(CATALOG_NONLIN)}")
    return parse_nonlin(CATALOG_NONLIN[name])


def _require_scale(name: str, s: Optional[float], intrinsic: float) -> None:
    if s is not None and not math.isclose(s, intrinsic, rel_tol=1e-12):
        raise CatalogError(
            f"Запись '{name}' имеет фиксированный масштаб s = {intrinsic!r}, запрошено s = {s!r}; "
            f"используйте численное построение"
        )


def green_catalog(name: str, s: Optional[float] = None, epsilon: float = 1.0) -> GreenFn:
    """
    Функция Грина в замкнутой форме.

    Args:
        name: cubic, sine, sinh или liouville
        s: Масштаб импульса (для cubic, sine и liouville - только собственный)
        epsilon: Параметр ε записи Лиувилля

    Returns:
        GreenFn с source="catalog"

    Raises:
        CatalogError: Неизвестное имя или несовместимый масштаб
    """
    if name == "cubic":
        _require_scale(name, s, 1.0)

        def w0(t: float) -> float:
            return QUARTIC_ROOT2 * jacobi_sn_cn_dn(t / QUARTIC_ROOT2, -1.0)[0]

        def w0_prime(t: float) -> float:
            _, cn, dn = jacobi_sn_cn_dn(t / QUARTIC_ROOT2, -1.0)
            return cn * dn

        return GreenFn(name, "catalog", 1.0, w0, w0_prime, (0.0, 3.0), (("m", -1.0),))

    if name == "sine":
        _require_scale(name, s, SQRT2)

        def w0(t: float) -> float:
            return 2.0 * jacobi_am(t / SQRT2, 2.0)

        def w0_prime(t: float) -> float:
            return SQRT2 * jacobi_sn_cn_dn(t / SQRT2, 2.0)[2]

        return GreenFn(name, "catalog", SQRT2, w0, w0_prime, (0.0, 3.0), (("m", 2.0),))

    if name == "sinh":
        scale = 1.0 if s is None else float(s)
        if scale == 0.0 or not math.isfinite(scale):
            raise CatalogError(f"Масштаб s должен быть ненулевым и конечным, получено {s!r}")
        m = -scale * scale / 4.0

        def w0(t: float) -> float:
            return 2.0 * math.asinh(0.5 * scale * jacobi_sn_cn_dn(t, m)[0])

        def w0_prime(t: float) -> float:
            sn, cn, dn = jacobi_sn_cn_dn(t, m)
            y = 0.5 * scale * sn
            return scale * cn * dn / math.sqrt(1.0 + y * y)

        return GreenFn(name, "catalog", scale, w0, w0_prime, (0.0, 2.0), (("m", m),))

    if name == "liouville":
        _require_scale(name, s, 1.0)
        return liouville_green(epsilon)

    raise CatalogError(f"Неизвестная запись каталога '{name}', доступны: {', '.join(CATALOG_NONLIN)}")


def _liouville_phi(epsilon: float) -> float:
    bound = 1.0 / (4.0 * math.sqrt(epsilon))
    return -math.atanh(bound)


def liouville_green(epsilon: float) -> GreenFn:
    """
    Двухветвевая функция для N = exp(w):
    G = 2·ln(√(2ε)/cosh(√ε·t ± φ)), tanh φ = -1/(4√ε).

    Скачок производной в нуле равен 1, G непрерывна и G(0) = 2·ln(√(2ε)/cosh φ) ≠ 0.

    Raises:
        CatalogError: ε <= 1/16 (ограничение на φ невыполнимо в вещественных числах)
    """
    if not (math.isfinite(epsilon) and epsilon > 1.0 / 16.0):
        raise CatalogError(f"Требуется ε > 1/16, чтобы tanh φ = -1/(4√ε) имело решение; получено ε = {epsilon!r}")
    root = math.sqrt(epsilon)
    phi = _liouville_phi(epsilon)
    amplitude = math.log(math.sqrt(2.0 * epsilon))

    def branch(shift: float):
        return lambda t: 2.0 * (amplitude - math.log(math.cosh(root * t + shift)))

    def branch_prime(shift: float):
        return lambda t: -2.0 * root * math.tanh(root * t + shift)

    return GreenFn(
        "liouville", "catalog", 1.0,
        w0=branch(phi), w0_prime=branch_prime(phi),
        window=(-3.0, 3.0),
        params=(("epsilon", epsilon), ("phi", phi)),
        left=branch(-phi), left_prime=branch_prime(-phi),
        zero_initial_data=False,
    )


def catalog_residual(g: GreenFn, nonlin: NonlinExpr, ts: Sequence[float]) -> float:
    """
    max |G'' + N(G)| по точкам ts; G'' - разность четвёртого порядка
    аналитической производной с шагом 1e-3.

    Raises:
        ValueError: Шаблон разности пересекает t = 0
    """
    n = compile_nonlin(nonlin)
    h = RESIDUAL_STEP
    worst = 0.0
    for t in ts:
        t = float(t)
        if abs(t) <= 2.0 * h:
            raise ValueError(f"Точка t = {t!r} слишком близка к нулю для разностного шаблона")
        d = g.derivative
        second = (-d(t + 2 * h) + 8 * d(t + h) - 8 * d(t - h) + d(t - 2 * h)) / (12 * h)
        worst = max(worst, abs(second + n(g.value(t))))
    return worst


def green_numeric(nonlin: NonlinExpr, s: float, horizon: float,
                  rtol: float = 1e-10, atol: float = 1e-12) -> GreenFn:
    """
    G = θ·w0, где w0 - решение однородной задачи w0(0) = 0, w0'(0) = s.

    Raises:
        MembershipError: N не принадлежит классу мультипликативности
        GreenBlowUpError: Решение разрушилось до горизонта
    """
    if s == 0.0 or not math.isfinite(s):
        raise ValueError(f"Масштаб импульса s должен быть ненулевым и конечным, получено {s!r}")
    if not horizon > 0:
        raise ValueError(f"Горизонт должен быть положительным, получено {horizon!r}")
    verdict = check_membership(nonlin)
    if not verdict.is_member:
        raise MembershipError(
            f"Нелинейность {nonlin} не принадлежит классу (статус {verdict.status}); "
            f"для N = exp(w) используйте двухветвевую запись liouville"
        )
    problem = CauchyProblem.homogeneous(nonlin, s, horizon)
    try:
        traj = solve_ivp(problem, rtol, atol)
    except StepSizeUnderflowError as e:
        raise GreenBlowUpError(e.t_reached, e.trajectory) from e

    return GreenFn(
        name=str(nonlin), source="numeric", s=float(s),
        w0=traj.value_at, w0_prime=traj.deriv_at,
        window=(0.0, float(horizon)), params=(("s", float(s)),), trajectory=traj,
    )


def validate_distributional(g: GreenFn, nonlin: NonlinExpr, etas: Sequence[float],
                            horizon: Optional[float] = None, t_start: float = -0.2,
                            rtol: float = 1e-10, atol: float = 1e-12,
                            samples: int = 200) -> List[DistributionalRow]:
    """
    Решение w'' + N(w) = s·δ_η(t) из покоя на ветви до импульса и
    sup |w - G| по [2η, horizon] для каждого η.

    Args:
        g: Функция Грина
        nonlin: Нелинейность N
        etas: Убывающий список ширин сглаживания
        horizon: Правый конец (по умолчанию min(1, правый край окна G))
        t_start: Начальный момент (< -η)

    Returns:
        Строки DistributionalRow; сбой интегратора записывается в строку
    """
    etas = [float(e) for e in etas]
    if not etas or any(not e > 0 for e in etas):
        raise ValueError(f"Все η должны быть положительными: {etas!r}")
    if any(b >= a for a, b in zip(etas, etas[1:])):
        raise ValueError(f"Список η должен строго убывать: {etas!r}")
    if horizon is None:
        horizon = min(1.0, g.window[1])

    rows = []
    for eta in etas:
        if not t_start < -eta or not horizon > 2 * eta:
            raise ValueError(f"Отрезок [{t_start}, {horizon}] не содержит носитель импульса η = {eta!r}")
        problem = CauchyProblem(
            nonlin=nonlin, forcing=Forcing("mollified", eta=eta), horizon=horizon,
            s=g.s, w0=g.value(t_start), v0=g.derivative(t_start), t0=t_start,
        )
        try:
            traj = solve_ivp(problem, rtol, atol)
        except StepSizeUnderflowError as e:
            rows.append(DistributionalRow(eta, None, str(e), e.t_reached))
            continue
        ts = np.linspace(2 * eta, horizon, samples)
        sup_error = max(abs(traj.value_at(float(t)) - g.value(float(t))) for t in ts)
        rows.append(DistributionalRow(eta, sup_error, None, traj.t_end))
    return rows


def empirical_rate(rows: Sequence[DistributionalRow]) -> Optional[float]:
    """Наклон log(sup-error) по log(η) между первой и последней успешными строками."""
    ok = [r for r in rows if r.sup_error is not None and r.sup_error > 0.0]
    if len(ok) < 2:
        return None
    first, last = ok[0], ok[-1]
    return math.log(first.sup_error / last.sup_error) / math.log(first.eta / last.eta)
