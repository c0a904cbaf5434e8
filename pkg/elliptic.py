"""
Эллиптические функции Якоби sn, cn, dn, am вещественного аргумента
для любого вещественного параметра m = k².

Канонический случай 0 <= m < 1 вычисляется нисходящим преобразованием
Ландена (AGM), m < 0 и m > 1 сводятся к нему преобразованиями
отрицательного и обратного параметра.
"""

import math
from typing import List, Sequence, Tuple

import numpy as np

from errors import EllipticDomainError
from models import EllipticParam
from ode_solver import DormandPrinceSolver


AGM_TOL = 1e-15
MAX_AGM_ITERATIONS = 64


def _check_finite(u: float, m: float) -> None:
    if not math.isfinite(m):
        raise ValueError(f"Параметр m должен быть конечным, получено {m!r}")
    if not math.isfinite(u):
        raise EllipticDomainError(f"Аргумент u = {u!r} не конечен", real_window(m))


def real_window(m: float) -> Tuple[float, float]:
    """
    Окно вещественности редукции параметра.

    Для m > 1 cn(u|m) = dn(√m·u | 1/m) > 0 при всех вещественных u, поэтому
    редукция вещественна на всей оси; для остальных m ограничений тоже нет.
    """
    return (-math.inf, math.inf)


def agm_landen(m: float) -> Tuple[List[float], List[float], int]:
    """
    Последовательности a_n, c_n нисходящего преобразования Ландена.

    Args:
        m: Канонический параметр, 0 <= m < 1

    Returns:
        (a, c, число итераций); итерации до |a_n - b_n| <= 1e-15·a_n
    """
    if not 0.0 <= m < 1.0:
        raise ValueError(f"AGM определено для 0 <= m < 1, получено {m!r}")
    a, b, c = 1.0, math.sqrt(1.0 - m), math.sqrt(m)
    a_seq, c_seq = [a], [c]
    iterations = 0
    while abs(a - b) > AGM_TOL * a:
        if iterations >= MAX_AGM_ITERATIONS:
            break
        a, b, c = 0.5 * (a + b), math.sqrt(a * b), 0.5 * (a - b)
        a_seq.append(a)
        c_seq.append(c)
        iterations += 1
    return a_seq, c_seq, iterations


def _canonical_phis(u: float, m: float) -> List[float]:
    """Амплитуды φ_0, φ_1, ..., φ_N обратного хода Ландена."""
    a, c, n = agm_landen(m)
    phis = [0.0] * (n + 1)
    phis[n] = 2.0 ** n * a[n] * u
    for k in range(n, 0, -1):
        phis[k - 1] = 0.5 * (phis[k] + math.asin(c[k] / a[k] * math.sin(phis[k])))
    return phis


def _canonical(u: float, m: float) -> Tuple[float, float, float, float]:
    """(sn, cn, dn, am) при 0 <= m <= 1."""
    if m == 0.0:
        return math.sin(u), math.cos(u), 1.0, u
    if m == 1.0:
        sech = 1.0 / math.cosh(u)
        return math.tanh(u), sech, sech, math.atan(math.sinh(u))
    phi = _canonical_phis(u, m)[0]
    sn, cn = math.sin(phi), math.cos(phi)
    # dn >= √(1-m) > 0; форма cn/cos(φ1-φ0) даёт 0/0 на четвертях периода
    dn = math.sqrt(1.0 - m * sn * sn)
    return sn, cn, dn, phi


def reduce_parameter(m: float) -> EllipticParam:
    """Цепочка преобразований к каноническому параметру 0 <= m <= 1."""
    if not math.isfinite(m):
        raise ValueError(f"Параметр m должен быть конечным, получено {m!r}")
    if m < 0.0:
        mu = -m
        return EllipticParam(m, mu / (1.0 + mu), math.sqrt(1.0 + mu), (("negative", mu),))
    if m > 1.0:
        return EllipticParam(m, 1.0 / m, math.sqrt(m), (("reciprocal", m),))
    return EllipticParam(m, m)


def _evaluate(u: float, m: float) -> Tuple[float, float, float, float]:
    _check_finite(u, m)
    param = reduce_parameter(m)
    v = param.arg_scale * u
    sn, cn, dn, am = _canonical(v, param.canonical_m)
    if not param.chain:
        return sn, cn, dn, am
    kind, _ = param.chain[0]
    if kind == "negative":
        scale = param.arg_scale
        n = round(am / math.pi)
        r = am - n * math.pi
        phi = math.atan2(math.sin(r), scale * math.cos(r)) + n * math.pi
        return sn / (dn * scale), cn / dn, 1.0 / dn, phi
    # reciprocal: роли cn и dn меняются местами
    sn_r = sn / param.arg_scale
    return sn_r, dn, cn, math.atan2(sn_r, dn)


def jacobi_sn_cn_dn(u: float, m: float) -> Tuple[float, float, float]:
    """
    Тройка (sn, cn, dn)(u | m).

    Args:
        u: Вещественный аргумент
        m: Параметр m = k² (модуль i соответствует m = -1, модуль √2 - m = 2)

    Returns:
        (sn, cn, dn) с sn² + cn² = 1 и dn² + m·sn² = 1

    Raises:
        EllipticDomainError: Аргумент вне окна вещественности
    """
    sn, cn, dn, _ = _evaluate(float(u), float(m))
    return sn, cn, dn


def jacobi_am(u: float, m: float) -> float:
    """Амплитуда am(u | m): непрерывная ветвь с am(0) = 0 и am' = dn."""
    return _evaluate(float(u), float(m))[3]


# ==================== ОРАКУЛ ====================

def _oracle_rhs(m: float, direction: float):
    def rhs(_t: float, y: np.ndarray) -> np.ndarray:
        sn, cn, dn = y[0], y[1], y[2]
        return direction * np.array([cn * dn, -sn * dn, -m * sn * cn, dn])
    return rhs


def _oracle_trajectory(m: float, length: float, direction: float, tol: float):
    solver = DormandPrinceSolver(rtol=tol, atol=tol)
    return solver.integrate(_oracle_rhs(m, direction), 0.0, (0.0, 1.0, 1.0, 0.0), length)


def _oracle_state(u: float, m: float, tol: float) -> np.ndarray:
    if not tol > 0:
        raise ValueError(f"Допуск оракула должен быть положительным, получено {tol!r}")
    if u == 0.0:
        return np.array([0.0, 1.0, 1.0, 0.0])
    direction = 1.0 if u > 0 else -1.0
    traj = _oracle_trajectory(m, abs(u), direction, tol)
    return traj.states[-1]


def oracle_jacobi(u: float, m: float, tol: float = 1e-12) -> Tuple[float, float, float]:
    """
    Независимый оракул: интегрирование sn' = cn·dn, cn' = -sn·dn,
    dn' = -m·sn·cn из (0, 1, 1) до u.

    Raises:
        StepSizeUnderflowError: Дробление шага
    """
    state = _oracle_state(float(u), float(m), tol)
    return float(state[0]), float(state[1]), float(state[2])


def oracle_am(u: float, m: float, tol: float = 1e-12) -> float:
    """Амплитуда из того же интегрирования с дополнительным уравнением φ' = dn."""
    return float(_oracle_state(float(u), float(m), tol)[3])


def oracle_jacobi_grid(us: Sequence[float], m: float, tol: float = 1e-12) -> np.ndarray:
    """
    Оракул на сетке: одно интегрирование вправо и одно влево с плотным выходом.

    Returns:
        Массив (len(us), 4): столбцы sn, cn, dn, am
    """
    us = np.asarray(us, dtype=float)
    result = np.tile([0.0, 1.0, 1.0, 0.0], (us.size, 1))
    for direction in (1.0, -1.0):
        mask = direction * us > 0.0
        if not np.any(mask):
            continue
        reach = float(np.max(direction * us[mask]))
        traj = _oracle_trajectory(float(m), reach, direction, tol)
        for i in np.flatnonzero(mask):
            result[i] = traj.at(min(direction * us[i], traj.t_end))
    return result
