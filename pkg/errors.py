"""
Исключения библиотеки нелинейных функций Грина.

Ошибки аргументов и областей определения наследуются от ValueError,
численные сбои (дробление шага, взрыв решения) - от RuntimeError.
"""

from typing import Any, Optional, Tuple


class GreenToolkitError(Exception):
    """Базовый класс всех ошибок пакета."""


# ==================== ВЫРАЖЕНИЯ ====================

class ExpressionError(GreenToolkitError, ValueError):
    """Ошибка разбора или построения выражения N(w)."""


class ExpressionSyntaxError(ExpressionError):
    """Синтаксическая ошибка с байтовым смещением в исходном тексте."""

    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} (смещение {offset})")


class UnknownFunctionError(ExpressionSyntaxError):
    """Неизвестное имя функции."""

    def __init__(self, name: str, offset: int):
        self.name = name
        super().__init__(f"Неизвестная функция '{name}'", offset)


class ArityError(ExpressionSyntaxError):
    """Неверное число аргументов функции."""

    def __init__(self, name: str, count: int, offset: int):
        self.name = name
        self.count = count
        super().__init__(
            f"Функция '{name}' принимает ровно 1 аргумент, передано {count}", offset
        )


class DomainViolationError(ExpressionError):
    """Значение вне области определения узла выражения."""

    def __init__(self, node: Any, value: float, reason: str = ""):
        self.node = node
        self.value = value
        detail = f": {reason}" if reason else ""
        super().__init__(f"Нарушение области определения в узле {node} при аргументе {value!r}{detail}")


class NotDifferentiableError(ExpressionError):
    """Нелинейность не дифференцируема нужное число раз в точке разложения."""


class MembershipError(GreenToolkitError, ValueError):
    """Нелинейность не принадлежит классу мультипликативности."""


class HierarchyConstraintError(GreenToolkitError, ValueError):
    """Параметры иерархии нарушают ограничение семейства."""

    def __init__(self, family: str, constraint: str):
        self.family = family
        self.constraint = constraint
        super().__init__(f"Семейство '{family}': нарушено ограничение {constraint}")


# ==================== ЭЛЛИПТИЧЕСКИЕ ФУНКЦИИ ====================

class EllipticDomainError(GreenToolkitError, ValueError):
    """Аргумент вне вещественного окна редукции параметра."""

    def __init__(self, message: str, window: Tuple[float, float]):
        self.window = window
        super().__init__(f"{message}; допустимое окно: [{window[0]}, {window[1]}]")


# ==================== ИНТЕГРИРОВАНИЕ ====================

class StepSizeUnderflowError(GreenToolkitError, RuntimeError):
    """Шаг интегратора стал меньше машинного разрешения."""

    def __init__(self, t_reached: float, trajectory: Optional[Any] = None, reason: str = ""):
        self.t_reached = t_reached
        self.trajectory = trajectory
        detail = f" ({reason})" if reason else ""
        super().__init__(f"Шаг интегрирования исчез при t = {t_reached!r}{detail}")


class GreenBlowUpError(GreenToolkitError, RuntimeError):
    """Однородное решение не дошло до горизонта."""

    def __init__(self, t_reached: float, partial: Optional[Any] = None):
        self.t_reached = t_reached
        self.partial = partial
        super().__init__(f"Решение разрушилось до горизонта, достигнуто t = {t_reached!r}")


class QuadratureError(GreenToolkitError, RuntimeError):
    """Неконечное значение подынтегральной функции или отсутствие сходимости."""


# ==================== ФУНКЦИИ ГРИНА И РАЗЛОЖЕНИЕ ====================

class CatalogError(GreenToolkitError, ValueError):
    """Неизвестная запись каталога или несовместимый масштаб s."""


class FitError(GreenToolkitError, ValueError):
    """Не удалось определить коэффициенты разложения выбранной стратегией."""

    def __init__(self, strategy: str, message: str):
        self.strategy = strategy
        super().__init__(f"Стратегия '{strategy}': {message}")


class ConfigError(GreenToolkitError, ValueError):
    """Некорректное значение настройки."""
