"""
Узлы дерева выражения нелинейности N(w).
Все узлы - неизменяемые dataclass, поэтому деревья можно сравнивать и хешировать.
"""

import math
from dataclasses import dataclass
from typing import Tuple, Union


# Примитивы класса мультипликативности и известные не-члены/неизвестные
MEMBER_PRIMITIVES = frozenset({
    "sin", "tan", "sinh", "tanh", "arcsin", "arctan", "arcsinh", "arctanh", "ln1p",
})
OTHER_FUNCTIONS = frozenset({
    "exp", "ln", "cos", "cosh", "cot", "coth", "arccos", "arccot", "arccosh", "arccoth",
})
FUNCTIONS = MEMBER_PRIMITIVES | OTHER_FUNCTIONS


@dataclass(frozen=True)
class Var:
    """Независимая переменная (w для нелинейности, t для правой части)."""

    name: str = "w"


@dataclass(frozen=True)
class Const:
    """Вещественная константа."""

    value: float

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"Константа должна быть конечной, получено {self.value!r}")


@dataclass(frozen=True)
class Add:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Sub:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Neg:
    """Унарный минус. Отрицание константы всегда сворачивается в Const."""

    operand: "Node"

    def __post_init__(self):
        if isinstance(self.operand, Const):
            raise ValueError("Neg(Const) запрещён: используйте Const(-c)")


@dataclass(frozen=True)
class Mul:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Div:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    """Целая степень."""

    base: "Node"
    exponent: int

    def __post_init__(self):
        if isinstance(self.exponent, bool) or not isinstance(self.exponent, int):
            raise ValueError(f"Показатель Pow должен быть целым, получено {self.exponent!r}")


@dataclass(frozen=True)
class RealPow:
    """Вещественная степень (база должна быть неотрицательной)."""

    base: "Node"
    exponent: float

    def __post_init__(self):
        if not math.isfinite(self.exponent):
            raise ValueError(f"Показатель RealPow должен быть конечным, получено {self.exponent!r}")


@dataclass(frozen=True)
class Func:
    """Унарный примитив: sin, tanh, ln1p (= ln(1+·)) и т.д."""

    name: str
    arg: "Node"

    def __post_init__(self):
        if self.name not in FUNCTIONS:
            raise ValueError(f"Неизвестная функция '{self.name}'")


Node = Union[Var, Const, Add, Sub, Neg, Mul, Div, Pow, RealPow, Func]
BINARY = (Add, Sub, Mul, Div)


def children(node: Node) -> Tuple[Node, ...]:
    """Дочерние узлы в порядке объявления."""
    if isinstance(node, BINARY):
        return (node.left, node.right)
    if isinstance(node, Neg):
        return (node.operand,)
    if isinstance(node, (Pow, RealPow)):
        return (node.base,)
    if isinstance(node, Func):
        return (node.arg,)
    return ()


@dataclass(frozen=True)
class NonlinExpr:
    """Нелинейность N как дерево выражения над одной переменной."""

    root: Node
    variable: str = "w"

    def __str__(self) -> str:
        # Отложенный импорт: печать живёт в expr.py
        from expr import print_nonlin
        return print_nonlin(self)

    def nodes(self):
        """Обход дерева в глубину (префиксный порядок)."""
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(children(node)))
