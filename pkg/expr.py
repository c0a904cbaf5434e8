"""
Выражения нелинейности N(w): разбор, печать, вычисление, дифференцирование
и проверка принадлежности классу мультипликативности N(θ·w) = θ·N(w).

Грамматика (приоритет: степень > применение функции > умножение/деление > сумма):

    expr     := term (('+' | '-') term)*
    term     := unary (('*' | '/') unary)*
    unary    := '-' unary | '+' unary | power
    power    := primary ('^' exponent)?
    primary  := number | variable | name '(' expr ')' | '(' expr ')'
    exponent := '-'? number | '(' '-'? number ')'

Смещения в сообщениях об ошибках - байтовые позиции в UTF-8, считая с 1.
"""

import math
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from errors import (
    ArityError, DomainViolationError, ExpressionSyntaxError, HierarchyConstraintError,
    UnknownFunctionError,
)
from models import (
    Add, Const, Div, Func, Mul, Neg, NonlinExpr, Pow, RealPow, Sub, Var,
    MEMBER_PRIMITIVES, MembershipVerdict, Witness,
)
from models.nodes import FUNCTIONS, Node


DEFAULT_SEED = 20180521
PARSE_FUNCTIONS = FUNCTIONS - {"ln1p"}
_MINUS_SIGNS = ("-", "−")


# ==================== РАЗБОР ====================

def _tokenize(source: str) -> List[Tuple[str, str, int]]:
    """Разбить текст на лексемы (вид, текст, байтовое смещение с 1)."""
    tokens = []
    i = 0
    n = len(source)

    def offset(index: int) -> int:
        return len(source[:index].encode("utf-8")) + 1

    while i < n:
        ch = source[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and source[i + 1].isdigit()):
            start = i
            while i < n and source[i].isdigit():
                i += 1
            if i < n and source[i] == ".":
                i += 1
                while i < n and source[i].isdigit():
                    i += 1
            if i < n and source[i] in "eE":
                j = i + 1
                if j < n and source[j] in "+-":
                    j += 1
                if j < n and source[j].isdigit():
                    i = j
                    while i < n and source[i].isdigit():
                        i += 1
            tokens.append(("number", source[start:i], offset(start)))
            continue
        if ch.isalpha() or ch == "_":
            start = i
            while i < n and (source[i].isalnum() or source[i] == "_"):
                i += 1
            tokens.append(("name", source[start:i], offset(start)))
            continue
        if ch in _MINUS_SIGNS:
            tokens.append(("op", "-", offset(i)))
            i += 1
            continue
        if ch in "+*/^(),":
            tokens.append(("op", ch, offset(i)))
            i += 1
            continue
        raise ExpressionSyntaxError(f"Недопустимый символ '{ch}'", offset(i))
    tokens.append(("end", "", offset(n)))
    return tokens


class _Parser:
    """Рекурсивный спуск по грамматике модуля."""

    def __init__(self, source: str, variable: str):
        self.tokens = _tokenize(source)
        self.pos = 0
        self.variable = variable

    def peek(self) -> Tuple[str, str, int]:
        return self.tokens[self.pos]

    def advance(self) -> Tuple[str, str, int]:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def is_op(self, symbol: str) -> bool:
        kind, text, _ = self.peek()
        return kind == "op" and text == symbol

    def expect(self, symbol: str) -> None:
        kind, text, offset = self.peek()
        if kind == "op" and text == symbol:
            self.pos += 1
            return
        if kind == "end":
            raise ExpressionSyntaxError(f"Неожиданный конец выражения, ожидалось '{symbol}'", offset)
        raise ExpressionSyntaxError(f"Ожидалось '{symbol}', найдено '{text}'", offset)

    def parse(self) -> Node:
        kind, _, offset = self.peek()
        if kind == "end":
            raise ExpressionSyntaxError("Пустое выражение", offset)
        node = self.expr()
        kind, text, offset = self.peek()
        if kind != "end":
            raise ExpressionSyntaxError(f"Лишний символ '{text}'", offset)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.is_op("+") or self.is_op("-"):
            _, op, _ = self.advance()
            right = self.term()
            node = Add(node, right) if op == "+" else Sub(node, right)
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.is_op("*") or self.is_op("/"):
            _, op, _ = self.advance()
            right = self.unary()
            node = Mul(node, right) if op == "*" else Div(node, right)
        return node

    def unary(self) -> Node:
        if self.is_op("-"):
            self.advance()
            operand = self.unary()
            if isinstance(operand, Const):
                return Const(-operand.value)
            return Neg(operand)
        if self.is_op("+"):
            self.advance()
            return self.unary()
        return self.power()

    def power(self) -> Node:
        base = self.primary()
        if self.is_op("^"):
            self.advance()
            return self.exponent(base)
        return base

    def exponent(self, base: Node) -> Node:
        parenthesized = self.is_op("(")
        if parenthesized:
            self.advance()
        sign = 1
        if self.is_op("-"):
            self.advance()
            sign = -1
        kind, text, offset = self.advance()
        if kind != "number":
            if kind == "end":
                raise ExpressionSyntaxError("Неожиданный конец выражения, ожидался показатель степени", offset)
            raise ExpressionSyntaxError(f"Показатель степени должен быть числом, найдено '{text}'", offset)
        if parenthesized:
            self.expect(")")
        if any(c in text for c in ".eE"):
            value = sign * float(text)
            if not math.isfinite(value):
                raise ExpressionSyntaxError(f"Показатель '{text}' не является конечным числом", offset)
            return RealPow(base, value)
        return Pow(base, sign * int(text))

    def primary(self) -> Node:
        kind, text, offset = self.advance()
        if kind == "number":
            value = float(text)
            if not math.isfinite(value):
                raise ExpressionSyntaxError(f"Литерал '{text}' не является конечным числом", offset)
            return Const(value)
        if kind == "name":
            if text == self.variable:
                if self.is_op("("):
                    raise ExpressionSyntaxError(f"Переменная '{text}' не является функцией", self.peek()[2])
                return Var(self.variable)
            if text not in PARSE_FUNCTIONS:
                raise UnknownFunctionError(text, offset)
            if not self.is_op("("):
                raise ExpressionSyntaxError(f"Ожидалось '(' после '{text}'", self.peek()[2])
            self.advance()
            args = []
            if not self.is_op(")"):
                args.append(self.expr())
                while self.is_op(","):
                    self.advance()
                    args.append(self.expr())
            self.expect(")")
            if len(args) != 1:
                raise ArityError(text, len(args), offset)
            return func(text, args[0])
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "end":
            raise ExpressionSyntaxError("Неожиданный конец выражения", offset)
        raise ExpressionSyntaxError(f"Неожиданный символ '{text}'", offset)


def parse_nonlin(source: str, variable: str = "w") -> NonlinExpr:
    """
    Разбор текста в дерево выражения.

    Args:
        source: Текст выражения, например "sinh(w)^2 * tanh(w) + w^4"
        variable: Имя переменной ("w" для N, "t" для правой части)

    Returns:
        Объект NonlinExpr

    Raises:
        ExpressionSyntaxError: Синтаксическая ошибка (со смещением)
        UnknownFunctionError: Неизвестное имя функции
        ArityError: Неверное число аргументов
    """
    return NonlinExpr(_Parser(source, variable).parse(), variable)


# ==================== ПЕЧАТЬ ====================

def _format_number(value: float) -> str:
    if value.is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def _precedence(node: Node) -> int:
    if isinstance(node, (Add, Sub)):
        return 1
    if isinstance(node, (Mul, Div)):
        return 2
    if isinstance(node, Neg) or (isinstance(node, Const) and node.value < 0):
        return 3
    if isinstance(node, (Pow, RealPow)):
        return 4
    return 5


def _print(node: Node) -> str:
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Const):
        if node.value < 0:
            return "-" + _format_number(-node.value)
        return _format_number(node.value)
    if isinstance(node, (Add, Sub, Mul, Div)):
        own = _precedence(node)
        left = _wrap(node.left, _precedence(node.left) < own)
        right = _wrap(node.right, _precedence(node.right) <= own)
        if isinstance(node, Add):
            return f"{left} + {right}"
        if isinstance(node, Sub):
            return f"{left} - {right}"
        if isinstance(node, Mul):
            return f"{left}*{right}"
        return f"{left}/{right}"
    if isinstance(node, Neg):
        return "-" + _wrap(node.operand, _precedence(node.operand) < 3)
    if isinstance(node, Pow):
        return f"{_wrap(node.base, _precedence(node.base) <= 4)}^{node.exponent}"
    if isinstance(node, RealPow):
        return f"{_wrap(node.base, _precedence(node.base) <= 4)}^{node.exponent!r}"
    if node.name == "ln1p":
        return f"ln(1 + {_wrap(node.arg, _precedence(node.arg) <= 1)})"
    return f"{node.name}({_print(node.arg)})"


def _wrap(node: Node, parenthesize: bool) -> str:
    text = _print(node)
    return f"({text})" if parenthesize else text


def print_nonlin(expr: NonlinExpr) -> str:
    """Каноническая запись выражения; parse_nonlin(print_nonlin(e)) == e."""
    return _print(expr.root)


# ==================== КОНСТРУКТОРЫ С УПРОЩЕНИЕМ ====================

def _is_const(node: Node, value: Optional[float] = None) -> bool:
    return isinstance(node, Const) and (value is None or node.value == value)


def func(name: str, arg: Node) -> Node:
    """Применение функции; ln(1 + Y) и ln(Y + 1) распознаются как ln1p(Y)."""
    if name == "ln" and isinstance(arg, Add):
        if _is_const(arg.left, 1.0):
            return Func("ln1p", arg.right)
        if _is_const(arg.right, 1.0):
            return Func("ln1p", arg.left)
    return Func(name, arg)


def add(a: Node, b: Node) -> Node:
    if _is_const(a) and _is_const(b):
        return Const(a.value + b.value)
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    return Add(a, b)


def sub(a: Node, b: Node) -> Node:
    if _is_const(a) and _is_const(b):
        return Const(a.value - b.value)
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return neg(b)
    return Sub(a, b)


def neg(a: Node) -> Node:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.operand
    return Neg(a)


def mul(a: Node, b: Node) -> Node:
    if _is_const(a) and _is_const(b):
        return Const(a.value * b.value)
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return Const(0.0)
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    if _is_const(a, -1.0):
        return neg(b)
    if _is_const(b, -1.0):
        return neg(a)
    return Mul(a, b)


def div(a: Node, b: Node) -> Node:
    if _is_const(a, 0.0):
        return Const(0.0)
    if _is_const(b, 1.0):
        return a
    if _is_const(a) and _is_const(b) and b.value != 0.0:
        return Const(a.value / b.value)
    return Div(a, b)


def power(a: Node, n: int) -> Node:
    if n == 0:
        return Const(1.0)
    if n == 1:
        return a
    if _is_const(a) and (a.value != 0.0 or n > 0):
        return Const(a.value ** n)
    return Pow(a, n)


def real_power(a: Node, p: float) -> Node:
    if p == 0.0:
        return Const(1.0)
    if p == 1.0:
        return a
    return RealPow(a, p)


# ==================== ВЫЧИСЛЕНИЕ ====================

def _theta(t: float) -> float:
    """Функция Хевисайда с θ(0) = 0."""
    return 1.0 if t > 0.0 else 0.0


def _apply(node: Func, a: float) -> float:
    name = node.name
    try:
        if name == "sin":
            return math.sin(a)
        if name == "cos":
            return math.cos(a)
        if name == "tan":
            return math.tan(a)
        if name == "cot":
            s = math.sin(a)
            if s == 0.0:
                raise DomainViolationError(node, a, "cot не определён при sin = 0")
            return math.cos(a) / s
        if name == "sinh":
            return math.sinh(a)
        if name == "cosh":
            return math.cosh(a)
        if name == "tanh":
            return math.tanh(a)
        if name == "coth":
            if a == 0.0:
                raise DomainViolationError(node, a, "coth не определён в нуле")
            return 1.0 / math.tanh(a)
        if name == "exp":
            return math.exp(a)
        if name in ("arcsin", "arccos"):
            if abs(a) > 1.0:
                raise DomainViolationError(node, a, "требуется |w| <= 1")
            return math.asin(a) if name == "arcsin" else math.acos(a)
        if name == "arctan":
            return math.atan(a)
        if name == "arccot":
            return 0.5 * math.pi - math.atan(a)
        if name == "arcsinh":
            return math.asinh(a)
        if name == "arccosh":
            if a < 1.0:
                raise DomainViolationError(node, a, "требуется w >= 1")
            return math.acosh(a)
        if name == "arctanh":
            if abs(a) >= 1.0:
                raise DomainViolationError(node, a, "требуется |w| < 1")
            return math.atanh(a)
        if name == "arccoth":
            if abs(a) <= 1.0:
                raise DomainViolationError(node, a, "требуется |w| > 1")
            return math.atanh(1.0 / a)
        if name == "ln1p":
            if a <= -1.0:
                raise DomainViolationError(node, a, "требуется w > -1")
            return math.log1p(a)
        if name == "ln":
            if a <= 0.0:
                raise DomainViolationError(node, a, "требуется w > 0")
            return math.log(a)
    except OverflowError:
        raise DomainViolationError(node, a, "переполнение")
    raise DomainViolationError(node, a, "неизвестная функция")


def _eval(node: Node, x: float, depth: int = 0) -> float:
    if isinstance(node, Var):
        return x
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Add):
        result = _eval(node.left, x, depth) + _eval(node.right, x, depth)
    elif isinstance(node, Sub):
        result = _eval(node.left, x, depth) - _eval(node.right, x, depth)
    elif isinstance(node, Neg):
        result = -_eval(node.operand, x, depth)
    elif isinstance(node, Mul):
        result = _eval(node.left, x, depth) * _eval(node.right, x, depth)
    elif isinstance(node, Div):
        den = _eval(node.right, x, depth)
        if den == 0.0:
            return _removable_limit(node, x, depth)
        result = _eval(node.left, x, depth) / den
    elif isinstance(node, Pow):
        base = _eval(node.base, x, depth)
        if base == 0.0 and node.exponent < 0:
            raise DomainViolationError(node, x, "отрицательная степень нуля")
        try:
            result = base ** node.exponent
        except OverflowError:
            raise DomainViolationError(node, x, "переполнение")
    elif isinstance(node, RealPow):
        base = _eval(node.base, x, depth)
        if base < 0.0 or (base == 0.0 and node.exponent < 0):
            raise DomainViolationError(node, x, "вещественная степень требует неотрицательного основания")
        try:
            result = base ** node.exponent
        except OverflowError:
            raise DomainViolationError(node, x, "переполнение")
    else:
        result = _apply(node, _eval(node.arg, x, depth))
    if not math.isfinite(result):
        raise DomainViolationError(node, x, "неконечное значение")
    return result


def _removable_limit(node: Div, x: float, depth: int) -> float:
    """Предел частного при нулевом знаменателе (правило Лопиталя по порядкам нулей)."""
    if depth >= 3:
        raise DomainViolationError(node, x, "деление на ноль")
    num = _eval(node.left, x, depth + 1)
    if num != 0.0:
        raise DomainViolationError(node, x, "деление на ноль")
    q = _order_at(node.right, x, 12, depth + 1)
    if q is None:
        raise DomainViolationError(node, x, "знаменатель тождественно равен нулю")
    p = _order_at(node.left, x, q, depth + 1)
    if p is not None and p < q:
        raise DomainViolationError(node, x, f"порядок нуля числителя {p} меньше порядка знаменателя {q}")
    if p is None or p > q:
        return 0.0
    top = _eval(_nth_derivative(node.left, q), x, depth + 1)
    bottom = _eval(_nth_derivative(node.right, q), x, depth + 1)
    return top / bottom


def eval_nonlin(expr: NonlinExpr, w: float) -> float:
    """
    Значение N(w).

    Raises:
        DomainViolationError: w вне области определения (с указанием узла)
    """
    return _eval(expr.root, float(w))


def compile_nonlin(expr: NonlinExpr) -> Callable[[float], float]:
    """Вызываемая функция w -> N(w) для интеграторов."""
    root = expr.root
    return lambda w: _eval(root, w)


# ==================== ДИФФЕРЕНЦИРОВАНИЕ ====================

def _outer_derivative(name: str, u: Node) -> Node:
    one = Const(1.0)
    if name == "sin":
        return Func("cos", u)
    if name == "cos":
        return neg(Func("sin", u))
    if name == "tan":
        return add(one, Pow(Func("tan", u), 2))
    if name == "cot":
        return neg(add(one, Pow(Func("cot", u), 2)))
    if name == "sinh":
        return Func("cosh", u)
    if name == "cosh":
        return Func("sinh", u)
    if name == "tanh":
        return sub(one, Pow(Func("tanh", u), 2))
    if name == "coth":
        return sub(one, Pow(Func("coth", u), 2))
    if name == "exp":
        return Func("exp", u)
    if name == "arcsin":
        return div(one, RealPow(sub(one, Pow(u, 2)), 0.5))
    if name == "arccos":
        return neg(div(one, RealPow(sub(one, Pow(u, 2)), 0.5)))
    if name == "arctan":
        return div(one, add(one, Pow(u, 2)))
    if name == "arccot":
        return neg(div(one, add(one, Pow(u, 2))))
    if name == "arcsinh":
        return div(one, RealPow(add(Pow(u, 2), one), 0.5))
    if name == "arccosh":
        return div(one, RealPow(sub(Pow(u, 2), one), 0.5))
    if name in ("arctanh", "arccoth"):
        return div(one, sub(one, Pow(u, 2)))
    if name == "ln1p":
        return div(one, add(one, u))
    # ln
    return div(one, u)


def _diff(node: Node) -> Node:
    if isinstance(node, Var):
        return Const(1.0)
    if isinstance(node, Const):
        return Const(0.0)
    if isinstance(node, Add):
        return add(_diff(node.left), _diff(node.right))
    if isinstance(node, Sub):
        return sub(_diff(node.left), _diff(node.right))
    if isinstance(node, Neg):
        return neg(_diff(node.operand))
    if isinstance(node, Mul):
        return add(mul(_diff(node.left), node.right), mul(node.left, _diff(node.right)))
    if isinstance(node, Div):
        top = sub(mul(_diff(node.left), node.right), mul(node.left, _diff(node.right)))
        return div(top, power(node.right, 2))
    if isinstance(node, Pow):
        n = node.exponent
        return mul(mul(Const(float(n)), power(node.base, n - 1)), _diff(node.base))
    if isinstance(node, RealPow):
        p = node.exponent
        return mul(mul(Const(p), real_power(node.base, p - 1.0)), _diff(node.base))
    return mul(_outer_derivative(node.name, node.arg), _diff(node.arg))


def _nth_derivative(node: Node, n: int) -> Node:
    for _ in range(n):
        node = _diff(node)
    return node


def diff_nonlin(expr: NonlinExpr) -> NonlinExpr:
    """
    Символьная производная dN/dw.

    Returns:
        Новое выражение NonlinExpr (область определения наследуется)
    """
    return NonlinExpr(_diff(expr.root), expr.variable)


def derivatives_at(expr: NonlinExpr, w: float, order: int) -> List[float]:
    """Значения N(w), N'(w), ..., N^(order)(w)."""
    values = []
    node = expr.root
    for j in range(order + 1):
        if j:
            node = _diff(node)
        values.append(_eval(node, float(w)))
    return values


def _order_at(node: Node, x: float, max_order: int, depth: int = 0) -> Optional[int]:
    current = node
    for j in range(max_order + 1):
        if j:
            current = _diff(current)
        if _eval(current, x, depth) != 0.0:
            return j
    return None


def vanishing_order(expr: NonlinExpr, at: float = 0.0, max_order: int = 12) -> Optional[int]:
    """Порядок нуля N в точке at (None, если все производные до max_order нулевые)."""
    return _order_at(expr.root, float(at), max_order)


# ==================== ПЕРВООБРАЗНАЯ ====================

def _antiderivative(node: Node) -> Optional[Node]:
    w = Var("w")
    if isinstance(node, Const):
        return mul(node, w)
    if isinstance(node, Var):
        return Mul(Const(0.5), Pow(node, 2))
    if isinstance(node, Pow) and isinstance(node.base, Var) and node.exponent != -1:
        n = node.exponent
        return mul(Const(1.0 / (n + 1)), power(node.base, n + 1))
    if isinstance(node, RealPow) and isinstance(node.base, Var) and node.exponent != -1.0:
        p = node.exponent
        return mul(Const(1.0 / (p + 1.0)), RealPow(node.base, p + 1.0))
    if isinstance(node, Func) and isinstance(node.arg, Var):
        u = node.arg
        table = {
            "sin": lambda: neg(Func("cos", u)),
            "cos": lambda: Func("sin", u),
            "sinh": lambda: Func("cosh", u),
            "cosh": lambda: Func("sinh", u),
            "exp": lambda: Func("exp", u),
            "tanh": lambda: Func("ln", Func("cosh", u)),
            "tan": lambda: neg(Func("ln", Func("cos", u))),
        }
        builder = table.get(node.name)
        return builder() if builder else None
    if isinstance(node, (Add, Sub)):
        left, right = _antiderivative(node.left), _antiderivative(node.right)
        if left is None or right is None:
            return None
        return add(left, right) if isinstance(node, Add) else sub(left, right)
    if isinstance(node, Neg):
        inner = _antiderivative(node.operand)
        return None if inner is None else neg(inner)
    if isinstance(node, Mul):
        if isinstance(node.left, Const):
            inner = _antiderivative(node.right)
            return None if inner is None else mul(node.left, inner)
        if isinstance(node.right, Const):
            inner = _antiderivative(node.left)
            return None if inner is None else mul(node.right, inner)
    if isinstance(node, Div) and isinstance(node.right, Const) and node.right.value != 0.0:
        inner = _antiderivative(node.left)
        return None if inner is None else div(inner, node.right)
    return None


def antiderivative(expr: NonlinExpr) -> Optional[NonlinExpr]:
    """Символьная первообразная для простых сумм; None, если правило не найдено."""
    if expr.variable != "w":
        return None
    result = _antiderivative(expr.root)
    return None if result is None else NonlinExpr(result, expr.variable)


# ==================== ПРИНАДЛЕЖНОСТЬ КЛАССУ ====================

def _structural(node: Node, trace: List[str]) -> bool:
    """Структурный проход: примитивы и правила замыкания."""
    if isinstance(node, Var):
        trace.append("примитив w^n (n=1)")
        return True
    if isinstance(node, Const):
        if node.value == 0.0:
            trace.append("нулевая константа")
            return True
        return False
    if isinstance(node, Pow):
        if node.exponent < 1:
            return False
        if isinstance(node.base, Var):
            trace.append(f"примитив w^n (n={node.exponent})")
            return True
        if _structural(node.base, trace):
            trace.append(f"замыкание: целая степень {node.exponent}")
            return True
        return False
    if isinstance(node, Func):
        if node.name not in MEMBER_PRIMITIVES:
            return False
        if isinstance(node.arg, Var):
            trace.append(f"примитив {node.name}")
            return True
        if _structural(node.arg, trace):
            trace.append(f"замыкание: композиция {node.name}(член класса)")
            return True
        return False
    if isinstance(node, (Add, Sub)):
        if _structural(node.left, trace) and _structural(node.right, trace):
            trace.append("замыкание: линейная комбинация")
            return True
        return False
    if isinstance(node, Neg):
        if _structural(node.operand, trace):
            trace.append("замыкание: линейная комбинация (смена знака)")
            return True
        return False
    if isinstance(node, Mul):
        for const, other in ((node.left, node.right), (node.right, node.left)):
            if isinstance(const, Const) and const.value != 0.0:
                if _structural(other, trace):
                    trace.append("замыкание: линейная комбинация (постоянный множитель)")
                    return True
                return False
        if _structural(node.left, trace) and _structural(node.right, trace):
            trace.append("замыкание: произведение")
            return True
        return False
    if isinstance(node, Div):
        if isinstance(node.right, Const):
            if node.right.value != 0.0 and _structural(node.left, trace):
                trace.append("замыкание: линейная комбинация (деление на константу)")
                return True
            return False
        if not (_structural(node.left, trace) and _structural(node.right, trace)):
            return False
        try:
            q = _order_at(node.right, 0.0, 12)
            p = _order_at(node.left, 0.0, 12) if q is not None else None
        except DomainViolationError:
            return False
        # при p == q предел в нуле ненулевой и N(0) != 0
        if q is None or (p is not None and p <= q):
            return False
        trace.append(f"замыкание: частное (порядок нуля числителя {p if p is not None else '>12'} > {q})")
        return True
    return False


def _has_real_power(expr: NonlinExpr) -> bool:
    return any(isinstance(node, RealPow) for node in expr.nodes())


def _symmetric_grid(points: int) -> np.ndarray:
    grid = np.linspace(-1.0, 1.0, points if points % 2 == 0 else points + 1)
    return grid[grid != 0.0]


def identity_residual(expr: NonlinExpr, coeffs: Sequence[float], grid: Sequence[float],
                      nonnegative: bool = False, scale: float = 1.0) -> Tuple[float, float, float]:
    """
    Невязка тождества |N(θ(t)·w(t)) - θ(t)·N(w(t))| вдоль пути w(t) = scale·t·(c0 + c1·t + c2·t²).

    Returns:
        Кортеж (максимальная невязка, t в точке максимума, max|N(w(t))|)

    Raises:
        DomainViolationError: Путь выходит из области определения N
    """
    witness = Witness(0.0, tuple(float(c) * scale for c in coeffs), 0.0, nonnegative)
    worst, t_worst, n_max = 0.0, float(grid[0]), 0.0
    for t in grid:
        t = float(t)
        w = witness.path(t)
        n_w = _eval(expr.root, w)
        n_theta = _eval(expr.root, _theta(t) * w)
        residual = abs(n_theta - _theta(t) * n_w)
        n_max = max(n_max, abs(n_w))
        if residual > worst:
            worst, t_worst = residual, t
    return worst, t_worst, n_max


def witness_residual(expr: NonlinExpr, witness: Witness) -> float:
    """Повторное вычисление невязки тождества в точке-свидетеле."""
    t = witness.t
    w = witness.path(t)
    return abs(_eval(expr.root, _theta(t) * w) - _theta(t) * _eval(expr.root, w))


def check_membership(expr: NonlinExpr, tol: float = 1e-9, samples: int = 8,
                     seed: int = DEFAULT_SEED, grid_points: int = 200) -> MembershipVerdict:
    """
    Проверка N(θ·w) = θ·N(w).

    Сначала структурный проход (примитивы и правила замыкания), затем
    численный: необходимое условие N(0) = 0 и проверка тождества на
    случайных гладких путях с w(0) = 0 при t ∈ [-1, 1].

    Args:
        expr: Нелинейность
        tol: Допуск численной проверки (> 0)
        samples: Число тестовых путей (>= 1)
        seed: Зерно генератора коэффициентов путей
        grid_points: Число узлов сетки по t (0 исключается)

    Returns:
        MembershipVerdict
    """
    if not tol > 0:
        raise ValueError(f"Допуск должен быть положительным, получено {tol!r}")
    if samples < 1:
        raise ValueError(f"Число путей должно быть >= 1, получено {samples!r}")

    trace: List[str] = []
    if _structural(expr.root, trace):
        return MembershipVerdict("member-structural", rule_trace=tuple(trace))

    nonnegative = _has_real_power(expr)
    notes = []
    if nonnegative:
        notes.append("вещественная степень: проверка только на путях w(t) >= 0, утверждение не доказано")

    grid = _symmetric_grid(grid_points)
    rng = np.random.default_rng(seed)
    paths = [tuple(float(c) for c in rng.uniform(-2.0, 2.0, 3)) for _ in range(samples)]

    try:
        n_zero = _eval(expr.root, 0.0)
    except DomainViolationError as e:
        notes.append(f"N(0) не определено: {e}")
        return MembershipVerdict("unknown", notes=tuple(notes), paths_skipped=samples)

    if abs(n_zero) > tol:
        # При t < 0 тождество сводится к N(0) = 0
        for coeffs in paths:
            for t in grid[grid < 0.0]:
                witness = Witness(float(t), coeffs, abs(n_zero), nonnegative)
                try:
                    residual = witness_residual(expr, witness)
                except DomainViolationError:
                    continue
                notes.append(f"необходимое условие N(0) = 0 нарушено: N(0) = {n_zero!r}")
                return MembershipVerdict(
                    "non-member",
                    witness=Witness(float(t), coeffs, residual, nonnegative),
                    notes=tuple(notes),
                )
        notes.append(f"N(0) = {n_zero!r} != 0, но пути вне области определения")
        return MembershipVerdict("unknown", notes=tuple(notes), paths_skipped=samples)

    checked, skipped = 0, 0
    for coeffs in paths:
        try:
            worst, t_worst, n_max = identity_residual(expr, coeffs, grid, nonnegative)
        except DomainViolationError:
            skipped += 1
            continue
        checked += 1
        if worst > tol * (1.0 + n_max):
            return MembershipVerdict(
                "non-member",
                witness=Witness(t_worst, coeffs, worst, nonnegative),
                notes=tuple(notes),
                paths_checked=checked,
                paths_skipped=skipped,
            )

    if checked == 0:
        notes.append("все тестовые пути вышли из области определения")
        return MembershipVerdict("unknown", notes=tuple(notes), paths_skipped=skipped)
    return MembershipVerdict("member-numeric", notes=tuple(notes),
                             paths_checked=checked, paths_skipped=skipped)


def theta_power_identity(n: int, grid: Sequence[float]) -> bool:
    """
    Проверка θ^n(t) = θ(t) на сетке и биномиального тождества
    Σ_чёт C(n,k) = Σ_нечёт C(n,k) = 2^(n-1) в целой арифметике.

    θ^n вычисляется и напрямую, и через представление θ = (1 + sign)/2
    с разложением по биному Ньютона.
    """
    if n < 1:
        raise ValueError(f"n должно быть натуральным, получено {n!r}")
    if len(grid) == 0:
        raise ValueError("Сетка не должна быть пустой")
    if any(t == 0 for t in grid):
        raise ValueError("Сетка не должна содержать t = 0")

    for t in grid:
        theta = _theta(float(t))
        if theta ** n != theta:
            return False
        sign = 1 if t > 0 else -1
        binomial = Fraction(sum(math.comb(n, k) * sign ** k for k in range(n + 1)), 2 ** n)
        if binomial != theta:
            return False

    even = sum(math.comb(n, k) for k in range(0, n + 1, 2))
    odd = sum(math.comb(n, k) for k in range(1, n + 1, 2))
    return even == odd == 2 ** (n - 1)


# ==================== ИЕРАРХИИ ====================

_W = Var("w")


def _pw(node: Node, n: int) -> Node:
    return node if n == 1 else Pow(node, n)


def _signed(node: Node, sign: int) -> Node:
    return node if sign > 0 else neg(node)


def _combine(left: Node, right: Node, sign: int) -> Node:
    return Add(left, right) if sign > 0 else Sub(left, right)


def _sinh(n: int) -> Node:
    return _pw(Func("sinh", _W), n)


def _tanh(n: int) -> Node:
    return _pw(Func("tanh", _W), n)


def _power_family(first: Callable[[int], Node], second: Callable[[int], Node]):
    def build(params, signs):
        n, m, k = params
        return _signed(_pw(_combine(first(n), second(m), signs[1]), k), signs[0])
    return build


# семейство -> (число параметров, число знаков, построитель, ограничение на (n, m))
# частные требуют n > m: при n == m предел в нуле равен 1
HIERARCHIES: Dict[str, Tuple[int, int, Callable, Optional[str]]] = {
    "power": (1, 1, lambda p, s: _signed(_pw(_W, p[0]), s[0]), None),
    "power_sum": (2, 2, lambda p, s: _combine(_signed(_pw(_W, p[0]), s[0]), _pw(_W, p[1]), s[1]), None),
    "power_sum_power": (3, 2, _power_family(lambda n: _pw(_W, n), lambda m: _pw(_W, m)), None),
    "sinh_sinh_power": (3, 2, _power_family(_sinh, _sinh), None),
    "sinh_tanh_power": (3, 2, _power_family(_sinh, _tanh), None),
    "tanh_tanh_power": (3, 2, _power_family(_tanh, _tanh), None),
    "sinh_times_tanh": (2, 1, lambda p, s: _signed(Mul(_sinh(p[0]), _tanh(p[1])), s[0]), ">="),
    "sinh_over_tanh": (2, 1, lambda p, s: _signed(Div(_sinh(p[0]), _tanh(p[1])), s[0]), ">"),
    "sinh_plus_power": (2, 2, lambda p, s: _combine(_signed(_sinh(p[0]), s[0]), _pw(_W, p[1]), s[1]), None),
    "tanh_plus_power": (2, 2, lambda p, s: _combine(_signed(_tanh(p[0]), s[0]), _pw(_W, p[1]), s[1]), None),
    "sinh_times_power": (2, 1, lambda p, s: _signed(Mul(_sinh(p[0]), _pw(_W, p[1])), s[0]), None),
    "tanh_times_power": (2, 1, lambda p, s: _signed(Mul(_tanh(p[0]), _pw(_W, p[1])), s[0]), None),
    "sinh_over_power": (2, 1, lambda p, s: _signed(Div(_sinh(p[0]), _pw(_W, p[1])), s[0]), ">"),
}


def _mixed(params, signs) -> Node:
    n, m, k, l, p, q, r, s = params
    quotient = _signed(Div(_pw(Func("ln1p", _W), n), _tanh(m)), signs[0])
    inner = _combine(_pw(Func("sin", _pw(_W, q)), p), _pw(Func("tanh", _pw(_W, s)), r), signs[3])
    return _combine(_combine(quotient, _sinh(k), signs[1]), _pw(inner, l), signs[2])


HIERARCHIES["mixed"] = (8, 4, _mixed, ">")


def generate_hierarchy(family: str, params: Sequence[int],
                       signs: Optional[Sequence[int]] = None) -> NonlinExpr:
    """
    Нелинейность из иерархии уравнений, допускающих представление G = θ·w0.

    Args:
        family: Имя семейства из HIERARCHIES
        params: Натуральные параметры (n, m, k, ...)
        signs: Знаки ±1 (по умолчанию все +1)

    Returns:
        Выражение NonlinExpr

    Raises:
        HierarchyConstraintError: Нарушено ограничение семейства (например, n >= m)
    """
    if family not in HIERARCHIES:
        raise HierarchyConstraintError(family, f"семейство неизвестно, доступны: {', '.join(sorted(HIERARCHIES))}")
    arity, sign_count, builder, order = HIERARCHIES[family]
    params = tuple(params)
    if len(params) != arity:
        raise HierarchyConstraintError(family, f"ожидается {arity} параметров, получено {len(params)}")
    for value in params:
        if isinstance(value, bool) or not isinstance(value, int) or value < 1:
            raise HierarchyConstraintError(family, f"параметры должны быть натуральными, получено {value!r}")
    n, m = params[0], params[1] if arity > 1 else params[0]
    if (order == ">=" and n < m) or (order == ">" and n <= m):
        raise HierarchyConstraintError(family, f"n {order} m (n={n}, m={m})")
    signs = tuple(signs) if signs is not None else (1,) * sign_count
    if len(signs) != sign_count or any(s not in (1, -1) for s in signs):
        raise HierarchyConstraintError(family, f"ожидается {sign_count} знаков из {{+1, -1}}")
    return NonlinExpr(builder(params, signs))
