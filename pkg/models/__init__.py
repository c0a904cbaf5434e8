"""
Пакет моделей для библиотеки нелинейных функций Грина.
"""

from .nodes import (
    Add, Const, Div, Func, Mul, Neg, NonlinExpr, Pow, RealPow, Sub, Var,
    FUNCTIONS, MEMBER_PRIMITIVES, Node, children,
)
from .models import (
    CatalogEntry, CauchyProblem, DistributionalRow, EllipticParam, ErrorReport, ErrorRow,
    ExpansionSolution, ExpansionTable, Forcing, GreenFn, MembershipVerdict, QuadratureSpec,
    RunConfig, TaylorData, Trajectory, Witness,
)

__all__ = [
    "Add", "Const", "Div", "Func", "Mul", "Neg", "NonlinExpr", "Pow", "RealPow", "Sub", "Var",
    "FUNCTIONS", "MEMBER_PRIMITIVES", "Node", "children",
    "CatalogEntry", "CauchyProblem", "DistributionalRow", "EllipticParam", "ErrorReport",
    "ErrorRow", "ExpansionSolution", "ExpansionTable", "Forcing", "GreenFn",
    "MembershipVerdict", "QuadratureSpec", "RunConfig", "TaylorData", "Trajectory", "Witness",
]
