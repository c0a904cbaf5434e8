"""
Главный файл командной строки: check, green, solve, bench, catalog.

Коды завершения:
    0  - член класса (или успешное выполнение)
    1  - не член класса
    2  - неизвестно
    3  - решение разрушилось до горизонта
    64 - ошибка разбора или аргументов
    65 - стратегия подгонки неприменима
"""

import argparse
import csv
import sys
from dataclasses import replace
from typing import Dict, List, Optional, TextIO

from backend import Backend, describe_verdict, finite_or_blank
from bench import is_monotone_improvement, reference_limited, write_report
from config import Settings, default_run_config, read_run_config, run_config_from_mapping, write_run_config
from errors import (
    ConfigError, ExpressionError, FitError, GreenBlowUpError, GreenToolkitError, MembershipError,
    StepSizeUnderflowError,
)
from models import RunConfig


EXIT_OK = 0
EXIT_NON_MEMBER = 1
EXIT_UNKNOWN = 2
EXIT_BLOW_UP = 3
EXIT_USAGE = 64
EXIT_FIT = 65

STATUS_EXIT = {
    "member-structural": EXIT_OK,
    "member-numeric": EXIT_OK,
    "non-member": EXIT_NON_MEMBER,
    "unknown": EXIT_UNKNOWN,
}

# флаг argparse -> поле RunConfig
FLAG_FIELDS = {
    "nonlin": "nonlin", "forcing": "forcing", "s": "s", "K": "K", "strategy": "strategy",
    "rtol": "rtol", "atol": "atol", "grid": "grid", "eta": "eta", "out": "out", "seed": "seed",
    "samples": "samples", "tol": "tol", "epsilon": "epsilon", "liouville": "liouville",
    "t_max": "t_max", "setup": "setup",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="green",
        description="Нелинейные функции Грина G = θ·w0 и разложение по малым временам",
    )
    subparsers = parser.add_subparsers(dest="subcommand", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("expression", nargs="?", default=None, help="нелинейность N(w)")
    common.add_argument("--nonlin", default=None, help="нелинейность N(w)")
    common.add_argument("--forcing", default=None, help="zero | delta | delta_eta | выражение от t")
    common.add_argument("--s", type=float, default=None, help="масштаб импульса")
    common.add_argument("--K", type=int, default=None, help="порядок усечения")
    common.add_argument("--strategy", choices=("match", "lsq"), default=None)
    common.add_argument("--rtol", type=float, default=None)
    common.add_argument("--atol", type=float, default=None)
    common.add_argument("--grid", default=None, help="n,t0,t1")
    common.add_argument("--eta", type=float, default=None, help="ширина сглаженной дельты")
    common.add_argument("--out", default=None, help="файл вывода (по умолчанию stdout)")
    common.add_argument("--config", default=None, help="файл конфигурации key=value")
    common.add_argument("--write-config", dest="write_config", default=None,
                        help="сохранить итоговую конфигурацию")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--samples", type=int, default=None)
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--epsilon", type=float, default=None, help="параметр ε записи Лиувилля")
    common.add_argument("--liouville", action="store_const", const=True, default=None,
                        help="N = exp(w) с двухветвевой функцией Грина")
    common.add_argument("--t-max", dest="t_max", type=float, default=None)
    common.add_argument("--setup", choices=("sinh-gordon", "liouville"), default=None)

    subparsers.add_parser("check", parents=[common], help="проверка принадлежности классу")
    subparsers.add_parser("green", parents=[common], help="таблица G(t)")
    subparsers.add_parser("solve", parents=[common], help="решение разложением w_K")
    subparsers.add_parser("bench", parents=[common], help="отчёт Er(K; t)")
    subparsers.add_parser("catalog", parents=[common], help="каталог замкнутых форм")
    return parser


def resolve_config(args: argparse.Namespace, settings: Settings) -> RunConfig:
    """
    Итоговая конфигурация: флаг > файл --config > окружение > значения по умолчанию.

    Raises:
        ConfigError: Некорректный файл или значение флага
    """
    config = replace(default_run_config(settings), subcommand=args.subcommand)
    if args.config:
        config = read_run_config(args.config, config)
        config = replace(config, subcommand=args.subcommand)

    overrides: Dict[str, Optional[str]] = {}
    values = vars(args)
    for flag, field_name in FLAG_FIELDS.items():
        value = values.get(flag)
        if value is None:
            continue
        if flag == "grid":
            overrides[field_name] = value
        elif isinstance(value, bool):
            overrides[field_name] = "true" if value else "false"
        else:
            overrides[field_name] = repr(value) if isinstance(value, float) else str(value)
    if args.expression is not None and "nonlin" not in overrides:
        overrides["nonlin"] = args.expression
    return run_config_from_mapping(overrides, config)


def status(message: str) -> None:
    print(message, file=sys.stderr)


def write_rows(header: List[str], rows: List[List[str]], out: TextIO, comments: List[str] = ()) -> None:
    for line in comments:
        out.write(f"# {line}\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)


def open_output(config: RunConfig) -> TextIO:
    if config.out and config.out != "-":
        return open(config.out, "w", encoding="utf-8", newline="")
    return sys.stdout


def close_output(handle: TextIO) -> None:
    if handle is not sys.stdout:
        handle.close()


def require_nonlin(config: RunConfig) -> None:
    if not config.nonlin and not config.liouville:
        raise ConfigError("Не задана нелинейность: укажите выражение или --nonlin")


# ==================== ПОДКОМАНДЫ ====================

def cmd_check(backend: Backend, config: RunConfig) -> int:
    require_nonlin(config)
    nonlin, verdict = backend.check(config.nonlin, config.tol, config.samples, config.seed)
    out = open_output(config)
    try:
        out.write("\n".join(describe_verdict(nonlin, verdict)) + "\n")
    finally:
        close_output(out)
    code = STATUS_EXIT[verdict.status]
    if verdict.status == "member-numeric" and verdict.notes:
        status(f"⚠ {verdict.status}: {verdict.notes[0]}")
    elif code == EXIT_OK:
        status(f"✓ {verdict.status}")
    else:
        status(f"✗ {verdict.status}")
    return code


def cmd_green(backend: Backend, config: RunConfig) -> int:
    require_nonlin(config)
    try:
        grid, values, green = backend.green_table(config)
    except GreenBlowUpError as e:
        grid, values = backend.partial_green_table(e.partial, config)
        out = open_output(config)
        try:
            write_rows(["t", "G"], [[finite_or_blank(t), finite_or_blank(g)] for t, g in zip(grid, values)], out)
        finally:
            close_output(out)
        status(f"⚠ решение разрушилось при t = {e.t_reached!r}; таблица неполная")
        return EXIT_BLOW_UP

    out = open_output(config)
    try:
        write_rows(["t", "G"], [[finite_or_blank(t), finite_or_blank(g)] for t, g in zip(grid, values)], out)
    finally:
        close_output(out)
    match = backend.catalog_cross_check(config, green, grid)
    if match is not None:
        name, gap = match
        mark = "✓" if gap <= 1e-7 else "⚠"
        status(f"{mark} сверка с записью каталога '{name}': max|ΔG| = {gap:.3e}")
    status(f"✓ G построена ({green.source}), s = {green.s!r}, точек: {len(grid)}")
    return EXIT_OK


def cmd_solve(backend: Backend, config: RunConfig) -> int:
    require_nonlin(config)
    table, solution = backend.solve(config)
    out = open_output(config)
    try:
        comments = [
            f"K={solution.K}",
            "alphas=" + ",".join(format(a, ".17g") for a in solution.alphas),
            f"strategy={dict(solution.fit_meta).get('strategy', config.strategy)}",
        ]
        rows = [[finite_or_blank(t), finite_or_blank(w)] for t, w in zip(table.grid, table.values)]
        write_rows(["t", "wK"], rows, out, comments)
    finally:
        close_output(out)
    status(f"✓ решение w_{solution.K} на {len(table.grid)} точках")
    return EXIT_OK


def cmd_bench(backend: Backend, config: RunConfig) -> int:
    if not config.setup:
        require_nonlin(config)
    report = backend.bench(config)
    out = open_output(config)
    try:
        write_report(report, out)
    finally:
        close_output(out)
    medians = ", ".join(f"K={K}: {report.medians[K]:.3f}" for K in report.k_values)
    mark = "✓" if is_monotone_improvement(report) else "⚠"
    status(f"{mark} медианы Er: {medians}")
    limited = reference_limited(report)
    if limited:
        status(f"⚠ {limited} ячеек с ошибкой ниже 100 допусков эталона (флаг ref-limited)")
    return EXIT_OK


def cmd_catalog(backend: Backend, config: RunConfig) -> int:
    out = open_output(config)
    try:
        write_rows(["name", "parameters", "s", "t_min", "t_max", "notes"], backend.catalog_rows(config.epsilon), out)
    finally:
        close_output(out)
    return EXIT_OK


COMMANDS = {
    "check": cmd_check,
    "green": cmd_green,
    "solve": cmd_solve,
    "bench": cmd_bench,
    "catalog": cmd_catalog,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Запуск командной строки; возвращает код завершения."""
    args = build_parser().parse_args(argv)
    try:
        settings = Settings.from_env()
        config = resolve_config(args, settings)
        if args.write_config:
            write_run_config(config, args.write_config)
            status(f"✓ конфигурация сохранена: {args.write_config}")
        return COMMANDS[config.subcommand](Backend(settings), config)
    except ExpressionError as e:
        status(f"✗ Ошибка разбора: {e}")
        return EXIT_USAGE
    except FitError as e:
        status(f"✗ {e}")
        return EXIT_FIT
    except MembershipError as e:
        status(f"✗ {e}; используйте --liouville для N = exp(w)")
        return EXIT_NON_MEMBER
    except (GreenBlowUpError, StepSizeUnderflowError) as e:
        status(f"✗ {e}")
        return EXIT_BLOW_UP
    except (ConfigError, GreenToolkitError, ValueError) as e:
        status(f"✗ {e}")
        return EXIT_USAGE
    except OSError as e:
        status(f"✗ Ошибка ввода-вывода: {e}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
