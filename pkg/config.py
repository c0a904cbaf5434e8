"""
Настройки библиотеки и файлы конфигурации запуска.

Значения по умолчанию читаются из переменных окружения (и файла .env),
конфигурация запуска CLI хранится в плоском файле key=value.
"""

import os
from dataclasses import dataclass, fields, replace
from typing import Any, Dict, Literal, Optional, Tuple, get_args, get_origin

import numpy as np
from dotenv import dotenv_values, load_dotenv

from errors import ConfigError
from models import RunConfig

# Загружаем переменные окружения
load_dotenv()


@dataclass(frozen=True)
class Settings:
    """Значения по умолчанию для допусков, сглаживания и генератора путей."""

    rtol: float = 1e-10
    atol: float = 1e-12
    ref_rtol: float = 1e-13
    ref_atol: float = 1e-15
    eta: float = 1e-3
    seed: int = 20180521
    samples: int = 8
    membership_tol: float = 1e-9
    t_fit: float = 0.1
    quad_tol: float = 1e-10
    epsilon: float = 1.0

    @classmethod
    def from_env(cls) -> "Settings":
        """
        Чтение настроек из окружения.

        Returns:
            Объект Settings

        Raises:
            ConfigError: Значение переменной не число или не положительно
        """
        defaults = cls()
        values = {}
        for f in fields(cls):
            variable = f"GREEN_{f.name.upper()}"
            raw = os.getenv(variable)
            if raw is None or raw.strip() == "":
                continue
            value = _convert(raw, f.type, variable)
            if f.name != "seed" and not value > 0:
                raise ConfigError(f"{variable} должна быть положительной, получено {raw!r}")
            values[f.name] = value
        return replace(defaults, **values)


def _convert(raw: str, target: Any, key: str) -> Any:
    """Преобразование строки в тип поля dataclass."""
    raw = raw.strip()
    origin = get_origin(target)
    if origin is Literal:
        if raw not in get_args(target):
            raise ConfigError(f"Недопустимое значение {key}={raw!r}, ожидается одно из: {', '.join(get_args(target))}")
        return raw
    try:
        if target is bool:
            lowered = raw.lower()
            if lowered in ("1", "true", "yes", "on"):
                return True
            if lowered in ("0", "false", "no", "off", ""):
                return False
            raise ValueError(raw)
        if target is int:
            return int(raw)
        if target is float:
            return float(raw)
        if origin is tuple:
            parts = [p.strip() for p in raw.split(",")]
            kinds = get_args(target)
            if len(parts) != len(kinds):
                raise ValueError(raw)
            return tuple(kind(p) for kind, p in zip(kinds, parts))
        if origin is not None and type(None) in get_args(target):
            if raw == "":
                return None
            inner = [a for a in get_args(target) if a is not type(None)][0]
            return _convert(raw, inner, key)
    except ValueError:
        raise ConfigError(f"Некорректное значение {key}={raw!r}")
    return raw


def _format(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(_format(v) for v in value)
    return str(value)


def default_run_config(settings: Optional[Settings] = None) -> RunConfig:
    """RunConfig со значениями из окружения."""
    settings = settings or Settings.from_env()
    return RunConfig(
        rtol=settings.rtol,
        atol=settings.atol,
        eta=settings.eta,
        seed=settings.seed,
        samples=settings.samples,
        tol=settings.membership_tol,
        epsilon=settings.epsilon,
    )


def run_config_from_mapping(values: Dict[str, Optional[str]],
                            base: Optional[RunConfig] = None) -> RunConfig:
    """
    Наложение строковых значений на базовую конфигурацию.

    Raises:
        ConfigError: Неизвестный ключ или некорректное значение
    """
    base = base or RunConfig()
    types = {f.name: f.type for f in fields(RunConfig)}
    updates = {}
    for key, raw in values.items():
        if key not in types:
            raise ConfigError(f"Неизвестный ключ конфигурации '{key}'")
        updates[key] = _convert(raw or "", types[key], key)
    return replace(base, **updates)


def read_run_config(path: str, base: Optional[RunConfig] = None) -> RunConfig:
    """
    Чтение конфигурации запуска из файла key=value.

    Args:
        path: Путь к файлу
        base: Конфигурация, значения которой перекрываются файлом

    Raises:
        ConfigError: Файл не найден или содержит некорректные значения
    """
    if not os.path.isfile(path):
        raise ConfigError(f"Файл конфигурации не найден: {path}")
    return run_config_from_mapping(dict(dotenv_values(path)), base)


def write_run_config(config: RunConfig, path: str) -> None:
    """Запись конфигурации в файл: по одной паре key=value в порядке полей."""
    lines = [f"{f.name}={_format(getattr(config, f.name))}" for f in fields(RunConfig)]
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("\n".join(lines) + "\n")


def grid_points(grid: Tuple[int, float, float]):
    """Равномерная сетка из описания (n, t0, t1)."""
    n, t0, t1 = grid
    if n < 2 or not t1 > t0:
        raise ConfigError(f"Некорректная сетка {grid!r}: нужно n >= 2 и t1 > t0")
    return np.linspace(t0, t1, n)
