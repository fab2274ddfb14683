"""
Настройки bidyn.
Читает переменные окружения (и файл .env, если он есть) и проверяет их через pydantic.
"""

import os
from functools import lru_cache
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, field_validator

PROJECT_ROOT = Path(__file__).parent.parent
DEFAULT_FIXTURES = PROJECT_ROOT / "Data" / "maps"


class Settings(BaseModel):
    """Неизменяемые настройки запуска."""

    model_config = {"frozen": True}

    fixtures_dir: Path = DEFAULT_FIXTURES
    seed: int = 7
    prime_bits: int = 31
    verbose: bool = True
    log_digits: int = 64

    @field_validator('fixtures_dir')
    @classmethod
    def validate_fixtures_dir(cls, v):
        if not Path(v).is_dir():
            raise ValueError(f'Каталог фикстур не найден: {v}')
        return Path(v)

    @field_validator('prime_bits')
    @classmethod
    def validate_prime_bits(cls, v):
        if not 16 <= v <= 31:
            raise ValueError('BIDYN_PRIME_BITS должен быть от 16 до 31')
        return v

    @field_validator('log_digits')
    @classmethod
    def validate_log_digits(cls, v):
        if v < 8:
            raise ValueError('BIDYN_LOG_DIGITS должен быть не меньше 8')
        return v


@lru_cache(maxsize=1)
def _load_env_file() -> bool:
    return load_dotenv()


def load_settings(**overrides) -> Settings:
    """
    Собирает настройки из окружения.

    Args:
        **overrides: Явные значения, которые важнее переменных окружения

    Returns:
        Проверенный объект Settings
    """
    _load_env_file()

    values = {
        "fixtures_dir": os.getenv("BIDYN_FIXTURES") or str(DEFAULT_FIXTURES),
        "seed": os.getenv("BIDYN_SEED", "7"),
        "prime_bits": os.getenv("BIDYN_PRIME_BITS", "31"),
        "verbose": os.getenv("BIDYN_VERBOSE", "1") not in ("0", "false", "no"),
        "log_digits": os.getenv("BIDYN_LOG_DIGITS", "64"),
    }
    values.update({k: v for k, v in overrides.items() if v is not None})
    return Settings(**values)


def fixtures_dir(settings: Optional[Settings] = None) -> Path:
    """Каталог с JSON-описаниями отображений."""
    return (settings or load_settings()).fixtures_dir
