"""
Вывод прогресса и диагностики.
Всё печатается в stderr, чтобы JSON в stdout оставался побайтно стабильным.
"""

import sys

_enabled = True


def set_verbose(enabled: bool) -> None:
    """Включает или выключает вывод прогресса."""
    global _enabled
    _enabled = bool(enabled)


def _emit(marker: str, message: str) -> None:
    if _enabled:
        print(f"{marker} {message}", file=sys.stderr)


def info(message: str) -> None:
    _emit("📖", message)


def step(message: str) -> None:
    _emit("🔧", message)


def ok(message: str) -> None:
    _emit("✅", message)


def warn(message: str) -> None:
    _emit("⚠️ ", message)


def fail(message: str) -> None:
    # ошибки показываем всегда
    print(f"❌ {message}", file=sys.stderr)


def result(message: str) -> None:
    _emit("🎯", message)
