"""
Точка входа bidyn.

Пример:
    python Source/main.py degree-seq --map Phi -n 3
    python Source/main.py spectral --map PsiPhi-model16 --printed
    python Source/main.py verify-paper --all --seed 7
"""

import sys
from pathlib import Path

# Добавляем путь к Source для импорта модулей
sys.path.insert(0, str(Path(__file__).parent))

from cli import run


def main() -> int:
    try:
        return run(sys.argv[1:])
    except KeyboardInterrupt:
        print("\n👋 Прервано", file=sys.stderr)
        return 130


if __name__ == "__main__":
    sys.exit(main())
