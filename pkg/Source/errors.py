"""
Исключения bidyn.
Все ошибки наследуются от ValueError, как и раньше в проекте,
чтобы вызывающий код мог ловить их одним обработчиком.
"""

from typing import Any, Optional, Sequence


class BidynError(ValueError):
    """Базовая ошибка библиотеки."""


class DomainMismatchError(BidynError):
    """Полиномы или точки заданы над разными кольцами коэффициентов."""


class ArityMismatchError(BidynError):
    """Число подставляемых значений не совпадает с числом переменных."""


class InhomogeneousError(BidynError):
    """Ожидался однородный полином (или набор полиномов одной степени)."""


class ZeroMapError(BidynError):
    """Все координаты отображения равны нулю."""


class DimensionMismatchError(BidynError):
    """Размерности отображений, матриц или классов не согласованы."""


class DegenerateCompositionError(BidynError):
    """Композиция тождественно равна нулю: образ g лежит в базисном множестве f."""


class IndeterminateError(BidynError):
    """Отображение не определено в точке."""

    def __init__(self, point: Any, message: Optional[str] = None):
        self.point = point
        super().__init__(message or f"Отображение не определено в точке {point}")


class NotOnCurveError(BidynError):
    """Точка не лежит на кривой."""


class TwoTorsionError(BidynError):
    """Точка 2-кручения, для которой данные касания вырождаются."""


class NonSmoothBranchError(BidynError):
    """Ветвь кривой не гладкая или выбран неверный локальный параметр."""


class NegativeValuationError(BidynError):
    """После нормализации у координаты карты отрицательный порядок."""

    def __init__(self, coordinate: str, message: Optional[str] = None):
        self.coordinate = coordinate
        super().__init__(message or f"Отрицательный порядок у координаты {coordinate}")


class ExpansionOrderError(BidynError):
    """Разложение тождественно нулевое до максимального порядка."""


class NonSquareError(BidynError):
    """Матрица не квадратная."""


class LatticeMismatchError(BidynError):
    """Классы принадлежат разным решёткам."""


class InconsistentRelationsError(BidynError):
    """Система соотношений для столбцов матрицы несовместна или не целочисленна."""


class BadPrimeError(BidynError):
    """Простое число делит знаменатель или старший коэффициент."""

    def __init__(self, prime: int, message: Optional[str] = None):
        self.prime = prime
        super().__init__(message or f"Плохое простое число {prime}")


class RetryLimitError(BidynError):
    """Исчерпан лимит повторных попыток со свежей случайностью."""


class ParseError(BidynError):
    """Синтаксическая ошибка в тексте полинома (строка и столбец с 1)."""

    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        super().__init__(f"{message} (строка {line}, столбец {column})")


class UnknownVariableError(ParseError):
    """Переменная не объявлена в списке переменных."""


class MapDefinitionError(BidynError):
    """Описание отображения противоречит вычисленным данным."""

    def __init__(self, message: str, problems: Sequence[str] = ()):
        self.problems = list(problems)
        super().__init__(message)
