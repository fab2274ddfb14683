"""
Наивные высоты рациональных точек и рост высот вдоль орбит.

Высота считается по точным целым координатам, приближается только
последний логарифм (mpmath, фиксированное число знаков).
"""

import csv
import io
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import gmpy2
import mpmath
import numpy as np

import console
from errors import IndeterminateError, RetryLimitError
from ratmap import ProjPoint, ProjRatMap, evaluate_chain

DEFAULT_LOG_DIGITS = 64

# стартовые точки вне кривых фикстур
DEFAULT_SEEDS = ((1, 2, 5), (2, 3, 7), (3, -5, 11), (5, 7, -13), (7, -11, 17))

CSV_COLUMNS = ("n", "log_height", "ratio")


def naive_height(P: ProjPoint) -> int:
    """H(P) = max |x_i| для канонических целых координат."""
    return max(abs(int(c)) for c in P.coords)


def log_height(P: ProjPoint, digits: int = DEFAULT_LOG_DIGITS) -> mpmath.mpf:
    """
    Логарифмическая высота h(P) = log max |x_i|.

    Не зависит от представителя: ProjPoint уже хранит взаимно простые координаты.
    """
    with mpmath.workdps(digits):
        return +mpmath.log(mpmath.mpf(naive_height(P)))


def digit_count(n: int) -> int:
    # str() больших целых ограничен в CPython, gmpy2.digits - нет
    return len(gmpy2.digits(gmpy2.mpz(abs(n))))


def coefficient_bound(f: ProjRatMap) -> int:
    """
    C_f = max по координатам суммы |коэффициентов|, так что H(f(P)) <= C_f * H(P)^d.
    Координаты ProjRatMap уже нормированы к целым взаимно простым коэффициентам.
    """
    return max(sum(abs(int(c)) for c in coord.values()) for coord in f.coords)


def height_bound_holds(f: ProjRatMap, P: ProjPoint, image: Optional[ProjPoint] = None) -> bool:
    """Проверка h(f(P)) <= deg(f) h(P) + log C_f в точных целых."""
    image = image or evaluate_chain(f, P)
    return naive_height(image) <= coefficient_bound(f) * naive_height(P) ** f.degree


@dataclass
class OrbitStep:
    n: int
    point: ProjPoint
    log_height: mpmath.mpf


@dataclass
class OrbitRecord:
    """
    Орбита P_0, f(P_0), ... с логарифмическими высотами.

    Если на шаге n точка попала в неопределённость, орбита обрывается,
    а точка записывается в indeterminate_point.
    """
    map_name: str
    start: ProjPoint
    steps: List[OrbitStep] = field(default_factory=list)
    indeterminate_at: Optional[int] = None
    indeterminate_point: Optional[ProjPoint] = None
    digits: int = DEFAULT_LOG_DIGITS

    @property
    def heights(self) -> List[mpmath.mpf]:
        return [s.log_height for s in self.steps]

    def ratios(self) -> List[Optional[mpmath.mpf]]:
        """h_{n+1} / h_n; None, если h_n = 0."""
        out = []
        with mpmath.workdps(self.digits):
            for a, b in zip(self.heights, self.heights[1:]):
                out.append(b / a if a else None)
        return out

    def _render(self, value: Optional[mpmath.mpf]) -> Optional[str]:
        if value is None:
            return None
        return mpmath.nstr(value, self.digits)

    def rows(self) -> List[Dict[str, Any]]:
        ratios = [None] + self.ratios()
        return [
            {"n": s.n, "log_height": self._render(s.log_height), "ratio": self._render(r)}
            for s, r in zip(self.steps, ratios)
        ]

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in self.rows():
            writer.writerow({k: ("" if v is None else v) for k, v in row.items()})
        return buffer.getvalue()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "map": self.map_name,
            "start": list(self.start.coords),
            "digits": self.digits,
            "steps": [
                dict(row, digits_of_height=digit_count(naive_height(s.point)))
                for row, s in zip(self.rows(), self.steps)
            ],
            "indeterminate_at": self.indeterminate_at,
            "indeterminate_point": list(self.indeterminate_point.coords) if self.indeterminate_point else None,
        }


def orbit_heights(f: ProjRatMap, P0: ProjPoint, N: int, digits: int = DEFAULT_LOG_DIGITS) -> OrbitRecord:
    """
    Точная орбита длины N с каноническим сокращением на каждом шаге.

    Попадание в неопределённость - это данные, а не ошибка: орбита обрывается.
    """
    record = OrbitRecord(f.name, P0, digits=digits)
    P = P0
    record.steps.append(OrbitStep(0, P, log_height(P, digits)))
    for n in range(1, N + 1):
        try:
            P = evaluate_chain(f, P)
        except IndeterminateError as e:
            record.indeterminate_at = n
            record.indeterminate_point = e.point if isinstance(e.point, ProjPoint) else P
            console.warn(f"Орбита {f.name} попала в неопределённость на шаге {n}: {P}")
            break
        record.steps.append(OrbitStep(n, P, log_height(P, digits)))
        console.step(f"{f.name}^{n}: высота из {digit_count(naive_height(P))} цифр")
    return record


def _hits(f: ProjRatMap, P: ProjPoint, avoid: Sequence[ProjPoint], depth: int) -> bool:
    for _ in range(depth):
        if P in avoid:
            return True
        try:
            P = evaluate_chain(f, P)
        except IndeterminateError:
            return True
    return P in avoid


def choose_seed(f: ProjRatMap, avoid: Sequence[ProjPoint] = (), rng: Optional[np.random.Generator] = None,
                depth: int = 3, attempts: int = 50) -> ProjPoint:
    """
    Стартовая точка: сначала из DEFAULT_SEEDS, затем случайная; отбрасываются
    точки, первые depth итераций которых попадают в avoid или в неопределённость.

    Raises:
        RetryLimitError: подходящая точка не найдена
    """
    candidates = [ProjPoint(s) for s in DEFAULT_SEEDS]
    rng = rng or np.random.default_rng(7)
    for _ in range(attempts):
        values = [int(v) for v in rng.integers(-30, 31, size=f.source_dim + 1)]
        if any(values):
            candidates.append(ProjPoint(tuple(values)))
    for P in candidates:
        if not _hits(f, P, avoid, depth):
            return P
        console.warn(f"Стартовая точка {P} отброшена")
    raise RetryLimitError(f"Нет стартовой точки для {f.name}")
