"""
Точки моделей раздутия и вычисление поднятых отображений через ростки кривых.

Точка модели - это точка плоскости, точка на исключительной прямой первого
раздутия (центр, направление) или точка на исключительной прямой
бесконечно близкого центра (центр, направление, второе направление в карте
второго раздутия). Образ f~(x) читается из f(γ(e)) для случайных
полиномиальных ростков γ через x; несовпадение образов означает, что x
принадлежит Ind(f~).

Конфигурация раздутий передаётся как объект с методами center(label),
center_at(point) и child_at(center, direction) (см. ns_lattice.BlowupConfig).
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from sympy.polys.rings import PolyElement, PolyRing

from errors import BidynError, ExpansionOrderError, IndeterminateError, RetryLimitError, ZeroMapError
from exact_algebra import (
    PowerSeries,
    _local_images,
    base_point_frame,
    is_prime_field,
    poly_ring,
    substitute,
    total_degree,
)
from ratmap import MAX_RETRIES, ProjPoint, ProjRatMap, _reduce_univariate

GERM_COEFF_BOUND = 40


@dataclass(frozen=True)
class ModelPoint:
    """
    Точка модели раздутия плоскости.

    Args:
        point: Точка плоскости (центр раздутия, если задано направление)
        direction: Направление [s:t] в репере base_point_frame(point)
        second: Направление в карте бесконечно близкого центра; [0:1] при
            ds != 0 (и [1:0] при ds = 0) - пересечение с собственным
            прообразом родительской прямой
    """
    point: ProjPoint
    direction: Optional[ProjPoint] = None
    second: Optional[ProjPoint] = None

    @property
    def depth(self) -> int:
        if self.direction is None:
            return 0
        return 1 if self.second is None else 2

    @property
    def prime(self) -> Optional[int]:
        return self.point.prime

    def __str__(self) -> str:
        text = str(self.point)
        if self.direction is not None:
            text += "@" + str(self.direction)
        if self.second is not None:
            text += "@" + str(self.second)
        return text

    def to_dict(self) -> Dict[str, Any]:
        return {
            "point": list(self.point.coords),
            "direction": list(self.direction.coords) if self.direction else None,
            "second": list(self.second.coords) if self.second else None,
        }


def model_point(coords: Sequence[Any], direction: Optional[Sequence[Any]] = None,
                second: Optional[Sequence[Any]] = None, prime: Optional[int] = None) -> ModelPoint:
    """Точка модели из координат."""
    return ModelPoint(
        ProjPoint(tuple(coords), prime),
        ProjPoint(tuple(direction), prime) if direction is not None else None,
        ProjPoint(tuple(second), prime) if second is not None else None,
    )


# ---------------------------------------------------------------------------
# Ростки
# ---------------------------------------------------------------------------

def _random_nonzero(rng: np.random.Generator, n: int) -> List[int]:
    values = [int(v) for v in rng.integers(1, GERM_COEFF_BOUND, size=n)]
    signs = [1 if v else -1 for v in rng.integers(0, 2, size=n)]
    return [v * s for v, s in zip(values, signs)]


def germ_through(x: ModelPoint, rng: np.random.Generator, R1: PolyRing) -> List[PolyElement]:
    """
    Случайный полиномиальный росток плоскости e -> γ(e), поднятие которого
    проходит через точку модели x.

    В локальных координатах (s, t) точки x.point:
        глубина 0: (a e + r e^2, b e + r' e^2);
        глубина 1: (ds e + r e^2, dt e + r' e^2);
        глубина 2: карта (u, w) второго раздутия, u = σ e + r e^2, w = τ e + r' e^2,
                   s = u, t = u (w + dt/ds) при ds != 0, иначе s = u w, t = w.
    """
    dom = R1.domain
    e = R1.gens[0]
    r0, r1 = (dom.convert(v) for v in _random_nonzero(rng, 2))
    if x.direction is None:
        a, b = (dom.convert(v) for v in _random_nonzero(rng, 2))
        s, t = e * a + e ** 2 * r0, e * b + e ** 2 * r1
    else:
        ds, dt = (dom.convert(v) for v in x.direction.coords)
        if x.second is None:
            s, t = e * ds + e ** 2 * r0, e * dt + e ** 2 * r1
        else:
            sigma, tau = (dom.convert(v) for v in x.second.coords)
            u, w = e * sigma + e ** 2 * r0, e * tau + e ** 2 * r1
            if ds:
                s, t = u, u * (w + dom.quo(dt, ds))
            else:
                s, t = u * w, w
    images = _local_images(x.point.coords, dom)
    return [substitute(img, [s, t], R1.one) for img in images]


def push_germ(f: ProjRatMap, germ: Sequence[PolyElement]) -> List[PolyElement]:
    """Проталкивает росток через цепочку множителей f, снимая общий делитель."""
    coords = list(germ)
    one = coords[0].ring.one
    for factor in f.chain:
        coords = _reduce_univariate([substitute(c, coords, one) for c in factor.coords])
    return coords


def _valuation(p: PolyElement) -> int:
    return min(m[0] for m in p.keys())


def _coefficient(series: PowerSeries, k: int) -> Any:
    return series.coeffs[k] if k < series.order else series.domain.zero


def read_image(V: Sequence[PolyElement], cfg: Any, prime: Optional[int]) -> ModelPoint:
    """
    Точка модели, в которую приходит росток V(e) при e -> 0.

    Raises:
        ZeroMapError: образ ростка постоянен (росток лежит в стягиваемой кривой)
        ExpansionOrderError: не хватило точности для второго направления
    """
    nonzero = [c for c in V if c]
    if not nonzero:
        raise ZeroMapError("Росток отображается в ноль")
    k = min(_valuation(c) for c in nonzero)
    Q = ProjPoint(tuple(c.coeff(c.ring.gens[0] ** k) if k else c.coeff(1) for c in V), prime)
    center = cfg.center_at(Q)
    if center is None:
        return ModelPoint(Q)

    R1 = V[0].ring
    dom = R1.domain
    R3 = poly_ring(("x", "y", "z"), dom)
    frame = base_point_frame(Q, R3)
    L = [substitute(l, list(V), R1.one) for l in frame]
    n = 3 * max(total_degree(c) for c in nonzero) + 4
    S = [PowerSeries.from_poly(l, n) for l in L]
    alpha, beta = S[1] / S[0], S[2] / S[0]
    m = min(alpha.valuation(), beta.valuation())
    if m >= min(alpha.order, beta.order):
        raise ZeroMapError("Образ ростка не покидает центр")
    d = ProjPoint((_coefficient(alpha, m), _coefficient(beta, m)), prime)
    child = cfg.child_at(center, d)
    if child is None:
        return ModelPoint(Q, d)

    ds, dt = (dom.convert(v) for v in d.coords)
    if ds:
        a, b = alpha, beta / alpha - dom.quo(dt, ds)
    else:
        a, b = alpha / beta, beta
    m2 = min(a.valuation(), b.valuation())
    if m2 >= min(a.order, b.order):
        raise ExpansionOrderError("Не хватило точности для второго направления")
    return ModelPoint(Q, d, ProjPoint((_coefficient(a, m2), _coefficient(b, m2)), prime))


def _check_depth(cfg: Any, x: ModelPoint) -> None:
    center = cfg.center_at(x.point)
    if center is not None and x.direction is None:
        raise BidynError(f"Точка {x.point} раздута: нужно направление")
    if center is None and x.direction is not None:
        raise BidynError(f"Точка {x.point} не является центром раздутия")
    if x.direction is not None:
        child = cfg.child_at(center, x.direction)
        if child is not None and x.second is None:
            raise BidynError(f"Направление {x.direction} в {x.point} раздуто: нужно второе направление")
        if child is None and x.second is not None:
            raise BidynError(f"Направление {x.direction} в {x.point} не является центром")


def evaluate_on_model(f: ProjRatMap, cfg: Any, x: ModelPoint, seed: int = 7,
                      germs: int = 3) -> ModelPoint:
    """
    Значение поднятия f~ в точке модели.

    Args:
        f: Отображение плоскости (цепочка множителей используется как есть)
        cfg: Конфигурация раздутий (одна и та же для источника и цели)
        x: Точка модели
        seed: Зерно генератора ростков
        germs: Сколько независимых ростков должно согласоваться

    Returns:
        ModelPoint образа

    Raises:
        IndeterminateError: ростки дают разные образы (x в Ind(f~))
        RetryLimitError: ростки постоянно вырождаются
    """
    _check_depth(cfg, x)
    prime = x.prime
    if prime is not None and not is_prime_field(f.domain):
        f = f.mod_p(prime)
    R1 = poly_ring(("e",), f.domain)
    rng = np.random.default_rng(seed)
    images: List[ModelPoint] = []
    failures = 0
    while len(images) < germs:
        if failures > MAX_RETRIES * germs:
            raise RetryLimitError(f"Ростки через {x} вырождаются")
        germ = germ_through(x, rng, R1)
        try:
            images.append(read_image(push_germ(f, germ), cfg, prime))
        except ZeroMapError:
            failures += 1
    if len(set(images)) > 1:
        raise IndeterminateError(x, f"{f.name or 'f'}~ не определено в {x}: "
                                    f"ростки дают {', '.join(str(i) for i in images)}")
    return images[0]


# ---------------------------------------------------------------------------
# Образы исключительных кривых
# ---------------------------------------------------------------------------

@dataclass
class ExceptionalImage:
    """Образ исключительной кривой E_label: точка модели или кривая."""
    label: str
    kind: str                       # point | curve
    image: Optional[ModelPoint]
    samples: List[Tuple[ModelPoint, ModelPoint]]
    skipped: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "label": self.label,
            "kind": self.kind,
            "image": self.image.to_dict() if self.image else None,
            "skipped": self.skipped,
        }


def points_on_exceptional(cfg: Any, center: Any, count: int,
                          rng: np.random.Generator) -> List[ModelPoint]:
    """Случайные точки E_center, не лежащие на бесконечно близких центрах."""
    prime = center.point.prime
    points: List[ModelPoint] = []
    attempts = 0
    while len(points) < count and attempts < 20 * count:
        attempts += 1
        r = int(rng.integers(-GERM_COEFF_BOUND, GERM_COEFF_BOUND + 1))
        if center.parent is None:
            direction = ProjPoint((1, r), prime)
            if cfg.child_at(center, direction) is not None:
                continue
            x = ModelPoint(center.point, direction)
        else:
            x = ModelPoint(center.point, center.direction, ProjPoint((1, r), prime))
        if x not in points:
            points.append(x)
    return points


def exceptional_image(f: ProjRatMap, cfg: Any, center: Any, samples: int = 3,
                      seed: int = 7) -> ExceptionalImage:
    """
    Куда f~ отображает исключительную кривую центра.

    Args:
        f: Отображение плоскости
        cfg: Конфигурация раздутий
        center: Центр или его метка

    Returns:
        ExceptionalImage(kind="point"), если все определённые образы совпадают

    Raises:
        RetryLimitError: меньше двух точек кривой дали определённый образ
    """
    if isinstance(center, str):
        center = cfg.center(center)
    rng = np.random.default_rng(seed)
    pairs: List[Tuple[ModelPoint, ModelPoint]] = []
    skipped = 0
    for x in points_on_exceptional(cfg, center, samples + MAX_RETRIES, rng):
        if len(pairs) == samples:
            break
        try:
            pairs.append((x, evaluate_on_model(f, cfg, x, seed=int(rng.integers(0, 2 ** 31)))))
        except IndeterminateError:
            skipped += 1
    if len(pairs) < 2:
        raise RetryLimitError(f"На E_{center.label} не нашлось точек, где {f.name}~ определено")
    distinct = {img for _, img in pairs}
    if len(distinct) == 1:
        return ExceptionalImage(center.label, "point", pairs[0][1], pairs, skipped)
    return ExceptionalImage(center.label, "curve", None, pairs, skipped)
