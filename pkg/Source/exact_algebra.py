"""
Точная арифметика: рациональные числа, многочлены от нескольких переменных,
НОД, локальные кратности и касательные конусы, усечённые степенные ряды,
целочисленные матрицы и их спектральные данные, а также зеркала всего этого
над простыми полями.

Многочлены - это элементы колец sympy (PolyElement) с градуированным
лексикографическим порядком, коэффициенты - QQ (gmpy2.mpq) или GF(p).
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import mpmath
import numpy as np
from sympy import divisors
from sympy.polys.domains import QQ, ZZ, FiniteField
from sympy.polys.matrices import DomainMatrix
from sympy.polys.orderings import grlex
from sympy.polys.rings import PolyElement, PolyRing, ring

from errors import (
    ArityMismatchError,
    BadPrimeError,
    BidynError,
    DimensionMismatchError,
    DomainMismatchError,
    NonSmoothBranchError,
    NonSquareError,
    NotOnCurveError,
    ZeroMapError,
)

Ratio = QQ.dtype
MultiPoly = PolyElement

LOCAL_VARIABLES = ("s", "t")


# ---------------------------------------------------------------------------
# Кольца и поля
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def poly_ring(variables: Tuple[str, ...], domain: Any = QQ) -> PolyRing:
    """
    Кольцо многочленов с grlex-порядком (кэшируется).

    Args:
        variables: Имена переменных в объявленном порядке
        domain: QQ, ZZ или GF(p)

    Returns:
        PolyRing sympy
    """
    return ring(",".join(variables), domain, grlex)[0]


@lru_cache(maxsize=None)
def prime_field(p: int) -> FiniteField:
    """Поле GF(p)."""
    return FiniteField(p)


def ratio(numerator: int, denominator: int = 1) -> Ratio:
    """Несократимая дробь numerator/denominator."""
    return QQ(numerator, denominator)


def is_prime_field(domain: Any) -> bool:
    return getattr(domain, "is_FiniteField", False)


def field_characteristic(domain: Any) -> Optional[int]:
    """Характеристика поля: p для GF(p), None для QQ."""
    return int(domain.mod) if is_prime_field(domain) else None


def ratio_mod_p(value: Any, p: int) -> int:
    """
    Образ рационального числа в GF(p) как целое 0..p-1.

    Raises:
        BadPrimeError: если p делит знаменатель
    """
    q = QQ.convert(value)
    num, den = int(QQ.numer(q)), int(QQ.denom(q))
    if den % p == 0:
        raise BadPrimeError(p, f"Простое {p} делит знаменатель {den}")
    return num * pow(den, -1, p) % p


def reduce_mod_p(f: PolyElement, p: int) -> PolyElement:
    """
    Редукция многочлена над QQ в кольцо над GF(p) с теми же переменными.

    Args:
        f: Многочлен над QQ (или ZZ)
        p: Простое число

    Returns:
        Многочлен над GF(p)
    """
    K = prime_field(p)
    R = poly_ring(tuple(str(s) for s in f.ring.symbols), K)
    terms = {}
    for monom, coeff in f.items():
        c = ratio_mod_p(coeff, p)
        if c:
            terms[monom] = K(c)
    return R.from_dict(terms) if terms else R.zero


def change_domain(f: PolyElement, domain: Any) -> PolyElement:
    """Тот же многочлен в кольце с другими коэффициентами (QQ <-> ZZ)."""
    if f.ring.domain == domain:
        return f
    if is_prime_field(domain):
        return reduce_mod_p(f, field_characteristic(domain))
    R = poly_ring(tuple(str(s) for s in f.ring.symbols), domain)
    return R.from_dict(dict(f), f.ring.domain)


# ---------------------------------------------------------------------------
# Элементарные операции над многочленами
# ---------------------------------------------------------------------------

def total_degree(f: PolyElement) -> int:
    """Полная степень; -1 для нулевого многочлена."""
    return max((sum(m) for m in f.keys()), default=-1)


def is_homogeneous(f: PolyElement) -> bool:
    return len({sum(m) for m in f.keys()}) <= 1


def homogeneous_part(f: PolyElement, k: int) -> PolyElement:
    """Однородная компонента степени k."""
    return f.ring.from_dict({m: c for m, c in f.items() if sum(m) == k})


def order_at_origin(g: PolyElement) -> int:
    """Наименьшая степень монома (порядок в начале координат)."""
    if not g:
        raise ZeroMapError("Порядок нулевого многочлена не определён")
    return min(sum(m) for m in g.keys())


def _check_same_ring(a: PolyElement, b: PolyElement) -> None:
    if a.ring.domain != b.ring.domain:
        raise DomainMismatchError(f"Разные области коэффициентов: {a.ring.domain} и {b.ring.domain}")
    if a.ring.symbols != b.ring.symbols:
        raise DomainMismatchError(f"Разные переменные: {a.ring.symbols} и {b.ring.symbols}")


def evaluate_at(f: PolyElement, point: Sequence[Any]) -> Any:
    """
    Значение многочлена в точке (элемент области коэффициентов).

    Raises:
        ArityMismatchError: если число координат не совпадает с числом переменных
    """
    R = f.ring
    if len(point) != R.ngens:
        raise ArityMismatchError(f"Ожидалось {R.ngens} координат, получено {len(point)}")
    dom = R.domain
    values = [dom.convert(v) for v in point]
    powers: List[Dict[int, Any]] = [{0: dom.one} for _ in values]
    total = dom.zero
    for monom, coeff in f.items():
        term = coeff
        for i, e in enumerate(monom):
            if e:
                cache = powers[i]
                if e not in cache:
                    cache[e] = values[i] ** e
                term = term * cache[e]
        total += term
    return total


def substitute(f: PolyElement, images: Sequence[Any], one: Any = None) -> Any:
    """
    Одновременная подстановка x_i -> images[i].

    Образы могут быть многочленами, рациональными функциями или усечёнными
    рядами: нужны только сложение, умножение и возведение в степень.

    Args:
        f: Многочлен
        images: Образы переменных
        one: Единица целевого кольца (по умолчанию images[0] ** 0)

    Returns:
        f(images)
    """
    R = f.ring
    if len(images) != R.ngens:
        raise ArityMismatchError(f"Ожидалось {R.ngens} образов, получено {len(images)}")
    if one is None:
        one = images[0] ** 0
    zero = one - one
    powers: List[List[Any]] = [[one, img] for img in images]

    def power(i: int, e: int) -> Any:
        cache = powers[i]
        while len(cache) <= e:
            cache.append(cache[-1] * images[i])
        return cache[e]

    result = zero
    for monom, coeff in f.items():
        term = None
        for i, e in enumerate(monom):
            if e:
                term = power(i, e) if term is None else term * power(i, e)
        result = result + (one * coeff if term is None else term * coeff)
    return result


def truncate(f: PolyElement, index: int, order: int) -> PolyElement:
    """Отбрасывает члены, степень которых по переменной index не меньше order."""
    return f.ring.from_dict({m: c for m, c in f.items() if m[index] < order})


def poly_arith(a: PolyElement, b: Any, op: str) -> Any:
    """
    Арифметика многочленов: add, mul, eval (b - точка), substitute (b - образы).

    Raises:
        DomainMismatchError: разные кольца у a и b
        ArityMismatchError: неверное число значений
    """
    if op == "add":
        _check_same_ring(a, b)
        return a + b
    if op == "mul":
        _check_same_ring(a, b)
        return a * b
    if op == "eval":
        return evaluate_at(a, b)
    if op == "substitute":
        if len(b) != a.ring.ngens:
            raise ArityMismatchError(f"Ожидалось {a.ring.ngens} образов, получено {len(b)}")
        for image in b:
            if isinstance(image, PolyElement) and image.ring.domain != a.ring.domain:
                raise DomainMismatchError("Образы заданы над другой областью коэффициентов")
        return substitute(a, b)
    raise ValueError(f"Неизвестная операция: {op}")


def canonical_poly(f: PolyElement) -> PolyElement:
    """
    Каноническая форма с точностью до скаляра.

    Над QQ: целые взаимно простые коэффициенты и положительный старший
    коэффициент в grlex. Над GF(p): приведённый многочлен.
    """
    if not f:
        return f
    dom = f.ring.domain
    if is_prime_field(dom):
        return f.monic()
    if dom.is_ZZ:
        f = change_domain(f, QQ)
        dom = QQ
    den = 1
    num_gcd = 0
    for c in f.values():
        den = den * int(QQ.denom(c)) // math.gcd(den, int(QQ.denom(c)))
    for c in f.values():
        num_gcd = math.gcd(num_gcd, int(c * den))
    scale = QQ(den, num_gcd)
    if f.LC < 0:
        scale = -scale
    return f.mul_ground(scale)


def gcd_poly(a: PolyElement, b: PolyElement) -> PolyElement:
    """
    НОД двух многочленов в канонической форме; gcd(a, 0) = canonical(a).

    Над ZZ/QQ используется эвристический НОД sympy, над GF(p) - плотный PRS.
    """
    _check_same_ring(a, b)
    if not a and not b:
        return a
    if not b:
        return canonical_poly(a)
    if not a:
        return canonical_poly(b)
    return canonical_poly(a.gcd(b))


def gcd_many(polys: Iterable[PolyElement]) -> PolyElement:
    """НОД набора многочленов."""
    result = None
    for p in polys:
        if result is None:
            result = canonical_poly(p)
        elif p:
            result = gcd_poly(result, p)
        if result is not None and result and total_degree(result) == 0:
            return result
    if result is None:
        raise ZeroMapError("Пустой набор многочленов")
    return result


def divide_monomial(f: PolyElement, index: int, power: int) -> PolyElement:
    """Делит на x_index ** power (все мономы обязаны делиться)."""
    terms = {}
    for m, c in f.items():
        if m[index] < power:
            raise BidynError(f"Многочлен не делится на x{index}^{power}")
        new = list(m)
        new[index] -= power
        terms[tuple(new)] = c
    return f.ring.from_dict(terms)


# ---------------------------------------------------------------------------
# Локальные данные в точке: репер, разложение, кратность, касательный конус
# ---------------------------------------------------------------------------

def _coords(point: Any) -> Tuple[Any, ...]:
    return tuple(point.coords) if hasattr(point, "coords") else tuple(point)


def _inverse3(m: List[List[Any]], dom: Any) -> List[List[Any]]:
    (a, b, c), (d, e, f), (g, h, i) = m
    det = a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)
    if not det:
        raise BidynError("Вырожденный репер")
    adj = [
        [e * i - f * h, c * h - b * i, b * f - c * e],
        [f * g - d * i, a * i - c * g, c * d - a * f],
        [d * h - e * g, b * g - a * h, a * e - b * d],
    ]
    return [[dom.quo(x, det) for x in row] for row in adj]


@lru_cache(maxsize=4096)
def _frame_matrix(coords: Tuple[Any, ...], dom: Any) -> Tuple[Tuple[Any, ...], ...]:
    values = [dom.convert(c) for c in coords]
    nonzero = [k for k, v in enumerate(values) if v]
    if not nonzero:
        raise ZeroMapError("Нулевая точка проективной плоскости")
    i = nonzero[0]
    j1, j2 = [k for k in range(3) if k != i]
    rows = [[dom.zero] * 3 for _ in range(3)]
    rows[0][i] = dom.one
    # l1 = P_i x_j2 - P_j2 x_i, l2 = P_j1 x_i - P_i x_j1
    rows[1][j2] += values[i]
    rows[1][i] -= values[j2]
    rows[2][i] += values[j1]
    rows[2][j1] -= values[i]
    return tuple(tuple(r) for r in rows)


def base_point_frame(point: Any, R: PolyRing) -> Tuple[PolyElement, PolyElement, PolyElement]:
    """
    Репер (l0, l1, l2) линейных форм в точке P плоскости.

    l0 = x_i для первой ненулевой координаты i; l1, l2 обращаются в ноль в P.
    Направление [s:t] в P - это отношение l1 : l2; для p1=[1,1,0] репер
    равен (x, z, x-y), что даёт карту (x-y)s = zt.
    """
    rows = _frame_matrix(_coords(point), R.domain)
    return tuple(R.from_dict({tuple(1 if k == j else 0 for k in range(3)): c
                              for j, c in enumerate(row) if c}) for row in rows)


def _local_images(point: Any, dom: Any) -> List[PolyElement]:
    rows = _frame_matrix(_coords(point), dom)
    inv = _inverse3([list(r) for r in rows], dom)
    L = poly_ring(LOCAL_VARIABLES, dom)
    s, t = L.gens
    return [inv[j][0] * L.one + inv[j][1] * s + inv[j][2] * t for j in range(3)]


def local_expansion(f: PolyElement, point: Any) -> PolyElement:
    """
    Многочлен f в локальных координатах (s, t) = (l1/l0, l2/l0) с центром в P.
    """
    if f.ring.ngens != 3:
        raise ArityMismatchError("Локальные координаты определены только на плоскости")
    images = _local_images(point, f.ring.domain)
    return substitute(f, images, images[0].ring.one)


def blowup_strict(g: PolyElement, direction: Sequence[Any]) -> PolyElement:
    """
    Собственный прообраз локального уравнения при раздутии начала координат,
    в карте, где точка направления [ds:dt] снова стоит в начале.
    """
    L = g.ring
    dom = L.domain
    ds, dt = (dom.convert(v) for v in direction)
    s, t = L.gens
    m = order_at_origin(g)
    if ds:
        h = substitute(g, [s, s * (t + L.ground_new(dom.quo(dt, ds)))], L.one)
        return divide_monomial(h, 0, m)
    h = substitute(g, [t * s, t], L.one)
    return divide_monomial(h, 1, m)


def mult_at(f: PolyElement, point: Any, chart_chain: Optional[Sequence[Sequence[Any]]] = None) -> int:
    """
    Кратность кривой f = 0 в точке P (0, если P не лежит на кривой).

    Args:
        f: Однородный многочлен от трёх переменных
        point: Проективная точка
        chart_chain: Направления [s:t] бесконечно близких точек, каждое
            в локальных координатах предыдущей карты

    Returns:
        Кратность собственного прообраза в последней точке цепочки
    """
    g = local_expansion(f, point)
    m = order_at_origin(g)
    for direction in chart_chain or ():
        if m == 0:
            return 0
        g = blowup_strict(g, direction)
        m = order_at_origin(g)
    return m


def tangent_cone(f: PolyElement, point: Any) -> PolyElement:
    """
    Касательный конус в P: младшая однородная часть локального уравнения
    в переменных (s, t).

    Raises:
        NotOnCurveError: если P не лежит на кривой
    """
    g = local_expansion(f, point)
    m = order_at_origin(g)
    if m == 0:
        raise NotOnCurveError(f"Точка {_coords(point)} не лежит на кривой")
    return homogeneous_part(g, m)


def cone_to_line(cone: PolyElement, point: Any, R: PolyRing) -> PolyElement:
    """Линейный конус a*s + b*t как прямая a*l1 + b*l2 на плоскости."""
    if total_degree(cone) != 1:
        raise BidynError("Касательный конус не линеен")
    _, l1, l2 = base_point_frame(point, R)
    dom = R.domain
    a = dom.convert(cone.coeff(cone.ring.gens[0]))
    b = dom.convert(cone.coeff(cone.ring.gens[1]))
    return canonical_poly(l1 * a + l2 * b)


def tangent_line(f: PolyElement, point: Any) -> PolyElement:
    """Касательная прямая к гладкой точке кривой."""
    return cone_to_line(tangent_cone(f, point), point, f.ring)


def line_direction(line: PolyElement, point: Any) -> Tuple[Any, Any]:
    """
    Направление [s:t] прямой через P: прямая пропорциональна t*l1 - s*l2.
    """
    g = local_expansion(line, point)
    dom = line.ring.domain
    if g.coeff(1):
        raise NotOnCurveError("Прямая не проходит через точку")
    s, t = g.ring.gens
    alpha, beta = dom.convert(g.coeff(s)), dom.convert(g.coeff(t))
    return (-beta, alpha)


def direction_line(direction: Sequence[Any], point: Any, R: PolyRing) -> PolyElement:
    """Прямая через P в направлении [s:t]."""
    _, l1, l2 = base_point_frame(point, R)
    dom = R.domain
    s, t = (dom.convert(v) for v in direction)
    return canonical_poly(l1 * t - l2 * s)


# ---------------------------------------------------------------------------
# Усечённые степенные ряды
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PowerSeries:
    """
    Ряд от одной переменной, известный по модулю variable ** order.

    Args:
        coeffs: Коэффициенты при степенях 0..order-1
        order: Точность
        domain: Область коэффициентов
        variable: Имя переменной
    """
    coeffs: Tuple[Any, ...]
    order: int
    domain: Any = QQ
    variable: str = "b"

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("Точность ряда должна быть неотрицательной")
        dom = self.domain
        values = [dom.convert(c) for c in self.coeffs[:self.order]]
        values += [dom.zero] * (self.order - len(values))
        object.__setattr__(self, "coeffs", tuple(values))

    @classmethod
    def constant(cls, value: Any, order: int, domain: Any = QQ, variable: str = "b") -> "PowerSeries":
        return cls((value,), order, domain, variable)

    @classmethod
    def gen(cls, order: int, domain: Any = QQ, variable: str = "b") -> "PowerSeries":
        """Сама переменная как ряд."""
        return cls((0, 1), order, domain, variable)

    @classmethod
    def from_poly(cls, p: PolyElement, order: int) -> "PowerSeries":
        """Ряд из многочлена от одной переменной."""
        coeffs = [p.ring.domain.zero] * order
        for (e,), c in p.items():
            if e < order:
                coeffs[e] = c
        return cls(tuple(coeffs), order, p.ring.domain, str(p.ring.symbols[0]))

    def _like(self, coeffs: Sequence[Any], order: int) -> "PowerSeries":
        return PowerSeries(tuple(coeffs), order, self.domain, self.variable)

    def valuation(self) -> int:
        """Индекс первого ненулевого коэффициента (order, если ряд нулевой)."""
        for k, c in enumerate(self.coeffs):
            if c:
                return k
        return self.order

    def is_zero(self) -> bool:
        return self.valuation() >= self.order

    def __getitem__(self, k: int) -> Any:
        if k >= self.order:
            raise BidynError(f"Коэффициент {k} вне точности {self.order}")
        return self.coeffs[k]

    def _coerce(self, other: Any) -> "PowerSeries":
        if isinstance(other, PowerSeries):
            if other.domain != self.domain:
                raise DomainMismatchError("Ряды над разными областями")
            return other
        return PowerSeries.constant(self.domain.convert(other), self.order, self.domain, self.variable)

    def __add__(self, other: Any) -> "PowerSeries":
        other = self._coerce(other)
        n = min(self.order, other.order)
        return self._like([self.coeffs[k] + other.coeffs[k] for k in range(n)], n)

    __radd__ = __add__

    def __neg__(self) -> "PowerSeries":
        return self._like([-c for c in self.coeffs], self.order)

    def __sub__(self, other: Any) -> "PowerSeries":
        return self + (-self._coerce(other))

    def __rsub__(self, other: Any) -> "PowerSeries":
        return self._coerce(other) - self

    def __mul__(self, other: Any) -> "PowerSeries":
        if not isinstance(other, PowerSeries):
            c = self.domain.convert(other)
            return self._like([a * c for a in self.coeffs], self.order)
        other = self._coerce(other)
        va, vb = self.valuation(), other.valuation()
        n = min(self.order + vb, other.order + va)
        out = [self.domain.zero] * n
        a, b = self.coeffs, other.coeffs
        for i in range(va, min(len(a), n)):
            ai = a[i]
            if not ai:
                continue
            for j in range(vb, min(len(b), n - i)):
                if b[j]:
                    out[i + j] += ai * b[j]
        return self._like(out, n)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "PowerSeries":
        if e < 0:
            return self.inverse() ** (-e)
        result = PowerSeries.constant(1, self.order, self.domain, self.variable)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def inverse(self) -> "PowerSeries":
        """Обратный ряд; свободный член обязан быть ненулевым."""
        a = self.coeffs
        if not self.order or not a[0]:
            raise BidynError("Ряд необратим: нулевой свободный член")
        dom = self.domain
        inv0 = dom.quo(dom.one, a[0])
        out = [inv0]
        for k in range(1, self.order):
            acc = dom.zero
            for i in range(1, k + 1):
                if a[i]:
                    acc += a[i] * out[k - i]
            out.append(-acc * inv0)
        return self._like(out, self.order)

    def __truediv__(self, other: Any) -> "PowerSeries":
        if not isinstance(other, PowerSeries):
            return self * self.domain.quo(self.domain.one, self.domain.convert(other))
        v = other.valuation()
        if v:
            if self.valuation() < v:
                raise BidynError("Частное рядов имеет полюс")
            return self.shift(v) / other.shift(v)
        return self * other.inverse()

    def shift(self, k: int) -> "PowerSeries":
        """Деление на variable ** k (первые k коэффициентов нулевые)."""
        if any(self.coeffs[:k]):
            raise BidynError(f"Ряд не делится на {self.variable}^{k}")
        return self._like(self.coeffs[k:], max(self.order - k, 0))

    def truncate(self, order: int) -> "PowerSeries":
        return self._like(self.coeffs[:order], min(order, self.order))

    def compose(self, inner: "PowerSeries") -> "PowerSeries":
        """Подстановка ряда inner положительного порядка."""
        v = inner.valuation()
        if v == 0:
            raise BidynError("Внутренний ряд должен иметь положительный порядок")
        n = min(self.order * v, inner.order)
        result = PowerSeries.constant(0, n, self.domain, inner.variable)
        for c in reversed(self.coeffs):
            result = result * inner.truncate(n) + c
        return result.truncate(n)

    def to_poly(self, R: PolyRing, index: int = 0) -> PolyElement:
        """Ряд как многочлен по переменной index кольца R."""
        terms = {}
        for k, c in enumerate(self.coeffs):
            if c:
                terms[tuple(k if i == index else 0 for i in range(R.ngens))] = c
        return R.from_dict(terms)

    def __str__(self) -> str:
        parts = [f"({c})*{self.variable}^{k}" for k, c in enumerate(self.coeffs) if c]
        return " + ".join(parts + [f"O({self.variable}^{self.order})"])


def series_branch(curve: PolyElement, solve_for: str, order: int) -> PowerSeries:
    """
    Ветвь кривой через начало координат как ряд по второй переменной.

    Итерация Ньютона удваивает точность на каждом шаге, начиная с нуля.

    Args:
        curve: Многочлен от двух переменных
        solve_for: Переменная, которую выражаем
        order: N - результат верен по модулю param ** (N + 1)

    Returns:
        PowerSeries точности N + 1

    Raises:
        NotOnCurveError: кривая не проходит через начало
        NonSmoothBranchError: производная по solve_for в начале равна нулю
    """
    R = curve.ring
    names = [str(s) for s in R.symbols]
    if R.ngens != 2 or solve_for not in names:
        raise ArityMismatchError("Ожидалась кривая от двух переменных")
    k = names.index(solve_for)
    param = names[1 - k]
    dom = R.domain
    zero_point = [dom.zero, dom.zero]
    if evaluate_at(curve, zero_point):
        raise NotOnCurveError("Кривая не проходит через начало координат")
    derivative = curve.diff(R.gens[k])
    if not evaluate_at(derivative, zero_point):
        raise NonSmoothBranchError(
            f"Ветвь негладкая или {solve_for} не выражается через {param}")

    target = order + 1
    precision = 1
    branch = PowerSeries((), 1, dom, param)
    while precision < target:
        precision = min(2 * precision, target)
        x = PowerSeries.gen(precision, dom, param)
        y = PowerSeries(branch.coeffs, precision, dom, param)
        images = [None, None]
        images[k], images[1 - k] = y, x
        one = PowerSeries.constant(1, precision, dom, param)
        value = substitute(curve, images, one)
        slope = substitute(derivative, images, one)
        branch = y - value / slope
    return branch.truncate(target)


# ---------------------------------------------------------------------------
# Целочисленные матрицы
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntMatrix:
    """
    Прямоугольная матрица целых чисел с необязательной меткой базиса.
    """
    rows: Tuple[Tuple[int, ...], ...]
    basis: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        rows = tuple(tuple(int(x) for x in r) for r in self.rows)
        if rows and len({len(r) for r in rows}) != 1:
            raise DimensionMismatchError("Строки матрицы разной длины")
        object.__setattr__(self, "rows", rows)
        if self.basis is not None:
            basis = tuple(self.basis)
            if len(basis) != len(rows):
                raise DimensionMismatchError(
                    f"Базис из {len(basis)} меток для матрицы {len(rows)}x{self.ncols}")
            object.__setattr__(self, "basis", basis)

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def ncols(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    @property
    def shape(self) -> Tuple[int, int]:
        return self.nrows, self.ncols

    def is_square(self) -> bool:
        return self.nrows == self.ncols

    @classmethod
    def identity(cls, n: int, basis: Optional[Sequence[str]] = None) -> "IntMatrix":
        return cls(tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n)),
                   tuple(basis) if basis else None)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]], basis: Optional[Sequence[str]] = None) -> "IntMatrix":
        n = len(columns[0]) if columns else 0
        return cls(tuple(tuple(col[i] for col in columns) for i in range(n)),
                   tuple(basis) if basis else None)

    def column(self, j: int) -> Tuple[int, ...]:
        return tuple(r[j] for r in self.rows)

    def transpose(self) -> "IntMatrix":
        return IntMatrix(tuple(zip(*self.rows)) if self.rows else ())

    def with_basis(self, basis: Optional[Sequence[str]]) -> "IntMatrix":
        return IntMatrix(self.rows, tuple(basis) if basis else None)

    def __matmul__(self, other: Any) -> Any:
        if isinstance(other, IntMatrix):
            if self.ncols != other.nrows:
                raise DimensionMismatchError(f"Нельзя умножить {self.shape} на {other.shape}")
            cols = list(zip(*other.rows))
            rows = tuple(tuple(sum(a * b for a, b in zip(r, c)) for c in cols) for r in self.rows)
            basis = self.basis if self.basis == other.basis else None
            return IntMatrix(rows, basis)
        vec = tuple(other)
        if len(vec) != self.ncols:
            raise DimensionMismatchError(f"Вектор длины {len(vec)} для матрицы {self.shape}")
        return tuple(sum(a * b for a, b in zip(r, vec)) for r in self.rows)

    def __add__(self, other: "IntMatrix") -> "IntMatrix":
        if self.shape != other.shape:
            raise DimensionMismatchError("Разные размеры матриц")
        return IntMatrix(tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)), self.basis)

    def __sub__(self, other: "IntMatrix") -> "IntMatrix":
        return self + other.scale(-1)

    def scale(self, k: int) -> "IntMatrix":
        return IntMatrix(tuple(tuple(k * a for a in r) for r in self.rows), self.basis)

    def to_domain_matrix(self, domain: Any = ZZ) -> DomainMatrix:
        return DomainMatrix([[domain.convert(a) for a in r] for r in self.rows], self.shape, domain)

    def tolist(self) -> List[List[int]]:
        return [list(r) for r in self.rows]

    def __str__(self) -> str:
        width = max((len(str(a)) for r in self.rows for a in r), default=1)
        return "\n".join(" ".join(str(a).rjust(width) for a in r) for r in self.rows)


def _require_square(M: IntMatrix) -> None:
    if not M.is_square():
        raise NonSquareError(f"Матрица {M.shape} не квадратная")


def matrix_power(M: IntMatrix, k: int) -> IntMatrix:
    """M ** k для k >= 0."""
    _require_square(M)
    result = IntMatrix.identity(M.nrows, M.basis)
    base = M
    while k:
        if k & 1:
            result = result @ base
        k >>= 1
        if k:
            base = base @ base
    return result.with_basis(M.basis)


def matrix_rank(M: Any) -> int:
    """Ранг над QQ (IntMatrix или DomainMatrix)."""
    dm = M.to_domain_matrix(QQ) if isinstance(M, IntMatrix) else M.convert_to(QQ)
    return dm.rank()


def matrix_det(M: IntMatrix) -> int:
    _require_square(M)
    return int(M.to_domain_matrix(ZZ).det())


def is_form_preserving(M: IntMatrix, gram: IntMatrix) -> bool:
    """Проверка M^T * G * M == G."""
    return (M.transpose() @ gram @ M).rows == gram.rows


def permutation_matrix(perm: Sequence[int], basis: Optional[Sequence[str]] = None) -> IntMatrix:
    """Матрица P с P e_j = e_perm[j]."""
    n = len(perm)
    if sorted(perm) != list(range(n)):
        raise DimensionMismatchError("Не перестановка")
    rows = [[0] * n for _ in range(n)]
    for j, i in enumerate(perm):
        rows[i][j] = 1
    return IntMatrix(tuple(tuple(r) for r in rows), tuple(basis) if basis else None)


def inverse_over_qq(M: IntMatrix) -> List[List[Ratio]]:
    """Обратная матрица над QQ (строками)."""
    _require_square(M)
    return M.to_domain_matrix(QQ).inv().to_list()


def charpoly(M: IntMatrix) -> PolyElement:
    """
    Характеристический многочлен det(xI - M) без дробей (алгоритм Берковица
    в DomainMatrix над ZZ).

    Raises:
        NonSquareError: матрица не квадратная
    """
    _require_square(M)
    coeffs = M.to_domain_matrix(ZZ).charpoly()
    R = poly_ring(("x",), ZZ)
    n = len(coeffs) - 1
    return R.from_dict({(n - k,): c for k, c in enumerate(coeffs) if c})


# ---------------------------------------------------------------------------
# Вещественные корни: последовательность Штурма и бисекция
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RootInterval:
    """
    Интервал (lo, hi], содержащий наибольший вещественный корень.

    exact=True означает, что корень рационален и равен value.
    found=False - вещественных корней нет.
    """
    lo: Optional[Ratio]
    hi: Optional[Ratio]
    exact: bool = False
    value: Optional[Ratio] = None
    found: bool = True

    def midpoint(self) -> Ratio:
        if self.exact:
            return self.value
        return (self.lo + self.hi) / 2

    def decimal(self, digits: int = 20) -> str:
        """Десятичная запись (точное значение или середина интервала)."""
        if not self.found:
            return "none"
        if self.exact and QQ.denom(self.value) == 1:
            return str(int(self.value))
        with mpmath.workdps(digits + 5):
            m = self.midpoint()
            value = mpmath.mpf(int(QQ.numer(m))) / int(QQ.denom(m))
            return mpmath.nstr(value, digits)

    def as_float(self) -> float:
        m = self.midpoint()
        return int(QQ.numer(m)) / int(QQ.denom(m))


def _to_qq_univariate(p: PolyElement) -> PolyElement:
    if p.ring.ngens != 1:
        raise ArityMismatchError("Ожидался многочлен от одной переменной")
    return change_domain(p, QQ)


def sturm_sequence(p: PolyElement) -> List[PolyElement]:
    """p0 = p, p1 = p', p_{i+1} = -rem(p_{i-1}, p_i)."""
    seq = [p, p.diff(p.ring.gens[0])]
    while seq[-1]:
        r = seq[-2].rem(seq[-1])
        if not r:
            break
        seq.append(-r)
    return seq


def count_sign_changes(values: Iterable[Any]) -> int:
    """Число перемен знака, нули пропускаются."""
    nonzero = [v for v in values if v != 0]
    return sum(1 for a, b in zip(nonzero, nonzero[1:]) if (a > 0) != (b > 0))


def _sign_changes_at(seq: List[PolyElement], x: Ratio) -> int:
    return count_sign_changes(evaluate_at(q, [x]) for q in seq)


def _cauchy_bound(p: PolyElement) -> Ratio:
    lc = abs(p.LC)
    return 1 + max((abs(c) / lc for m, c in p.items() if m != p.LM), default=QQ(0))


def largest_real_root(p: PolyElement, tol: Ratio = QQ(1, 10 ** 12)) -> RootInterval:
    """
    Наибольший вещественный корень многочлена.

    Последовательность Штурма свободной от квадратов части локализует корень,
    бисекция сужает интервал до ширины tol, затем тест рациональных корней
    (знаменатели делят старший коэффициент) выдаёт точное значение.

    Args:
        p: Ненулевой многочлен от одной переменной над ZZ или QQ
        tol: Ширина итогового интервала

    Returns:
        RootInterval
    """
    p = _to_qq_univariate(p)
    if not p:
        raise ZeroMapError("Нулевой многочлен")
    if total_degree(p) == 0:
        return RootInterval(None, None, found=False)
    sqf = p.quo(p.gcd(p.diff(p.ring.gens[0])))
    sqf = canonical_poly(sqf)
    seq = sturm_sequence(sqf)
    bound = _cauchy_bound(sqf)
    v_top = _sign_changes_at(seq, bound)

    def roots_above(x: Ratio) -> int:
        return _sign_changes_at(seq, x) - v_top

    lo, hi = -bound - 1, bound
    if roots_above(lo) == 0:
        return RootInterval(None, None, found=False)

    lc = int(sqf.LC)
    width = min(QQ.convert(tol), QQ(1, 2 * lc * lc))
    while hi - lo > width:
        mid = (lo + hi) / 2
        if roots_above(mid) >= 1:
            lo = mid
        else:
            hi = mid

    for d in divisors(lc):
        start = math.floor(lo * d)
        stop = math.ceil(hi * d)
        for n in range(start, stop + 1):
            candidate = QQ(n, d)
            if lo < candidate <= hi and not evaluate_at(sqf, [candidate]):
                return RootInterval(candidate, candidate, exact=True, value=candidate)
    return RootInterval(lo, hi)


# ---------------------------------------------------------------------------
# Жорданова структура
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class JordanProfile:
    """Ранги (M - lambda I)^k, k = 1..n, и размер наибольшей клетки."""
    eigenvalue: Ratio
    ranks: Tuple[int, ...]
    largest_block: int

    @property
    def algebraic_multiplicity(self) -> int:
        n = len(self.ranks)
        return n - self.ranks[-1] if n else 0


def jordan_profile(M: IntMatrix, eigenvalue: Any) -> JordanProfile:
    """
    Жорданов профиль M в рациональном собственном значении.

    Число клеток размера >= k равно r_{k-1} - r_k (r_0 = n), поэтому
    наибольшая клетка - последнее k с положительной разностью.
    """
    _require_square(M)
    n = M.nrows
    lam = QQ.convert(eigenvalue)
    A = M.to_domain_matrix(QQ) - DomainMatrix.eye(n, QQ) * lam
    ranks = []
    power = A
    for k in range(1, n + 1):
        if k > 1:
            power = power * A
        ranks.append(power.rank())
        if k > 1 and ranks[-1] == ranks[-2]:
            ranks.extend([ranks[-1]] * (n - k))
            break
    previous = [n] + ranks[:-1]
    largest = 0
    for k, (r0, r1) in enumerate(zip(previous, ranks), start=1):
        if r0 - r1 > 0:
            largest = k
    return JordanProfile(lam, tuple(ranks), largest)


# ---------------------------------------------------------------------------
# Плотные многочлены от одной переменной над GF(p) (numpy)
# ---------------------------------------------------------------------------
# Коэффициенты хранятся по возрастанию степени в массивах int64, p < 2**31.

_LIMB = 16
_MASK = (1 << _LIMB) - 1


def modp_trim(a: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(a)
    return a[: nz[-1] + 1] if nz.size else a[:0]


def modp_degree(a: np.ndarray) -> int:
    return len(modp_trim(a)) - 1


def modp_mul(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """Произведение через разбиение на 16-битные половины (без переполнения int64)."""
    if not len(a) or not len(b):
        return np.zeros(0, dtype=np.int64)
    a0, a1 = a & _MASK, a >> _LIMB
    b0, b1 = b & _MASK, b >> _LIMB
    low = np.convolve(a0, b0) % p
    mid = (np.convolve(a0, b1) + np.convolve(a1, b0)) % p
    high = np.convolve(a1, b1) % p
    shift2 = pow(2, 2 * _LIMB, p)
    return (high * shift2 % p + mid * (1 << _LIMB) % p + low) % p


def modp_add(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    n = max(len(a), len(b))
    out = np.zeros(n, dtype=np.int64)
    out[: len(a)] += a
    out[: len(b)] += b
    return out % p


def modp_rem(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """Остаток от деления a на b."""
    b = modp_trim(b)
    if not len(b):
        raise ZeroDivisionError("Деление на нулевой многочлен")
    a = modp_trim(a).copy()
    db = len(b) - 1
    inv = pow(int(b[-1]), -1, p)
    for i in range(len(a) - 1 - db, -1, -1):
        coef = int(a[i + db]) * inv % p
        if coef:
            a[i: i + db + 1] = (a[i: i + db + 1] - coef * b) % p
    return modp_trim(a[:db]) if db else a[:0]


def modp_monic(a: np.ndarray, p: int) -> np.ndarray:
    a = modp_trim(a)
    if not len(a):
        return a
    return a * pow(int(a[-1]), -1, p) % p


def modp_gcd(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """Приведённый НОД алгоритмом Евклида."""
    a, b = modp_trim(a), modp_trim(b)
    while len(b):
        a, b = b, modp_rem(a, b, p)
    return modp_monic(a, p)


def modp_divexact(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """Точное частное a / b."""
    a, b = modp_trim(a).copy(), modp_trim(b)
    db = len(b) - 1
    if len(a) - 1 < db:
        return np.zeros(0, dtype=np.int64)
    inv = pow(int(b[-1]), -1, p)
    q = np.zeros(len(a) - db, dtype=np.int64)
    for i in range(len(a) - 1 - db, -1, -1):
        coef = int(a[i + db]) * inv % p
        q[i] = coef
        if coef:
            a[i: i + db + 1] = (a[i: i + db + 1] - coef * b) % p
    if np.any(a[:db] if db else a[:0]):
        raise BidynError("Деление многочленов над GF(p) не точное")
    return q


def modp_terms(f: PolyElement, p: int) -> List[Tuple[Tuple[int, ...], int]]:
    """Мономы многочлена с коэффициентами, приведёнными по модулю p."""
    out = []
    for monom, coeff in f.items():
        if is_prime_field(f.ring.domain):
            c = int(coeff) % p
        else:
            c = ratio_mod_p(coeff, p)
        if c:
            out.append((monom, c))
    return out


def modp_apply(coords_terms: Sequence[List[Tuple[Tuple[int, ...], int]]],
               args: Sequence[np.ndarray], p: int) -> List[np.ndarray]:
    """
    Подставляет плотные многочлены args в набор многочленов (по мономам).
    """
    powers: List[List[np.ndarray]] = [[np.ones(1, dtype=np.int64), a] for a in args]

    def power(i: int, e: int) -> np.ndarray:
        cache = powers[i]
        while len(cache) <= e:
            cache.append(modp_mul(cache[-1], args[i], p))
        return cache[e]

    products: Dict[Tuple[int, ...], np.ndarray] = {}
    results = []
    for terms in coords_terms:
        acc = np.zeros(1, dtype=np.int64)
        for monom, c in terms:
            if monom not in products:
                value = np.ones(1, dtype=np.int64)
                for i, e in enumerate(monom):
                    if e:
                        value = modp_mul(value, power(i, e), p)
                products[monom] = value
            acc = modp_add(acc, products[monom] * c % p, p)
        results.append(modp_trim(acc))
    return results
