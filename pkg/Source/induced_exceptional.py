"""
Индуцированные отображения между исключительными дивизорами над (q, q) и над коникой 𝔮.

E_q - плоскость направлений [z : w : 1] в точке (q, q) трёхмерного X,
E_𝔮 - произведение коники v^2 = 5u^2 + 8u на проективную прямую слоя r.
Отображения phi-bar, psi-bar, chi-bar выводятся предельным переходом вдоль
семейства Γ(β) = ((βz, βw), (α(β), β)) на T, обратные - из структуры пучка
прямых, а Phi, Psi и их обратные собираются композицией.
"""

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Any, Dict, List, Optional, Sequence, Tuple

from sympy.polys.domains import QQ
from sympy.polys.fields import FracElement, FracField
from sympy.polys.matrices import DomainMatrix
from sympy.polys.rings import PolyElement

import console
from errors import BidynError, ExpansionOrderError, NegativeValuationError, RetryLimitError
from exact_algebra import PowerSeries, evaluate_at, poly_ring, series_branch, substitute
from poly_parser import parse_poly, render_poly
from ratmap import ProjRatMap, compose, normalize
from threefold_family import FAMILY_VARIABLES, involution_coords

E_POINT = "E_q"
E_CONIC = "E_𝔮"

DIRECTION_VARIABLES = ("z", "w")
CONIC_VARIABLES = ("u", "v", "r")
PLANE_VARIABLES = ("x", "y", "z")

SERIES_START_ORDER = 8
SERIES_MAX_ORDER = 64

INVOLUTIONS = ("phi", "psi", "chi")
SELECTORS = ("Phi", "Psi", "PsiPhi", "PhiInv", "PsiInv")

# точки для поиска центра пучка
_SAMPLES = ((2, 3), (5, -7), (11, 13), (-3, 17), (19, -23), (29, 31))


@lru_cache(maxsize=None)
def rational_field(variables: Tuple[str, ...]) -> FracField:
    """Поле QQ(variables); кольцо числителей совпадает с poly_ring(variables)."""
    return poly_ring(variables).to_field()


# ---------------------------------------------------------------------------
# Карта раздутия вдоль коники
# ---------------------------------------------------------------------------

def conic_equation(u: Any, v: Any) -> Any:
    """N(u, v) = 5u^2 + 8u - v^2; коника 𝔮 - это N = 0."""
    return 5 * u * u + 8 * u - v * v


@dataclass(frozen=True)
class ConicBlowupChart:
    """
    Аффинная карта (u, v, c, d, r, s) раздутия Bl_𝔮 X.

    u = x, v = y, c = a, d = b, s = a / b и
        r = b / N(x, y)  (ориентация "b/N", основная),
        r = N(x, y) / b  (ориентация "N/b", запасная).

    Исключительный дивизор в карте: v^2 = 5u^2 + 8u, c = d = 0, s = 0.
    """
    orientation: str = "b/N"

    coordinates = ("u", "v", "c", "d", "r", "s")
    exceptional = "v^2 = 5*u^2 + 8*u, c = d = 0, s = 0"

    def __post_init__(self):
        if self.orientation not in ("b/N", "N/b"):
            raise BidynError(f"Неизвестная ориентация карты: {self.orientation}")

    @property
    def relations(self) -> Tuple[str, ...]:
        if self.orientation == "b/N":
            return ("d = r*(5*u^2 + 8*u - v^2)", "c = s*d")
        return ("r*d = 5*u^2 + 8*u - v^2", "c = s*d")

    def alternate(self) -> "ConicBlowupChart":
        return ConicBlowupChart("N/b" if self.orientation == "b/N" else "b/N")

    def fiber_coordinate(self, d: PowerSeries, N: PowerSeries) -> PowerSeries:
        """
        Координата r вдоль ряда.

        Raises:
            NegativeValuationError: у r полюс в этой ориентации
        """
        num, den = (d, N) if self.orientation == "b/N" else (N, d)
        if num.valuation() < den.valuation():
            raise NegativeValuationError("r")
        return num / den

    def from_ambient(self, x: Any, y: Any, a: Any, b: Any) -> Tuple[Any, ...]:
        """
        (x, y, a, b) -> (u, v, c, d, r, s) вне исключительного множества.

        Raises:
            BidynError: точка лежит на 𝔮 или на b = 0
        """
        N = conic_equation(x, y)
        if not b or not N:
            raise BidynError("Точка вне области карты")
        r = b / N if self.orientation == "b/N" else N / b
        return (x, y, a, b, r, a / b)

    def to_ambient(self, u: Any, v: Any, r: Any, s: Any) -> Tuple[Any, Any, Any, Any]:
        N = conic_equation(u, v)
        d = r * N if self.orientation == "b/N" else N / r
        return (u, v, s * d, d)

    def on_exceptional(self, u: Any, v: Any, c: Any, d: Any, s: Any) -> bool:
        return not conic_equation(u, v) and not c and not d and not s

    def to_dict(self) -> Dict[str, Any]:
        return {
            "orientation": self.orientation,
            "coordinates": list(self.coordinates),
            "relations": list(self.relations),
            "exceptional": self.exceptional,
        }


# ---------------------------------------------------------------------------
# Отображения между исключительными дивизорами
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExceptionalMap:
    """
    Отображение E_q --> E_𝔮 (координаты u, v, r от z, w)
    или E_𝔮 --> E_q (координаты z, w от u, v, r).
    """
    name: str
    source: str
    target: str
    coords: Tuple[FracElement, ...]
    chart: ConicBlowupChart = ConicBlowupChart()

    def __post_init__(self):
        expected = {(E_POINT, E_CONIC): 3, (E_CONIC, E_POINT): 2}
        if expected.get((self.source, self.target)) != len(self.coords):
            raise BidynError(f"Неверные координаты для {self.source} -> {self.target}")

    @property
    def field(self) -> FracField:
        return self.coords[0].field

    def evaluate(self, values: Sequence[Any]) -> Optional[Tuple[Any, ...]]:
        """Значение в рациональной точке; None, если точка в полюсе."""
        point = [QQ.convert(v) for v in values]
        out = []
        for c in self.coords:
            den = evaluate_at(c.denom, point)
            if not den:
                return None
            out.append(evaluate_at(c.numer, point) / den)
        return tuple(out)

    def projectivize(self) -> Tuple[ProjRatMap, ProjRatMap]:
        """
        Проективная форма E_q -> 𝔮 x P^1 по направлениям [x : y : z]:
        пара ([U, V, W], [r_0, r_1]).
        """
        if self.source != E_POINT:
            raise BidynError("Проективная форма строится для отображений из E_q")
        u, v, r = (homogenize(c) for c in self.coords)
        conic_part = normalize(_clear_denominators([u, v, u.field.one]), f"{self.name}|𝔮")
        fiber_part = normalize([r.numer, r.denom], f"{self.name}|P1")
        return conic_part, fiber_part

    def to_dict(self) -> Dict[str, Any]:
        names = CONIC_VARIABLES if self.target == E_CONIC else DIRECTION_VARIABLES
        return {
            "name": self.name,
            "source": self.source,
            "target": self.target,
            "chart": self.chart.orientation,
            "coords": {n: render_fraction(c) for n, c in zip(names, self.coords)},
        }


def render_fraction(f: FracElement) -> str:
    if f.denom == 1:
        return render_poly(f.numer)
    return f"({render_poly(f.numer)})/({render_poly(f.denom)})"


def substitute_fraction(f: FracElement, images: Sequence[Any], one: Any) -> Any:
    """Подстановка в числитель и знаменатель рациональной функции."""
    return substitute(f.numer, images, one) / substitute(f.denom, images, one)


def _clear_denominators(fracs: Sequence[FracElement]) -> List[PolyElement]:
    L = fracs[0].denom
    for f in fracs[1:]:
        L = L.lcm(f.denom)
    return [f.numer * L.exquo(f.denom) for f in fracs]


def homogenize(f: FracElement) -> FracElement:
    """z -> x/Z, w -> y/Z: рациональная функция степени 0 на плоскости направлений."""
    F3 = rational_field(PLANE_VARIABLES)
    x, y, Z = F3.gens
    return substitute_fraction(f, [x / Z, y / Z], F3.one)


def direction_map(coords: Sequence[FracElement], name: str) -> ProjRatMap:
    """Аффинное отображение направлений (z, w) -> (z', w') как [x' : y' : z'] на P^2."""
    z, w = (homogenize(c) for c in coords)
    return normalize(_clear_denominators([z, w, z.field.one]), name)


# ---------------------------------------------------------------------------
# Вывод phi-bar, psi-bar, chi-bar
# ---------------------------------------------------------------------------

def _family_point(f: str, alpha: PowerSeries, beta: PowerSeries, one: PowerSeries) -> List[PowerSeries]:
    """(a, b, c) неподвижной точки инволюции f вдоль семейства."""
    if f == "phi":
        return [one * 0, one * 0, one]
    if f == "psi":
        return [alpha, beta, one]
    if f == "chi":
        return [alpha, -beta, one]
    raise BidynError(f"Неизвестная инволюция: {f}")


def _limit(f: str, chart: ConicBlowupChart, order: int) -> Tuple[Any, Any, Any]:
    """Свободные члены (u, v, r) вдоль Γ при точности order."""
    F2 = rational_field(DIRECTION_VARIABLES)
    K = F2.to_domain()
    z, w = (K.convert(g) for g in F2.gens)

    curve = parse_poly("b^2 - a^3 - 5*a^2 - 4*a", ("a", "b"))
    branch = series_branch(curve, "a", order)
    n = branch.order
    alpha = PowerSeries(branch.coeffs, n, K, "b")
    beta = PowerSeries.gen(n, K, "b")
    one = PowerSeries.constant(1, n, K, "b")

    R6 = poly_ring(FAMILY_VARIABLES)
    a, b, c = _family_point(f, alpha, beta, one)
    images = [beta * z, beta * w, one, a, b, c]
    X1, X2, X3 = (substitute(P, images, one) for P in involution_coords(R6))
    if X3.is_zero():
        raise ExpansionOrderError(f"Знаменатель {f} нулевой до порядка {n}")
    if X3.valuation() > min(X1.valuation(), X2.valuation()):
        raise NegativeValuationError("u")

    u = X1 / X3
    v = X2 / X3
    # слой над t сохраняется: c = alpha, d = beta
    r = chart.fiber_coordinate(beta, conic_equation(u, v))
    s = alpha / beta
    if s[0]:
        raise BidynError(f"Предел {f} не лежит на исключительном дивизоре: s = {s[0]}")
    return u[0], v[0], r[0]


def _derive_with_chart(f: str, chart: ConicBlowupChart) -> ExceptionalMap:
    order = SERIES_START_ORDER
    previous = None
    while order <= SERIES_MAX_ORDER:
        try:
            current = _limit(f, chart, order)
        except ExpansionOrderError:
            current = None
        if current is not None and current == previous:
            return ExceptionalMap(f"{f}-bar", E_POINT, E_CONIC, current, chart)
        previous = current
        order *= 2
    raise ExpansionOrderError(f"Предел {f} не стабилизировался до порядка {SERIES_MAX_ORDER}")


@lru_cache(maxsize=None)
def derive_point_to_conic(f: str, chart: Optional[ConicBlowupChart] = None) -> ExceptionalMap:
    """
    Индуцированное отображение E_q --> E_𝔮 для инволюции f.

    Args:
        f: "phi", "psi" или "chi"
        chart: Карта Bl_𝔮 X; без неё пробуется основная, затем запасная

    Returns:
        ExceptionalMap с координатами u, v, r из QQ(z, w)

    Raises:
        NegativeValuationError: заданная карта даёт полюс
        RetryLimitError: полюс в обеих ориентациях
    """
    if f not in INVOLUTIONS:
        raise BidynError(f"Неизвестная инволюция: {f}")
    console.step(f"Вывод {f}-bar: E_q -> E_𝔮")
    if chart is not None:
        return _derive_with_chart(f, chart)
    chart = ConicBlowupChart()
    for attempt in (chart, chart.alternate()):
        try:
            m = _derive_with_chart(f, attempt)
            console.ok(f"{f}-bar выведено в карте r = {attempt.orientation}")
            return m
        except NegativeValuationError as e:
            console.warn(f"Карта {attempt.orientation} не подходит для {f}: {e}")
    raise RetryLimitError(f"Ни одна ориентация карты не подходит для {f}")


# ---------------------------------------------------------------------------
# Обращение через пучок прямых
# ---------------------------------------------------------------------------

def _value(f: FracElement, point: Sequence[Any]) -> Optional[Any]:
    den = evaluate_at(f.denom, point)
    if not den:
        return None
    return evaluate_at(f.numer, point) / den


def pencil_center(u: FracElement, v: FracElement) -> Tuple[Any, Any]:
    """
    Точка (z0, w0), на прямых через которую (u, v) постоянны:
    z0 u_z + w0 u_w = z u_z + w u_w (и то же для v).

    Raises:
        BidynError: такой точки нет
    """
    z, w = u.field.gens
    uz, uw = u.diff(z), u.diff(w)
    rhs = z * uz + w * uw
    rows = []
    for sample in _SAMPLES:
        point = [QQ(sample[0]), QQ(sample[1])]
        row = [_value(uz, point), _value(uw, point), _value(rhs, point)]
        if None not in row:
            rows.append(row)
    for (a1, b1, c1), (a2, b2, c2) in combinations(rows, 2):
        det = a1 * b2 - a2 * b1
        if not det:
            continue
        z0, w0 = (c1 * b2 - c2 * b1) / det, (a1 * c2 - a2 * c1) / det
        if all(z0 * g.diff(z) + w0 * g.diff(w) == z * g.diff(z) + w * g.diff(w) for g in (u, v)):
            return z0, w0
        break
    raise BidynError("Образ не расслаивается пучком прямых через точку")


def _split_rho(p: PolyElement, Rm: Any) -> List[PolyElement]:
    """p(rho, m) -> коэффициенты при rho^0, rho^1, ... как многочлены от m."""
    parts: Dict[int, Dict[Tuple[int], Any]] = {}
    for (i, j), c in p.items():
        parts.setdefault(i, {})[(j,)] = c
    top = max(parts) if parts else 0
    return [Rm.from_dict(parts.get(i, {})) for i in range(top + 1)]


def _slope_inverse(U: Tuple[PolyElement, PolyElement], V: Tuple[PolyElement, PolyElement]) -> List[Any]:
    """
    Коэффициенты (a0, a1, a2, b0, b1, b2) с m = (a0 + a1 U + a2 V) / (b0 + b1 U + b2 V);
    выбирается самое разреженное соотношение.
    """
    (Un, Ud), (Vn, Vd) = U, V
    L = Ud.lcm(Vd)
    m = L.ring.gens[0]
    UL, VL = Un * L.exquo(Ud), Vn * L.exquo(Vd)
    columns = [-L, -UL, -VL, m * L, m * UL, m * VL]
    monomials = sorted({mon for col in columns for mon in col.keys()})
    for size in range(2, 7):
        for support in combinations(range(6), size):
            if not any(k >= 3 for k in support) or not any(k < 3 for k in support):
                continue
            rows = [[QQ.convert(columns[k].get(mon, 0)) for k in support] for mon in monomials]
            kernel = DomainMatrix(rows, (len(rows), size), QQ).nullspace().to_list()
            if len(kernel) == 1 and all(kernel[0]):
                vector = [QQ.zero] * 6
                for k, c in zip(support, kernel[0]):
                    vector[k] = c
                return vector
    raise BidynError("Наклон не выражается дробно-линейно через (u, v)")


def invert_point_to_conic(m: ExceptionalMap) -> ExceptionalMap:
    """
    Обратное отображение E_𝔮 --> E_q.

    (u, v) зависят только от наклона прямой через центр пучка (z0, w0),
    а r вдоль каждой такой прямой дробно-линейна по параметру rho.

    Raises:
        BidynError: структура пучка нарушена или обратное не сходится
    """
    if m.source != E_POINT:
        raise BidynError("Обращается только отображение E_q -> E_𝔮")
    u, v, r = m.coords
    z0, w0 = pencil_center(u, v)

    Frm = rational_field(("rho", "m"))
    rho, slope = Frm.gens
    line = [rho + z0, rho * slope + w0]
    U, V, Rr = (substitute_fraction(c, line, Frm.one) for c in (u, v, r))
    for g in (U, V):
        if g.numer.degree(0) or g.denom.degree(0):
            raise BidynError("(u, v) меняются вдоль прямой пучка")
    num, den = Rr.numer, Rr.denom
    if num.degree(0) > 1 or den.degree(0) > 1:
        raise BidynError("r не дробно-линейна вдоль прямой пучка")

    Rm = poly_ring(("m",))
    B, A = (_split_rho(num, Rm) + [Rm.zero])[:2]
    D, C = (_split_rho(den, Rm) + [Rm.zero])[:2]
    a0, a1, a2, b0, b1, b2 = _slope_inverse(
        (_split_rho(U.numer, Rm)[0], _split_rho(U.denom, Rm)[0]),
        (_split_rho(V.numer, Rm)[0], _split_rho(V.denom, Rm)[0]),
    )

    F3 = rational_field(CONIC_VARIABLES)
    uu, vv, rr = F3.gens
    M = (uu * a1 + vv * a2 + a0) / (uu * b1 + vv * b2 + b0)
    A, B, C, D = (substitute(p, [M], F3.one) for p in (A, B, C, D))
    t = (B - D * rr) / (C * rr - A)
    inverse = ExceptionalMap(f"{m.name}^-1", E_CONIC, E_POINT, (t + z0, t * M + w0), m.chart)
    if not is_left_inverse(inverse, m):
        raise BidynError(f"Обратное к {m.name} не проходит проверку")
    console.ok(f"{inverse.name}: центр пучка ({z0}, {w0})")
    return inverse


def compose_exceptional(outer: ExceptionalMap, inner: ExceptionalMap) -> Tuple[FracElement, ...]:
    """Координаты outer o inner в переменных inner."""
    if outer.source != inner.target:
        raise BidynError(f"Нельзя скомпоновать {outer.name} и {inner.name}: {inner.target} != {outer.source}")
    return tuple(substitute_fraction(c, inner.coords, inner.field.one) for c in outer.coords)


def is_left_inverse(inverse: ExceptionalMap, m: ExceptionalMap) -> bool:
    return list(compose_exceptional(inverse, m)) == list(m.field.gens)


@lru_cache(maxsize=None)
def inverse_of(f: str) -> ExceptionalMap:
    return invert_point_to_conic(derive_point_to_conic(f))


# ---------------------------------------------------------------------------
# Сборка Phi, Psi
# ---------------------------------------------------------------------------

_ASSEMBLY = {
    "Phi": ("psi", "phi"),
    "Psi": ("chi", "phi"),
    "PhiInv": ("phi", "psi"),
    "PsiInv": ("phi", "chi"),
}


@lru_cache(maxsize=None)
def assemble_induced(selector: str) -> ProjRatMap:
    """
    Отображение плоскости направлений E_q:
        Phi = psi-bar^-1 o phi-bar, Psi = chi-bar^-1 o phi-bar,
        PhiInv = phi-bar^-1 o psi-bar, PsiInv = phi-bar^-1 o chi-bar,
        PsiPhi = Psi o Phi.
    """
    if selector == "PsiPhi":
        return compose(assemble_induced("Psi"), assemble_induced("Phi"), "PsiPhi")
    if selector not in _ASSEMBLY:
        raise BidynError(f"Неизвестное отображение: {selector}; доступны {', '.join(SELECTORS)}")
    outer, inner = _ASSEMBLY[selector]
    coords = compose_exceptional(inverse_of(outer), derive_point_to_conic(inner))
    result = direction_map(coords, selector)
    console.ok(f"{selector}: степень {result.degree}")
    return result


def proportional(f: ProjRatMap, g: ProjRatMap) -> bool:
    """Координаты f и g совпадают с точностью до общего скаляра."""
    if len(f.coords) != len(g.coords) or f.ring != g.ring:
        return False
    n = len(f.coords)
    return all(f.coords[i] * g.coords[j] == f.coords[j] * g.coords[i]
               for i in range(n) for j in range(i + 1, n)) and any(f.coords)
