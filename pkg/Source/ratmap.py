"""
Рациональные отображения проективных пространств.

Отображение хранится как набор взаимно простых однородных многочленов одной
степени. Здесь нормализация, композиция, вычисление в точках, поиск точек
неопределённости, последовательности степеней, стягиваемые кривые и
индуцированные отображения на исключительных дивизорах раздутий точки и
координатной прямой.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import gmpy2
import numpy as np
from sympy import nextprime
from sympy.polys.domains import QQ
from sympy.polys.fields import field as frac_field
from sympy.polys.galoistools import csolve_prime
from sympy.polys.matrices import DomainMatrix
from sympy.polys.orderings import grlex
from sympy.polys.rings import PolyElement, PolyRing

import console
from errors import (
    BadPrimeError,
    BidynError,
    DegenerateCompositionError,
    DimensionMismatchError,
    DomainMismatchError,
    ExpansionOrderError,
    IndeterminateError,
    InhomogeneousError,
    RetryLimitError,
    ZeroMapError,
)
from exact_algebra import (
    _inverse3,
    _frame_matrix,
    base_point_frame,
    canonical_poly,
    evaluate_at,
    field_characteristic,
    gcd_many,
    is_homogeneous,
    is_prime_field,
    line_direction,
    local_expansion,
    modp_apply,
    modp_degree,
    modp_divexact,
    modp_gcd,
    modp_terms,
    poly_ring,
    prime_field,
    ratio_mod_p,
    reduce_mod_p,
    substitute,
    total_degree,
    truncate,
)

MAX_EXPANSION_ORDER = 16
MAX_RETRIES = 3


# ---------------------------------------------------------------------------
# Точки
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProjPoint:
    """
    Точка проективного пространства в каноническом представлении.

    Над QQ: целые координаты с НОД 1 и положительной первой ненулевой
    координатой. Над GF(p): первая ненулевая координата равна 1.
    """
    coords: Tuple[int, ...]
    prime: Optional[int] = None

    def __post_init__(self):
        values = list(self.coords)
        if self.prime is None:
            values = [QQ.convert(v) for v in values]
            if not any(values):
                raise ZeroMapError("Все координаты точки равны нулю")
            den = 1
            for v in values:
                d = int(QQ.denom(v))
                den = den * d // _gcd(den, d)
            ints = [int(v * den) for v in values]
            g = 0
            for v in ints:
                g = _gcd(g, v)
            lead = next(v for v in ints if v)
            sign = 1 if lead > 0 else -1
            canonical = tuple(sign * v // g for v in ints)
        else:
            p = self.prime
            ints = [_to_mod(v, p) for v in values]
            if not any(ints):
                raise ZeroMapError("Все координаты точки равны нулю")
            inv = pow(next(v for v in ints if v), -1, p)
            canonical = tuple(v * inv % p for v in ints)
        object.__setattr__(self, "coords", canonical)

    @property
    def domain(self):
        return QQ if self.prime is None else prime_field(self.prime)

    @property
    def dimension(self) -> int:
        return len(self.coords) - 1

    def values(self) -> List[Any]:
        dom = self.domain
        return [dom.convert(c) for c in self.coords]

    def reduce(self, p: int) -> "ProjPoint":
        """Образ точки в P^n(GF(p))."""
        if self.prime is not None:
            if self.prime != p:
                raise DomainMismatchError("Точка задана над другим простым полем")
            return self
        return ProjPoint(tuple(c % p for c in self.coords), p)

    def __str__(self) -> str:
        return "[" + ",".join(str(c) for c in self.coords) + "]"


def _gcd(a: int, b: int) -> int:
    # координаты орбит бывают в десятки тысяч цифр
    return int(gmpy2.gcd(a, b))


def _to_mod(value: Any, p: int) -> int:
    if isinstance(value, int):
        return value % p
    if hasattr(value, "val") and hasattr(value, "mod"):
        return int(value) % p
    return ratio_mod_p(value, p)


def point(*coords: Any, prime: Optional[int] = None) -> ProjPoint:
    return ProjPoint(tuple(coords), prime)


# ---------------------------------------------------------------------------
# Отображения
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProjRatMap:
    """
    Рациональное отображение P^n --> P^m.

    Args:
        coords: Однородные многочлены одной степени без общего множителя
        name: Имя для отчётов
        factors: Разложение в цепочку отображений в порядке применения
            (для композиции f∘g это цепочка g, затем цепочка f)
    """
    coords: Tuple[PolyElement, ...]
    name: str = field(default="", compare=False)
    factors: Tuple["ProjRatMap", ...] = field(default=(), compare=False, repr=False)

    @property
    def ring(self) -> PolyRing:
        return self.coords[0].ring

    @property
    def domain(self):
        return self.ring.domain

    @property
    def degree(self) -> int:
        return max(total_degree(c) for c in self.coords)

    @property
    def source_dim(self) -> int:
        return self.ring.ngens - 1

    @property
    def target_dim(self) -> int:
        return len(self.coords) - 1

    @property
    def chain(self) -> Tuple["ProjRatMap", ...]:
        return self.factors or (self,)

    def renamed(self, name: str) -> "ProjRatMap":
        return ProjRatMap(self.coords, name, self.factors)

    def mod_p(self, p: int) -> "ProjRatMap":
        """Редукция коэффициентов в GF(p) (цепочка множителей тоже редуцируется)."""
        if is_prime_field(self.domain):
            if field_characteristic(self.domain) != p:
                raise DomainMismatchError("Отображение задано над другим простым полем")
            return self
        coords = tuple(reduce_mod_p(c, p) for c in self.coords)
        if not any(coords) or any(c and not r for c, r in zip(self.coords, coords)):
            raise BadPrimeError(p, f"Простое {p} обнуляет координату отображения {self.name}")
        factors = tuple(f.mod_p(p) for f in self.factors)
        return ProjRatMap(coords, self.name, factors)

    def __call__(self, P: ProjPoint) -> ProjPoint:
        return evaluate(self, P)

    def __str__(self) -> str:
        from poly_parser import render_poly
        return "[" + ", ".join(render_poly(c) for c in self.coords) + "]"


def identity_map(n: int = 2, domain=QQ, variables: Optional[Sequence[str]] = None) -> ProjRatMap:
    """Тождественное отображение P^n."""
    names = tuple(variables) if variables else (("x", "y", "z") if n == 2 else tuple(f"x{i}" for i in range(n + 1)))
    R = poly_ring(names, domain)
    return ProjRatMap(tuple(R.gens), "identity")


def _content_scale(coords: Sequence[PolyElement]) -> Any:
    """Скаляр, приводящий набор к целым взаимно простым коэффициентам со знаком."""
    dom = coords[0].ring.domain
    lead_poly = next(c for c in coords if c)
    if is_prime_field(dom):
        return dom.quo(dom.one, lead_poly.LC)
    den = 1
    for c in coords:
        for v in c.values():
            d = int(QQ.denom(v))
            den = den * d // _gcd(den, d)
    g = 0
    for c in coords:
        for v in c.values():
            g = _gcd(g, int(v * den))
    scale = QQ(den, g)
    return -scale if lead_poly.LC < 0 else scale


def normalize(raw: Sequence[PolyElement], name: str = "",
              factors: Sequence[ProjRatMap] = ()) -> ProjRatMap:
    """
    Приводит набор однородных многочленов к каноническому отображению.

    Общий множитель снимается через gcd, содержание - через общий скаляр,
    знак выбирается так, чтобы старший коэффициент первой ненулевой
    координаты был положителен.

    Raises:
        ZeroMapError: все координаты нулевые
        InhomogeneousError: неоднородные координаты или разные степени
    """
    coords = list(raw)
    if not coords or not any(coords):
        raise ZeroMapError("Нулевой набор координат")
    R = coords[0].ring
    if any(c.ring != R for c in coords):
        raise DomainMismatchError("Координаты заданы в разных кольцах")
    degrees = {total_degree(c) for c in coords if c}
    if len(degrees) != 1 or not all(is_homogeneous(c) for c in coords):
        raise InhomogeneousError(f"Координаты не однородны одной степени: степени {sorted(degrees)}")
    g = gcd_many(c for c in coords if c)
    if total_degree(g) > 0:
        coords = [c.exquo(g) if c else c for c in coords]
    scale = _content_scale(coords)
    coords = [c.mul_ground(scale) for c in coords]
    return ProjRatMap(tuple(coords), name, tuple(factors))


def compose(f: ProjRatMap, g: ProjRatMap, name: str = "") -> ProjRatMap:
    """
    Композиция f∘g: подстановка g в f и нормализация.

    Raises:
        DimensionMismatchError: g отображает не в пространство источника f
        DegenerateCompositionError: образ g лежит в базисном множестве f
    """
    if g.target_dim != f.source_dim:
        raise DimensionMismatchError(f"Нельзя композировать P^{f.source_dim} после P^{g.target_dim}")
    if f.domain != g.domain:
        raise DomainMismatchError("Отображения заданы над разными полями")
    one = g.ring.one
    raw = [substitute(c, g.coords, one) for c in f.coords]
    if not any(raw):
        raise DegenerateCompositionError(f"Композиция {f.name}∘{g.name} тождественно равна нулю")
    label = name or (f"{f.name}∘{g.name}" if f.name and g.name else "")
    return normalize(raw, label, g.chain + f.chain)


def compose_chain(maps: Sequence[ProjRatMap], name: str = "") -> ProjRatMap:
    """Композиция цепочки в порядке применения: maps[-1]∘...∘maps[0]."""
    result = maps[0]
    for m in maps[1:]:
        result = compose(m, result)
    return result.renamed(name) if name else result


def iterate(f: ProjRatMap, n: int) -> ProjRatMap:
    """f^n точной композицией."""
    result = f
    for _ in range(n - 1):
        result = compose(f, result)
    return result


def evaluate(f: ProjRatMap, P: ProjPoint) -> ProjPoint:
    """
    Образ точки.

    Raises:
        IndeterminateError: все координаты обращаются в ноль
    """
    if P.dimension != f.source_dim:
        raise DimensionMismatchError(f"Точка из P^{P.dimension}, отображение из P^{f.source_dim}")
    if P.prime is not None and not is_prime_field(f.domain):
        f = f.mod_p(P.prime)
    elif P.prime is None and is_prime_field(f.domain):
        P = P.reduce(field_characteristic(f.domain))
    values = [evaluate_at(c, P.coords) for c in f.coords]
    if not any(values):
        raise IndeterminateError(P)
    return ProjPoint(tuple(values), P.prime)


def evaluate_chain(f: ProjRatMap, P: ProjPoint) -> ProjPoint:
    """Вычисление через цепочку множителей (быстрее для композиций)."""
    for factor in f.chain:
        P = evaluate(factor, P)
    return P


def is_identity(f: ProjRatMap) -> bool:
    """Совпадает ли нормализованное отображение с (x_0, ..., x_n) с точностью до скаляра."""
    if f.source_dim != f.target_dim or f.degree != 1:
        return False
    gens = f.ring.gens
    lead = f.coords[0].coeff(gens[0]) if f.coords[0] else None
    if not lead:
        return False
    return all(c == g * lead for c, g in zip(f.coords, gens))


# ---------------------------------------------------------------------------
# Случайные прямые и простые
# ---------------------------------------------------------------------------

def _random_ints(rng: np.random.Generator, n: int, bound: int = 50) -> List[int]:
    return [int(v) for v in rng.integers(-bound, bound + 1, size=n)]


def random_prime(rng: np.random.Generator, bits: int = 31) -> int:
    """Простое близкое к 2**bits, выбранное из генератора."""
    low = 2 ** (bits - 1)
    start = int(rng.integers(low, 2 ** bits - 2 ** (bits - 4)))
    return int(nextprime(start))


def line_parametrization(A: Sequence[int], B: Sequence[int], R1: PolyRing) -> List[PolyElement]:
    """Аффинная параметризация A + T*B прямой через A и B."""
    T = R1.gens[0]
    dom = R1.domain
    return [R1.ground_new(dom.convert(a)) + T * dom.convert(b) for a, b in zip(A, B)]


def _reduce_univariate(coords: List[PolyElement]) -> List[PolyElement]:
    nonzero = [c for c in coords if c]
    if not nonzero:
        raise ZeroMapError("Сужение на прямую тождественно нулевое")
    g = nonzero[0]
    for c in nonzero[1:]:
        g = g.gcd(c)
        if total_degree(g) == 0:
            return coords
    if total_degree(g) == 0:
        return coords
    return [c.exquo(g) if c else c for c in coords]


# ---------------------------------------------------------------------------
# Неопределённость
# ---------------------------------------------------------------------------

@dataclass
class IndeterminacyReport:
    """Результат проверки кандидатов и пробы полноты на случайных прямых."""
    confirmed: List[ProjPoint]
    rejected: List[ProjPoint]
    extra: List[ProjPoint]
    irrational_evidence: List[str]
    lines_probed: int

    @property
    def complete(self) -> bool:
        return not self.extra and not self.irrational_evidence

    def to_dict(self) -> Dict[str, Any]:
        return {
            "indeterminate": [list(p.coords) for p in self.confirmed],
            "rejected": [list(p.coords) for p in self.rejected],
            "probe": {
                "lines": self.lines_probed,
                "extra_points": [list(p.coords) for p in self.extra],
                "irrational_evidence": self.irrational_evidence,
            },
        }


def is_indeterminate(f: ProjRatMap, P: ProjPoint) -> bool:
    try:
        evaluate(f, P)
    except IndeterminateError:
        return True
    return False


def indeterminacy_check(f: ProjRatMap, candidates: Sequence[ProjPoint], lines: int = 20,
                        seed: int = 7) -> IndeterminacyReport:
    """
    Точная проверка кандидатов и проба полноты.

    На каждой из случайных прямых A + T*B ищется НОД сужений координат;
    его рациональные корни - базисные точки на прямой, нелинейные
    неприводимые множители - свидетельство иррациональных базисных точек.

    Args:
        f: Отображение над QQ
        candidates: Предполагаемые точки неопределённости
        lines: Число случайных прямых
        seed: Зерно генератора

    Returns:
        IndeterminacyReport
    """
    confirmed = [P for P in candidates if is_indeterminate(f, P)]
    rejected = [P for P in candidates if P not in confirmed]
    known = set(confirmed)
    extra: List[ProjPoint] = []
    evidence: List[str] = []
    rng = np.random.default_rng(seed)
    R1 = poly_ring(("T",), f.domain)
    n = f.source_dim + 1
    for k in range(lines):
        A, B = _random_ints(rng, n), _random_ints(rng, n)
        if not any(B):
            B[0] = 1
        restricted = [substitute(c, line_parametrization(A, B, R1), R1.one) for c in f.coords]
        nonzero = [c for c in restricted if c]
        if not nonzero:
            evidence.append(f"прямая {k}: лежит в базисном множестве")
            continue
        g = nonzero[0]
        for c in nonzero[1:]:
            g = g.gcd(c)
        if total_degree(g) > 0:
            _, factors = g.factor_list()
            for factor, _mult in factors:
                if total_degree(factor) == 1:
                    T = R1.gens[0]
                    a, b = factor.coeff(T), factor.coeff(1)
                    t0 = -b / a
                    P = ProjPoint(tuple(QQ.convert(x) + t0 * QQ.convert(y) for x, y in zip(A, B)))
                    if P not in known and P not in extra:
                        extra.append(P)
                else:
                    evidence.append(f"прямая {k}: неприводимый множитель степени {total_degree(factor)}")
        try:
            P_inf = ProjPoint(tuple(B))
            if P_inf not in known and P_inf not in extra and is_indeterminate(f, P_inf):
                extra.append(P_inf)
        except ZeroMapError:
            pass
    if extra:
        console.warn(f"Проба нашла {len(extra)} новых базисных точек у {f.name}")
    return IndeterminacyReport(confirmed, rejected, extra, evidence, lines)


# ---------------------------------------------------------------------------
# Последовательности степеней
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DegreeSequence:
    """
    Степени D_1..D_N итераций.

    methods - метод для каждого значения (exact, line, modp), primes -
    использованные простые (для modp).
    """
    values: Tuple[int, ...]
    methods: Tuple[str, ...]
    primes: Tuple[int, ...] = ()
    note: str = ""

    def __post_init__(self):
        if any(v < 1 for v in self.values):
            raise BidynError("Степени итераций должны быть положительны")
        if len(self.methods) != len(self.values):
            raise BidynError("Метод указывается для каждого значения")
        if "modp" in self.methods and not self.primes:
            raise BidynError("Значения по модулю p должны хранить простое")

    def ratios(self) -> List[float]:
        return [b / a for a, b in zip(self.values, self.values[1:])]

    def is_submultiplicative(self) -> bool:
        """D_{n+m} <= D_n * D_m для точно вычисленных значений."""
        exact = [i for i, m in enumerate(self.methods) if m == "exact"]
        d = self.values
        for i in exact:
            for j in exact:
                k = i + j + 1
                if k < len(d) and self.methods[k] == "exact" and d[k] > d[i] * d[j]:
                    return False
        return True

    def to_dict(self) -> Dict[str, Any]:
        return {
            "degrees": list(self.values),
            "method": self.methods[0] if len(set(self.methods)) == 1 else list(self.methods),
            "primes": list(self.primes),
            "note": self.note,
        }


def _degrees_exact(f: ProjRatMap, N: int) -> List[int]:
    values = [f.degree]
    current = f
    for n in range(2, N + 1):
        current = compose(f, current)
        values.append(current.degree)
        console.step(f"deg {f.name}^{n} = {current.degree}")
    return values


def _degrees_on_line(f: ProjRatMap, N: int, A: Sequence[int], B: Sequence[int]) -> List[int]:
    R1 = poly_ring(("T",), f.domain)
    coords = line_parametrization(A, B, R1)
    values = []
    for _ in range(N):
        for factor in f.chain:
            coords = _reduce_univariate([substitute(c, coords, R1.one) for c in factor.coords])
        values.append(max(total_degree(c) for c in coords))
    return values


def _degrees_mod_p(f: ProjRatMap, N: int, p: int, rng: np.random.Generator) -> List[int]:
    terms = [[modp_terms(c, p) for c in factor.coords] for factor in f.chain]
    for factor, factor_terms in zip(f.chain, terms):
        if any(c and not t for c, t in zip(factor.coords, factor_terms)):
            raise BadPrimeError(p)
    n = f.source_dim + 1
    A = [int(v) for v in rng.integers(0, p, size=n)]
    B = [int(v) for v in rng.integers(0, p, size=n)]
    coords = [np.array([a, b], dtype=np.int64) for a, b in zip(A, B)]
    values = []
    for _ in range(N):
        for factor_terms in terms:
            coords = modp_apply(factor_terms, coords, p)
            nonzero = [c for c in coords if len(c)]
            if not nonzero:
                raise ZeroMapError("Сужение на прямую тождественно нулевое")
            g = nonzero[0]
            for c in nonzero[1:]:
                g = modp_gcd(g, c, p)
                if len(g) == 1:
                    break
            if len(g) > 1:
                coords = [modp_divexact(c, g, p) if len(c) else c for c in coords]
        values.append(max(modp_degree(c) for c in coords))
    return values


def degree_sequence(f: ProjRatMap, N: int, method: str = "exact", seed: int = 7,
                    prime_bits: int = 31, primes: Optional[Sequence[int]] = None) -> DegreeSequence:
    """
    Степени f, f^2, ..., f^N.

    Args:
        f: Отображение (цепочка f.factors используется для сужений)
        N: Число итераций
        method: exact - композиция; line - сужение на две случайные прямые над QQ;
            modp - сужение на случайную прямую над двумя простыми полями, максимум
        seed: Зерно генератора
        prime_bits: Размер простых для modp
        primes: Явные простые для modp

    Raises:
        RetryLimitError: прямые не согласуются или постоянно попадают в базисное множество
    """
    if N < 1:
        raise BidynError("N должно быть не меньше 1")
    rng = np.random.default_rng(seed)
    n = f.source_dim + 1

    if method == "exact":
        values = _degrees_exact(f, N)
        return DegreeSequence(tuple(values), ("exact",) * N)

    if method == "line":
        for attempt in range(MAX_RETRIES):
            try:
                first = _degrees_on_line(f, N, _random_ints(rng, n, 1000), _random_ints(rng, n, 1000))
                second = _degrees_on_line(f, N, _random_ints(rng, n, 1000), _random_ints(rng, n, 1000))
            except ZeroMapError:
                continue
            if first == second:
                return DegreeSequence(tuple(first), ("line",) * N)
            console.warn(f"Прямые дали разные степени {first} и {second}, повтор")
        raise RetryLimitError(f"Не удалось согласовать степени на случайных прямых за {MAX_RETRIES} попыток")

    if method == "modp":
        chosen: List[int] = []
        results: List[List[int]] = []
        explicit = list(primes or [])
        for attempt in range(MAX_RETRIES * 3):
            if len(results) == 2:
                break
            p = explicit.pop(0) if explicit else random_prime(rng, prime_bits)
            try:
                results.append(_degrees_mod_p(f, N, p, rng))
                chosen.append(p)
                console.step(f"mod {p}: {results[-1]}")
            except (BadPrimeError, ZeroMapError):
                console.warn(f"Простое {p} отвергнуто, выбираем другое")
        if len(results) < 2:
            raise RetryLimitError("Не удалось подобрать два хороших простых")
        values = [max(col) for col in zip(*results)]
        agree = results[0] == results[1]
        note = "простые согласованы" if agree else f"по простым: {results}"
        return DegreeSequence(tuple(values), ("modp",) * N, tuple(chosen), note)

    raise BidynError(f"Неизвестный метод: {method}")


# ---------------------------------------------------------------------------
# Стягивание кривых
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ParamCurve:
    """Кривая, заданная параметризацией T -> [X_0(T) : ... : X_n(T)]."""
    coords: Tuple[PolyElement, ...]
    name: str = ""

    def at(self, value: Any) -> ProjPoint:
        return ProjPoint(tuple(evaluate_at(c, [value]) for c in self.coords))


@dataclass(frozen=True)
class ImplicitCurve:
    """Плоская кривая F = 0 с выборкой точек над GF(p)."""
    equation: PolyElement
    name: str = ""


def parametrize_line(line: PolyElement, name: str = "") -> ParamCurve:
    """Параметризация прямой a*x + b*y + c*z = 0."""
    R1 = poly_ring(("T",), QQ)
    gens = line.ring.gens
    a, b, c = (QQ.convert(line.coeff(g)) for g in gens)
    if c:
        Q1, Q2 = (c, 0, -a), (0, c, -b)
    elif b:
        Q1, Q2 = (b, -a, 0), (0, 0, 1)
    else:
        Q1, Q2 = (0, 1, 0), (0, 0, 1)
    return ParamCurve(tuple(line_parametrization(Q1, Q2, R1)), name or str(line.as_expr()))


def parametrize_conic(conic: PolyElement, base: Sequence[int], name: str = "",
                      U: Sequence[int] = (1, 0, 0), V: Sequence[int] = (0, 1, 0)) -> ParamCurve:
    """
    Рациональная параметризация коники через её рациональную точку base.

    Прямая через base и Q(T) = U + T*V вторично пересекает конику в точке
    -F(Q)*base + (grad F(base) . Q) * Q.
    """
    if evaluate_at(conic, base):
        raise BidynError("Точка не лежит на конике")
    R1 = poly_ring(("T",), QQ)
    Q = line_parametrization(U, V, R1)
    gradient = [evaluate_at(conic.diff(g), base) for g in conic.ring.gens]
    FQ = substitute(conic, Q, R1.one)
    pairing = sum((Q[i] * gradient[i] for i in range(3)), R1.zero)
    coords = [-FQ * QQ.convert(base[i]) + pairing * Q[i] for i in range(3)]
    return ParamCurve(tuple(_reduce_univariate(coords)), name)


def sample_curve_mod_p(curve: PolyElement, p: int, count: int,
                       rng: np.random.Generator) -> List[ProjPoint]:
    """Случайные точки плоской кривой над GF(p): x задаётся, y находится как корень."""
    R = curve.ring
    K = prime_field(p)
    Fp = reduce_mod_p(curve, p)
    R1 = poly_ring(("y",), K)
    points: List[ProjPoint] = []
    attempts = 0
    while len(points) < count and attempts < 50 * count:
        attempts += 1
        x0 = int(rng.integers(0, p))
        images = [R1.ground_new(K(x0)), R1.gens[0], R1.one]
        g = substitute(Fp, images, R1.one)
        if total_degree(g) < 1:
            continue
        coeffs = [int(g.coeff(R1.gens[0] ** k)) % p for k in range(total_degree(g), -1, -1)]
        for root in csolve_prime(coeffs, p):
            P = ProjPoint((x0, int(root), 1), p)
            if P not in points:
                points.append(P)
    return points[:count]


@dataclass
class ContractionResult:
    """Стягивается ли кривая в точку и куда."""
    contracted: bool
    image: Optional[ProjPoint]
    samples: List[Tuple[ProjPoint, ProjPoint]]
    skipped: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "contracted": self.contracted,
            "image": list(self.image.coords) if self.image else None,
            "samples": [[list(a.coords), list(b.coords)] for a, b in self.samples],
            "skipped": self.skipped,
        }


def contraction_analysis(f: ProjRatMap, curve: Any, samples: int = 8, seed: int = 7,
                         prime: Optional[int] = None) -> ContractionResult:
    """
    Стягивает ли f кривую в точку.

    Args:
        f: Отображение
        curve: ParamCurve или ImplicitCurve (выборка по модулю prime)
        samples: Число точек выборки
        seed: Зерно генератора

    Returns:
        ContractionResult: contracted=True, если все определённые образы совпадают

    Raises:
        IndeterminateError: все точки выборки неопределённые
        RetryLimitError: определённый образ только у одной точки
    """
    rng = np.random.default_rng(seed)
    if isinstance(curve, ImplicitCurve):
        p = prime or random_prime(rng)
        points = sample_curve_mod_p(curve.equation, p, samples, rng)
    else:
        points = []
        for value in _random_ints(rng, samples * 2, 1000):
            try:
                P = curve.at(QQ(value))
            except ZeroMapError:
                continue
            if P not in points:
                points.append(P)
            if len(points) == samples:
                break
    images: List[Tuple[ProjPoint, ProjPoint]] = []
    skipped = 0
    for P in points:
        try:
            images.append((P, evaluate(f, P)))
        except IndeterminateError:
            skipped += 1
    if not images:
        raise IndeterminateError(points[0] if points else None, "Все точки выборки неопределённые")
    if len(images) < 2:
        raise RetryLimitError(f"На кривой нашлась одна точка, где {f.name} определено")
    distinct = {img for _, img in images}
    if len(distinct) == 1:
        return ContractionResult(True, images[0][1], images, skipped)
    return ContractionResult(False, None, images, skipped)


def contracted_curve(f: ProjRatMap, Q: ProjPoint) -> PolyElement:
    """
    Кривая, которую f стягивает в точку Q: НОД двух линейных форм через Q,
    взятых от f (вместе с общими базисными компонентами).
    """
    _, l1, l2 = base_point_frame(Q, f.ring)
    a = substitute(l1, f.coords, f.ring.one)
    b = substitute(l2, f.coords, f.ring.one)
    return gcd_many([a, b])


# ---------------------------------------------------------------------------
# Индуцированные отображения на раздутии точки
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PointBlowupMap:
    """
    Ограничение f на исключительную прямую E_P направлений [s:t] в P.

    kind:
        direction - E_P отображается в E_Q по формуле [s:t] -> direction;
        point     - E_P стягивается в точку (Q, direction) на E_Q;
        curve     - E_P отображается на кривую curve плоскости.
    """
    source: ProjPoint
    kind: str
    target: Optional[ProjPoint]
    direction: Optional[Tuple[PolyElement, PolyElement]] = None
    curve: Optional[Tuple[PolyElement, ...]] = None
    order: int = 0

    @property
    def is_self_map(self) -> bool:
        return self.kind == "direction" and self.target == self.source

    def apply(self, direction: Sequence[Any]) -> Tuple[Any, Any]:
        """Образ направления [s:t] (для kind=direction/point)."""
        if self.direction is None:
            raise BidynError("E_P отображается на кривую, а не в направления")
        return tuple(evaluate_at(c, direction) for c in self.direction)

    def formula(self) -> str:
        from poly_parser import render_poly
        if self.kind == "curve":
            return "[" + ", ".join(render_poly(c) for c in self.curve) + "]"
        return "[" + ", ".join(render_poly(c) for c in self.direction) + "]"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "source": list(self.source.coords),
            "kind": self.kind,
            "target": list(self.target.coords) if self.target else None,
            "map": self.formula(),
            "order": self.order,
        }


def _local_germ(P: ProjPoint, R3: PolyRing) -> List[PolyElement]:
    """x = P + e*(Minv_1 s + Minv_2 t) в кольце (s, t, e)."""
    dom = R3.domain
    rows = _frame_matrix(P.coords, dom)
    inv = _inverse3([list(r) for r in rows], dom)
    s, t, e = R3.gens
    return [inv[j][0] * R3.one + e * (s * inv[j][1] + t * inv[j][2]) for j in range(3)]


def _e_coefficient(F: PolyElement, k: int, R2: PolyRing) -> PolyElement:
    """Коэффициент при e^k как многочлен от (s, t)."""
    return R2.from_dict({(m[0], m[1]): c for m, c in F.items() if m[2] == k})


def _min_e_valuation(polys: Sequence[PolyElement], order: int) -> Optional[int]:
    vals = [m[2] for F in polys for m in F.keys() if m[2] <= order]
    return min(vals) if vals else None


def _lowest_with_doubling(polys: Sequence[PolyElement]) -> Tuple[int, int]:
    order = 1
    while True:
        truncated = [truncate(F, 2, order + 1) for F in polys]
        k = _min_e_valuation(truncated, order)
        if k is not None:
            return k, order
        if order >= MAX_EXPANSION_ORDER:
            raise ExpansionOrderError(f"Разложение нулевое до порядка {MAX_EXPANSION_ORDER}")
        order *= 2


def _projectivize(polys: Sequence[PolyElement]) -> Tuple[PolyElement, ...]:
    nonzero = [c for c in polys if c]
    g = gcd_many(nonzero)
    out = [c.exquo(g) if c else c for c in polys]
    dom = out[0].ring.domain
    lead = next(c for c in out if c)
    if is_prime_field(dom):
        scale = dom.quo(dom.one, lead.LC)
    else:
        scale = _content_scale(out)
    return tuple(c.mul_ground(scale) for c in out)


def _point_from_constants(polys: Sequence[PolyElement], prime: Optional[int]) -> ProjPoint:
    return ProjPoint(tuple(c.coeff(1) if c else 0 for c in polys), prime)


def induced_on_point_blowup(f: ProjRatMap, P: ProjPoint) -> PointBlowupMap:
    """
    Ограничение поднятия f на исключительную прямую над P.

    Подставляется росток P + e*v(s, t), младший ненулевой коэффициент по e
    даёт образ E_P; если он постоянен (точка Q), то направление в Q читается
    из младших членов двух линейных форм репера Q.

    Raises:
        ExpansionOrderError: разложение нулевое до порядка 16
    """
    if f.source_dim != 2 or f.target_dim != 2:
        raise DimensionMismatchError("Раздутие точки реализовано для отображений плоскости")
    dom = f.domain
    prime = field_characteristic(dom)
    if prime is not None:
        P = P.reduce(prime)
    R3 = poly_ring(("s", "t", "e"), dom)
    R2 = poly_ring(("s", "t"), dom)
    germ = _local_germ(P, R3)
    F = [substitute(c, germ, R3.one) for c in f.coords]
    k0, order = _lowest_with_doubling(F)
    lead = _projectivize([_e_coefficient(c, k0, R2) for c in F])
    if any(total_degree(c) > 0 for c in lead):
        return PointBlowupMap(P, "curve", None, curve=lead, order=order)

    Q = _point_from_constants(lead, prime)
    R = f.ring
    _, l1, l2 = base_point_frame(Q, R)
    A = substitute(l1, F, R3.one)
    B = substitute(l2, F, R3.one)
    m, order2 = _lowest_with_doubling([A, B])
    direction = _projectivize([_e_coefficient(A, m, R2), _e_coefficient(B, m, R2)])
    kind = "direction" if any(total_degree(c) > 0 for c in direction) else "point"
    return PointBlowupMap(P, kind, Q, direction=direction, order=max(order, order2))


def jacobian_direction_map(f: ProjRatMap, P: ProjPoint) -> PointBlowupMap:
    """
    Проективизованное действие якобиана в точке, где f определено.
    Совпадает с induced_on_point_blowup там, где f - локальный изоморфизм.
    """
    Q = evaluate(f, P)
    dom = f.domain
    R2 = poly_ring(("s", "t"), dom)
    L = local_expansion
    _, l1, l2 = base_point_frame(Q, f.ring)
    A = L(substitute(l1, f.coords, f.ring.one), P)
    B = L(substitute(l2, f.coords, f.ring.one), P)
    s, t = A.ring.gens
    linear = []
    for F in (A, B):
        a = dom.convert(F.coeff(s))
        b = dom.convert(F.coeff(t))
        linear.append(R2.gens[0] * a + R2.gens[1] * b)
    if not any(linear):
        raise BidynError("Якобиан вырожден: f не локальный изоморфизм")
    direction = _projectivize(linear)
    kind = "direction" if any(total_degree(c) > 0 for c in direction) else "point"
    return PointBlowupMap(P, kind, Q, direction=direction, order=1)


# ---------------------------------------------------------------------------
# Индуцированные отображения на раздутии координатной прямой в P^3
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LineBlowupMap:
    """
    Отображение на E = P^1 x P^1 над прямой L = {x_i = x_j = 0}.

    Точка E - это ([u:v], [s:t]) для ростка x_i = e*t, x_j = e*s, остальные
    координаты (u, v). kind=surface: E -> E по формулам uv и st;
    kind=curve: E стягивается на кривую (или отображается вне L) по формуле image.
    """
    line: Tuple[int, int]
    kind: str
    uv: Optional[Tuple[PolyElement, PolyElement]] = None
    st: Optional[Tuple[PolyElement, PolyElement]] = None
    image: Optional[Tuple[PolyElement, ...]] = None

    def chart(self):
        """Аффинная карта v = t = 1: (u, s) -> (u'/v', s'/t') в поле QQ(u, s)."""
        if self.kind != "surface":
            raise BidynError("Карта определена только для отображения E -> E")
        K, u, s = frac_field("u,s", QQ, grlex)
        images = [u, K.one, s, K.one]      # (u, v, s, t)

        def restrict(p: PolyElement):
            return substitute(p, images, K.one)

        return (restrict(self.uv[0]) / restrict(self.uv[1]),
                restrict(self.st[0]) / restrict(self.st[1]))

    def formula(self) -> str:
        from poly_parser import render_poly
        if self.kind == "surface":
            return (f"([{render_poly(self.uv[0])}, {render_poly(self.uv[1])}], "
                    f"[{render_poly(self.st[0])}, {render_poly(self.st[1])}])")
        return "[" + ", ".join(render_poly(c) for c in self.image) + "]"

    def to_dict(self) -> Dict[str, Any]:
        return {"line": list(self.line), "kind": self.kind, "map": self.formula()}


def induced_on_line_blowup(f: ProjRatMap, line: Tuple[int, int] = (2, 3)) -> LineBlowupMap:
    """
    Индуцированное отображение на исключительной поверхности над
    координатной прямой L = {x_i = x_j = 0} в P^3.

    Args:
        f: Отображение P^3 --> P^3
        line: Индексы (i, j), i < j, обращающихся в ноль координат

    Returns:
        LineBlowupMap
    """
    if f.source_dim != 3 or f.target_dim != 3:
        raise DimensionMismatchError("Раздутие прямой реализовано для P^3")
    i, j = sorted(line)
    others = [k for k in range(4) if k not in (i, j)]
    dom = f.domain
    R5 = poly_ring(("u", "v", "s", "t", "e"), dom)
    R4 = poly_ring(("u", "v", "s", "t"), dom)
    u, v, s, t, e = R5.gens
    germ: List[Any] = [None] * 4
    germ[others[0]], germ[others[1]] = u, v
    germ[i], germ[j] = e * t, e * s
    F = [substitute(c, germ, R5.one) for c in f.coords]

    def coefficient(p: PolyElement, k: int) -> PolyElement:
        return R4.from_dict({m[:4]: c for m, c in p.items() if m[4] == k})

    def lowest(polys: Sequence[PolyElement]) -> int:
        order = 1
        while True:
            vals = [m[4] for p in polys for m in p.keys() if m[4] <= order]
            if vals:
                return min(vals)
            if order >= MAX_EXPANSION_ORDER:
                raise ExpansionOrderError(f"Разложение нулевое до порядка {MAX_EXPANSION_ORDER}")
            order *= 2

    k0 = lowest(F)
    lead = [coefficient(c, k0) for c in F]
    if lead[i] or lead[j]:
        return LineBlowupMap((i, j), "curve", image=_projectivize(lead))
    uv = _projectivize([lead[others[0]], lead[others[1]]])
    m = lowest([F[j], F[i]])
    st = _projectivize([coefficient(F[j], m), coefficient(F[i], m)])
    return LineBlowupMap((i, j), "surface", uv=uv, st=st)


# ---------------------------------------------------------------------------
# Поиск инвариантных пучков (диагностика)
# ---------------------------------------------------------------------------

@dataclass
class PencilReport:
    """Итог поиска пучка кривых с заданными особенностями и его инвариантности."""
    dimension: int
    basis: List[PolyElement]
    invariant: Optional[bool]
    note: str = ""

    def to_dict(self) -> Dict[str, Any]:
        from poly_parser import render_poly
        return {
            "dimension": self.dimension,
            "basis": [render_poly(canonical_poly(b)) for b in self.basis],
            "invariant": self.invariant,
            "note": self.note,
        }


def _monomials(n_vars: int, degree: int) -> List[Tuple[int, ...]]:
    if n_vars == 1:
        return [(degree,)]
    out = []
    for k in range(degree, -1, -1):
        for rest in _monomials(n_vars - 1, degree - k):
            out.append((k,) + rest)
    return out


def linear_system(R: PolyRing, degree: int, nodes: Sequence[ProjPoint] = (),
                  tangencies: Sequence[Tuple[ProjPoint, PolyElement]] = ()) -> List[PolyElement]:
    """
    Базис системы кривых степени degree с двойными точками в nodes и
    касанием заданной прямой в точках tangencies.
    """
    monoms = _monomials(R.ngens, degree)
    basis = [R.from_dict({m: R.domain.one}) for m in monoms]
    rows: List[List[Any]] = []

    def local_rows(P: ProjPoint, max_order: int, direction=None):
        expansions = [local_expansion(b, P) for b in basis]
        L = expansions[0].ring
        s, t = L.gens
        keys = [(a, o - a) for o in range(max_order) for a in range(o + 1)]
        if direction is None:
            for a, b in keys:
                rows.append([exp.coeff(s ** a * t ** b) for exp in expansions])
        else:
            ds, dt = direction
            rows.append([exp.coeff(1) for exp in expansions])
            rows.append([exp.coeff(s) * ds + exp.coeff(t) * dt for exp in expansions])

    for P in nodes:
        local_rows(P, 2)
    for P, line in tangencies:
        local_rows(P, 1, line_direction(line, P))
    if not rows:
        return basis
    dom = R.domain
    M = DomainMatrix([[dom.convert(x) for x in r] for r in rows], (len(rows), len(basis)), dom)
    kernel = M.nullspace().to_list()
    return [sum((b * dom.convert(c) for b, c in zip(basis, vec) if c), R.zero) for vec in kernel]


def invariant_pencil_search(f: ProjRatMap, degree: int, nodes: Sequence[ProjPoint],
                            tangencies: Sequence[Tuple[ProjPoint, PolyElement]]) -> PencilReport:
    """
    Ищет пучок кривых с заданными особенностями и проверяет, переводит ли f
    его члены в члены того же пучка (только отчёт).
    """
    basis = linear_system(f.ring, degree, nodes, tangencies)
    if len(basis) != 2:
        return PencilReport(len(basis), basis, None, "система не является пучком")
    pulled = [substitute(b, f.coords, f.ring.one) for b in basis]
    common = gcd_many(pulled)
    reduced = [p.exquo(common) for p in pulled]
    if any(total_degree(r) != degree for r in reduced):
        return PencilReport(2, basis, False, "прообразы членов имеют другую степень")
    monoms = _monomials(f.ring.ngens, degree)
    dom = f.domain
    columns = [[dom.convert(b.coeff(f.ring.from_dict({m: dom.one}))) for m in monoms] for b in basis]
    for r in reduced:
        target = [dom.convert(r.coeff(f.ring.from_dict({m: dom.one}))) for m in monoms]
        M = DomainMatrix([list(col) for col in zip(*columns, target)], (len(monoms), 3), dom)
        if M.rank() > 2:
            return PencilReport(2, basis, False, "прообраз члена не лежит в пучке")
    return PencilReport(2, basis, True, "пучок переводится в себя")
