"""
Семейство кубических инволюций над эллиптической кривой T: y^2 z = x^3 + 5x^2 z + 4x z^2.

Здесь точки T, инволюции iota_t, касательные точки, сборка phi, psi, chi,
G_t, F_t, модели раздутия слоёв (10 точек общего слоя и слой над q с
бесконечно близкими точками) и эталонные матрицы действий на N^1.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from sympy.polys.domains import QQ
from sympy.polys.galoistools import csolve_prime
from sympy.polys.rings import PolyElement

import console
from errors import BidynError, NotOnCurveError, RetryLimitError, TwoTorsionError
from exact_algebra import IntMatrix, mult_at, poly_ring, prime_field, ratio_mod_p, reduce_mod_p, substitute
from fixtures import default_catalog
from ns_lattice import (
    BlowupConfig,
    FlopDifference,
    FlopFactorization,
    FlopStep,
    Lattice,
    curve_class,
    exceptional_class,
    flop_difference,
    model_contractions,
    position_identification,
    product_action,
    pushforward_matrix,
)
from poly_parser import parse_poly, render_poly
from ratmap import MAX_RETRIES, ProjPoint, ProjRatMap, compose, compose_chain, normalize, random_prime

# y^2 = x (x - alpha1)(x - alpha2)
ALPHA1 = -1
ALPHA2 = -4

CUBIC_T = "y^2*z - x^3 - 5*x^2*z - 4*x*z^2"
CONIC_Q = "y^2 - 5*x^2 - 8*x*z"

Q_TANGENT_POINTS = ((-2, -2), (-2, 2), (2, 6), (2, -6))
Q_TANGENT_LINES = ("x - y", "x + y", "3*x - y", "3*x + y")
# касательная к T в q
Q_TANGENT = "x"


# ---------------------------------------------------------------------------
# Точки кривой
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CurvePointT:
    """
    Точка кривой T в аффинных координатах (a, b) или бесконечно удалённая точка.

    Над GF(p) координаты - вычеты 0..p-1, над QQ - рациональные числа.
    """
    a: Any = 0
    b: Any = 0
    prime: Optional[int] = None
    infinity: bool = False

    def __post_init__(self):
        if self.infinity:
            object.__setattr__(self, "a", 0)
            object.__setattr__(self, "b", 0)
        elif self.prime is None:
            object.__setattr__(self, "a", QQ.convert(self.a))
            object.__setattr__(self, "b", QQ.convert(self.b))
        else:
            object.__setattr__(self, "a", _residue(self.a, self.prime))
            object.__setattr__(self, "b", _residue(self.b, self.prime))

    @property
    def domain(self):
        return QQ if self.prime is None else prime_field(self.prime)

    def projective(self) -> ProjPoint:
        if self.infinity:
            return ProjPoint((0, 1, 0), self.prime)
        return ProjPoint((self.a, self.b, 1), self.prime)

    def __str__(self) -> str:
        return "O" if self.infinity else f"({self.a},{self.b})"


def _residue(value: Any, p: int) -> int:
    if isinstance(value, int):
        return value % p
    try:
        return int(value) % p
    except TypeError:
        return ratio_mod_p(value, p)


def _curve_rhs(x: Any) -> Any:
    return x ** 3 + 5 * x ** 2 + 4 * x


def on_curve(P: CurvePointT) -> bool:
    if P.infinity:
        return True
    if P.prime is None:
        return P.b ** 2 == _curve_rhs(P.a)
    return (P.b * P.b - _curve_rhs(P.a)) % P.prime == 0


def negate(P: CurvePointT) -> CurvePointT:
    """[a, b, c] -> [a, -b, c]."""
    if P.infinity:
        return P
    return CurvePointT(P.a, -P.b, P.prime)


def is_two_torsion(P: CurvePointT) -> bool:
    return P.infinity or not P.b


Q_POINT = CurvePointT(0, 0)


# ---------------------------------------------------------------------------
# Инволюции
# ---------------------------------------------------------------------------

FAMILY_VARIABLES = ("x", "y", "z", "a", "b", "c")


def involution_coords(R: Any) -> List[PolyElement]:
    """
    P_1, P_2, P_3 в кольце с образующими (x, y, z, a, b, c); линейны по (a, b, c):
        P_1 = (x^3 + 2y^2z - 4xz^2) a - 2xyz b + (5x^3 - xy^2 + 8x^2z) c, ...
    """
    x, y, z, a, b, c = R.gens
    return [
        (x ** 3 + 2 * y ** 2 * z - 4 * x * z ** 2) * a + (-2 * x * y * z) * b
        + (5 * x ** 3 - x * y ** 2 + 8 * x ** 2 * z) * c,
        (3 * x ** 2 * y + 10 * x * y * z + 4 * y * z ** 2) * a
        + (-2 * x ** 3 - 10 * x ** 2 * z - 8 * x * z ** 2) * b
        + (5 * x ** 2 * y - y ** 3 + 8 * x * y * z) * c,
        (3 * x ** 2 * z + 10 * x * z ** 2 + 4 * z ** 3) * a + (-2 * y * z ** 2) * b
        + (-2 * x ** 3 - 5 * x ** 2 * z + y ** 2 * z) * c,
    ]


def build_iota(t: CurvePointT, name: str = "") -> ProjRatMap:
    """
    Кубическая инволюция iota_t, фиксирующая T: involution_coords при (a, b, c) = t.

    Raises:
        NotOnCurveError: точка не лежит на T
    """
    if not on_curve(t):
        raise NotOnCurveError(f"Точка {t} не лежит на T")
    dom = t.domain
    R = poly_ring(("x", "y", "z"), dom)
    R6 = poly_ring(FAMILY_VARIABLES, dom)
    values = [dom.convert(v) for v in ((0, 1, 0) if t.infinity else (t.a, t.b, 1))]
    images = list(R.gens) + [R.ground_new(v) for v in values]
    return normalize([substitute(P, images, R.one) for P in involution_coords(R6)], name or f"iota_{t}")


@dataclass
class Family:
    """Отображения слоя над t."""
    t: CurvePointT
    phi: ProjRatMap
    psi: ProjRatMap
    chi: ProjRatMap
    G: ProjRatMap
    F: ProjRatMap

    def get(self, name: str) -> ProjRatMap:
        maps = {"phi": self.phi, "psi": self.psi, "chi": self.chi, "G_t": self.G, "F_t": self.F}
        if name not in maps:
            raise BidynError(f"В семействе нет отображения {name}")
        return maps[name]


def build_family(t: CurvePointT) -> Family:
    """
    phi = iota_q, psi = iota_t, chi = iota_{-t}, G_t = iota_q o iota_t,
    F_t = iota_q o iota_{-t} o iota_q o iota_t.
    """
    q = CurvePointT(0, 0, t.prime)
    phi = build_iota(q, "phi")
    psi = build_iota(t, "psi")
    chi = build_iota(negate(t), "chi")
    G = compose(phi, psi, "G_t")
    F = compose_chain([psi, phi, chi, phi], "F_t")
    console.ok(f"Семейство над t={t}: deg G_t = {G.degree}, deg F_t = {F.degree}")
    return Family(t, phi, psi, chi, G, F)


# ---------------------------------------------------------------------------
# Касательные точки
# ---------------------------------------------------------------------------

@dataclass
class TangentPointData:
    """
    Касательные точки t_1..t_4 точки t: прямые через t, касающиеся T в t_i.

    Над QQ для общей точки корни квартики могут быть иррациональны: тогда
    points содержит только рациональные, а quartic задаёт остальные.
    """
    base: CurvePointT
    points: List[ProjPoint]
    lines: List[PolyElement]
    quartic: Optional[PolyElement] = None

    @property
    def complete(self) -> bool:
        return len(self.points) == 4

    def to_dict(self) -> Dict[str, Any]:
        return {
            "base": str(self.base),
            "points": [list(p.coords) for p in self.points],
            "lines": [render_poly(l) for l in self.lines],
            "quartic": render_poly(self.quartic) if self.quartic is not None else None,
        }


def quartic_pair(t: CurvePointT) -> PolyElement:
    """
    Квартика по x, корни которой - абсциссы касательных точек t (и -t):
    x^4 - 4a x^3 + 4(alpha1 + alpha2) a x^2 - 2 alpha1 alpha2 x^2
        - 4 alpha1 alpha2 a x + alpha1^2 alpha2^2.
    """
    dom = t.domain
    R = poly_ring(("x",), dom)
    x = R.gens[0]
    a = dom.convert(t.a)
    s, p = ALPHA1 + ALPHA2, ALPHA1 * ALPHA2
    return (x ** 4 - 4 * a * x ** 3 + (4 * s * a - 2 * p) * x ** 2
            - 4 * p * a * x + R.ground_new(dom.convert(p * p)))


def _tangent_ordinate(t: CurvePointT, x0: Any) -> Any:
    """y = ((3x^2 + 10x + 4)(a - x) + 2(x^3 + 5x^2 + 4x)) / (2b)."""
    dom = t.domain
    a, b = dom.convert(t.a), dom.convert(t.b)
    numerator = (3 * x0 ** 2 + 10 * x0 + 4) * (a - x0) + 2 * _curve_rhs(x0)
    return dom.quo(numerator, 2 * b)


def _line_through(A: Sequence[Any], B: Sequence[Any], dom: Any) -> PolyElement:
    R = poly_ring(("x", "y", "z"), dom)
    x, y, z = R.gens
    a = [dom.convert(v) for v in A]
    b = [dom.convert(v) for v in B]
    line = (x * (a[1] * b[2] - a[2] * b[1]) + y * (a[2] * b[0] - a[0] * b[2])
            + z * (a[0] * b[1] - a[1] * b[0]))
    return line.monic() if dom != QQ else line.primitive()[1]


def _rational_roots(f: PolyElement) -> List[Any]:
    _, factors = f.factor_list()
    roots = []
    for g, _ in factors:
        if g.degree() == 1:
            c1, c0 = g.coeff(g.ring.gens[0]), g.coeff(1)
            roots.append(-QQ.convert(c0) / QQ.convert(c1))
    return sorted(set(roots))


def _prime_roots(f: PolyElement, p: int) -> List[int]:
    x = f.ring.gens[0]
    coeffs = [int(f.coeff(x ** k)) % p if k else int(f.coeff(1)) % p for k in range(4, -1, -1)]
    return sorted(set(csolve_prime(coeffs, p)))


def tangent_points(t: CurvePointT) -> TangentPointData:
    """
    Четыре касательные точки точки t.

    Для q = (0,0) - точки (-2,-2), (-2,2), (2,6), (2,-6) и прямые
    x - y, x + y, 3x - y, 3x + y. Для b != 0 абсциссы - корни quartic_pair(t),
    ординаты - из линейного условия касания.

    Raises:
        TwoTorsionError: t - точка 2-кручения, отличная от q
        NotOnCurveError: t не лежит на T
    """
    if not on_curve(t):
        raise NotOnCurveError(f"Точка {t} не лежит на T")
    if is_two_torsion(t):
        if t.infinity or t.a:
            raise TwoTorsionError(f"Касательные данные вырождаются в точке 2-кручения {t}")
        points = [ProjPoint((a, b, 1), t.prime) for a, b in Q_TANGENT_POINTS]
        R = poly_ring(("x", "y", "z"), QQ)
        lines = [parse_poly(text, R=R) for text in Q_TANGENT_LINES]
        if t.prime is not None:
            lines = [reduce_mod_p(l, t.prime) for l in lines]
        return TangentPointData(t, points, lines, quartic_pair(t))

    quartic = quartic_pair(t)
    if t.prime is None:
        xs = _rational_roots(quartic)
    else:
        xs = _prime_roots(quartic, t.prime)
    dom = t.domain
    points, lines = [], []
    for x0 in xs:
        x0 = dom.convert(x0)
        y0 = _tangent_ordinate(t, x0)
        P = ProjPoint((x0, y0, 1), t.prime)
        points.append(P)
        lines.append(_line_through((t.a, t.b, 1), (x0, y0, 1), dom))
    return TangentPointData(t, points, lines, quartic)


def tangency_multiplicity(line: PolyElement, point: ProjPoint) -> int:
    """Кратность корня сужения кубики T на прямую в данной точке."""
    cubic = parse_poly(CUBIC_T, R=poly_ring(("x", "y", "z"), QQ))
    if line.ring.domain != QQ:
        cubic = reduce_mod_p(cubic, point.prime)
    # пересечение в гладкой точке: порядок касания = кратность на прямой
    R1 = poly_ring(("T",), line.ring.domain)
    T = R1.gens[0]
    dom = line.ring.domain
    P = [dom.convert(v) for v in point.coords]
    direction = _second_point_on_line(line, P, dom)
    param = [R1.ground_new(p) + T * d for p, d in zip(P, direction)]
    g = substitute(cubic, param, R1.one)
    if not g:
        raise BidynError("Прямая лежит на кубике")
    k = 0
    while not g.coeff(T ** k if k else 1):
        k += 1
    return k


def _second_point_on_line(line: PolyElement, P: Sequence[Any], dom: Any) -> List[Any]:
    a, b, c = (dom.convert(line.coeff(g)) for g in line.ring.gens)
    candidates = [(b, -a, dom.zero), (c, dom.zero, -a), (dom.zero, c, -b)]
    for v in candidates:
        if any(v) and any(v[i] * P[j] != v[j] * P[i] for i in range(3) for j in range(3)):
            return list(v)
    raise BidynError("Не удалось найти вторую точку прямой")


# ---------------------------------------------------------------------------
# Случайные хорошие точки над GF(p)
# ---------------------------------------------------------------------------

def _ind_points(data: TangentPointData) -> List[ProjPoint]:
    return [data.base.projective()] + list(data.points)


def random_good_point(rng: np.random.Generator, prime: Optional[int] = None, bits: int = 31,
                      attempts: int = 200) -> Tuple[CurvePointT, TangentPointData]:
    """
    Точка t на T над GF(p) с b != 0, четырьмя касательными точками над GF(p)
    и Ind(iota_t), Ind(iota_{-t}) не пересекающимися с Ind(iota_q).

    Args:
        rng: Генератор numpy
        prime: Простое (по умолчанию выбирается случайно и меняется при неудаче)
        bits: Размер случайных простых
        attempts: Число попыток на одно простое

    Raises:
        RetryLimitError: подходящая точка не найдена
    """
    for round_ in range(MAX_RETRIES):
        p = prime if prime is not None else random_prime(rng, bits)
        q_data = tangent_points(CurvePointT(0, 0, p))
        forbidden = set(_ind_points(q_data))
        for _ in range(attempts):
            a = int(rng.integers(0, p))
            rhs = _curve_rhs(a) % p
            roots = csolve_prime([1, 0, (-rhs) % p], p)
            roots = [r for r in roots if r]
            if not roots:
                continue
            t = CurvePointT(a, roots[0], p)
            try:
                data = tangent_points(t)
            except TwoTorsionError:
                continue
            if not data.complete:
                continue
            other = tangent_points(negate(t))
            ind = _ind_points(data) + _ind_points(other)
            if len(set(ind)) != 10 or forbidden & set(ind):
                continue
            console.info(f"Хорошая точка t={t} над GF({p})")
            return t, data
        console.warn(f"Над GF({p}) хорошая точка не найдена")
        if prime is not None:
            break
    raise RetryLimitError("Не удалось найти хорошую точку T над простым полем")


# ---------------------------------------------------------------------------
# Модели слоёв
# ---------------------------------------------------------------------------

FIBER_ORDER = ("b", "b1", "b2", "b3", "b4", "c", "c1", "c2", "c3", "c4")


@dataclass
class FiberModel:
    """Общий слой: раздутие P^2 в {q, q_i, t, t_i} и подъёмы phi_t, psi_t."""
    t: CurvePointT
    cfg: BlowupConfig
    lattice: Lattice
    phi: ProjRatMap
    psi: ProjRatMap

    def phi_matrix(self, seed: int = 7) -> IntMatrix:
        return pushforward_matrix(self.phi, self.phi, self.cfg, self.lattice, seed=seed)

    def psi_matrix(self, seed: int = 7) -> IntMatrix:
        return pushforward_matrix(self.psi, self.psi, self.cfg, self.lattice, seed=seed)


def fiber_models(t: CurvePointT, data: Optional[TangentPointData] = None) -> FiberModel:
    """
    Конфигурация 10 точек общего слоя: b в q, b_i в q_i, c в t, c_i в t_i.
    """
    data = data or tangent_points(t)
    if not data.complete:
        raise BidynError(f"Касательные точки {t} не все рациональны")
    q_data = tangent_points(CurvePointT(0, 0, t.prime))
    specs = [("b", q_data.base.projective().coords)]
    specs += [(f"b{i}", P.coords) for i, P in enumerate(q_data.points, start=1)]
    specs += [("c", t.projective().coords)]
    specs += [(f"c{i}", P.coords) for i, P in enumerate(data.points, start=1)]
    cfg = BlowupConfig.build(specs, f"X_t[{t}]", t.prime)
    lattice = Lattice.plane(cfg, kind="total", prefix="", order=FIBER_ORDER)
    return FiberModel(t, cfg, lattice, build_iota(CurvePointT(0, 0, t.prime), "phi"), build_iota(t, "psi"))


def q_fiber_config(swapped: Sequence[int] = ()) -> BlowupConfig:
    """
    Слой над q: точки q, q_1..q_4 и бесконечно близкие точки (касательная x в q,
    прямые q q_i в q_i). Для точек из swapped раунды меток b и c обменяны.
    """
    points = [(0, 0, 1)] + [(a, b, 1) for a, b in Q_TANGENT_POINTS]
    directions = (Q_TANGENT,) + Q_TANGENT_LINES
    suffixes = [""] + [str(i) for i in range(1, 5)]
    swapped = set(swapped)
    firsts, children = [], []
    for k, (P, line, suffix) in enumerate(zip(points, directions, suffixes)):
        first, second = ("c", "b") if k in swapped else ("b", "c")
        firsts.append((first + suffix, P))
        children.append((second + suffix, first + suffix, line))
    if not swapped:
        name = "X_q"
    elif len(swapped) == 5:
        name = "X_q^+"
    else:
        name = "X_q^" + "".join(str(k) for k in sorted(swapped))
    return BlowupConfig.build(firsts + children, name)


def q_fiber_lattice(cfg: BlowupConfig) -> Lattice:
    return Lattice.plane(cfg, kind="total", prefix="", order=FIBER_ORDER)


def q_fiber_curves(cfg: Optional[BlowupConfig] = None) -> Dict[str, Any]:
    """
    Именованные (-2)-кривые слоя над q: 𝔟, 𝔟_i (исключительные кривые первого
    раунда), 𝔮 (коника через q, q_i) и 𝔩_i (касательные прямые q q_i).
    """
    cfg = cfg or q_fiber_config()
    lattice = q_fiber_lattice(cfg)
    R = poly_ring(("x", "y", "z"), QQ)
    named = {"𝔮": curve_class(parse_poly(CONIC_Q, R=R), cfg, lattice)}
    for i, text in enumerate(Q_TANGENT_LINES, start=1):
        named[f"𝔩{i}"] = curve_class(parse_poly(text, R=R), cfg, lattice)
    for suffix in [""] + [str(i) for i in range(1, 5)]:
        named[f"𝔟{suffix}"] = exceptional_class(cfg, lattice, "b" + suffix)
    return named


@dataclass
class QFiberFactorization:
    """Факторизация phi~ o psi~ над q и данные для разности подтягиваний."""
    factorization: FlopFactorization
    source: BlowupConfig
    plus: BlowupConfig
    phi_matrix: IntMatrix
    psi_plus_matrix: IntMatrix
    plain: IntMatrix
    named: Dict[str, Any] = field(default_factory=dict)


def q_fiber_factorization(seed: int = 7) -> QFiberFactorization:
    """
    phi~ o psi~ = phi~ o sigma^{-1} o psi~+ o sigma над слоем q, где sigma -
    пять флопов кривых 𝔟, 𝔟_i, а слой X_q^+ - та же плоскость с обменом раундов.

    Шаги (в порядке применения): пять флопов, psi~+, пять обратных флопов, phi~.
    Матрицы действий psi~+ и phi~ вычисляются по моделям раздутия.
    """
    iota_q = build_iota(Q_POINT, "iota_q")
    configs = [q_fiber_config(range(k)) for k in range(6)]
    lattices = [q_fiber_lattice(c) for c in configs]
    labels = ["", "1", "2", "3", "4"]
    steps: List[FlopStep] = []
    for k in range(5):
        src, tgt = configs[k], configs[k + 1]
        Ls, Lt = lattices[k], lattices[k + 1]
        steps.append(FlopStep(
            f"sigma_{k}", Ls, Lt, position_identification(src, tgt, Ls, Lt),
            exceptional_class(src, Ls, "b" + labels[k]),
            exceptional_class(tgt, Lt, "c" + labels[k])))

    plus, L_plus = configs[5], lattices[5]
    console.step("Действие psi~+ на слое X_q^+")
    psi_plus = pushforward_matrix(iota_q, iota_q, plus, L_plus, seed=seed)
    steps.append(FlopStep("psi+", L_plus, L_plus, psi_plus))

    back = [q_fiber_config(range(k, 5)) for k in range(6)]
    back_lattices = [q_fiber_lattice(c) for c in back]
    for k in range(5):
        src, tgt = back[k], back[k + 1]
        Ls, Lt = back_lattices[k], back_lattices[k + 1]
        steps.append(FlopStep(
            f"sigma^-1_{k}", Ls, Lt, position_identification(src, tgt, Ls, Lt),
            exceptional_class(src, Ls, "c" + labels[k]),
            exceptional_class(tgt, Lt, "b" + labels[k])))

    source, L0 = configs[0], lattices[0]
    console.step("Действие phi~ на слое X_q")
    phi = pushforward_matrix(iota_q, iota_q, source, L0, seed=seed)
    steps.append(FlopStep("phi", L0, L0, phi))

    # послойно (phi o psi)_q = iota_q o iota_q = id
    plain = IntMatrix.identity(L0.rank, L0.labels)
    return QFiberFactorization(FlopFactorization(tuple(steps), "phi~ o psi~"), source, plus,
                               phi, psi_plus, plain, q_fiber_curves(source))


def q_flop_difference(label: str = "h", seed: int = 7) -> FlopDifference:
    """
    Разность подтягивания класса базиса через флопы и послойного подтягивания.
    Для h ожидается 2𝔮 + сумма 𝔩_i + 4𝔟 + 2 сумма 𝔟_i.
    """
    data = q_fiber_factorization(seed)
    target = data.factorization.target
    result = flop_difference(data.factorization, target.basis(label), data.plain, data.named)
    if result.exact:
        console.result(f"Разность для {label}: {result.difference}")
    else:
        console.warn(f"Разность для {label} не раскладывается по именованным кривым")
    return result


# ---------------------------------------------------------------------------
# Модели для Phi и Psi на E_q и эталонные матрицы
# ---------------------------------------------------------------------------

PHI_POINTS = (("p", (0, 0, 1)), ("p1", (1, 1, 0)), ("p2", (1, -1, 0)),
              ("p3", (1, 3, 0)), ("p4", (1, -3, 0)))
PHI_NEAR = ("2*x - 2*y + z", "2*x + 2*y - z", "6*x - 2*y + z", "6*x + 2*y - z")
PSI_NEAR = ("2*x - 2*y - z", "2*x + 2*y + z", "6*x - 2*y - z", "6*x + 2*y + z")

GROUPED_16_ORDER = ("h", "e_p", "e_p'", "e_p''", "e_p1", "e_p2", "e_p3", "e_p4",
                    "e_p1'", "e_p2'", "e_p3'", "e_p4'", "e_p1''", "e_p2''", "e_p3''", "e_p4''")


def eleven_center_model() -> BlowupConfig:
    """Раздутие в p, p_1..p_4, p' = [0,1,1] и p_i' вдоль прямых l_i (Phi~ - автоморфизм)."""
    specs = list(PHI_POINTS) + [("p'", (0, 1, 1))]
    specs += [(f"p{i}'", f"p{i}", line) for i, line in enumerate(PHI_NEAR, start=1)]
    return BlowupConfig.build(specs, "Bl_P'Bl_P")


def sixteen_center_model() -> BlowupConfig:
    """Модель R, R': добавлены p'' = [0,-1,1] и p_i'' вдоль касательных Psi."""
    specs = list(PHI_POINTS) + [("p'", (0, 1, 1))]
    specs += [(f"p{i}'", f"p{i}", line) for i, line in enumerate(PHI_NEAR, start=1)]
    specs += [("p''", (0, -1, 1))]
    specs += [(f"p{i}''", f"p{i}", line) for i, line in enumerate(PSI_NEAR, start=1)]
    return BlowupConfig.build(specs, "Bl_R'Bl_R")


def _matrix(rows: Sequence[Sequence[int]], basis: Sequence[str]) -> IntMatrix:
    return IntMatrix(tuple(tuple(r) for r in rows), tuple(basis))


def _unit(n: int, k: int, value: int = 1) -> List[int]:
    row = [0] * n
    row[k] = value
    return row


M11_ROWS = (
    (5, 4, 0, 0, 0, 0, 0, 1, 1, 1, 1),
    (0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0),
    (-1, -1, 1, 0, 0, 0, 0, -1, 0, 0, 0),
    (-1, -1, 0, 1, 0, 0, 0, 0, -1, 0, 0),
    (-1, -1, 0, 0, 1, 0, 0, 0, 0, -1, 0),
    (-1, -1, 0, 0, 0, 1, 0, 0, 0, 0, -1),
    (-4, -3, 0, 0, 0, 0, 0, -1, -1, -1, -1),
    (-2, -2, 0, 0, 0, 0, 0, -1, 0, 0, 0),
    (-2, -2, 0, 0, 0, 0, 0, 0, -1, 0, 0),
    (-2, -2, 0, 0, 0, 0, 0, 0, 0, -1, 0),
    (-2, -2, 0, 0, 0, 0, 0, 0, 0, 0, -1),
)


def reference_m11() -> IntMatrix:
    return _matrix(M11_ROWS, Lattice.plane(eleven_center_model()).labels)


def reference_m_phi16() -> IntMatrix:
    """Phi~_* на 16-центровой модели: M, дополненная нулями; e_p'' стягивается."""
    rows = [list(r) + [0] * 5 for r in M11_ROWS]
    rows.append([0] * 16)
    rows += [list(rows[k]) for k in range(2, 6)]
    return _matrix(rows, Lattice.plane(sixteen_center_model()).labels)


def reference_m_psi16() -> IntMatrix:
    """Psi~_* на 16-центровой модели: роли p', p_i' и p'', p_i'' обменяны."""
    n = 16
    rows = [[5, 4] + [0] * 10 + [1, 1, 1, 1], _unit(n, 11)]
    for i in range(4):
        row = [-1, -1] + [0] * 14
        row[2 + i] = 1
        row[12 + i] = -1
        rows.append(row)
    rows.append([0] * n)
    rows += [list(rows[k]) for k in range(2, 6)]
    rows.append([-4, -3] + [0] * 10 + [-1, -1, -1, -1])
    for i in range(4):
        row = [-2, -2] + [0] * 14
        row[12 + i] = -1
        rows.append(row)
    return _matrix(rows, Lattice.plane(sixteen_center_model()).labels)


def reference_m_phi_fiber() -> IntMatrix:
    """phi~_t на N^1 общего слоя (базис h, b, b_i, c, c_i)."""
    rows = [[3, 2, 1, 1, 1, 1, 0, 0, 0, 0, 0], [-2, -1, -1, -1, -1, -1, 0, 0, 0, 0, 0]]
    for i in range(4):
        row = [-1, -1, 0, 0, 0, 0, 0, 0, 0, 0, 0]
        row[2 + i] = -1
        rows.append(row)
    rows += [_unit(11, k) for k in range(6, 11)]
    return _matrix(rows, ("h",) + FIBER_ORDER)


def reference_m_psi_fiber() -> IntMatrix:
    """psi~_t: то же действие с обменом ролей b и c."""
    rows = [[3, 0, 0, 0, 0, 0, 2, 1, 1, 1, 1]]
    rows += [_unit(11, k) for k in range(1, 6)]
    rows.append([-2, 0, 0, 0, 0, 0, -1, -1, -1, -1, -1])
    for i in range(4):
        row = [-1, 0, 0, 0, 0, 0, -1, 0, 0, 0, 0]
        row[7 + i] = -1
        rows.append(row)
    return _matrix(rows, ("h",) + FIBER_ORDER)


# ---------------------------------------------------------------------------
# Именованные матрицы для командной строки и проверок
# ---------------------------------------------------------------------------

MATRIX_NAMES = ("Phi-model11", "Phi-model16", "Psi-model16", "PsiPhi-model16",
                "phi-fiber", "psi-fiber", "psiphi-fiber")


@dataclass
class NamedMatrix:
    """Матрица действия с происхождением: computed (по моделям) или printed (эталон)."""
    name: str
    matrix: IntMatrix
    source: str = "computed"
    certified: bool = True
    warning: str = ""
    t: Optional[CurvePointT] = None

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "matrix": self.name,
            "source": self.source,
            "basis": list(self.matrix.basis or ()),
            "rows": self.matrix.tolist(),
            "certified": self.certified,
        }
        if self.warning:
            data["warning"] = self.warning
        if self.t is not None:
            data["t"] = str(self.t)
        return data


def _model_matrix(f_name: str, inverse_name: str, cfg: BlowupConfig, seed: int) -> IntMatrix:
    catalog = default_catalog()
    return pushforward_matrix(catalog.get(f_name), catalog.get(inverse_name), cfg, seed=seed)


def _fiber_matrices(seed: int, printed: bool, prime: Optional[int],
                    bits: int) -> Tuple[IntMatrix, IntMatrix, Optional[CurvePointT]]:
    if printed:
        return reference_m_phi_fiber(), reference_m_psi_fiber(), None
    t, data = random_good_point(np.random.default_rng(seed), prime=prime, bits=bits)
    model = fiber_models(t, data)
    return model.phi_matrix(seed), model.psi_matrix(seed), t


def named_matrix(name: str, seed: int = 7, printed: bool = False,
                 prime: Optional[int] = None, bits: int = 31) -> NamedMatrix:
    """
    Матрица из MATRIX_NAMES.

    Args:
        name: Имя матрицы
        seed: Зерно (члены линейных систем, точка t общего слоя)
        printed: Взять эталонную матрицу вместо вычисления
        prime: Простое поле для общего слоя
        bits: Размер случайных простых

    Raises:
        BidynError: неизвестное имя
    """
    source = "printed" if printed else "computed"
    if name == "Phi-model11":
        M = reference_m11() if printed else _model_matrix("Phi", "PhiInv", eleven_center_model(), seed)
        return NamedMatrix(name, M, source)
    if name in ("Phi-model16", "Psi-model16"):
        f = name.split("-")[0]
        if printed:
            M = reference_m_phi16() if f == "Phi" else reference_m_psi16()
        else:
            M = _model_matrix(f, f + "Inv", sixteen_center_model(), seed)
        return NamedMatrix(name, M, source)
    if name == "PsiPhi-model16":
        M_phi = named_matrix("Phi-model16", seed, printed).matrix
        M_psi = named_matrix("Psi-model16", seed, printed).matrix
        certificate = None
        if not printed:
            catalog = default_catalog()
            certificate = model_contractions([catalog.get("Phi"), catalog.get("Psi")],
                                             sixteen_center_model(), seed)
        action = product_action([M_psi, M_phi], certificate)
        return NamedMatrix(name, action.matrix.with_basis(M_phi.basis), source,
                           action.certified, action.warning)
    if name in ("phi-fiber", "psi-fiber", "psiphi-fiber"):
        M_phi, M_psi, t = _fiber_matrices(seed, printed, prime, bits)
        M = {"phi-fiber": M_phi, "psi-fiber": M_psi, "psiphi-fiber": M_psi @ M_phi}[name]
        return NamedMatrix(name, M, source, t=t)
    raise BidynError(f"Неизвестная матрица '{name}', доступны: {', '.join(MATRIX_NAMES)}")
