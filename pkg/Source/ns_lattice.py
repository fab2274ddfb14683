"""
Решётки Нерона-Севери моделей раздутия плоскости.

Модель задаётся списком центров (BlowupConfig): точки плоскости и бесконечно
близкие точки на их исключительных прямых. Базис решётки - h и классы
исключительных кривых: собственные прообразы (kind="strict") или полные
прообразы (kind="total"). Матрица прямого образа собирается из классов
образов общих членов линейных систем, рост определяется по характеристическому
многочлену, устойчивость - по орбитам образов стягиваемых кривых.

Здесь же перенос классов через флопы: формула для ограничения на слой
D_src = (σ|_F)^*(D+) + (D+ · c+) c и разложение разности подтянутого и
послойного классов по именованным кривым слоя.
"""

from dataclasses import dataclass, field
from math import lcm
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from sympy import totient
from sympy.polys.domains import QQ, ZZ
from sympy.polys.factortools import dup_zz_cyclotomic_poly
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.exceptions import DMNonInvertibleMatrixError
from sympy.polys.rings import PolyElement, PolyRing

import console
from errors import (
    BidynError,
    DimensionMismatchError,
    IndeterminateError,
    InconsistentRelationsError,
    LatticeMismatchError,
    ZeroMapError,
)
from exact_algebra import (
    IntMatrix,
    RootInterval,
    base_point_frame,
    change_domain,
    charpoly,
    gcd_poly,
    jordan_profile,
    largest_real_root,
    line_direction,
    matrix_power,
    mult_at,
    poly_ring,
    prime_field,
    reduce_mod_p,
    substitute,
    total_degree,
)
from local_germs import ModelPoint, evaluate_on_model, exceptional_image
from poly_parser import parse_poly
from ratmap import MAX_RETRIES, ProjPoint, ProjRatMap

MEMBER_COEFF_BOUND = 50


# ---------------------------------------------------------------------------
# Конфигурации центров
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Center:
    """
    Центр раздутия.

    Для бесконечно близкого центра point совпадает с точкой родителя,
    direction - направление [s:t] в репере base_point_frame(point),
    tangent - прямая через родителя в этом направлении.
    """
    label: str
    point: ProjPoint
    parent: Optional[str] = None
    direction: Optional[ProjPoint] = None
    tangent: Optional[PolyElement] = field(default=None, compare=False, repr=False)

    @property
    def position(self) -> Tuple[ProjPoint, Optional[ProjPoint]]:
        return self.point, self.direction

    @property
    def chart_chain(self) -> List[Tuple[int, ...]]:
        return [self.direction.coords] if self.direction is not None else []

    def __str__(self) -> str:
        if self.parent is None:
            return f"{self.label}={self.point}"
        return f"{self.label}={self.point}@{self.direction}"


CenterSpec = Union[Tuple[str, Sequence[int]], Tuple[str, str, Any]]


@dataclass(frozen=True)
class BlowupConfig:
    """
    Упорядоченный набор центров: родитель объявляется раньше потомка.

    Args:
        centers: Центры в порядке объявления
        name: Имя модели для отчётов
        prime: Простое, если точки заданы над GF(p)
    """
    centers: Tuple[Center, ...]
    name: str = ""
    prime: Optional[int] = None

    def __post_init__(self):
        seen: Dict[str, Center] = {}
        positions = set()
        for c in self.centers:
            if c.label in seen:
                raise BidynError(f"Центр {c.label} объявлен дважды")
            if c.parent is not None:
                parent = seen.get(c.parent)
                if parent is None:
                    raise BidynError(f"Родитель {c.parent} центра {c.label} должен быть объявлен раньше")
                if parent.parent is not None:
                    raise BidynError("Поддерживаются только два уровня бесконечно близких точек")
                if c.point != parent.point or c.direction is None or c.direction.dimension != 1:
                    raise BidynError(f"Центр {c.label} не лежит на исключительной прямой {c.parent}")
            if c.position in positions:
                raise BidynError(f"Центр {c.label} совпадает с уже объявленным")
            positions.add(c.position)
            seen[c.label] = c

    @classmethod
    def build(cls, specs: Sequence[CenterSpec], name: str = "",
              prime: Optional[int] = None) -> "BlowupConfig":
        """
        Конфигурация из описаний центров.

        Args:
            specs: ("p", (0, 0, 1)) для точки плоскости или
                ("p1'", "p1", "2*x - 2*y + z") для бесконечно близкой точки
                в направлении прямой через родителя
            name: Имя модели
            prime: Простое для моделей над GF(p)

        Returns:
            BlowupConfig

        Raises:
            NotOnCurveError: прямая не проходит через родителя
        """
        domain = QQ if prime is None else prime_field(prime)
        R = poly_ring(("x", "y", "z"), domain)
        centers: List[Center] = []
        by_label: Dict[str, Center] = {}
        for spec in specs:
            label, where = spec[0], spec[1]
            if isinstance(where, str):
                parent = by_label.get(where)
                if parent is None:
                    raise BidynError(f"Родитель {where} центра {label} должен быть объявлен раньше")
                line = _as_line(spec[2], R, prime)
                direction = ProjPoint(tuple(line_direction(line, parent.point)), prime)
                center = Center(label, parent.point, parent.label, direction, line)
            else:
                center = Center(label, ProjPoint(tuple(where), prime))
            centers.append(center)
            by_label[label] = center
        return cls(tuple(centers), name, prime)

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(c.label for c in self.centers)

    @property
    def domain(self):
        return QQ if self.prime is None else prime_field(self.prime)

    def center(self, label: str) -> Center:
        for c in self.centers:
            if c.label == label:
                return c
        raise BidynError(f"В модели {self.name} нет центра {label}")

    def center_at(self, point: ProjPoint) -> Optional[Center]:
        """Центр первого раунда в данной точке плоскости."""
        for c in self.centers:
            if c.parent is None and c.point == point:
                return c
        return None

    def child_at(self, center: Center, direction: ProjPoint) -> Optional[Center]:
        for c in self.centers:
            if c.parent == center.label and c.direction == direction:
                return c
        return None

    def children(self, label: str) -> List[Center]:
        return [c for c in self.centers if c.parent == label]

    def at_position(self, position: Tuple[ProjPoint, Optional[ProjPoint]]) -> Optional[Center]:
        for c in self.centers:
            if c.position == position:
                return c
        return None

    def __len__(self) -> int:
        return len(self.centers)


def _as_line(line: Any, R: PolyRing, prime: Optional[int]) -> PolyElement:
    if isinstance(line, str):
        parsed = parse_poly(line, R=poly_ring(tuple(str(s) for s in R.symbols), QQ))
    else:
        parsed = line
    if prime is not None and parsed.ring.domain != R.domain:
        return reduce_mod_p(parsed, prime)
    return change_domain(parsed, R.domain)


# ---------------------------------------------------------------------------
# Решётки и классы
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Lattice:
    """
    Решётка N^1 модели с формой пересечения.

    Args:
        labels: Метки базиса (первая - h)
        gram: Матрица формы пересечения
        kind: strict или total
        name: Имя модели; классы разных решёток не пересекаются
        centers: Метка центра для каждой метки базиса (None для h)
    """
    labels: Tuple[str, ...]
    gram: IntMatrix
    kind: str = "total"
    name: str = ""
    centers: Tuple[Optional[str], ...] = ()

    def __post_init__(self):
        if self.gram.shape != (len(self.labels), len(self.labels)):
            raise DimensionMismatchError("Размер формы не совпадает с числом меток")
        if self.gram.rows != self.gram.transpose().rows:
            raise BidynError("Форма пересечения должна быть симметричной")
        if len(set(self.labels)) != len(self.labels):
            raise BidynError("Метки базиса должны быть различными")

    @property
    def rank(self) -> int:
        return len(self.labels)

    @classmethod
    def plane(cls, cfg: BlowupConfig, kind: str = "strict", prefix: str = "e_",
              order: Optional[Sequence[str]] = None) -> "Lattice":
        """
        Решётка модели раздутия плоскости.

        Для kind="strict" e_par^2 = -1 - (число потомков), e_par . e_ch = 1;
        для kind="total" форма диагональна: diag(1, -1, ..., -1).
        """
        if kind not in ("strict", "total"):
            raise BidynError(f"Неизвестный вид базиса: {kind}")
        order = tuple(order) if order is not None else cfg.labels
        if sorted(order) != sorted(cfg.labels):
            raise DimensionMismatchError("Порядок базиса должен перечислять все центры")
        n = len(order) + 1
        gram = [[0] * n for _ in range(n)]
        gram[0][0] = 1
        index = {label: k + 1 for k, label in enumerate(order)}
        for label, k in index.items():
            gram[k][k] = -1
            if kind == "strict":
                children = cfg.children(label)
                gram[k][k] -= len(children)
                for ch in children:
                    gram[k][index[ch.label]] = gram[index[ch.label]][k] = 1
        labels = ("h",) + tuple(prefix + label for label in order)
        return cls(labels, IntMatrix(tuple(tuple(r) for r in gram), labels), kind, cfg.name,
                   (None,) + order)

    def index(self, label: str) -> int:
        if label in self.labels:
            return self.labels.index(label)
        if label in self.centers:
            return self.centers.index(label)
        raise BidynError(f"В решётке {self.name} нет метки {label}")

    def vector(self, coeffs: Sequence[int]) -> "DivClass":
        return DivClass(self, tuple(coeffs))

    def zero(self) -> "DivClass":
        return DivClass(self, (0,) * self.rank)

    def basis(self, label: str) -> "DivClass":
        coeffs = [0] * self.rank
        coeffs[self.index(label)] = 1
        return DivClass(self, tuple(coeffs))

    def combination(self, terms: Dict[str, int]) -> "DivClass":
        coeffs = [0] * self.rank
        for label, c in terms.items():
            coeffs[self.index(label)] += int(c)
        return DivClass(self, tuple(coeffs))

    def signature(self) -> Tuple[int, int]:
        eig = np.linalg.eigvalsh(np.array(self.gram.rows, dtype=float))
        return int((eig > 1e-9).sum()), int((eig < -1e-9).sum())


@dataclass(frozen=True)
class DivClass:
    """Класс дивизора: целые координаты в базисе решётки."""
    lattice: Lattice
    coeffs: Tuple[int, ...]

    def __post_init__(self):
        coeffs = tuple(int(c) for c in self.coeffs)
        if len(coeffs) != self.lattice.rank:
            raise DimensionMismatchError(
                f"Класс из {len(coeffs)} координат в решётке ранга {self.lattice.rank}")
        object.__setattr__(self, "coeffs", coeffs)

    def _same(self, other: "DivClass") -> None:
        if other.lattice != self.lattice:
            raise LatticeMismatchError(
                f"Классы из разных решёток: {self.lattice.name} и {other.lattice.name}")

    def __add__(self, other: "DivClass") -> "DivClass":
        self._same(other)
        return DivClass(self.lattice, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "DivClass") -> "DivClass":
        return self + (-other)

    def __neg__(self) -> "DivClass":
        return DivClass(self.lattice, tuple(-a for a in self.coeffs))

    def __mul__(self, k: int) -> "DivClass":
        return DivClass(self.lattice, tuple(int(k) * a for a in self.coeffs))

    __rmul__ = __mul__

    def __getitem__(self, label: str) -> int:
        return self.coeffs[self.lattice.index(label)]

    def intersect(self, other: "DivClass") -> int:
        self._same(other)
        return sum(a * g * b
                   for a, row in zip(self.coeffs, self.lattice.gram.rows) if a
                   for g, b in zip(row, other.coeffs) if g and b)

    def square(self) -> int:
        return self.intersect(self)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __str__(self) -> str:
        parts = []
        for c, label in zip(self.coeffs, self.lattice.labels):
            if not c:
                continue
            sign = "-" if c < 0 else "+"
            body = label if abs(c) == 1 else f"{abs(c)}{label}"
            parts.append((sign, body))
        if not parts:
            return "0"
        text = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text

    def to_dict(self) -> Dict[str, Any]:
        return {"class": str(self), "coeffs": list(self.coeffs), "basis": list(self.lattice.labels)}


def intersect(D1: DivClass, D2: DivClass) -> int:
    """D1 . D2 = D1^T G D2."""
    return D1.intersect(D2)


def total_to_strict(cfg: BlowupConfig, lattice: Lattice) -> IntMatrix:
    """Матрица S: координаты в полных прообразах -> координаты в собственных (y_ch = x_ch + x_par)."""
    n = lattice.rank
    rows = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    for c in cfg.centers:
        if c.parent is not None:
            rows[lattice.index(c.label)][lattice.index(c.parent)] = 1
    return IntMatrix(tuple(tuple(r) for r in rows), lattice.labels)


def strict_to_total(cfg: BlowupConfig, lattice: Lattice) -> IntMatrix:
    n = lattice.rank
    rows = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    for c in cfg.centers:
        if c.parent is not None:
            rows[lattice.index(c.label)][lattice.index(c.parent)] = -1
    return IntMatrix(tuple(tuple(r) for r in rows), lattice.labels)


def _in_domain(f: PolyElement, cfg: BlowupConfig) -> PolyElement:
    if cfg.prime is not None and f.ring.domain != cfg.domain:
        return reduce_mod_p(f, cfg.prime)
    return f


def _map_in_domain(f: ProjRatMap, cfg: BlowupConfig) -> ProjRatMap:
    if cfg.prime is not None and f.domain != cfg.domain:
        return f.mod_p(cfg.prime)
    return f


def center_multiplicity(F: PolyElement, center: Center) -> int:
    """Кратность собственного прообраза кривой F = 0 в центре."""
    return mult_at(F, center.point, center.chart_chain)


def _total_vector(F: PolyElement, cfg: BlowupConfig, lattice: Lattice) -> List[int]:
    vec = [total_degree(F)]
    for label in lattice.centers[1:]:
        vec.append(-center_multiplicity(F, cfg.center(label)))
    return vec


def _from_total(vec: Sequence[int], cfg: BlowupConfig, lattice: Lattice) -> Tuple[int, ...]:
    if lattice.kind == "total":
        return tuple(vec)
    return total_to_strict(cfg, lattice) @ tuple(vec)


def curve_class(F: PolyElement, cfg: BlowupConfig, lattice: Lattice) -> DivClass:
    """
    Класс собственного прообраза плоской кривой F = 0.

    deg(F) h - сумма mult_c(F) E_c по полным прообразам, кратности в
    бесконечно близких точках - через цепочку карт.
    """
    F = _in_domain(F, cfg)
    return DivClass(lattice, _from_total(_total_vector(F, cfg, lattice), cfg, lattice))


def exceptional_class(cfg: BlowupConfig, lattice: Lattice, center: Union[str, Center]) -> DivClass:
    """Класс собственного прообраза исключительной кривой центра (например, b - c)."""
    label = center if isinstance(center, str) else center.label
    cfg.center(label)
    if lattice.kind == "strict":
        return lattice.basis(label)
    result = lattice.basis(label)
    for ch in cfg.children(label):
        result = result - lattice.basis(ch.label)
    return result


# ---------------------------------------------------------------------------
# Прямой образ
# ---------------------------------------------------------------------------

def _random_scalars(rng: np.random.Generator, n: int, dom: Any) -> List[Any]:
    values = [int(v) for v in rng.integers(1, MEMBER_COEFF_BOUND, size=n)]
    signs = [1 if v else -1 for v in rng.integers(0, 2, size=n)]
    return [dom.convert(v * s) for v, s in zip(values, signs)]


def _line_through(point: ProjPoint, R: PolyRing, rng: np.random.Generator) -> PolyElement:
    _, l1, l2 = base_point_frame(point, R)
    a, b = _random_scalars(rng, 2, R.domain)
    return l1 * a + l2 * b


def _random_line(R: PolyRing, rng: np.random.Generator) -> PolyElement:
    a, b, c = _random_scalars(rng, 3, R.domain)
    x, y, z = R.gens
    return x * a + y * b + z * c


def _generators(cfg: BlowupConfig, lattice: Lattice) -> List[Tuple[str, ...]]:
    """
    Образующие: h, h - E_c для центров первого раунда,
    2h - E_par - E_ch (коники с касанием) для бесконечно близких.
    """
    gens: List[Tuple[str, ...]] = [("h",)]
    for label in lattice.centers[1:]:
        c = cfg.center(label)
        gens.append(("line", label) if c.parent is None else ("conic", c.parent, label))
    return gens


def _generator_vector(spec: Tuple[str, ...], lattice: Lattice) -> List[int]:
    vec = [0] * lattice.rank
    if spec[0] == "h":
        vec[0] = 1
    elif spec[0] == "line":
        vec[0] = 1
        vec[lattice.index(spec[1])] = -1
    else:
        vec[0] = 2
        vec[lattice.index(spec[1])] = -1
        vec[lattice.index(spec[2])] = -1
    return vec


def _member(spec: Tuple[str, ...], cfg: BlowupConfig, R: PolyRing,
            rng: np.random.Generator) -> PolyElement:
    """Случайный член линейной системы образующей."""
    if spec[0] == "h":
        return _random_line(R, rng)
    if spec[0] == "line":
        return _line_through(cfg.center(spec[1]).point, R, rng)
    if spec[0] == "conic":
        child = cfg.center(spec[2])
        _, l1, l2 = base_point_frame(child.point, R)
        tangent = _as_line(child.tangent, R, cfg.prime)
        a, b, c = _random_scalars(rng, 3, R.domain)
        return tangent * _random_line(R, rng) + l1 * l1 * a + l1 * l2 * b + l2 * l2 * c
    # pair: коники через два центра первого раунда
    A, B = cfg.center(spec[1]).point, cfg.center(spec[2]).point
    through_both = _line_through_points(A, B, R)
    return (_line_through(A, R, rng) * _line_through(B, R, rng)
            + _line_through(A, R, rng) * _line_through(B, R, rng)
            + through_both * _random_line(R, rng))


def _line_through_points(A: ProjPoint, B: ProjPoint, R: PolyRing) -> PolyElement:
    dom = R.domain
    a, b = [dom.convert(v) for v in A.coords], [dom.convert(v) for v in B.coords]
    x, y, z = R.gens
    return (x * (a[1] * b[2] - a[2] * b[1]) + y * (a[2] * b[0] - a[0] * b[2])
            + z * (a[0] * b[1] - a[1] * b[0]))


def _moving_image(spec: Tuple[str, ...], inv: ProjRatMap, cfg: BlowupConfig,
                  rng: np.random.Generator) -> PolyElement:
    """Подвижная часть F o inv для двух случайных членов системы."""
    R = inv.ring
    G1 = substitute(_member(spec, cfg, R, rng), list(inv.coords))
    G2 = substitute(_member(spec, cfg, R, rng), list(inv.coords))
    if not G1 or not G2:
        raise ZeroMapError("Член линейной системы перешёл в ноль")
    G = G1.exquo(gcd_poly(G1, G2))
    if total_degree(G) == 0:
        raise ZeroMapError("Подвижная часть образа пуста")
    return G


def _solve_columns(images: List[List[int]], generators: List[List[int]]) -> Optional[List[List[int]]]:
    """M_t = Im * Gm^{-1}; None, если решение не целое."""
    n = len(generators)
    Gm = DomainMatrix([[QQ(generators[j][i]) for j in range(n)] for i in range(n)], (n, n), QQ)
    Im = DomainMatrix([[QQ(images[j][i]) for j in range(n)] for i in range(n)], (n, n), QQ)
    M = (Im * Gm.inv()).to_list()
    if any(QQ.denom(v) != 1 for row in M for v in row):
        return None
    return [[int(v) for v in row] for row in M]


def pushforward_matrix(f: ProjRatMap, inv: ProjRatMap, cfg: BlowupConfig,
                       lattice: Optional[Lattice] = None,
                       contracted: Sequence[Tuple[PolyElement, Optional[str]]] = (),
                       seed: int = 7) -> IntMatrix:
    """
    Матрица f~_* на N^1 модели.

    Столбцы получаются из образующих h, h - E_c, 2h - E_par - E_ch: класс
    f~_*(D) - это класс собственного прообраза подвижной части F o f^{-1}
    для общего члена F системы |D|. Решение проверяется на системе коник через
    два центра и на заявленных стягиваемых кривых.

    Args:
        f: Отображение
        inv: Обратное к f
        cfg: Модель, покрывающая неопределённость f и f^{-1}
        lattice: Решётка (по умолчанию Lattice.plane(cfg))
        contracted: Пары (кривая, метка центра или None): класс образа кривой
            должен быть классом E_метка (или нулём, если кривая уходит в точку)
        seed: Зерно генератора членов систем

    Returns:
        IntMatrix с базисом lattice.labels

    Raises:
        InconsistentRelationsError: проверки не сошлись за MAX_RETRIES попыток
    """
    lattice = lattice or Lattice.plane(cfg)
    f = _map_in_domain(f, cfg)
    inv = _map_in_domain(inv, cfg)
    specs = _generators(cfg, lattice)
    generators = [_generator_vector(s, lattice) for s in specs]
    firsts = [c.label for c in cfg.centers if c.parent is None]
    check = ("pair", firsts[0], firsts[1]) if len(firsts) >= 2 else None
    rng = np.random.default_rng(seed)
    problems: List[str] = []
    for attempt in range(MAX_RETRIES):
        try:
            images = [_total_vector(_moving_image(s, inv, cfg, rng), cfg, lattice) for s in specs]
        except ZeroMapError as e:
            problems = [str(e)]
            continue
        M_t = _solve_columns(images, generators)
        if M_t is None:
            problems = ["нецелые столбцы"]
            console.warn(f"{f.name}: нецелые столбцы, повтор с новыми членами систем")
            continue
        M_t = IntMatrix(tuple(tuple(r) for r in M_t), lattice.labels)
        problems = []
        if check is not None:
            expected = _total_vector(_moving_image(check, inv, cfg, rng), cfg, lattice)
            if list(M_t @ _generator_vector(check, lattice)) != expected:
                problems.append(f"коники через {check[1]}, {check[2]} не согласованы")
        if lattice.kind == "strict":
            S, S_inv = total_to_strict(cfg, lattice), strict_to_total(cfg, lattice)
            M = (S @ M_t @ S_inv).with_basis(lattice.labels)
        else:
            M = M_t
        for curve, label in contracted:
            image = lattice.vector(M @ curve_class(curve, cfg, lattice).coeffs)
            target = exceptional_class(cfg, lattice, label) if label else lattice.zero()
            if image != target:
                problems.append(f"образ стягиваемой кривой: {image}, ожидалось {target}")
        if not problems:
            console.ok(f"{f.name or 'f'}_* на {cfg.name or 'модели'}: {lattice.rank}x{lattice.rank}")
            return M
        console.warn(f"{f.name}: {'; '.join(problems)}, повтор")
    raise InconsistentRelationsError(
        f"Соотношения для {f.name} несовместны после {MAX_RETRIES} попыток: {'; '.join(problems)}")


def position_identification(source: BlowupConfig, target: BlowupConfig,
                            source_lattice: Lattice, target_lattice: Lattice) -> IntMatrix:
    """
    Отождествление решёток двух моделей с одинаковым набором положений центров:
    класс центра цели переходит в класс центра источника в том же положении.
    """
    if source_lattice.rank != target_lattice.rank:
        raise DimensionMismatchError("Решётки разного ранга")
    n = source_lattice.rank
    rows = [[0] * n for _ in range(n)]
    rows[0][0] = 1
    for label in target_lattice.centers[1:]:
        c = target.center(label)
        match = source.at_position(c.position)
        if match is None:
            raise DimensionMismatchError(f"В {source.name} нет центра в положении {c}")
        rows[source_lattice.index(match.label)][target_lattice.index(label)] = 1
    return IntMatrix(tuple(tuple(r) for r in rows))


# ---------------------------------------------------------------------------
# Рост
# ---------------------------------------------------------------------------

@dataclass
class GrowthClass:
    """
    Класс роста ||M^n||: bounded, polynomial (степени degree) или
    exponential (с показателем rate).
    """
    kind: str
    degree: int = 0
    rate: Optional[RootInterval] = None
    rate_float: float = 1.0
    charpoly: Optional[PolyElement] = None
    cyclotomic: Tuple[int, ...] = ()
    exact: bool = True
    zero_roots: int = 0

    def to_dict(self, digits: int = 20) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": self.kind}
        if self.kind == "polynomial":
            data["degree"] = self.degree
        if self.kind == "exponential":
            data["rate"] = self.rate.decimal(digits) if self.rate else repr(self.rate_float)
            data["exact"] = self.exact
        data["cyclotomic_factors"] = list(self.cyclotomic)
        if self.zero_roots:
            data["zero_roots"] = self.zero_roots
        return data


def strip_zero_roots(p: PolyElement) -> Tuple[PolyElement, int]:
    """Снимает множитель x^k (нулевые собственные значения)."""
    k = min(m[0] for m in p.monoms())
    if not k:
        return p, 0
    return p.exquo(p.ring.gens[0] ** k), k


def strip_cyclotomic(p: PolyElement) -> Tuple[PolyElement, Tuple[int, ...]]:
    """Делит характеристический многочлен на все круговые множители (с кратностью)."""
    R = p.ring
    deg = total_degree(p)
    orders: List[int] = []
    n = 1
    while n <= 2 * deg * deg + 2:
        if int(totient(n)) <= deg:
            c = R.from_list(dup_zz_cyclotomic_poly(n, ZZ))
            while total_degree(p) >= total_degree(c):
                q, r = p.div(c)
                if r:
                    break
                p = q
                orders.append(n)
        n += 1
    return p, tuple(orders)


def growth_class(M: IntMatrix) -> GrowthClass:
    """
    Рост итераций матрицы.

    Если характеристический многочлен - произведение круговых, рост
    полиномиальный степени (наибольшая жорданова клетка M^L в 1) - 1, где L -
    НОК порядков корней из единицы. Множитель x^k снимается заранее: клетки
    нулевого собственного значения в M^L относятся к 0 и на рост не влияют.
    Иначе рост экспоненциальный с показателем, равным наибольшему
    вещественному корню некруговой части.
    """
    p = charpoly(M)
    rest, zeros = strip_zero_roots(p)
    rest, orders = strip_cyclotomic(rest)
    if total_degree(rest) == 0:
        L = lcm(*orders) if orders else 1
        block = jordan_profile(matrix_power(M, L), 1).largest_block
        if block <= 1:
            return GrowthClass("bounded", 0, charpoly=p, cyclotomic=orders, zero_roots=zeros)
        return GrowthClass("polynomial", block - 1, charpoly=p, cyclotomic=orders, zero_roots=zeros)
    radius = float(max(abs(np.linalg.eigvals(np.array(M.rows, dtype=float)))))
    root = largest_real_root(rest)
    if root.found and root.as_float() >= radius - 1e-6 * max(radius, 1.0):
        return GrowthClass("exponential", 0, root, root.as_float(), p, orders, True, zeros)
    console.warn("Спектральный радиус не является вещественным корнем, берём численное значение")
    return GrowthClass("exponential", 0, None, radius, p, orders, False, zeros)


# ---------------------------------------------------------------------------
# Устойчивость и произведение действий
# ---------------------------------------------------------------------------

@dataclass
class ContractionCertificate:
    """Образы стягиваемых исключительных кривых цепочки и столкновения с Ind."""
    images: List[Tuple[str, ModelPoint]]
    collisions: List[str]

    @property
    def certified(self) -> bool:
        return not self.collisions

    def to_dict(self) -> Dict[str, Any]:
        return {
            "certified": self.certified,
            "images": [{"curve": name, "image": y.to_dict()} for name, y in self.images],
            "collisions": self.collisions,
        }


def model_contractions(chain: Sequence[ProjRatMap], cfg: BlowupConfig,
                       seed: int = 7) -> ContractionCertificate:
    """
    Исключительные кривые, стягиваемые множителями цепочки, и их образы
    под остальными множителями (в порядке применения).

    Столкновение - образ попадает в Ind следующего множителя; без столкновений
    (f_k~ o ... o f_1~)_* = f_k~_* ... f_1~_*.
    """
    images: List[Tuple[str, ModelPoint]] = []
    collisions: List[str] = []
    for j, factor in enumerate(chain):
        for center in cfg.centers:
            img = exceptional_image(factor, cfg, center, seed=seed)
            if img.kind != "point":
                continue
            name = f"{factor.name}:E_{center.label}"
            y = img.image
            console.step(f"{factor.name}~ стягивает E_{center.label} в {y}")
            for later in chain[j + 1:]:
                try:
                    y = evaluate_on_model(later, cfg, y, seed=seed)
                except IndeterminateError:
                    collisions.append(f"{name} -> {y} в Ind({later.name}~)")
                    y = None
                    break
            if y is not None:
                images.append((name, y))
    return ContractionCertificate(images, collisions)


@dataclass
class ProductAction:
    matrix: IntMatrix
    certified: bool
    warning: str = ""


def product_action(Ms: Sequence[IntMatrix],
                   certificate: Optional[ContractionCertificate] = None) -> ProductAction:
    """
    Произведение матриц в записанном порядке (product_action([A, B]) = A B).

    Без сертификата отсутствия столкновений результат помечается
    предупреждением: действие композиции может отличаться от произведения.
    """
    if not Ms:
        raise DimensionMismatchError("Пустой список матриц")
    result = Ms[0]
    for M in Ms[1:]:
        result = result @ M
    certified = certificate is not None and certificate.certified
    warning = ""
    if not certified:
        warning = "нет сертификата: стягиваемые кривые могут попадать в Ind следующего отображения"
        console.warn(warning)
    return ProductAction(result, certified, warning)


@dataclass
class StabilityViolation:
    curve: str
    k: int
    point: ModelPoint
    reason: str

    def to_dict(self) -> Dict[str, Any]:
        return {"curve": self.curve, "k": self.k, "point": self.point.to_dict(), "reason": self.reason}


@dataclass
class StabilityReport:
    map_name: str
    horizon: int
    violations: List[StabilityViolation]
    orbits: Dict[str, List[ModelPoint]]

    @property
    def stable(self) -> bool:
        return not self.violations

    def to_dict(self) -> Dict[str, Any]:
        return {
            "map": self.map_name,
            "horizon": self.horizon,
            "stable": self.stable,
            "violations": [v.to_dict() for v in self.violations],
            "orbits": {name: [str(y) for y in orbit] for name, orbit in self.orbits.items()},
        }


def stability_check(f: ProjRatMap, cfg: BlowupConfig,
                    contracted: Sequence[Union[ModelPoint, Tuple[str, ModelPoint]]],
                    indeterminate: Sequence[ModelPoint] = (), N: int = 10,
                    seed: int = 7) -> StabilityReport:
    """
    Алгебраическая устойчивость: f~^k(C) не лежит в Ind(f~) при 1 <= k <= N
    для всех стягиваемых кривых C.

    Args:
        f: Отображение
        cfg: Модель
        contracted: Образы f~(C) стягиваемых кривых (с именами или без)
        indeterminate: Заявленные точки Ind(f~)
        N: Горизонт
        seed: Зерно ростков

    Returns:
        StabilityReport; нарушение - попадание в заявленный список или точка,
        где ростки дают разные образы
    """
    if N < 1:
        raise BidynError("Горизонт должен быть не меньше 1")
    declared = set(indeterminate)
    violations: List[StabilityViolation] = []
    orbits: Dict[str, List[ModelPoint]] = {}
    for item in contracted:
        name, y = item if isinstance(item, tuple) else (str(item), item)
        orbit = [y]
        for k in range(1, N + 1):
            if y in declared:
                violations.append(StabilityViolation(name, k, y, "заявленная точка неопределённости"))
                break
            try:
                y = evaluate_on_model(f, cfg, y, seed=seed + k)
            except IndeterminateError:
                violations.append(StabilityViolation(name, k, y, "ростки дают разные образы"))
                break
            if y in orbit:
                orbit.append(y)
                break
            orbit.append(y)
        orbits[name] = orbit
    if violations:
        console.fail(f"{f.name}~ неустойчиво: {violations[0].curve} на шаге {violations[0].k}")
    else:
        console.ok(f"{f.name}~ устойчиво на горизонте {N}")
    return StabilityReport(f.name, N, violations, orbits)


def model_permutation(printed: Sequence[str], canonical: Sequence[str]) -> Tuple[int, ...]:
    """perm[j] - позиция метки printed[j] в каноническом порядке."""
    if sorted(printed) != sorted(canonical):
        raise DimensionMismatchError("Порядки базиса содержат разные метки")
    return tuple(list(canonical).index(label) for label in printed)


# ---------------------------------------------------------------------------
# Флопы
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FlopStep:
    """
    Шаг факторизации в порядке применения: source -> target.

    pullback - (σ|_F)^*: координаты в решётке цели -> координаты в решётке
    источника. Для флопа curve - флопаемая кривая в источнике, flopped -
    кривая c+ в цели; для изоморфизма обе None.
    """
    label: str
    source: Lattice
    target: Lattice
    pullback: IntMatrix
    curve: Optional[DivClass] = None
    flopped: Optional[DivClass] = None

    def __post_init__(self):
        if self.pullback.shape != (self.source.rank, self.target.rank):
            raise DimensionMismatchError(f"Шаг {self.label}: размер матрицы не согласован с решётками")
        if (self.curve is None) != (self.flopped is None):
            raise BidynError(f"Шаг {self.label}: нужны обе кривые флопа")
        if self.curve is not None:
            if self.curve.lattice != self.source or self.flopped.lattice != self.target:
                raise LatticeMismatchError(f"Шаг {self.label}: кривые не в своих решётках")
            # (-1,-1)-кривая в слое - (-2)-кривая поверхности
            if self.curve.square() != -2 or self.flopped.square() != -2:
                raise BidynError(f"Шаг {self.label}: кривые флопа должны иметь самопересечение -2")

    @property
    def is_flop(self) -> bool:
        return self.curve is not None


def flop_transfer(D_plus: DivClass, step: FlopStep) -> DivClass:
    """(σ|_F)^*(D+) + (D+ . c+) c."""
    if D_plus.lattice != step.target:
        raise DimensionMismatchError(f"Класс не из решётки цели шага {step.label}")
    pulled = step.source.vector(step.pullback @ D_plus.coeffs)
    if step.curve is None:
        return pulled
    return pulled + D_plus.intersect(step.flopped) * step.curve


def flop_multiplicity(mult_plus: int, D_plus: DivClass, step: FlopStep) -> int:
    """mult_c(D) = mult_{c+}(D+) + D+ . c+."""
    if step.flopped is None:
        raise BidynError(f"Шаг {step.label} не является флопом")
    return mult_plus + D_plus.intersect(step.flopped)


@dataclass(frozen=True)
class FlopFactorization:
    """Цепочка шагов в порядке применения; цель шага - источник следующего."""
    steps: Tuple[FlopStep, ...]
    name: str = ""

    def __post_init__(self):
        if not self.steps:
            raise BidynError("Пустая факторизация")
        for a, b in zip(self.steps, self.steps[1:]):
            if a.target != b.source:
                raise LatticeMismatchError(f"Шаги {a.label} и {b.label} не стыкуются")

    @property
    def source(self) -> Lattice:
        return self.steps[0].source

    @property
    def target(self) -> Lattice:
        return self.steps[-1].target

    def pullback(self, D: DivClass) -> DivClass:
        for step in reversed(self.steps):
            D = flop_transfer(D, step)
        return D


@dataclass
class FlopDifference:
    pulled: DivClass
    plain: DivClass
    difference: DivClass
    decomposition: Optional[Dict[str, int]]

    @property
    def exact(self) -> bool:
        return self.decomposition is not None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "pulled": str(self.pulled),
            "plain": str(self.plain),
            "difference": str(self.difference),
            "decomposition": self.decomposition,
        }


def decompose(D: DivClass, named: Dict[str, DivClass]) -> Optional[Dict[str, int]]:
    """Целое разложение D по именованным классам (нормальные уравнения, затем проверка)."""
    names = list(named)
    n, m = D.lattice.rank, len(names)
    A = DomainMatrix([[QQ(named[k].coeffs[i]) for k in names] for i in range(n)], (n, m), QQ)
    d = DomainMatrix([[QQ(c)] for c in D.coeffs], (n, 1), QQ)
    At = A.transpose()
    try:
        a = (At * A).lu_solve(At * d).to_list()
    except DMNonInvertibleMatrixError:
        return None
    values = [row[0] for row in a]
    if any(QQ.denom(v) != 1 for v in values):
        return None
    result = {k: int(v) for k, v in zip(names, values)}
    total = D.lattice.zero()
    for k, c in result.items():
        total = total + c * named[k]
    return result if total == D else None


def flop_difference(factorization: FlopFactorization, D: DivClass, plain: IntMatrix,
                    named: Dict[str, DivClass]) -> FlopDifference:
    """
    Разность подтянутого через факторизацию класса и послойного подтягивания.

    Args:
        factorization: Шаги отображения слоя
        D: Класс на решётке цели последнего шага
        plain: Матрица послойного подтягивания (цель -> источник)
        named: Именованные кривые источника для разложения разности

    Returns:
        FlopDifference с разложением (None, если целого разложения нет)
    """
    pulled = factorization.pullback(D)
    plain_class = factorization.source.vector(plain @ D.coeffs)
    difference = pulled - plain_class
    return FlopDifference(pulled, plain_class, difference, decompose(difference, named))
