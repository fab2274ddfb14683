"""
Набор проверок воспроизведения (подкоманда verify-paper).

Двенадцать проверок: тождества инволюций, формулы индуцированных отображений,
неопределённость, сужения на исключительные прямые, матрицы действий,
спектральные данные, степени двумя способами, разность флопов, устойчивость,
высоты, разминочные примеры в P^3 и диагностика семейства.

Каждая проверка собирает список нарушений. Отношения степеней F_t в
проверке 12 только печатаются, порога для них нет.
"""

import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import mpmath
import numpy as np

import console
from errors import BidynError
from exact_algebra import jordan_profile, matrix_power, poly_ring
from fixtures import default_catalog
from heights import choose_seed, orbit_heights
from induced_exceptional import (
    assemble_induced,
    compose_exceptional,
    derive_point_to_conic,
    inverse_of,
    proportional,
    rational_field,
)
from local_germs import ModelPoint
from ns_lattice import (
    BlowupConfig,
    Lattice,
    growth_class,
    model_contractions,
    model_permutation,
    stability_check,
)
from poly_parser import parse_poly
from ratmap import (
    ProjPoint,
    compose,
    degree_sequence,
    evaluate,
    identity_map,
    indeterminacy_check,
    induced_on_line_blowup,
    induced_on_point_blowup,
    is_identity,
    sample_curve_mod_p,
)
from settings import Settings, load_settings
from threefold_family import (
    CUBIC_T,
    GROUPED_16_ORDER,
    CurvePointT,
    Q_POINT,
    build_family,
    build_iota,
    named_matrix,
    negate,
    on_curve,
    q_flop_difference,
    random_good_point,
    reference_m11,
    reference_m_phi16,
    reference_m_phi_fiber,
    reference_m_psi16,
    reference_m_psi_fiber,
    sixteen_center_model,
)

ALL_CHECKS = tuple(range(1, 13))

# 17 + 12 sqrt(2)
FAMILY_RATE = 17 + 12 * 2 ** 0.5

HEIGHT_RATE = 16

FLOP_DIFFERENCE = {"𝔮": 2, "𝔩1": 1, "𝔩2": 1, "𝔩3": 1, "𝔩4": 1,
                   "𝔟": 4, "𝔟1": 2, "𝔟2": 2, "𝔟3": 2, "𝔟4": 2}


@dataclass
class CheckResult:
    number: int
    title: str
    failures: List[str] = field(default_factory=list)
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def status(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def expect(self, condition: bool, message: str) -> None:
        if not condition:
            self.failures.append(message)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "check": self.number,
            "title": self.title,
            "status": self.status,
            "failures": self.failures,
            "details": self.details,
        }


@dataclass
class SuiteReport:
    seed: int
    checks: List[CheckResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "seed": self.seed,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
            "failures": [{"check": c.number, "failures": c.failures}
                         for c in self.checks if not c.passed],
        }


@dataclass
class SuiteContext:
    seed: int
    tol: float
    stretch: bool
    settings: Settings

    def rng(self, offset: int = 0) -> np.random.Generator:
        return np.random.default_rng(self.seed + offset)


# ---------------------------------------------------------------------------
# Проверки
# ---------------------------------------------------------------------------

def check_involutions(ctx: SuiteContext, r: CheckResult) -> None:
    catalog = default_catalog()
    iota = catalog.get("iota_q")
    r.expect(is_identity(compose(iota, iota)), "iota_q o iota_q != id")
    r.expect(is_identity(compose(catalog.get("Phi"), catalog.get("PhiInv"))), "Phi o Phi^-1 != id")

    t = CurvePointT(2, 6)
    r.expect(on_curve(t) and negate(t) == CurvePointT(2, -6), "точка (2,6) или её обратная")
    iota_t = build_iota(t)
    r.expect(is_identity(compose(iota_t, iota_t)), "iota_(2,6) не инволюция")
    fixed = ProjPoint((-1, 0, 1))
    r.expect(evaluate(iota_t, fixed) == fixed, "iota_(2,6) не сохраняет [-1,0,1]")
    r.expect(is_identity(build_family(Q_POINT).F), "F_q != id")

    cubic = parse_poly(CUBIC_T, R=poly_ring(("x", "y", "z")))
    rng = ctx.rng(1)
    primes = []
    for _ in range(2):
        t_p, data = random_good_point(rng, bits=ctx.settings.prime_bits)
        p = t_p.prime
        primes.append(p)
        iota_p = build_iota(t_p)
        r.expect(is_identity(compose(iota_p, iota_p)), f"iota_t над GF({p}) не инволюция")
        ind = {t_p.projective(), *data.points}
        sample = [P for P in sample_curve_mod_p(cubic, p, 12, rng) if P not in ind][:8]
        moved = [P for P in sample if evaluate(iota_p, P) != P]
        r.expect(not moved, f"iota_t над GF({p}) сдвигает точки T: {moved}")
    r.details = {"primes": primes}


def check_formulas(ctx: SuiteContext, r: CheckResult) -> None:
    catalog = default_catalog()
    for name in ("Phi", "Psi"):
        r.expect(proportional(assemble_induced(name), catalog.get(name)), f"собранное {name} не совпадает")

    z, w = rational_field(("z", "w")).gens
    u, v, rr = rational_field(("u", "v", "r")).gens
    phi_bar = derive_point_to_conic("phi")
    D = w ** 2 - 5 * z ** 2
    expected = (8 * z ** 2 / D, 8 * z * w / D, D ** 2 / (8 * z * (D ** 2 - 16 * z ** 4)))
    r.expect(tuple(phi_bar.coords) == expected, "phi-bar отличается от замкнутой формы")
    rho = (v ** 2 - 5 * u ** 2) ** 2 / (8 * (v ** 4 - 10 * u ** 2 * v ** 2 + 9 * u ** 4) * rr)
    inverse = inverse_of("phi")
    r.expect(tuple(inverse.coords) == (rho, rho * v / u), "phi-bar^-1 отличается от замкнутой формы")
    r.expect(list(compose_exceptional(inverse, phi_bar)) == [z, w], "phi-bar^-1 o phi-bar != id")
    r.details = {"phi_bar": phi_bar.to_dict(), "phi_bar_inverse": inverse.to_dict()}


def check_indeterminacy(ctx: SuiteContext, r: CheckResult) -> None:
    catalog = default_catalog()
    expected = [ProjPoint(p) for p in [(0, 0, 1), (1, 1, 0), (1, -1, 0), (1, 3, 0), (1, -3, 0)]]
    report = indeterminacy_check(catalog.get("Phi"), expected, lines=20, seed=ctx.seed)
    r.expect(report.confirmed == expected, f"Ind(Phi): {report.confirmed}")
    r.expect(report.complete, "проба нашла лишние базисные точки Phi")

    inv_points = [ProjPoint(tuple(p)) for p in catalog.definition("PhiInv").base_points]
    inv = indeterminacy_check(catalog.get("PhiInv"), inv_points, lines=20, seed=ctx.seed)
    r.expect(ProjPoint((0, 1, 1)) in inv.confirmed, "[0,1,1] не в Ind(Phi^-1)")
    r.expect(inv.confirmed == inv_points and inv.complete, "Ind(Phi^-1) не совпадает с заявленным")
    psi_inv = indeterminacy_check(catalog.get("PsiInv"), [ProjPoint((0, -1, 1))], lines=5, seed=ctx.seed)
    r.expect(bool(psi_inv.confirmed), "[0,-1,1] не в Ind(Psi^-1)")
    r.details = {"Phi": report.to_dict(), "PhiInv": inv.to_dict()}


def check_restrictions(ctx: SuiteContext, r: CheckResult) -> None:
    catalog = default_catalog()
    p1 = ProjPoint((1, 1, 0))
    Phi = induced_on_point_blowup(catalog.get("Phi"), p1)
    Psi = induced_on_point_blowup(catalog.get("Psi"), p1)
    s, t = poly_ring(("s", "t")).gens
    r.expect(Phi.direction == (2 * s, 2 * t - s), f"Phi на E_p1: {Phi.formula()}")
    r.expect(Psi.direction == (2 * s, 2 * t + s), f"Psi на E_p1: {Psi.formula()}")
    for d in [(1, 0), (0, 1), (3, 5), (-2, 7)]:
        image = Psi.apply(Phi.apply(d))
        r.expect(image[0] * d[1] == image[1] * d[0], f"Psi o Phi сдвигает направление {d}")
    p2 = ProjPoint((0, -1, 1))
    r.expect(evaluate(catalog.get("PsiPhi"), p2) == p2, "(Psi o Phi)([0,-1,1]) != [0,-1,1]")
    r.expect(evaluate(catalog.get("Phi"), p2) == ProjPoint((0, -2, 1)), "Phi([0,-1,1]) != [0,-2,1]")
    r.details = {"Phi": Phi.formula(), "Psi": Psi.formula()}


def check_matrices(ctx: SuiteContext, r: CheckResult) -> None:
    bits = ctx.settings.prime_bits
    pairs = [("Phi-model11", reference_m11()), ("phi-fiber", reference_m_phi_fiber()),
             ("psi-fiber", reference_m_psi_fiber()), ("Phi-model16", reference_m_phi16()),
             ("Psi-model16", reference_m_psi16())]
    computed = {}
    for name, reference in pairs:
        named = named_matrix(name, ctx.seed, bits=bits)
        computed[name] = named.matrix
        r.expect(named.matrix.rows == reference.rows, f"{name} не совпадает с эталоном")
    canonical = Lattice.plane(sixteen_center_model()).labels
    r.details = {
        "basis_16": list(canonical),
        "permutation_from_grouped_order": list(model_permutation(GROUPED_16_ORDER, canonical)),
        "Phi-model11": computed["Phi-model11"].tolist(),
    }


def check_spectral(ctx: SuiteContext, r: CheckResult) -> None:
    product = reference_m_psi16() @ reference_m_phi16()
    g = growth_class(product)
    r.expect(g.kind == "exponential" and g.rate is not None and g.rate.exact and g.rate.decimal() == "16",
             f"рост M_Psi M_Phi: {g.to_dict()}")
    fiber = reference_m_psi_fiber() @ reference_m_phi_fiber()
    r.expect(jordan_profile(fiber, 1).largest_block == 3, "клетка M_psi M_phi для 1 не размера 3")
    r.expect(jordan_profile(reference_m11(), 1).largest_block == 3, "клетка M для 1 не размера 3")
    gf = growth_class(fiber)
    r.expect(gf.kind == "polynomial" and gf.degree == 2, f"рост M_psi M_phi: {gf.to_dict()}")
    r.details = {"PsiPhi-model16": g.to_dict(), "psiphi-fiber": gf.to_dict(),
                 "Phi-model11": growth_class(reference_m11()).to_dict()}


def _h_entries(M, N: int) -> List[int]:
    return [matrix_power(M, n).rows[0][0] for n in range(1, N + 1)]


def check_degrees(ctx: SuiteContext, r: CheckResult) -> None:
    catalog = default_catalog()
    Phi, PsiPhi = catalog.get("Phi"), catalog.get("PsiPhi")
    M = reference_m11()
    MM = reference_m_psi16() @ reference_m_phi16()
    bits = ctx.settings.prime_bits

    exact = degree_sequence(Phi, 2).values
    r.expect(exact[1] == _h_entries(M, 2)[1] == 17, f"deg Phi^2 = {exact[1]}")
    r.expect(PsiPhi.degree == MM.rows[0][0], f"deg Psi o Phi = {PsiPhi.degree}, h-элемент {MM.rows[0][0]}")
    modp = degree_sequence(Phi, 4, "modp", seed=ctx.seed, prime_bits=bits).values
    r.expect(list(modp) == _h_entries(M, 4), f"степени Phi mod p: {list(modp)}")

    N = 3
    seq = degree_sequence(PsiPhi, N, "modp", seed=ctx.seed, prime_bits=bits).values
    expected = _h_entries(MM, N)
    r.expect(list(seq) == expected, f"степени Psi o Phi mod p: {list(seq)}, ожидалось {expected}")
    ratio = seq[2] / seq[1]
    r.expect(abs(ratio / 16 - 1) <= ctx.tol, f"D3/D2 = {ratio:.4f}")
    r.details = {"Phi": list(modp), "PsiPhi": list(seq), "D3/D2": round(ratio, 6)}
    if ctx.stretch:
        exact3 = degree_sequence(PsiPhi, N).values
        r.expect(list(exact3) == expected, f"точные степени Psi o Phi: {list(exact3)}")


def check_flop_difference(ctx: SuiteContext, r: CheckResult) -> None:
    result = q_flop_difference("h", ctx.seed)
    r.expect(result.exact and result.decomposition == FLOP_DIFFERENCE,
             f"разность: {result.decomposition}")
    r.details = result.to_dict()


def check_stability(ctx: SuiteContext, r: CheckResult) -> None:
    catalog = default_catalog()
    cfg = sixteen_center_model()
    certificate = model_contractions([catalog.get("Phi"), catalog.get("Psi")], cfg, ctx.seed)
    r.expect(certificate.certified, f"столкновения: {certificate.collisions}")
    report = stability_check(catalog.get("PsiPhi"), cfg, certificate.images, N=10, seed=ctx.seed)
    r.expect(report.stable, "Psi~ o Phi~ неустойчиво на 16-центровой модели")

    Phi = catalog.get("Phi")
    base = [ModelPoint(ProjPoint(tuple(p))) for p in catalog.definition("Phi").base_points]
    bare = stability_check(Phi, BlowupConfig((), "P2"), [("x - y", ModelPoint(ProjPoint((1, 1, 0))))],
                           indeterminate=base, N=3, seed=ctx.seed)
    r.expect(not bare.stable and bare.violations[0].k == 1, "Phi на P^2 должно быть неустойчиво")
    r.details = {"certificate": certificate.to_dict(), "sixteen": report.to_dict(), "bare_plane": bare.to_dict()}


def check_heights(ctx: SuiteContext, r: CheckResult) -> None:
    catalog = default_catalog()
    PsiPhi = catalog.get("PsiPhi")
    avoid = [ProjPoint(tuple(p)) for name in ("Phi", "Psi") for p in catalog.definition(name).base_points]
    start = choose_seed(PsiPhi, avoid, ctx.rng(10))
    record = orbit_heights(PsiPhi, start, 5, ctx.settings.log_digits)
    r.expect(record.indeterminate_at is None, f"орбита попала в Ind на шаге {record.indeterminate_at}")
    ratios = record.ratios()
    complete = len(ratios) == 5 and all(x is not None for x in ratios)
    r.expect(complete, f"орбита дала {len(ratios)} отношений вместо 5")
    if complete:
        r.expect(13 <= ratios[-1] <= 19, f"h5/h4 = {mpmath.nstr(ratios[-1], 8)}")
        r.expect(ratio_trend(ratios[2:], HEIGHT_RATE), "отношения h_(n+1)/h_n не приближаются к 16")
    identity = orbit_heights(identity_map(), ProjPoint((2, 3, 7)), 4)
    r.expect(all(x == 1 for x in identity.ratios()), "отношения для тождественного отображения не 1")
    r.details = {"start": list(start.coords),
                 "ratios": [mpmath.nstr(x, 10) if x is not None else None for x in ratios]}


def ratio_trend(ratios: Sequence[Any], target: float) -> bool:
    """Расстояние от отношений до target не растёт."""
    gaps = [abs(x - target) for x in ratios]
    return all(b <= a for a, b in zip(gaps, gaps[1:]))


def check_warmups(ctx: SuiteContext, r: CheckResult) -> None:
    catalog = default_catalog()
    u, v, s, t = poly_ring(("u", "v", "s", "t")).gens
    dilation = induced_on_line_blowup(catalog.get("ex-dilation"))
    r.expect(dilation.uv == (2 * u, v) and dilation.st == (s, t), f"растяжение: {dilation.formula()}")
    r.expect(induced_on_line_blowup(catalog.get("ex-swap")).kind == "curve", "перестановка не стягивает E")

    charts = {}
    for name in ("ex-dilation", "ex-bending", "ex-reflection", "ex-henon"):
        restriction = induced_on_line_blowup(catalog.get(name))
        r.expect(restriction.kind == "surface", f"{name}: E не отображается в E")
        if restriction.kind == "surface":
            charts[name] = restriction.chart()
    if len(charts) == 4:
        U, S = charts["ex-dilation"][0].field.gens
        one = U.field.one
        expected = {
            "ex-dilation": (2 * U, S),
            "ex-bending": (U, one - U ** 2 + S),
            "ex-reflection": (S, U),
            "ex-henon": (one - 4 * U ** 2 + S, 2 * U),
        }
        for name, chart in charts.items():
            r.expect(tuple(chart) == expected[name], f"{name}: карта {chart}")
        r.details = {name: [str(c) for c in chart] for name, chart in charts.items()}


def check_family(ctx: SuiteContext, r: CheckResult) -> None:
    rng = ctx.rng(12)
    g_entry = (reference_m_phi_fiber() @ reference_m_psi_fiber()).rows[0][0]
    N = 3 if ctx.stretch else 2
    rows = []
    for _ in range(3):
        t, _ = random_good_point(rng, bits=ctx.settings.prime_bits)
        family = build_family(t)
        r.expect(family.G.degree == g_entry == 9, f"deg G_t = {family.G.degree} над GF({t.prime})")
        seq = degree_sequence(family.F, N, "modp", seed=ctx.seed, primes=[t.prime, t.prime])
        rows.append({"t": str(t), "prime": t.prime, "degrees": list(seq.values),
                     "ratios": [round(x, 4) for x in seq.ratios()]})
    r.details = {"target_rate": round(FAMILY_RATE, 4), "F_t": rows}


CHECKS: Dict[int, Any] = {
    1: ("Тождества инволюций", check_involutions),
    2: ("Формулы индуцированных отображений", check_formulas),
    3: ("Множества неопределённости", check_indeterminacy),
    4: ("Сужения на исключительные прямые", check_restrictions),
    5: ("Матрицы действий на N^1", check_matrices),
    6: ("Спектральные данные", check_spectral),
    7: ("Степени двумя способами", check_degrees),
    8: ("Разность подтягиваний через флопы", check_flop_difference),
    9: ("Алгебраическая устойчивость", check_stability),
    10: ("Рост высот", check_heights),
    11: ("Разминочные примеры в P^3", check_warmups),
    12: ("Диагностика семейства F_t, G_t", check_family),
}


def run_check(number: int, ctx: SuiteContext) -> CheckResult:
    title, check = CHECKS[number]
    result = CheckResult(number, title)
    console.step(f"Проверка {number}: {title}")
    started = time.perf_counter()
    try:
        check(ctx, result)
    except BidynError as e:
        result.failures.append(f"{type(e).__name__}: {e}")
    elapsed = time.perf_counter() - started
    if result.passed:
        console.ok(f"{number}. {title} ({elapsed:.1f} с)")
    else:
        console.fail(f"{number}. {title}: {'; '.join(result.failures)}")
    return result


def run_suite(numbers: Optional[Sequence[int]] = None, seed: int = 7, tol: float = 0.05,
              stretch: bool = False, settings: Optional[Settings] = None) -> SuiteReport:
    """
    Запускает проверки по порядку номеров.

    Args:
        numbers: Номера проверок (по умолчанию все)
        seed: Единственный источник случайности
        tol: Относительный допуск для D3/D2
        stretch: Включить долгие варианты (точные степени Psi o Phi, n = 3 для F_t)
        settings: Настройки запуска

    Returns:
        SuiteReport; passed - все обязательные проверки прошли
    """
    ctx = SuiteContext(seed, tol, stretch, settings or load_settings())
    checks = [run_check(n, ctx) for n in sorted(set(numbers or ALL_CHECKS))]
    report = SuiteReport(seed, checks)
    passed = sum(1 for c in checks if c.passed)
    console.result(f"Пройдено {passed} из {len(checks)} проверок")
    return report
