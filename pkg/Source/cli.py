"""
Командная строка bidyn.

Каждая подкоманда печатает JSON в stdout; по запросу пишет CSV (--format csv
--out) и SVG (--plot). Прогресс и ошибки идут в stderr через console.

Коды выхода:
    0 - успех
    1 - проверка не прошла (verify-paper)
    2 - ошибка аргументов, разбора или данных
"""

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ValidationError, field_validator, model_validator
from sympy import isprime
from sympy.polys.domains import QQ

import console
from errors import BidynError, MapDefinitionError
from exact_algebra import jordan_profile, total_degree
from fixtures import MapCatalog, MapDefinition
from heights import choose_seed, orbit_heights
from induced_exceptional import (
    INVOLUTIONS,
    SELECTORS,
    assemble_induced,
    derive_point_to_conic,
    inverse_of,
    proportional,
    render_fraction,
)
from ns_lattice import growth_class
from poly_parser import parse_poly, render_poly
from ratmap import (
    ImplicitCurve,
    ProjPoint,
    ProjRatMap,
    compose_chain,
    contracted_curve,
    contraction_analysis,
    degree_sequence,
    indeterminacy_check,
    induced_on_line_blowup,
    induced_on_point_blowup,
    parametrize_conic,
    parametrize_line,
)
from settings import Settings, load_settings
from threefold_family import MATRIX_NAMES, NamedMatrix, build_family, named_matrix, q_flop_difference, random_good_point

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

METHODS = ("exact", "line", "modp")
FORMATS = ("json", "csv")
INDUCED_KINDS = ("point", "line", "conic")

# отображения слоя над случайной хорошей точкой t
FAMILY_MAPS = {"G_t": "G_t", "F_t": "F_t", "psi_t": "psi", "chi_t": "chi"}

MAP_COMMANDS = ("degree-seq", "indet", "contract", "orbit-heights")
MATRIX_COMMANDS = ("spectral", "jordan", "matrix")


def _parse_point(value: Any) -> Optional[Tuple[int, ...]]:
    if value is None or isinstance(value, tuple):
        return value
    try:
        coords = tuple(int(part) for part in str(value).replace(" ", "").split(","))
    except ValueError:
        raise ValueError(f'Точка задаётся целыми через запятую: {value}')
    if not any(coords):
        raise ValueError('Точка не может быть нулевой')
    return coords


class CommandArgs(BaseModel):
    """Проверенные аргументы подкоманды."""

    model_config = {"frozen": True}

    command: str
    map_name: Optional[str] = None
    file: Optional[Path] = None
    iterates: int = 5
    method: str = "exact"
    prime: Optional[int] = None
    seed: int = 7
    out: Optional[Path] = None
    format: str = "json"
    tol: float = 0.05
    plot: Optional[Path] = None
    point: Optional[Tuple[int, ...]] = None
    base: Optional[Tuple[int, ...]] = None
    curve: Optional[str] = None
    kind: str = "point"
    line: Tuple[int, int] = (2, 3)
    eigenvalue: int = 1
    label: str = "h"
    lines: int = 20
    printed: bool = False
    checks: Tuple[int, ...] = ()
    stretch: bool = False

    @field_validator('point', 'base', mode='before')
    @classmethod
    def validate_point(cls, v):
        return _parse_point(v)

    @field_validator('iterates', 'lines')
    @classmethod
    def validate_positive(cls, v):
        if v < 1:
            raise ValueError('Значение должно быть не меньше 1')
        return v

    @field_validator('method')
    @classmethod
    def validate_method(cls, v):
        if v not in METHODS:
            raise ValueError(f'Метод должен быть одним из: {", ".join(METHODS)}')
        return v

    @field_validator('format')
    @classmethod
    def validate_format(cls, v):
        if v not in FORMATS:
            raise ValueError(f'Формат должен быть одним из: {", ".join(FORMATS)}')
        return v

    @field_validator('prime')
    @classmethod
    def validate_prime(cls, v):
        if v is not None and (v < 5 or not isprime(v)):
            raise ValueError(f'{v} не является простым больше 3')
        return v

    @field_validator('tol')
    @classmethod
    def validate_tol(cls, v):
        if not 0 < v < 1:
            raise ValueError('Допуск должен быть в интервале (0, 1)')
        return v

    @field_validator('kind')
    @classmethod
    def validate_kind(cls, v):
        if v not in INDUCED_KINDS:
            raise ValueError(f'Вид раздутия должен быть одним из: {", ".join(INDUCED_KINDS)}')
        return v

    @field_validator('checks')
    @classmethod
    def validate_checks(cls, v):
        for n in v:
            if not 1 <= n <= 12:
                raise ValueError(f'Проверки нумеруются от 1 до 12, получено {n}')
        return tuple(sorted(set(v)))

    @model_validator(mode='after')
    def validate_sources(self):
        if self.map_name and self.file:
            raise ValueError('Нужно одно из --map и --file')
        needs_map = self.command in MAP_COMMANDS + MATRIX_COMMANDS or self.command == "induced"
        if needs_map and not (self.map_name or self.file):
            raise ValueError(f'Подкоманде {self.command} нужен --map или --file')
        if self.command in MATRIX_COMMANDS and self.file:
            raise ValueError('Матрицы выбираются только по имени (--map)')
        if self.format == "csv" and self.out is None:
            raise ValueError('Для --format csv нужен --out')
        return self


@dataclass
class CommandResult:
    """Результат подкоманды: JSON, необязательные CSV и ряд для графика."""
    payload: Dict[str, Any]
    exit_code: int = EXIT_OK
    csv_text: Optional[str] = None
    series: Optional[Tuple[str, List[float]]] = None


def _csv(columns: Sequence[str], rows: Sequence[Dict[str, Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buffer.getvalue()


def write_plot(path: Path, values: Sequence[float], ylabel: str, title: str, start: int = 1) -> None:
    """SVG-ломаная ряда значений (только запись)."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(range(start, start + len(values)), values, marker="o")
    ax.set_xlabel("n")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.savefig(path, format="svg", bbox_inches="tight")
    plt.close(fig)


# ---------------------------------------------------------------------------
# Источники данных
# ---------------------------------------------------------------------------

def resolve_map(args: CommandArgs, settings: Settings, catalog: MapCatalog) -> ProjRatMap:
    """
    Отображение из --file, из семейства (G_t, F_t, psi_t, chi_t) или из каталога.

    Raises:
        MapDefinitionError: файл не согласуется с заявленными данными
    """
    if args.file is not None:
        definition = MapDefinition.load(args.file)
        if definition.coords is None:
            f = compose_chain([catalog.get(n) for n in definition.compose], definition.name)
        else:
            f = definition.build_coords()
        problems = catalog.cross_check(definition, f)
        if problems:
            raise MapDefinitionError(f"Заявленные данные {definition.name} не совпадают с вычисленными", problems)
        return f
    if args.map_name in FAMILY_MAPS:
        t, _ = random_good_point(np.random.default_rng(args.seed), prime=args.prime, bits=settings.prime_bits)
        return build_family(t).get(FAMILY_MAPS[args.map_name])
    return catalog.get(args.map_name)


def declared_base_points(args: CommandArgs, catalog: MapCatalog) -> List[ProjPoint]:
    if args.file is not None:
        definition = MapDefinition.load(args.file)
    elif args.map_name in catalog.names():
        definition = catalog.definition(args.map_name)
    else:
        return []
    return [ProjPoint(tuple(P)) for P in definition.base_points]


def resolve_matrix(args: CommandArgs, settings: Settings) -> NamedMatrix:
    if args.map_name not in MATRIX_NAMES:
        raise BidynError(f"Неизвестная матрица '{args.map_name}', доступны: {', '.join(MATRIX_NAMES)}")
    return named_matrix(args.map_name, args.seed, args.printed, args.prime, settings.prime_bits)


# ---------------------------------------------------------------------------
# Подкоманды
# ---------------------------------------------------------------------------

def cmd_degree_seq(args: CommandArgs, settings: Settings, catalog: MapCatalog) -> CommandResult:
    f = resolve_map(args, settings, catalog)
    primes = [args.prime] if args.prime else None
    seq = degree_sequence(f, args.iterates, args.method, seed=args.seed,
                          prime_bits=settings.prime_bits, primes=primes)
    console.result(f"deg {f.name}^n: {list(seq.values)}")
    rows = [{"n": n, "degree": d} for n, d in enumerate(seq.values, start=1)]
    payload = {"map": f.name, **seq.to_dict(), "ratios": [round(r, 6) for r in seq.ratios()]}
    return CommandResult(payload, csv_text=_csv(("n", "degree"), rows),
                         series=("log deg", [math.log(d) for d in seq.values]))


def cmd_spectral(args: CommandArgs, settings: Settings, catalog: MapCatalog) -> CommandResult:
    named = resolve_matrix(args, settings)
    growth = growth_class(named.matrix)
    if growth.kind == "exponential":
        radius = growth.rate.decimal() if growth.rate else repr(growth.rate_float)
        exact = bool(growth.rate and growth.rate.exact)
    else:
        radius, exact = "1", True
    console.result(f"Спектральный радиус {named.name}: {radius}")
    payload = {
        "matrix": named.name,
        "source": named.source,
        "spectral_radius": radius,
        "exact": exact,
        "growth": growth.to_dict(),
        "charpoly": render_poly(growth.charpoly),
        "certified": named.certified,
    }
    return CommandResult(payload)


def cmd_jordan(args: CommandArgs, settings: Settings, catalog: MapCatalog) -> CommandResult:
    named = resolve_matrix(args, settings)
    profile = jordan_profile(named.matrix, QQ(args.eigenvalue))
    console.result(f"{named.name}: наибольшая клетка для {args.eigenvalue} - {profile.largest_block}")
    payload = {
        "matrix": named.name,
        "source": named.source,
        "eigenvalue": args.eigenvalue,
        "ranks": list(profile.ranks),
        "largest_block": profile.largest_block,
        "algebraic_multiplicity": profile.algebraic_multiplicity,
    }
    return CommandResult(payload)


def cmd_matrix(args: CommandArgs, settings: Settings, catalog: MapCatalog) -> CommandResult:
    named = resolve_matrix(args, settings)
    basis = list(named.matrix.basis or [f"v{k}" for k in range(named.matrix.ncols)])
    rows = [dict(row=label, **dict(zip(basis, r))) for label, r in zip(basis, named.matrix.rows)]
    return CommandResult(named.to_dict(), csv_text=_csv(["row"] + basis, rows))


def cmd_indet(args: CommandArgs, settings: Settings, catalog: MapCatalog) -> CommandResult:
    f = resolve_map(args, settings, catalog)
    candidates = declared_base_points(args, catalog)
    if args.point and ProjPoint(args.point) not in candidates:
        candidates.append(ProjPoint(args.point))
    report = indeterminacy_check(f, candidates, lines=args.lines, seed=args.seed)
    payload = {"map": f.name, **report.to_dict(), "complete": report.complete}
    rows = [{"point": " ".join(str(c) for c in P.coords), "indeterminate": P in report.confirmed}
            for P in candidates]
    return CommandResult(payload, csv_text=_csv(("point", "indeterminate"), rows))


def cmd_contract(args: CommandArgs, settings: Settings, catalog: MapCatalog) -> CommandResult:
    f = resolve_map(args, settings, catalog)
    if args.curve:
        F = parse_poly(args.curve, R=f.ring)
        d = total_degree(F)
        if d == 1:
            curve = parametrize_line(F, args.curve)
        elif d == 2 and args.base:
            curve = parametrize_conic(F, args.base, args.curve)
        else:
            curve = ImplicitCurve(F, args.curve)
        result = contraction_analysis(f, curve, seed=args.seed, prime=args.prime)
        verdict = f"в точку {result.image}" if result.contracted else "не стягивается"
        console.result(f"{f.name}: кривая {args.curve} {verdict}")
        return CommandResult({"map": f.name, "curve": args.curve, **result.to_dict()})
    if args.point:
        C = contracted_curve(f, ProjPoint(args.point))
        console.result(f"{f.name} стягивает в {ProjPoint(args.point)} кривую степени {total_degree(C)}")
        return CommandResult({"map": f.name, "point": list(args.point),
                              "curve": render_poly(C), "degree": total_degree(C)})
    raise BidynError("Нужна кривая (--curve) или точка образа (--point)")


def _induced_conic(args: CommandArgs, catalog: MapCatalog) -> Dict[str, Any]:
    name = args.map_name
    if name in INVOLUTIONS:
        forward = derive_point_to_conic(name)
        conic_part, fiber_part = forward.projectivize()
        return {
            "map": name,
            "chart": forward.chart.to_dict(),
            "forward": forward.to_dict(),
            "inverse": inverse_of(name).to_dict(),
            "projective": {"conic": str(conic_part), "fiber": str(fiber_part)},
        }
    if name in SELECTORS:
        F = assemble_induced(name)
        data = {"map": name, "degree": F.degree, "coords": [render_poly(c) for c in F.coords]}
        if name in catalog.names():
            data["matches_catalog"] = proportional(F, catalog.get(name))
        return data
    raise BidynError(f"Для --kind conic нужен один из: {', '.join(INVOLUTIONS + SELECTORS)}")


def cmd_induced(args: CommandArgs, settings: Settings, catalog: MapCatalog) -> CommandResult:
    if args.kind == "conic":
        return CommandResult(_induced_conic(args, catalog))
    f = resolve_map(args, settings, catalog)
    if args.kind == "point":
        if not args.point:
            raise BidynError("Для --kind point нужна точка (--point)")
        restriction = induced_on_point_blowup(f, ProjPoint(args.point))
        console.result(f"{f.name} на E_{ProjPoint(args.point)}: {restriction.formula()}")
        return CommandResult({"map": f.name, **restriction.to_dict()})
    restriction = induced_on_line_blowup(f, args.line)
    payload = {"map": f.name, **restriction.to_dict()}
    if restriction.kind == "surface":
        payload["chart"] = [render_fraction(c) for c in restriction.chart()]
    return CommandResult(payload)


def cmd_flop_diff(args: CommandArgs, settings: Settings, catalog: MapCatalog) -> CommandResult:
    result = q_flop_difference(args.label, args.seed)
    return CommandResult({"label": args.label, "exact": result.exact, **result.to_dict()})


def cmd_orbit_heights(args: CommandArgs, settings: Settings, catalog: MapCatalog) -> CommandResult:
    f = resolve_map(args, settings, catalog)
    if args.point:
        start = ProjPoint(args.point)
    else:
        start = choose_seed(f, declared_base_points(args, catalog), np.random.default_rng(args.seed))
    record = orbit_heights(f, start, args.iterates, settings.log_digits)
    return CommandResult(record.to_dict(), csv_text=record.to_csv(),
                         series=("h(P_n)", [float(h) for h in record.heights]))


def cmd_verify_paper(args: CommandArgs, settings: Settings, catalog: MapCatalog) -> CommandResult:
    from verify import run_suite
    report = run_suite(args.checks or None, seed=args.seed, tol=args.tol,
                       stretch=args.stretch, settings=settings)
    rows = [{"check": c.number, "status": c.status, "title": c.title} for c in report.checks]
    return CommandResult(report.to_dict(), EXIT_OK if report.passed else EXIT_FAILED,
                         csv_text=_csv(("check", "status", "title"), rows))


COMMANDS: Dict[str, Tuple[Callable[..., CommandResult], str]] = {
    "degree-seq": (cmd_degree_seq, "степени итераций"),
    "spectral": (cmd_spectral, "спектральный радиус и класс роста матрицы"),
    "jordan": (cmd_jordan, "жордановы клетки для собственного значения"),
    "matrix": (cmd_matrix, "матрица прямого образа на модели"),
    "indet": (cmd_indet, "точки неопределённости и проба полноты"),
    "contract": (cmd_contract, "стягиваемые кривые"),
    "induced": (cmd_induced, "индуцированные отображения на исключительных дивизорах"),
    "flop-diff": (cmd_flop_diff, "разность подтягиваний через флопы"),
    "orbit-heights": (cmd_orbit_heights, "рост высот вдоль орбиты"),
    "verify-paper": (cmd_verify_paper, "набор проверок воспроизведения"),
}


# ---------------------------------------------------------------------------
# Разбор аргументов и запуск
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    source = common.add_mutually_exclusive_group()
    source.add_argument("--map", dest="map_name", help="имя отображения или матрицы")
    source.add_argument("--file", type=Path, help="JSON-описание отображения")
    common.add_argument("-n", "--iterates", type=int, default=5, help="число итераций")
    common.add_argument("--method", default="exact", help="exact | line | modp")
    common.add_argument("--prime", type=int, help="простое поле")
    common.add_argument("--seed", type=int, help="зерно (по умолчанию BIDYN_SEED)")
    common.add_argument("--out", type=Path, help="файл для CSV или копии JSON")
    common.add_argument("--format", default="json", help="json | csv")
    common.add_argument("--tol", type=float, default=0.05, help="относительный допуск")
    common.add_argument("--plot", type=Path, help="SVG-график ряда")
    common.add_argument("-q", "--quiet", action="store_true", help="без прогресса в stderr")

    parser = argparse.ArgumentParser(prog="bidyn", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    parsers = {name: sub.add_parser(name, parents=[common], help=text)
               for name, (_, text) in COMMANDS.items()}

    for name in MATRIX_COMMANDS:
        parsers[name].add_argument("--printed", action="store_true", help="эталонная матрица вместо вычисления")
    parsers["jordan"].add_argument("--eigenvalue", type=int, default=1)
    parsers["indet"].add_argument("--point", help="дополнительный кандидат x,y,z")
    parsers["indet"].add_argument("--lines", type=int, default=20, help="число случайных прямых")
    parsers["contract"].add_argument("--curve", help="уравнение кривой")
    parsers["contract"].add_argument("--base", help="рациональная точка коники x,y,z")
    parsers["contract"].add_argument("--point", help="точка образа x,y,z")
    parsers["induced"].add_argument("--kind", default="point", help="point | line | conic")
    parsers["induced"].add_argument("--point", help="центр раздутия x,y,z")
    parsers["induced"].add_argument("--line", type=int, nargs=2, default=(2, 3), help="индексы i j прямой")
    parsers["flop-diff"].add_argument("--label", default="h", help="класс базиса слоя")
    parsers["orbit-heights"].add_argument("--point", help="стартовая точка x,y,z")
    parsers["verify-paper"].add_argument("--all", action="store_true", help="все проверки (по умолчанию)")
    parsers["verify-paper"].add_argument("--check", dest="checks", type=int, action="append", default=[],
                                         help="номер проверки (можно повторять)")
    parsers["verify-paper"].add_argument("--stretch", action="store_true", help="включить долгие варианты")
    return parser


def emit(result: CommandResult, args: CommandArgs) -> None:
    text = json.dumps(result.payload, ensure_ascii=False, indent=2, default=str)
    print(text)
    if args.out is not None:
        if args.format == "csv":
            if result.csv_text is None:
                raise BidynError(f"Подкоманда {args.command} не выдаёт CSV")
            args.out.write_text(result.csv_text, encoding="utf-8")
        else:
            args.out.write_text(text + "\n", encoding="utf-8")
        console.ok(f"Записано: {args.out}")
    if args.plot is not None:
        if result.series is None:
            raise BidynError(f"Подкоманда {args.command} не строит график")
        ylabel, values = result.series
        start = 0 if args.command == "orbit-heights" else 1
        write_plot(args.plot, values, ylabel, result.payload.get("map", args.command), start)
        console.ok(f"График: {args.plot}")


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Разбирает argv, выполняет подкоманду и возвращает код выхода.
    """
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    values = {k: v for k, v in vars(ns).items() if v is not None}
    quiet = values.pop("quiet", False)
    values.pop("all", None)
    try:
        settings = load_settings(seed=values.get("seed"))
        values["seed"] = settings.seed
        args = CommandArgs(**values)
    except ValidationError as e:
        for err in e.errors():
            console.fail(f"{'.'.join(str(x) for x in err['loc']) or 'аргументы'}: {err['msg']}")
        return EXIT_USAGE
    console.set_verbose(settings.verbose and not quiet)

    handler, _ = COMMANDS[args.command]
    try:
        result = handler(args, settings, MapCatalog(settings.fixtures_dir))
        emit(result, args)
    except MapDefinitionError as e:
        console.fail(str(e))
        for problem in e.problems:
            console.fail(problem)
        return EXIT_USAGE
    except BidynError as e:
        console.fail(str(e))
        return EXIT_USAGE
    return result.exit_code
