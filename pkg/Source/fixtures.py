"""
Каталог отображений: JSON-описания из Data/maps и их проверка при загрузке.

Формат файла:
    {name, variables: [...], coords: [...] | compose: [имена в порядке применения],
     inverse?: имя, base_points?: [[целые]], near?: [{parent, direction}]}
"""

import json
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional

from pydantic import BaseModel, ValidationError, field_validator, model_validator

import console
from errors import MapDefinitionError, ParseError
from exact_algebra import evaluate_at, poly_ring
from poly_parser import parse_poly
from ratmap import (
    ProjPoint,
    ProjRatMap,
    compose,
    compose_chain,
    is_identity,
    is_indeterminate,
    normalize,
)
from settings import fixtures_dir


class NearPoint(BaseModel):
    """Бесконечно близкая точка: родитель и касательная прямая через него."""

    parent: List[int]
    direction: str


class MapDefinition(BaseModel):
    """Описание отображения в файле каталога."""

    name: str
    variables: List[str]
    description: str = ""
    coords: Optional[List[str]] = None
    compose: Optional[List[str]] = None
    inverse: Optional[str] = None
    base_points: List[List[int]] = []
    near: List[NearPoint] = []

    @field_validator('variables')
    @classmethod
    def validate_variables(cls, v):
        if len(v) < 2 or len(set(v)) != len(v):
            raise ValueError('Нужно не меньше двух различных переменных')
        return v

    @field_validator('base_points')
    @classmethod
    def validate_base_points(cls, v):
        for P in v:
            if not any(P):
                raise ValueError('Базисная точка не может быть нулевой')
        return v

    @model_validator(mode='after')
    def validate_body(self):
        if (self.coords is None) == (self.compose is None):
            raise ValueError('Нужно ровно одно из полей coords и compose')
        if self.coords is not None and len(self.coords) != len(self.variables):
            raise ValueError('Число координат должно совпадать с числом переменных')
        return self

    @classmethod
    def load(cls, path: Path) -> "MapDefinition":
        """Читает и валидирует JSON-файл."""
        try:
            with open(path, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise ParseError(f"Некорректный JSON в {path.name}: {e.msg}", e.lineno, e.colno)
        try:
            return cls(**data)
        except ValidationError as e:
            problems = [f"{'.'.join(str(x) for x in err['loc'])}: {err['msg']}" for err in e.errors()]
            raise MapDefinitionError(f"Описание {path.name} не прошло проверку", problems)

    def build_coords(self) -> ProjRatMap:
        """Разбирает координаты и нормализует отображение."""
        R = poly_ring(tuple(self.variables))
        polys = []
        for k, text in enumerate(self.coords):
            try:
                polys.append(parse_poly(text, R=R))
            except ParseError as e:
                raise ParseError(f"{self.name}, координата {k + 1}: {e.args[0]}", e.line, e.column)
        return normalize(polys, self.name)


class MapCatalog:
    """
    Каталог отображений с ленивой загрузкой и кэшем.

    Args:
        directory: Каталог с JSON-файлами (по умолчанию из настроек)
        check: Проверять ли заявленные данные при загрузке
    """

    def __init__(self, directory: Optional[Path] = None, check: bool = True):
        self.directory = Path(directory) if directory else fixtures_dir()
        self.check = check
        self._maps: Dict[str, ProjRatMap] = {}

    def names(self) -> List[str]:
        return sorted(p.stem for p in self.directory.glob("*.json"))

    def definition(self, name: str) -> MapDefinition:
        path = self.directory / f"{name}.json"
        if not path.exists():
            raise MapDefinitionError(f"Отображение '{name}' не найдено в {self.directory}",
                                     [f"доступны: {', '.join(self.names())}"])
        return MapDefinition.load(path)

    def get(self, name: str) -> ProjRatMap:
        """Отображение по имени (с проверкой заявленных данных)."""
        if name not in self._maps:
            definition = self.definition(name)
            console.info(f"Загрузка {name}")
            if definition.coords is not None:
                f = definition.build_coords()
            else:
                f = compose_chain([self.get(n) for n in definition.compose], name)
            if self.check:
                self._maps[name] = f
                problems = self.cross_check(definition, f)
                if problems:
                    del self._maps[name]
                    raise MapDefinitionError(f"Заявленные данные {name} не совпадают с вычисленными", problems)
            self._maps[name] = f
        return self._maps[name]

    def cross_check(self, definition: MapDefinition, f: ProjRatMap) -> List[str]:
        """Сверяет заявленные обратное, базисные и бесконечно близкие точки."""
        problems = []
        declared = [ProjPoint(tuple(P)) for P in definition.base_points]
        for P in declared:
            if not is_indeterminate(f, P):
                problems.append(f"точка {P} объявлена базисной, но f в ней определено")
        for near in definition.near:
            parent = ProjPoint(tuple(near.parent))
            if parent not in declared:
                problems.append(f"родитель {parent} не объявлен базисной точкой")
            line = parse_poly(near.direction, R=f.ring)
            if evaluate_at(line, parent.coords):
                problems.append(f"прямая {near.direction} не проходит через {parent}")
        if definition.inverse:
            inverse = f if definition.inverse == definition.name else self.get(definition.inverse)
            if not is_identity(compose(f, inverse)):
                problems.append(f"{definition.inverse} не является обратным к {definition.name}")
        if problems:
            for p in problems:
                console.fail(p)
        else:
            console.ok(f"{definition.name}: заявленные данные подтверждены")
        return problems


@lru_cache(maxsize=4)
def default_catalog(directory: Optional[str] = None) -> MapCatalog:
    return MapCatalog(Path(directory) if directory else None)
