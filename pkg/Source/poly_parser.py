"""
Язык записи многочленов.

Грамматика:
    expr   := [sign] term (('+' | '-') term)*
    term   := factor ('*' factor)*
    factor := base ('^' uint)?
    base   := int | var | '(' expr ')'

Неявное умножение не допускается, литералы только целые (любой длины).
Позиции ошибок считаются с 1.
"""

import re
from dataclasses import dataclass
from typing import List, Optional, Sequence

from sympy.polys.domains import QQ
from sympy.polys.rings import PolyElement, PolyRing

from errors import ParseError, UnknownVariableError
from exact_algebra import is_prime_field, poly_ring

DEFAULT_VARIABLES = ("x", "y", "z")

_TOKEN_RE = re.compile(r"\s*(?:(\d+(?:\.\d*)?)|([A-Za-z_][A-Za-z0-9_]*)|(.))")


@dataclass(frozen=True)
class Token:
    kind: str      # int, var, op, end
    text: str
    line: int
    column: int


def tokenize(text: str) -> List[Token]:
    """Разбивает текст на токены, запоминая строку и столбец."""
    tokens: List[Token] = []
    line, line_start = 1, 0
    pos = 0
    while pos < len(text):
        ch = text[pos]
        if ch == "\n":
            line += 1
            pos += 1
            line_start = pos
            continue
        if ch.isspace():
            pos += 1
            continue
        column = pos - line_start + 1
        match = _TOKEN_RE.match(text, pos)
        number, name, other = match.groups()
        if number is not None:
            if "." in number:
                raise ParseError(f"Нецелый литерал '{number}'", line, column)
            tokens.append(Token("int", number, line, column))
        elif name is not None:
            tokens.append(Token("var", name, line, column))
        elif other in "+-*^()":
            tokens.append(Token("op", other, line, column))
        else:
            raise ParseError(f"Недопустимый символ '{other}'", line, column)
        pos = match.end()
    tokens.append(Token("end", "", line, len(text) - line_start + 1))
    return tokens


class _Parser:
    """Рекурсивный спуск по токенам."""

    def __init__(self, tokens: List[Token], R: PolyRing):
        self.tokens = tokens
        self.pos = 0
        self.R = R
        self.names = [str(s) for s in R.symbols]

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def _error(self, message: str) -> ParseError:
        tok = self.current
        found = "конец ввода" if tok.kind == "end" else f"'{tok.text}'"
        return ParseError(f"{message}, найдено {found}", tok.line, tok.column)

    def _accept(self, op: str) -> bool:
        tok = self.current
        if tok.kind == "op" and tok.text == op:
            self.pos += 1
            return True
        return False

    def parse(self) -> PolyElement:
        value = self.expr()
        if self.current.kind != "end":
            raise self._error("Ожидался оператор")
        return value

    def expr(self) -> PolyElement:
        negative = False
        if self._accept("-"):
            negative = True
        else:
            self._accept("+")
        value = self.term()
        if negative:
            value = -value
        while True:
            if self._accept("+"):
                value = value + self.term()
            elif self._accept("-"):
                value = value - self.term()
            else:
                return value

    def term(self) -> PolyElement:
        value = self.factor()
        while self._accept("*"):
            value = value * self.factor()
        return value

    def factor(self) -> PolyElement:
        value = self.base()
        if self._accept("^"):
            tok = self.current
            if tok.kind != "int":
                raise self._error("Ожидался целый показатель")
            self.pos += 1
            value = value ** int(tok.text)
        return value

    def base(self) -> PolyElement:
        tok = self.current
        if tok.kind == "int":
            self.pos += 1
            return self.R.ground_new(self.R.domain.convert(int(tok.text)))
        if tok.kind == "var":
            if tok.text not in self.names:
                raise UnknownVariableError(
                    f"Неизвестная переменная '{tok.text}' (объявлены: {', '.join(self.names)})",
                    tok.line, tok.column)
            self.pos += 1
            return self.R.gens[self.names.index(tok.text)]
        if self._accept("("):
            value = self.expr()
            if not self._accept(")"):
                raise self._error("Ожидалась ')'")
            return value
        raise self._error("Ожидалось число, переменная или '('")


def parse_poly(text: str, variables: Sequence[str] = DEFAULT_VARIABLES,
               domain=QQ, R: Optional[PolyRing] = None) -> PolyElement:
    """
    Разбирает многочлен из текста.

    Args:
        text: Запись многочлена, например "5*x^3 - x*y^2 + 8*x^2*z"
        variables: Объявленные переменные (порядок задаёт кольцо)
        domain: Область коэффициентов
        R: Готовое кольцо (тогда variables и domain не используются)

    Returns:
        Многочлен

    Raises:
        ParseError: синтаксическая ошибка или нецелый литерал
        UnknownVariableError: переменная не объявлена
    """
    if R is None:
        R = poly_ring(tuple(variables), domain)
    return _Parser(tokenize(text), R).parse()


def _render_coeff(c, domain) -> int:
    if is_prime_field(domain):
        return domain.to_int(c)
    if QQ.denom(QQ.convert(c)) != 1:
        raise ValueError(f"Рациональный коэффициент {c} не выражается в грамматике")
    return int(QQ.convert(c))


def render_poly(f: PolyElement) -> str:
    """
    Каноническая запись многочлена (grlex, убывание), обратная к parse_poly.
    Коэффициенты обязаны быть целыми.
    """
    if not f:
        return "0"
    names = [str(s) for s in f.ring.symbols]
    parts = []
    for monom, coeff in f.terms():
        c = _render_coeff(coeff, f.ring.domain)
        factors = []
        for name, e in zip(names, monom):
            if e == 1:
                factors.append(name)
            elif e > 1:
                factors.append(f"{name}^{e}")
        body = "*".join(factors)
        magnitude = abs(c)
        if not body:
            text = str(magnitude)
        elif magnitude == 1:
            text = body
        else:
            text = f"{magnitude}*{body}"
        if not parts:
            parts.append(f"-{text}" if c < 0 else text)
        else:
            parts.append(f"- {text}" if c < 0 else f"+ {text}")
    return " ".join(parts)
