"""Exact integer polynomials in the unknowns ``x1 ... xK``.

Polynomials are parsed from a small infix grammar::

    expr   := term (('+' | '-') term)*
    term   := unary ('*' unary)*
    unary  := ('+' | '-') unary | power
    power  := atom ('^' INTEGER)?
    atom   := INTEGER | VARIABLE | '(' expr ')'

``VARIABLE`` is ``x`` followed by a positive decimal index. Implicit
multiplication (``2x1``, ``x1(x2+1)``) is rejected.

>>> p = parse("(x1+1)^2 - 2*(x2+1)^2")
>>> str(p)
'x1^2 - 2*x2^2 + 2*x1 - 4*x2 - 1'
>>> evaluate(p, (0, 0))
-1
"""

from __future__ import annotations

import itertools
import re
from collections.abc import Iterable, Mapping
from dataclasses import dataclass

__all__ = [
    "ParseError",
    "Polynomial",
    "evaluate",
    "parse",
    "search_box",
]


class ParseError(ValueError):
    """Malformed polynomial source text."""

    def __init__(self, source: str, position: int, expected: str):
        self.source = source
        self.position = max(0, min(position, len(source)))
        self.expected = expected
        where = "end of input" if self.position == len(source) else f"position {self.position}"
        super().__init__(
            f"expected {expected} at {where}\n  {source}\n  {' ' * self.position}^"
        )


@dataclass(frozen=True)
class _Token:
    kind: str  # 'int', 'var', 'op', 'end'
    text: str
    pos: int
    value: int = 0


_TOKEN_RE = re.compile(r"(\d+)|x(\d+)|([-+*^()])")


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    pos = 0
    while True:
        while pos < len(source) and source[pos].isspace():
            pos += 1
        if pos == len(source):
            break
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError(source, pos, "integer, variable x<k>, operator or parenthesis")
        start = pos
        if m.group(1) is not None:
            tokens.append(_Token("int", m.group(1), start, int(m.group(1))))
        elif m.group(2) is not None:
            index = int(m.group(2))
            if index < 1:
                raise ParseError(source, start, "variable index >= 1")
            tokens.append(_Token("var", m.group(0).strip(), start, index))
        else:
            tokens.append(_Token("op", m.group(3), start))
        pos = m.end()
    tokens.append(_Token("end", "", len(source)))
    return tokens


class Polynomial:
    """Multivariate polynomial with integer coefficients.

    ``terms`` maps exponent tuples of length ``arity`` to non-zero integer
    coefficients. Instances are immutable and hashable; arithmetic uses
    Python integers, so evaluation never overflows.
    """

    __slots__ = ("_terms", "_arity")

    def __init__(self, terms: Mapping[tuple[int, ...], int], arity: int):
        if arity < 0:
            raise ValueError("arity must be non-negative")
        clean = {}
        for exps, coeff in terms.items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != arity:
                raise ValueError(f"exponent vector {exps} does not have length {arity}")
            if any(e < 0 for e in exps):
                raise ValueError(f"negative exponent in {exps}")
            if not isinstance(coeff, int):
                raise TypeError("coefficients must be Python integers")
            coeff = clean.get(exps, 0) + coeff
            if coeff:
                clean[exps] = coeff
            else:
                clean.pop(exps, None)
        self._terms = dict(sorted(clean.items(), key=_grlex_key))
        self._arity = arity

    @property
    def terms(self) -> dict[tuple[int, ...], int]:
        return dict(self._terms)

    @property
    def arity(self) -> int:
        return self._arity

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self._terms), default=0)

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self._terms)

    def with_arity(self, arity: int) -> Polynomial:
        """Pad exponent vectors with trailing unused unknowns."""
        if arity < self._arity:
            used = max((i + 1 for e in self._terms for i, k in enumerate(e) if k), default=0)
            if arity < used:
                raise ValueError(f"polynomial uses x{used}; cannot shrink arity to {arity}")
            return Polynomial({e[:arity]: c for e, c in self._terms.items()}, arity)
        pad = (0,) * (arity - self._arity)
        return Polynomial({e + pad: c for e, c in self._terms.items()}, arity)

    def __call__(self, *point: int) -> int:
        return evaluate(self, point)

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self._arity == other._arity and self._terms == other._terms

    def __hash__(self):
        return hash((self._arity, tuple(self._terms.items())))

    def __repr__(self):
        return f"Polynomial({str(self)!r}, arity={self._arity})"

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for i, (exps, coeff) in enumerate(self._terms.items()):
            mono = "*".join(
                f"x{k + 1}" if e == 1 else f"x{k + 1}^{e}" for k, e in enumerate(exps) if e
            )
            mag = abs(coeff)
            if not mono:
                body = str(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{mag}*{mono}"
            if i == 0:
                parts.append(body if coeff > 0 else f"-{body}")
            else:
                parts.append(f"+ {body}" if coeff > 0 else f"- {body}")
        return " ".join(parts)


def _grlex_key(item):
    exps = item[0]
    return (-sum(exps), tuple(-e for e in exps))


# Sparse dict arithmetic used while parsing.

def _add(p, q, sign=1):
    out = dict(p)
    for e, c in q.items():
        v = out.get(e, 0) + sign * c
        if v:
            out[e] = v
        else:
            out.pop(e, None)
    return out


def _mul(p, q):
    out = {}
    for e1, c1 in p.items():
        for e2, c2 in q.items():
            e = tuple(a + b for a, b in zip(e1, e2))
            v = out.get(e, 0) + c1 * c2
            if v:
                out[e] = v
            else:
                out.pop(e, None)
    return out


def _pow(p, n, arity):
    result = {(0,) * arity: 1}
    base = p
    while n:
        if n & 1:
            result = _mul(result, base)
        n >>= 1
        if n:
            base = _mul(base, base)
    return result


class _Parser:
    def __init__(self, source: str, arity: int):
        self.source = source
        self.tokens = _tokenize(source)
        self.i = 0
        self.arity = arity

    @property
    def tok(self):
        return self.tokens[self.i]

    def fail(self, expected):
        raise ParseError(self.source, self.tok.pos, expected)

    def accept(self, op):
        if self.tok.kind == "op" and self.tok.text == op:
            self.i += 1
            return True
        return False

    def parse(self):
        result = self.expr()
        if self.tok.kind != "end":
            self.fail("operator '+', '-', '*', '^' or end of input")
        return result

    def expr(self):
        acc = self.term()
        while True:
            if self.accept("+"):
                acc = _add(acc, self.term())
            elif self.accept("-"):
                acc = _add(acc, self.term(), -1)
            else:
                return acc

    def term(self):
        acc = self.unary()
        while self.accept("*"):
            acc = _mul(acc, self.unary())
        return acc

    def unary(self):
        if self.accept("-"):
            return {e: -c for e, c in self.unary().items()}
        if self.accept("+"):
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.accept("^"):
            if self.tok.kind != "int":
                self.fail("non-negative integer exponent")
            n = self.tok.value
            self.i += 1
            return _pow(base, n, self.arity)
        return base

    def atom(self):
        tok = self.tok
        zero = (0,) * self.arity
        if tok.kind == "int":
            self.i += 1
            return {zero: tok.value} if tok.value else {}
        if tok.kind == "var":
            self.i += 1
            exps = list(zero)
            exps[tok.value - 1] = 1
            return {tuple(exps): 1}
        if self.accept("("):
            inner = self.expr()
            if not self.accept(")"):
                self.fail("')'")
            return inner
        self.fail("integer, variable or '('")


def parse(source: str, arity: int | None = None) -> Polynomial:
    """Parse ``source`` into a :class:`Polynomial`.

    The arity defaults to the highest variable index mentioned; pass a larger
    ``arity`` to include unused trailing unknowns.
    """
    highest = max((t.value for t in _tokenize(source) if t.kind == "var"), default=0)
    if arity is None:
        arity = highest
    elif arity < highest:
        raise ValueError(f"source mentions x{highest} but arity={arity}")
    terms = _Parser(source, arity).parse()
    return Polynomial(terms, arity)


def evaluate(p: Polynomial, point: Iterable[int]) -> int:
    """Exact value of ``p`` at an integer point."""
    point = tuple(point)
    if len(point) != p.arity:
        raise ValueError(f"point has {len(point)} coordinates, polynomial has arity {p.arity}")
    total = 0
    for exps, coeff in p._terms.items():
        term = coeff
        for x, e in zip(point, exps):
            if e:
                term *= int(x) ** e
        total += term
    return total


def search_box(p: Polynomial, bound: int) -> tuple[int, ...] | None:
    """Lexicographically smallest zero of ``p`` in ``[0, bound]^K``, or None."""
    if bound < 0:
        raise ValueError("bound must be non-negative")
    for point in itertools.product(range(bound + 1), repeat=p.arity):
        if evaluate(p, point) == 0:
            return point
    return None
