"""Exact rational linear combinations of canonical overlap graphs."""

from __future__ import annotations

import json
import re
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Iterator, Mapping

from .errors import DomainError, GraphParseError
from .graph import EMPTY, GeneralizedGraph, canonicalize, parse, render

Coefficient = Fraction | int


class Polynomial:
    """Sparse map from canonical graphs to nonzero :class:`~fractions.Fraction` coefficients.

    Keys are canonicalized on the way in, so two polynomials that differ only
    by relabeling of replica indices compare equal.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[GeneralizedGraph, Coefficient] | None = None):
        acc: dict[GeneralizedGraph, Fraction] = {}
        for g, c in (terms or {}).items():
            key = canonicalize(g).graph
            acc[key] = acc.get(key, Fraction(0)) + Fraction(c)
        self._terms = {g: c for g, c in acc.items() if c != 0}

    @classmethod
    def _from_canonical(cls, terms: dict[GeneralizedGraph, Fraction]) -> "Polynomial":
        p = cls.__new__(cls)
        p._terms = {g: c for g, c in terms.items() if c != 0}
        return p

    @classmethod
    def monomial(cls, g: GeneralizedGraph | str, coeff: Coefficient = 1) -> "Polynomial":
        if isinstance(g, str):
            g = parse(g)
        return cls({g: coeff})

    @classmethod
    def one(cls) -> "Polynomial":
        return cls({EMPTY: 1})

    @classmethod
    def zero(cls) -> "Polynomial":
        return cls()

    @classmethod
    def parse(cls, text: str) -> "Polynomial":
        """Read ``"(1,2)^2 - 4(1,2)(2,3) + 3/2(1,2)(3,4)"``; a bare number is a constant."""
        return parse_polynomial(text)

    # -- mapping protocol -------------------------------------------------
    @property
    def terms(self) -> dict[GeneralizedGraph, Fraction]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __iter__(self) -> Iterator[GeneralizedGraph]:
        return iter(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def coefficient(self, g: GeneralizedGraph | str) -> Fraction:
        if isinstance(g, str):
            g = parse(g)
        return self._terms.get(canonicalize(g).graph, Fraction(0))

    def sorted_terms(self) -> list[tuple[GeneralizedGraph, Fraction]]:
        return sorted(self._terms.items(), key=lambda t: sort_key(t[0]))

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other: "Polynomial") -> "Polynomial":
        if not isinstance(other, Polynomial):
            return NotImplemented
        acc = dict(self._terms)
        for g, c in other._terms.items():
            acc[g] = acc.get(g, Fraction(0)) + c
        return Polynomial._from_canonical(acc)

    def __neg__(self) -> "Polynomial":
        return Polynomial._from_canonical({g: -c for g, c in self._terms.items()})

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self + (-other)

    def __mul__(self, scalar) -> "Polynomial":
        if not isinstance(scalar, (Rational, Fraction)):
            return NotImplemented
        s = Fraction(scalar)
        return Polynomial._from_canonical({g: c * s for g, c in self._terms.items()})

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "Polynomial":
        if not isinstance(scalar, (Rational, Fraction)):
            return NotImplemented
        return self * (1 / Fraction(scalar))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    def __repr__(self) -> str:
        return f"Polynomial({format_polynomial(self)!r})"

    def __str__(self) -> str:
        return format_polynomial(self)

    def max_vertices(self) -> int:
        return max((len(g.vertices) for g in self._terms), default=0)

    def is_leg_free(self) -> bool:
        return all(not g.legs for g in self._terms)


def sort_key(g: GeneralizedGraph):
    """Total order used for display and the wire format."""
    enc = canonicalize(g).encoding
    return (len(enc[0]), len(enc[1]), enc)


def combine(pairs: Iterable[tuple[Coefficient, Polynomial]]) -> Polynomial:
    """Exact linear combination ``sum(c * P)``; zero terms are dropped."""
    acc: dict[GeneralizedGraph, Fraction] = {}
    for c, p in pairs:
        c = Fraction(c)
        for g, d in p.items():
            acc[g] = acc.get(g, Fraction(0)) + c * d
    return Polynomial._from_canonical(acc)


def equals(p: Polynomial, q: Polynomial) -> bool:
    return p == q


def coefficient_sum(p: Polynomial) -> Fraction:
    """Value of a leg-free polynomial at the point where every overlap equals 1."""
    for g in p:
        if g.legs:
            raise DomainError(f"coefficient_sum needs leg-free terms; {render(g)} has legs")
    return sum(p.terms.values(), Fraction(0))


# --------------------------------------------------------------------------
# text and wire formats

def format_coefficient(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_polynomial(p: Polynomial) -> str:
    if not p:
        return "0"
    out = []
    for i, (g, c) in enumerate(p.sorted_terms()):
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        body = render(g)
        if g.is_empty():
            text = format_coefficient(mag)
        elif mag == 1:
            text = body
        else:
            text = format_coefficient(mag) + body
        if i == 0:
            out.append(("-" if sign == "-" else "") + text)
        else:
            out.append(f" {sign} {text}")
    return "".join(out)


_TERM_RE = re.compile(r"\s*([+-])?\s*(\d+(?:/\d+)?)?\s*(\*)?\s*((?:\([^()]*\)(?:\^\d+)?\s*)*)")


def parse_polynomial(text: str) -> Polynomial:
    pos = 0
    acc: dict[GeneralizedGraph, Fraction] = {}
    stripped = text.strip()
    if stripped == "0":
        return Polynomial()
    first = True
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TERM_RE.match(text, pos)
        sign, num, _, body = m.group(1), m.group(2), m.group(3), m.group(4).strip()
        if m.end() == pos or (not num and not body):
            raise GraphParseError("expected a term", pos)
        if sign is None and not first:
            raise GraphParseError("expected '+' or '-' between terms", pos)
        coeff = Fraction(num) if num else Fraction(1)
        if sign == "-":
            coeff = -coeff
        g = parse(body) if body else EMPTY
        key = canonicalize(g).graph
        acc[key] = acc.get(key, Fraction(0)) + coeff
        pos = m.end()
        first = False
    if first:
        raise GraphParseError("empty polynomial text", 0)
    return Polynomial._from_canonical(acc)


def to_wire_obj(p: Polynomial) -> dict:
    return {"terms": [{"graph": render(g), "coeff": format_coefficient(c)} for g, c in p.sorted_terms()]}


def to_wire(p: Polynomial) -> str:
    return json.dumps(to_wire_obj(p), separators=(",", ":"))


def from_wire_obj(doc) -> Polynomial:
    if not isinstance(doc, dict) or not isinstance(doc.get("terms"), list):
        raise GraphParseError("wire document must be an object with a 'terms' list")
    acc: dict[GeneralizedGraph, Fraction] = {}
    for i, term in enumerate(doc["terms"]):
        if not isinstance(term, dict) or set(term) != {"graph", "coeff"}:
            raise GraphParseError(f"term {i} must have exactly 'graph' and 'coeff'")
        if not isinstance(term["coeff"], str) or not isinstance(term["graph"], str):
            raise GraphParseError(f"term {i}: 'graph' and 'coeff' must be strings")
        try:
            coeff = Fraction(term["coeff"])
        except (ValueError, ZeroDivisionError) as exc:
            raise GraphParseError(f"term {i}: bad coefficient {term['coeff']!r}") from exc
        key = canonicalize(parse(term["graph"])).graph
        acc[key] = acc.get(key, Fraction(0)) + coeff
    return Polynomial._from_canonical(acc)


def from_wire(text: str) -> Polynomial:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphParseError(f"invalid JSON: {exc.msg}", exc.pos) from exc
    return from_wire_obj(doc)
