"""The deformation calculus on overlap graphs.

``delta`` is the graphical derivative in the deformation strength: at every
replica it adds a leg there (``delta_plus``) and subtracts a leg on a fresh
replica (``delta_minus``), i.e. a truncated correlation.  ``wick`` pairs legs
into edges.  ``big_delta = wick . delta . delta``.
"""

from __future__ import annotations

import enum
import math
import time
from collections import Counter
from fractions import Fraction
from typing import Iterator

from .algebra import Polynomial, coefficient_sum, combine
from .errors import CapacityError, DomainError, ParityError
from .graph import VERTEX_CAP, GeneralizedGraph, canonicalize, render, with_edge, with_leg
from .report import Report


class DiagonalMode(enum.Enum):
    """How a leg paired with itself, i.e. a diagonal overlap ``Q[l, l]``, is kept.

    UNIT drops it (value 1).  SYMBOL keeps it as a formal constant ``d``, stored
    as a self-loop on its own isolated vertex so the graph grammar still applies.
    KERNEL keeps the self-loop on its replica for numeric valuation.
    """

    UNIT = "unit"
    SYMBOL = "symbol"
    KERNEL = "kernel"


def _canon(g: GeneralizedGraph) -> GeneralizedGraph:
    return canonicalize(g).graph


def _as_polynomial(x: Polynomial | GeneralizedGraph) -> Polynomial:
    return x if isinstance(x, Polynomial) else Polynomial.monomial(x)


def double_factorial(n: int) -> int:
    return math.prod(range(n, 0, -2)) if n > 0 else 1


# --------------------------------------------------------------------------
# elementary derivatives

def delta_plus(g: GeneralizedGraph, v: int) -> Polynomial:
    if v not in g.vertices:
        raise DomainError(f"vertex {v} is not in {render(g)}")
    return Polynomial.monomial(with_leg(g, v))


def delta_minus(g: GeneralizedGraph, v: int) -> Polynomial:
    if v not in g.vertices:
        raise DomainError(f"vertex {v} is not in {render(g)}")
    return Polynomial.monomial(with_leg(g, g.fresh_vertex()), -1)


def _delta_step(
    terms: dict[GeneralizedGraph, Fraction],
    raw: dict[GeneralizedGraph, int] | None = None,
) -> tuple[dict[GeneralizedGraph, Fraction], dict[GeneralizedGraph, int] | None]:
    out: dict[GeneralizedGraph, Fraction] = {}
    out_raw: dict[GeneralizedGraph, int] | None = {} if raw is not None else None
    for g, c in terms.items():
        reps = g.replicas()
        if not reps:
            continue
        n_raw = raw[g] if raw is not None else 0
        for v in reps:
            key = _canon(with_leg(g, v))
            out[key] = out.get(key, Fraction(0)) + c
            if out_raw is not None:
                out_raw[key] = out_raw.get(key, 0) + n_raw
        key = _canon(with_leg(g, g.fresh_vertex()))
        out[key] = out.get(key, Fraction(0)) - len(reps) * c
        if out_raw is not None:
            out_raw[key] = out_raw.get(key, 0) + len(reps) * n_raw
    nonzero = {g: c for g, c in out.items() if c != 0}
    if out_raw is not None:
        out_raw = {g: out_raw[g] for g in out_raw if g in nonzero}
    return nonzero, out_raw


def delta(p: Polynomial | GeneralizedGraph) -> Polynomial:
    """One application of the derivative operator, extended linearly."""
    p = _as_polynomial(p)
    terms, _ = _delta_step(dict(p.items()))
    return Polynomial._from_canonical(terms)


# --------------------------------------------------------------------------
# Wick contraction

def perfect_matchings(slots: list[int]) -> Iterator[list[tuple[int, int]]]:
    """All pairings of ``slots`` treated as distinguishable positions."""
    if not slots:
        yield []
        return
    first, rest = slots[0], slots[1:]
    for i in range(len(rest)):
        pair = (first, rest[i])
        for tail in perfect_matchings(rest[:i] + rest[i + 1:]):
            yield [pair] + tail


def _contract_term(g: GeneralizedGraph, mode: DiagonalMode) -> dict[GeneralizedGraph, int]:
    slots = [v for v, m in g.legs for _ in range(m)]
    if len(slots) % 2:
        raise ParityError(f"odd number of legs ({len(slots)}) in term {render(g)}")
    pairings = Counter(
        tuple(sorted(tuple(sorted(p)) for p in matching)) for matching in perfect_matchings(slots)
    )
    out: dict[GeneralizedGraph, int] = {}
    for pairing, count in pairings.items():
        edges = g.edge_counter()
        for a, b in pairing:
            if a != b or mode is DiagonalMode.KERNEL:
                edges[(a, b)] += 1
            elif mode is DiagonalMode.SYMBOL:
                edges[(a, a)] += 1
        contracted = GeneralizedGraph.build(edges)
        if mode is DiagonalMode.SYMBOL:
            contracted = _detach_loops(contracted)
        key = _canon(contracted)
        out[key] = out.get(key, 0) + count
    return out


def _detach_loops(g: GeneralizedGraph) -> GeneralizedGraph:
    """Move every self-loop onto its own isolated vertex (one formal factor ``d`` each)."""
    if not g.n_loops:
        return g
    edges: Counter = Counter()
    loops = 0
    for (u, v), m in g.edges:
        if u == v:
            loops += m
        else:
            edges[(u, v)] += m
    nxt = max(g.vertices) + 1
    for i in range(loops):
        edges[(nxt + i, nxt + i)] += 1
    return GeneralizedGraph.build(edges)


def wick(p: Polynomial | GeneralizedGraph, mode: DiagonalMode = DiagonalMode.UNIT) -> Polynomial:
    """Sum over all perfect pairings of the legs of each term; each pair becomes an edge."""
    p = _as_polynomial(p)
    acc: dict[GeneralizedGraph, Fraction] = {}
    for g, c in p.items():
        for key, count in _contract_term(g, mode).items():
            acc[key] = acc.get(key, Fraction(0)) + c * count
    return Polynomial._from_canonical(acc)


def _require_leg_free(p: Polynomial, what: str) -> None:
    for g in p:
        if g.legs:
            raise DomainError(f"{what} is defined on leg-free terms; {render(g)} has legs")


def big_delta(p: Polynomial | GeneralizedGraph, mode: DiagonalMode = DiagonalMode.UNIT) -> Polynomial:
    """Second-order stability operator: contract after two derivatives."""
    p = _as_polynomial(p)
    _require_leg_free(p, "big_delta")
    return wick(delta(delta(p)), mode)


def closed_form_delta(m: GeneralizedGraph) -> Polynomial:
    """Half of ``big_delta(m)`` from the explicit formula over the ``r`` replicas of ``m``.

    ``sum_{l<k} Q_lk M - r sum_l Q_{l,a} M + r(r+1)/2 Q_{a,b} M`` with ``a, b`` fresh.
    """
    if m.legs:
        raise DomainError(f"closed_form_delta needs a leg-free monomial, got {render(m)}")
    reps = m.replicas()
    r = len(reps)
    if r == 0:
        return Polynomial()
    a = max(m.vertices) + 1
    b = a + 1
    pairs: list[tuple[Fraction, Polynomial]] = []
    for i, l in enumerate(reps):
        for k in reps[i + 1:]:
            pairs.append((Fraction(1), Polynomial.monomial(with_edge(m, l, k))))
        pairs.append((Fraction(-r), Polynomial.monomial(with_edge(m, l, a))))
    pairs.append((Fraction(r * (r + 1), 2), Polynomial.monomial(with_edge(m, a, b))))
    return combine(pairs)


def closed_form_delta_poly(p: Polynomial) -> Polynomial:
    return combine((c, closed_form_delta(g)) for g, c in p.items())


# --------------------------------------------------------------------------
# powers

def _check_budget(p: Polynomial, n_derivatives: int, cap: int) -> None:
    need = p.max_vertices() + n_derivatives
    if need > cap:
        raise CapacityError(
            f"{n_derivatives} derivatives on a {p.max_vertices()}-vertex term may need "
            f"{need} vertices, exceeding the vertex cap of {cap}"
        )


def wick_delta_power(
    p: Polynomial | GeneralizedGraph,
    k: int,
    mode: DiagonalMode = DiagonalMode.UNIT,
    stats: dict | None = None,
    cap: int = VERTEX_CAP,
) -> Polynomial:
    """``C delta^k`` applied to a leg-free polynomial.

    If ``stats`` is a dict it receives, per input monomial, the number of raw
    addends before any merging, merged term counts, and the sign-class bound
    ``(k-1)!! * 2**k`` (each derivative has two signs, each full contraction
    of ``k`` legs ``(k-1)!!`` pairings).
    """
    if k < 2 or k % 2:
        raise DomainError(f"order must be an even integer >= 2, got {k}")
    p = _as_polynomial(p)
    _require_leg_free(p, "wick_delta_power")
    _check_budget(p, k, cap)
    total: dict[GeneralizedGraph, Fraction] = {}
    for g, c in p.items():
        terms: dict[GeneralizedGraph, Fraction] = {g: Fraction(1)}
        raw: dict[GeneralizedGraph, int] = {g: 1}
        for _ in range(k):
            terms, raw = _delta_step(terms, raw)
        contracted = wick(Polynomial._from_canonical(terms), mode)
        for key, d in contracted.items():
            total[key] = total.get(key, Fraction(0)) + c * d
        if stats is not None:
            stats[render(g)] = {
                "raw_addends": sum(raw.values()) * double_factorial(k - 1),
                "raw_derivative_addends": sum(raw.values()),
                "terms_before_wick": len(terms),
                "terms_after_wick": len(contracted),
                "sign_class_bound": double_factorial(k - 1) * 2**k,
            }
    return Polynomial._from_canonical(total)


def big_delta_power(p: Polynomial | GeneralizedGraph, k: int, mode: DiagonalMode = DiagonalMode.UNIT) -> Polynomial:
    p = _as_polynomial(p)
    for _ in range(k):
        p = big_delta(p, mode)
    return p


def fourth_order_check(
    m: GeneralizedGraph | Polynomial,
    mode: DiagonalMode = DiagonalMode.UNIT,
) -> Report:
    """Residual of ``C delta^4 M - 3 big_delta(big_delta(M))``; passes iff it is exactly zero."""
    p = _as_polynomial(m)
    _require_leg_free(p, "fourth_order_check")
    t0 = time.perf_counter()
    stats: dict = {}
    lhs = wick_delta_power(p, 4, mode, stats=stats)
    half = big_delta(p, mode)
    rhs = 3 * big_delta(half, mode)
    residual = lhs - rhs
    elapsed = time.perf_counter() - t0
    label = render(m) if isinstance(m, GeneralizedGraph) else str(p)
    return Report(
        check="fourth_order",
        inputs={"monomial": label, "mode": mode.value},
        lhs=lhs,
        rhs=rhs,
        passed=not residual,
        details={
            "residual": residual,
            "residual_terms": len(residual),
            "lhs_terms": len(lhs),
            "rhs_terms": len(rhs),
            "rhs_addend_bound": 4 * 4,
            "expansion": stats,
            "seconds": round(elapsed, 4),
        },
    )


def higher_order_explore(
    m: GeneralizedGraph | Polynomial,
    k: int,
    mode: DiagonalMode = DiagonalMode.UNIT,
    cap: int = VERTEX_CAP,
) -> Report:
    """Compare ``C delta^{2k}`` with ``(2k-1)!! big_delta^k``.

    Orders 1 and 2 are asserted; from order 3 on the residual is only reported.
    """
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    p = _as_polynomial(m)
    _require_leg_free(p, "higher_order_explore")
    _check_budget(p, 2 * k, cap)
    mult = double_factorial(2 * k - 1)
    t0 = time.perf_counter()
    stats: dict = {}
    lhs = wick_delta_power(p, 2 * k, mode, stats=stats, cap=cap)
    rhs = mult * big_delta_power(p, k, mode)
    residual = lhs - rhs
    label = render(m) if isinstance(m, GeneralizedGraph) else str(p)
    zero_sums = {}
    if mode is DiagonalMode.UNIT:
        zero_sums = {"lhs": coefficient_sum(lhs), "rhs": coefficient_sum(rhs)}
    return Report(
        check="higher_order_explore",
        inputs={"monomial": label, "k": k, "multiplier": mult, "mode": mode.value},
        lhs=lhs,
        rhs=rhs,
        passed=(not residual) if k <= 2 else None,
        details={
            "residual": residual,
            "residual_zero": not residual,
            "residual_terms": len(residual),
            "coefficient_sums": zero_sums,
            "expansion": stats,
            "seconds": round(time.perf_counter() - t0, 4),
        },
    )


def apply_word(word: str, p: Polynomial | GeneralizedGraph, mode: DiagonalMode = DiagonalMode.UNIT) -> Polynomial:
    """Apply an operator word over ``d`` (derivative), ``C`` (contraction), ``D`` (= ``Cdd``), right to left."""
    p = _as_polynomial(p)
    expanded = word.replace("D", "Cdd")
    for ch in expanded:
        if ch not in "dC":
            raise DomainError(f"unknown operator {ch!r} in word {word!r}; use d, C, D")
    for ch in reversed(expanded):
        p = delta(p) if ch == "d" else wick(p, mode)
    return p
