"""Generalized overlap graphs: edges (overlap factors) plus legs (free Gaussian insertions).

A graph is a monomial over replica indices.  An edge ``(l, m)`` stands for the
overlap entry ``Q[l, m]``; a leg ``(l)`` is an unpaired centred Gaussian at
replica ``l``.  Graphs are immutable and hashable so they can key polynomials.

Canonical labeling is exact: individualization-refinement over vertex colour
classes with twin pruning, run per connected component.  Two graphs get the
same :class:`CanonicalForm` iff they differ by an injective relabeling.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping

from .errors import CapacityError, GraphParseError

VERTEX_CAP = 12

Edge = tuple[int, int]


def _norm_edge(u: int, v: int) -> Edge:
    return (u, v) if u <= v else (v, u)


@dataclass(frozen=True)
class GeneralizedGraph:
    """Multiset of undirected edges and multiset of legs over positive vertex labels.

    ``edges`` holds ``((u, v), multiplicity)`` with ``u <= v`` (``u == v`` is a
    self-loop) and ``legs`` holds ``(v, multiplicity)``; both sorted.  Use
    :meth:`build` rather than the raw constructor.
    """

    edges: tuple[tuple[Edge, int], ...] = ()
    legs: tuple[tuple[int, int], ...] = ()

    @classmethod
    def build(
        cls,
        edges: Iterable[Edge] | Mapping[Edge, int] = (),
        legs: Iterable[int] | Mapping[int, int] = (),
    ) -> "GeneralizedGraph":
        ecount: Counter = Counter()
        items = edges.items() if isinstance(edges, Mapping) else ((e, 1) for e in edges)
        for (u, v), m in items:
            if u < 1 or v < 1:
                raise ValueError(f"vertex labels must be >= 1, got {(u, v)}")
            if m < 0:
                raise ValueError(f"negative multiplicity for edge {(u, v)}")
            if m:
                ecount[_norm_edge(u, v)] += m
        lcount: Counter = Counter()
        litems = legs.items() if isinstance(legs, Mapping) else ((v, 1) for v in legs)
        for v, m in litems:
            if v < 1:
                raise ValueError(f"vertex labels must be >= 1, got {v}")
            if m < 0:
                raise ValueError(f"negative multiplicity for leg {v}")
            if m:
                lcount[v] += m
        return cls(tuple(sorted(ecount.items())), tuple(sorted(lcount.items())))

    @property
    def vertices(self) -> frozenset[int]:
        vs = {v for v, _ in self.legs}
        for (u, v), _ in self.edges:
            vs.add(u)
            vs.add(v)
        return frozenset(vs)

    @property
    def n_edges(self) -> int:
        return sum(m for _, m in self.edges)

    @property
    def n_legs(self) -> int:
        return sum(m for _, m in self.legs)

    @property
    def n_loops(self) -> int:
        return sum(m for (u, v), m in self.edges if u == v)

    def is_empty(self) -> bool:
        return not self.edges and not self.legs

    def leg_count(self, v: int) -> int:
        return dict(self.legs).get(v, 0)

    def edge_count(self, u: int, v: int) -> int:
        return dict(self.edges).get(_norm_edge(u, v), 0)

    def edge_counter(self) -> Counter:
        return Counter(dict(self.edges))

    def leg_counter(self) -> Counter:
        return Counter(dict(self.legs))

    def replicas(self) -> tuple[int, ...]:
        """Vertices that carry a leg or a non-loop edge.

        A vertex holding only self-loops is a constant factor (the diagonal
        overlap), so it is not a replica the deformation can act on.
        """
        vs = {v for v, _ in self.legs}
        for (u, v), _ in self.edges:
            if u != v:
                vs.add(u)
                vs.add(v)
        return tuple(sorted(vs))

    def fresh_vertex(self) -> int:
        used = self.vertices
        v = 1
        while v in used:
            v += 1
        return v

    def relabel(self, mapping: Mapping[int, int]) -> "GeneralizedGraph":
        new_edges: Counter = Counter()
        for (u, v), m in self.edges:
            new_edges[_norm_edge(mapping[u], mapping[v])] += m
        new_legs: Counter = Counter()
        for v, m in self.legs:
            new_legs[mapping[v]] += m
        if len(set(mapping[v] for v in self.vertices)) != len(self.vertices):
            raise ValueError("relabeling must be injective on the vertex set")
        return GeneralizedGraph(tuple(sorted(new_edges.items())), tuple(sorted(new_legs.items())))

    def without_legs(self) -> "GeneralizedGraph":
        return GeneralizedGraph(self.edges, ())

    def __str__(self) -> str:
        return render(self)


EMPTY = GeneralizedGraph()


def inspect(g: GeneralizedGraph) -> tuple[frozenset[int], int, int]:
    """Return ``(vertex set, edge count, leg count)``, counts with multiplicity."""
    return g.vertices, g.n_edges, g.n_legs


def with_leg(g: GeneralizedGraph, v: int) -> GeneralizedGraph:
    legs = g.leg_counter()
    legs[v] += 1
    return GeneralizedGraph.build(dict(g.edges), legs)


def with_edge(g: GeneralizedGraph, u: int, v: int) -> GeneralizedGraph:
    edges = g.edge_counter()
    edges[_norm_edge(u, v)] += 1
    return GeneralizedGraph.build(edges, dict(g.legs))


# --------------------------------------------------------------------------
# text notation

def parse(text: str) -> GeneralizedGraph:
    """Parse ``(1,2)^2(3)``-style notation; ``"1"`` is the empty graph."""
    edges: Counter = Counter()
    legs: Counter = Counter()
    pos = 0
    n = len(text)

    def skip_ws(i: int) -> int:
        while i < n and text[i].isspace():
            i += 1
        return i

    def read_int(i: int, what: str) -> tuple[int, int]:
        i = skip_ws(i)
        start = i
        while i < n and text[i].isdigit():
            i += 1
        if start == i:
            raise GraphParseError(f"expected {what}", start)
        value = int(text[start:i])
        if value < 1:
            raise GraphParseError(f"{what} must be >= 1, got {value}", start)
        return value, i

    pos = skip_ws(pos)
    if pos == n:
        raise GraphParseError("empty graph text (use '1' for the empty product)", pos)
    if text[pos] == "1" and skip_ws(pos + 1) == n:
        return EMPTY

    factors = 0
    while True:
        pos = skip_ws(pos)
        if pos == n:
            break
        if text[pos] != "(":
            raise GraphParseError(f"unexpected character {text[pos]!r}", pos)
        a, pos = read_int(pos + 1, "vertex label")
        pos = skip_ws(pos)
        b = None
        if pos < n and text[pos] == ",":
            b, pos = read_int(pos + 1, "vertex label")
            pos = skip_ws(pos)
        if pos >= n or text[pos] != ")":
            raise GraphParseError("expected ')'", pos)
        pos = skip_ws(pos + 1)
        k = 1
        if pos < n and text[pos] == "^":
            k, pos = read_int(pos + 1, "exponent")
        if b is None:
            legs[a] += k
        else:
            edges[_norm_edge(a, b)] += k
        factors += 1
    if not factors:
        raise GraphParseError("no factors", pos)
    return GeneralizedGraph.build(edges, legs)


def render(g: GeneralizedGraph) -> str:
    if g.is_empty():
        return "1"
    parts = []
    for (u, v), m in g.edges:
        parts.append(f"({u},{v})" + (f"^{m}" if m > 1 else ""))
    for v, m in g.legs:
        parts.append(f"({v})" + (f"^{m}" if m > 1 else ""))
    return "".join(parts)


# --------------------------------------------------------------------------
# canonical labeling

Encoding = tuple[tuple[Edge, ...], tuple[int, ...]]


@dataclass(frozen=True)
class CanonicalForm:
    graph: GeneralizedGraph
    encoding: Encoding


def encode(g: GeneralizedGraph) -> Encoding:
    """Sorted edge list then sorted leg list, multiplicities expanded."""
    edges = tuple(e for e, m in g.edges for _ in range(m))
    legs = tuple(v for v, m in g.legs for _ in range(m))
    return edges, legs


def _refine(colors: dict[int, int], adj: dict[int, dict[int, int]]) -> dict[int, int]:
    """Colour refinement to the coarsest equitable partition.

    New colours are ranks of (old colour, sorted neighbour profile), so they
    depend only on the isomorphism type, never on input labels.
    """
    n_classes = len(set(colors.values()))
    while True:
        sigs = {
            v: (colors[v], tuple(sorted((colors[u], m) for u, m in adj[v].items())))
            for v in colors
        }
        ranks = {s: i for i, s in enumerate(sorted(set(sigs.values())))}
        colors = {v: ranks[sigs[v]] for v in colors}
        if len(ranks) == n_classes:
            return colors
        n_classes = len(ranks)


def _are_twins(u: int, v: int, adj: dict[int, dict[int, int]]) -> bool:
    # transposition (u v) is an automorphism iff neighbourhoods agree outside {u, v}
    au = {w: m for w, m in adj[u].items() if w != v}
    av = {w: m for w, m in adj[v].items() if w != u}
    return au == av


def _canonical_component(
    vertices: list[int],
    adj: dict[int, dict[int, int]],
    loops: dict[int, int],
    legs: dict[int, int],
) -> tuple[Encoding, dict[int, int]]:
    degree = {v: sum(adj[v].values()) for v in vertices}
    keys = {v: (-degree[v], -loops.get(v, 0), -legs.get(v, 0)) for v in vertices}
    ranks = {k: i for i, k in enumerate(sorted(set(keys.values())))}
    colors = _refine({v: ranks[keys[v]] for v in vertices}, adj)

    best: list = [None, None]

    def certificate(labels: dict[int, int]) -> Encoding:
        es = []
        for v in vertices:
            lv = labels[v]
            if loops.get(v):
                es.extend([(lv, lv)] * loops[v])
            for u, m in adj[v].items():
                lu = labels[u]
                if lv < lu:
                    es.extend([(lv, lu)] * m)
        ls = []
        for v, m in legs.items():
            ls.extend([labels[v]] * m)
        return tuple(sorted(es)), tuple(sorted(ls))

    def search(cols: dict[int, int]) -> None:
        cells: dict[int, list[int]] = {}
        for v, c in cols.items():
            cells.setdefault(c, []).append(v)
        target = None
        for c in sorted(cells):
            if len(cells[c]) > 1:
                target = cells[c]
                break
        if target is None:
            labels = {v: c + 1 for v, c in cols.items()}
            cert = certificate(labels)
            if best[0] is None or cert < best[0]:
                best[0], best[1] = cert, labels
            return
        reps: list[int] = []
        for v in sorted(target):
            if not any(_are_twins(v, r, adj) for r in reps):
                reps.append(v)
        for v in reps:
            new = {w: 2 * c + (1 if (c == cols[v] and w != v) else 0) for w, c in cols.items()}
            search(_refine(new, adj))

    search(colors)
    return best[0], best[1]


@lru_cache(maxsize=200_000)
def _canonicalize_cached(g: GeneralizedGraph) -> CanonicalForm:
    vertices = sorted(g.vertices)
    adj: dict[int, dict[int, int]] = {v: {} for v in vertices}
    loops: dict[int, int] = {}
    for (u, v), m in g.edges:
        if u == v:
            loops[u] = loops.get(u, 0) + m
        else:
            adj[u][v] = m
            adj[v][u] = m
    legs = dict(g.legs)

    # connected components (legs and loops stay on their vertex)
    seen: set[int] = set()
    components = []
    for v in vertices:
        if v in seen:
            continue
        stack, comp = [v], []
        seen.add(v)
        while stack:
            x = stack.pop()
            comp.append(x)
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        comp.sort()
        sub_adj = {x: adj[x] for x in comp}
        enc, labels = _canonical_component(comp, sub_adj, loops, {x: legs[x] for x in comp if x in legs})
        components.append((-len(comp), enc, comp, labels))

    components.sort(key=lambda t: (t[0], t[1]))
    mapping: dict[int, int] = {}
    offset = 0
    for neg_size, _, comp, labels in components:
        for x in comp:
            mapping[x] = labels[x] + offset
        offset += -neg_size
    canon = g.relabel(mapping)
    return CanonicalForm(canon, encode(canon))


def canonicalize(g: GeneralizedGraph, cap: int = VERTEX_CAP) -> CanonicalForm:
    """Relabeling-invariant representative of ``g`` with vertices ``1..n``."""
    n = len(g.vertices)
    if n > cap:
        raise CapacityError(f"graph has {n} vertices, exceeding the vertex cap of {cap}")
    return _canonicalize_cached(g)


def canonical_graph(g: GeneralizedGraph, cap: int = VERTEX_CAP) -> GeneralizedGraph:
    return canonicalize(g, cap).graph


def components(g: GeneralizedGraph) -> list[GeneralizedGraph]:
    """Connected pieces of ``g`` (legs and loops attached to their vertex), original labels."""
    parent = {v: v for v in g.vertices}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for (u, v), _ in g.edges:
        parent[find(u)] = find(v)
    groups: dict[int, tuple[Counter, Counter]] = {}
    for v in g.vertices:
        groups.setdefault(find(v), (Counter(), Counter()))
    for (u, v), m in g.edges:
        groups[find(u)][0][(u, v)] += m
    for v, m in g.legs:
        groups[find(v)][1][v] += m
    return [GeneralizedGraph.build(e, l) for e, l in groups.values()]
