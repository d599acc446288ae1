import itertools

from hypothesis import strategies as st

from replicalc.graph import GeneralizedGraph, encode


@st.composite
def graphs(draw, max_vertices=8, max_edges=7, max_legs=3, loops=True):
    n = draw(st.integers(1, max_vertices))
    labels = draw(st.lists(st.integers(1, 40), min_size=n, max_size=n, unique=True))
    vertex = st.sampled_from(labels)
    edges = draw(st.lists(st.tuples(vertex, vertex), max_size=max_edges))
    if not loops:
        edges = [(u, v) for u, v in edges if u != v]
    legs = draw(st.lists(vertex, max_size=max_legs))
    return GeneralizedGraph.build(edges, legs)


@st.composite
def relabelings(draw, g: GeneralizedGraph):
    vs = sorted(g.vertices)
    targets = draw(st.lists(st.integers(1, 60), min_size=len(vs), max_size=len(vs), unique=True))
    return dict(zip(vs, targets))


def brute_force_form(g: GeneralizedGraph):
    """Lexicographically least encoding over every bijection onto 1..n."""
    vs = sorted(g.vertices)
    best = None
    for perm in itertools.permutations(range(1, len(vs) + 1)):
        enc = encode(g.relabel(dict(zip(vs, perm))))
        if best is None or enc < best:
            best = enc
    return best
