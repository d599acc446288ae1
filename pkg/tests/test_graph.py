import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_force_form, graphs, relabelings
from replicalc.errors import CapacityError, GraphParseError
from replicalc.graph import (
    EMPTY,
    GeneralizedGraph,
    canonical_graph,
    canonicalize,
    components,
    inspect,
    parse,
    render,
    with_edge,
    with_leg,
)


def same_class(a: str, b: str) -> bool:
    return canonical_graph(parse(a)) == canonical_graph(parse(b))


# -- parse / render ---------------------------------------------------------

def test_parse_multiplicities():
    g = parse("(1,2)^2(3)")
    assert g.edge_count(1, 2) == 2
    assert g.leg_count(3) == 1
    assert g.n_edges == 2 and g.n_legs == 1


def test_parse_large_labels():
    g = parse("(2,15)(15,3)")
    assert g.edge_count(2, 15) == 1 and g.edge_count(3, 15) == 1


def test_parse_unordered_pair_and_whitespace():
    assert parse(" (2 ,1) ^3 ( 4 ) ") == parse("(1,2)^3(4)")


def test_parse_one_is_empty():
    assert parse("1") == EMPTY


@pytest.mark.parametrize(
    "text, pos",
    [("(1,2", 4), ("(0,1)", 1), ("(1,2)^0", 6), ("(1,2)x", 5), ("", 0), ("(,2)", 1), ("(1,2)^", 6)],
)
def test_parse_errors_carry_position(text, pos):
    with pytest.raises(GraphParseError) as exc:
        parse(text)
    assert exc.value.position == pos
    assert f"position {pos}" in str(exc.value)


def test_render_examples():
    assert render(parse("(1,2)^2(3)")) == "(1,2)^2(3)"
    assert render(EMPTY) == "1"
    assert render(GeneralizedGraph.build([(2, 3), (1, 2)])) == "(1,2)(2,3)"
    assert render(GeneralizedGraph.build([(2, 1)], [5, 5])) == "(1,2)(5)^2"


@settings(max_examples=300, deadline=None)
@given(graphs())
def test_parse_render_round_trip(g):
    assert parse(render(g)) == g
    c = canonical_graph(g)
    assert parse(render(c)) == c


# -- inspect / builders -----------------------------------------------------

def test_inspect():
    assert inspect(parse("(1,2)^2(3)")) == (frozenset({1, 2, 3}), 2, 1)
    assert inspect(EMPTY) == (frozenset(), 0, 0)
    assert inspect(parse("(1,2)(2,3)")) == (frozenset({1, 2, 3}), 2, 0)


def test_with_leg_and_edge():
    assert with_leg(parse("(1,2)"), 2) == parse("(2)(1,2)")
    assert with_edge(parse("(1,2)"), 3, 4) == parse("(1,2)(3,4)")
    loop = with_edge(parse("(1,2)"), 1, 1)
    assert loop == parse("(1,1)(1,2)") and loop.n_loops == 1


def test_fresh_vertex_is_smallest_unused():
    assert parse("(1,3)").fresh_vertex() == 2
    assert parse("(1,2)(3)").fresh_vertex() == 4
    assert EMPTY.fresh_vertex() == 1


def test_replicas_skip_loop_only_vertices():
    assert parse("(1,2)(3,3)(4)").replicas() == (1, 2, 4)


# -- canonical form -------------------------------------------------------

def test_canonical_examples_are_isomorphism_classes():
    assert same_class("(2,15)(15,3)", "(1,2)(2,3)")
    assert same_class("(5,6)^2(1)", "(1,2)^2(3)")
    assert same_class("(1,2)(2,3)^2", "(1,2)^2(2,3)")
    assert not same_class("(1,2)(2,3)", "(1,2)(3,4)")
    assert not same_class("(1,2)(1)", "(1,2)(3)")


def test_canonical_uses_consecutive_labels():
    c = canonical_graph(parse("(7,30)(30,9)(11)"))
    assert c.vertices == frozenset({1, 2, 3, 4})


def test_canonical_of_empty():
    assert canonical_graph(EMPTY) == EMPTY


def test_capacity_error_names_cap():
    g = GeneralizedGraph.build([(i, i + 1) for i in range(1, 13)])
    with pytest.raises(CapacityError, match="12"):
        canonicalize(g)
    assert len(canonical_graph(g, cap=13).vertices) == 13


@settings(max_examples=1000, deadline=None)
@given(st.data())
def test_relabel_invariance(data):
    g = data.draw(graphs())
    pi = data.draw(relabelings(g))
    assert canonicalize(g.relabel(pi)) == canonicalize(g)


@settings(max_examples=300, deadline=None)
@given(graphs())
def test_idempotent(g):
    c = canonicalize(g)
    assert canonicalize(c.graph) == c


@settings(max_examples=300, deadline=None)
@given(graphs(max_vertices=5, max_edges=6), graphs(max_vertices=5, max_edges=6))
def test_agrees_with_brute_force_isomorphism(a, b):
    same = canonical_graph(a) == canonical_graph(b)
    assert same == (brute_force_form(a) == brute_force_form(b))


@settings(max_examples=200, deadline=None)
@given(graphs(max_vertices=6))
def test_canonical_matches_brute_force_class(g):
    # the canonical representative lies in the same class as g
    assert brute_force_form(canonical_graph(g)) == brute_force_form(g)


def test_regular_graphs_with_symmetry():
    # two triangles vs a hexagon, and cube variants: regular graphs colour refinement cannot split
    cube = "(1,2)(2,3)(3,4)(4,1)(5,6)(6,7)(7,8)(8,5)(1,5)(2,6)(3,7)(4,8)"
    twisted = "(1,2)(2,3)(3,4)(4,1)(5,6)(6,7)(7,8)(8,5)(1,5)(2,6)(3,8)(4,7)"
    assert not same_class("(1,2)(2,3)(3,1)(4,5)(5,6)(6,4)", "(1,2)(2,3)(3,4)(4,5)(5,6)(6,1)")
    assert same_class(cube, "(1,2)(2,4)(4,3)(3,1)(5,6)(6,8)(8,7)(7,5)(1,5)(2,6)(4,8)(3,7)")
    assert same_class(cube, twisted) == (brute_force_form(parse(cube)) == brute_force_form(parse(twisted)))


# -- components -----------------------------------------------------------

def test_components_keep_labels():
    parts = components(parse("(1,2)(2,2)(3,4)(5)^2"))
    assert sorted(render(p) for p in parts) == ["(1,2)(2,2)", "(3,4)", "(5)^2"]
    assert components(EMPTY) == []
