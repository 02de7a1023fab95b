import pytest

from app.core.errors import InputError
from app.services.core_builder import (
    H_EDGE,
    SQUARE,
    V_EDGE,
    CellKey,
    QuotientCore,
    build_core,
    consolidated_hull,
    core_area,
    hull,
    product_core,
    slice_support,
)
from app.services.free_group import Word
from app.services.square_complex import is_isomorphic
from app.services.tree_morphism import GraphMap, make_morphism


def test_identity_pair_has_empty_core(rose2):
    other = rose2.renamed("G'")
    core = build_core(make_morphism(rose2, other))
    assert core.area == 0
    assert len(core) == 0
    assert len(core.diagnostics["shared_edges"]) == 4


def test_whitehead_pair_is_compatible(rose2, rose_ab):
    core = build_core(make_morphism(rose2, rose_ab))
    assert core.area == 0
    assert core.metadata["certified"]


def test_whitehead_hull_has_no_interior(rose2, rose_ab):
    m = make_morphism(rose2, rose_ab)
    hd = hull(m, rose_ab.lift_edge("ηb"))
    assert len(hd.hull_edges) == 2
    assert not hd.H
    assert not hd.CH


def test_single_square_core(rose2, single_square):
    core = build_core(make_morphism(rose2, single_square))
    assert core.area == 1
    assert len(core.vertices()) == 4
    assert len(core.edges()) == 6
    assert core.euler_characteristic() == -1
    square = core.squares()[0]
    assert len(core.faces(square)) == 4
    assert [k.kind for k in core.faces(square)] == [H_EDGE, H_EDGE, V_EDGE, V_EDGE]


def test_single_square_slice(rose2, single_square):
    core = build_core(make_morphism(rose2, single_square))
    square = core.squares()[0]
    support = slice_support(core, square.t, rose2)
    assert len(support) == 1
    assert slice_support(core, "missing") == set()


def test_squares_only_core_skips_free_cells(rose2, single_square):
    core = build_core(make_morphism(rose2, single_square), free_cells=False)
    assert core.area == 1
    assert len(core.edges()) == 4


def test_core_json_round_trip(rose2, single_square):
    core = build_core(make_morphism(rose2, single_square))
    again = QuotientCore.from_dict(core.to_dict())
    assert again.keys() == core.keys()
    assert again.faces(again.squares()[0]) == core.faces(core.squares()[0])


def test_core_json_must_be_closed():
    data = {
        "schema_version": 1,
        "cells": [
            {"kind": "h", "g": "e", "t": "o", "word": "", "faces": [{"kind": "vertex", "g": "o", "t": "o", "word": ""}]},
        ],
    }
    with pytest.raises(InputError):
        QuotientCore.from_dict(data)


def test_swapped_core_exchanges_factors(rose2, single_square):
    core = build_core(make_morphism(rose2, single_square))
    swapped = core.swapped()
    assert swapped.source == core.target
    assert swapped.swapped().keys() == core.keys()
    assert {k.kind for k in swapped.edges()} == {H_EDGE, V_EDGE}


def test_product_core_closure(seven_square_data):
    core = product_core(seven_square_data)
    assert core.area == 16
    assert len([k for k in core.squares() if k.g == "b"]) == 7
    assert CellKey(SQUARE, "c1", "η4") in core


def test_product_core_rejects_unknown_edges(seven_square_data):
    data = dict(seven_square_data, squares=[["z", "η0"]])
    with pytest.raises(InputError):
        product_core(data)


def test_single_square_hull_criteria(rose2, single_square):
    m = make_morphism(rose2, single_square)
    core = build_core(m)
    assert core_area(core) == 1
    square = core.squares()[0]
    eta = single_square.lift_edge(square.t)
    hd = hull(m, eta)
    assert consolidated_hull(m, eta) == hd.CH
    assert len(hd.CH) == 1


@pytest.mark.parametrize("pair", [("rose2", "single_square"), ("rose2", "rose_ab"), ("rose3", "rose3_twisted")])
def test_core_is_symmetric_under_swap(request, pair):
    graph, target = (request.getfixturevalue(name) for name in pair)
    forward = build_core(make_morphism(graph, target))
    backward = build_core(make_morphism(target, graph))
    assert forward.area == backward.area
    assert {k.swapped() for k in backward.squares()} == set(forward.squares())
    assert is_isomorphic(forward, backward.swapped())


@pytest.mark.parametrize("pair", [("rose2", "single_square"), ("rose2", "rose_ab"), ("rose3", "rose3_twisted")])
def test_core_does_not_depend_on_the_map(request, pair):
    graph, target = (request.getfixturevalue(name) for name in pair)
    m = make_morphism(graph, target)
    step = Word.letter("ηa")
    conjugated = GraphMap(
        graph,
        target,
        m.vertex_map,
        {e: step.inverse() * p * step for e, p in m.edge_map.items()},
        m.twist * step,
    )
    conjugated.check()
    assert conjugated.edge_map != m.edge_map
    expected = build_core(m)
    core = build_core(conjugated)
    assert set(core.squares()) == set(expected.squares())
    assert is_isomorphic(core, expected)


def test_shared_edge_becomes_corner_inside_ambient_core(rose2):
    other = rose2.renamed("G'")
    m = make_morphism(rose2, other)
    core = build_core(m, ambient=lambda key: True)
    assert core.area == 0
    assert core.diagnostics["shared_edges"] == []
    assert len(core.diagnostics["shared_corners"]) == 2
    assert {k.kind for k in core.edges()} == {H_EDGE, V_EDGE}
