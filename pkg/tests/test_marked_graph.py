import pytest

from app.core.errors import InputError, ResourceLimitError
from app.services.free_group import Basis, Word
from app.services.marked_graph import GraphEdge, MarkedGraph, TreeCell, ball, deck_translate, rose, tree_geodesic

from tests.conftest import load_fixture


def issue_codes(graph: MarkedGraph) -> set:
    return {issue.code for issue in graph.validate().issues}


def test_rose_is_accepted(rose2):
    diagnostics = rose2.validate()
    assert diagnostics.accepted
    assert diagnostics.rank == 2


def test_theta_marking_uses_spanning_tree(theta2):
    assert theta2.validate().accepted
    assert theta2.tree_path("q") == Word.parse("t0")
    assert theta2.marking_loops["a"] == Word.parse("t1 t0^-1")
    assert theta2.lam("t0").is_identity()
    assert theta2.lam("t2") == Word.parse("b")


def test_explicit_marking_is_inverted(rose_ab):
    assert rose_ab.validate().accepted
    assert rose_ab.lam("ηa") == Word.parse("a b^-1")
    assert rose_ab.lam("ηb") == Word.parse("b")
    assert rose_ab.loop(Word.parse("a")) == Word.parse("ηa ηb")


def test_rank_mismatch_is_reported():
    graph = MarkedGraph(Basis(("a", "b", "c")), ["o"], [GraphEdge("x", "o", "o"), GraphEdge("y", "o", "o")], "o", [])
    assert "rank" in issue_codes(graph)


def test_valence_one_vertex_is_reported():
    edges = [GraphEdge("x", "o", "o"), GraphEdge("y", "o", "o"), GraphEdge("z", "o", "leaf")]
    graph = MarkedGraph(Basis(("a", "b")), ["o", "leaf"], edges, "o", ["z"])
    assert "valence_one" in issue_codes(graph)


def test_disconnected_graph_is_reported():
    edges = [GraphEdge("x", "o", "o"), GraphEdge("y", "p", "p")]
    graph = MarkedGraph(Basis(("a", "b")), ["o", "p"], edges, "o", [])
    assert "disconnected" in issue_codes(graph)


def test_marking_must_be_isomorphism():
    data = load_fixture("rose_ab.json")
    data["marking"] = {"a": "ηa", "b": "ηa"}
    graph = MarkedGraph.from_dict(data)
    assert "marking" in issue_codes(graph)
    with pytest.raises(InputError):
        graph.ensure_valid()


def test_ball_counts(rose2, theta2):
    base = rose2.vertex_cell(Word())
    assert len(ball(rose2, base, 1, cap=6).edges) == 4
    assert len(ball(rose2, base, 2, cap=6).edges) == 16
    assert len(ball(theta2, theta2.vertex_cell(Word()), 2, cap=6).edges) == 9


def test_ball_respects_cap(rose2):
    with pytest.raises(ResourceLimitError):
        ball(rose2, rose2.vertex_cell(Word()), 4, cap=3)


def test_tree_geodesic_in_rose(rose2):
    base = rose2.vertex_cell(Word())
    target = rose2.vertex_cell(Word.parse("ea ea"))
    path = tree_geodesic(base, target)
    assert path == Word.parse("ea ea")
    assert tree_geodesic(target, base) == path.inverse()


def test_tree_geodesic_rejects_other_trees(rose2, theta2):
    with pytest.raises(InputError):
        tree_geodesic(rose2.vertex_cell(Word()), theta2.vertex_cell(Word()))
    with pytest.raises(InputError):
        tree_geodesic(rose2.lift_edge("ea"), rose2.vertex_cell(Word()))


def test_deck_translate_and_coordinates(rose2):
    base = rose2.vertex_cell(Word())
    moved = deck_translate(rose2, base, Word.parse("a"))
    assert moved == TreeCell(rose2.name, Word.parse("ea"))
    cell = TreeCell(rose2.name, Word.parse("ea eb^-1"))
    assert rose2.coordinates(cell) == (Word.parse("a b^-1"), "o")
    assert rose2.canonical(cell) == base


def test_deck_translate_rejects_unknown_symbol(rose2):
    with pytest.raises(InputError):
        deck_translate(rose2, rose2.vertex_cell(Word()), Word.parse("z"))


def test_rose_helper_and_round_trip():
    graph = rose(["a", "b"], name="R")
    assert graph.validate().accepted
    again = MarkedGraph.from_dict(graph.to_dict())
    assert again.lambdas == graph.lambdas
