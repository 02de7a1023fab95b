import pytest

from app.core.errors import ContractError, InputError, SharedEdgeError
from app.services import tree_morphism
from app.services.marked_graph import MarkedGraph
from app.services.free_group import Word
from app.services.tree_morphism import (
    GraphMap,
    PeriodicRay,
    certify,
    gates,
    image_ray,
    make_morphism,
    preimage_edges,
    same_end,
    tighten,
)


def test_morphism_to_whitehead_rose(rose2, rose_ab):
    m = make_morphism(rose2, rose_ab)
    assert m.edge_map["ea"] == Word.parse("ηa ηb")
    assert m.edge_map["eb"] == Word.parse("ηb")
    assert len(gates(m, "o")) == 3
    assert m.certified


def test_morphism_to_theta(rose2, theta2):
    m = make_morphism(rose2, theta2)
    assert m.vertex_map["o"] == "p"
    assert m.edge_map["ea"] == Word.parse("t1 t0^-1")
    assert m.certified
    assert m.induced_automorphism() == {"a": Word.parse("a"), "b": Word.parse("b")}


def test_single_square_images(rose2, single_square):
    m = make_morphism(rose2, single_square)
    assert [len(m.edge_map[e]) for e in ("ea", "eb")] == [2, 3]
    assert len(gates(m, "o")) == 2
    assert certify(m).certified


def test_tighten_reports_shared_edge(rose2):
    other = rose2.renamed("G'")
    collapsed = GraphMap(rose2, other, {"o": "o"}, {"ea": Word(), "eb": Word.parse("eb")})
    with pytest.raises(SharedEdgeError):
        tighten(collapsed)
    assert tighten(collapsed, allow_collapse=True).collapsed_edges() == ["ea"]
    assert not certify(collapsed).certified


def test_explicit_map_must_be_equivariant(rose2):
    other = rose2.renamed("G'")
    data = {"vertex_map": {"o": "o"}, "edge_map": {"ea": "eb", "eb": "ea"}, "twist": ""}
    with pytest.raises(InputError):
        GraphMap.from_dict(data, rose2, other)


def test_preimage_of_whitehead_edge(rose2, rose_ab):
    m = make_morphism(rose2, rose_ab)
    cells = preimage_edges(m, rose_ab.lift_edge("ηb"))
    assert sorted(c.edge for c in cells) == ["ea", "eb"]
    assert len(preimage_edges(m, rose_ab.lift_edge("ηa"))) == 1


def test_image_ray(rose2, rose_ab):
    m = make_morphism(rose2, rose_ab)
    ray = PeriodicRay(rose2.vertex_cell(Word()), Word(), Word.parse("ea")).check(rose2)
    image = image_ray(m, ray)
    assert image.prefix.is_identity()
    assert image.period == Word.parse("ηa ηb")
    backwards = image_ray(m, PeriodicRay(ray.start, Word(), Word.parse("ea^-1")))
    assert backwards.period == Word.parse("ηb^-1 ηa^-1")


def test_ray_validation(rose2):
    start = rose2.vertex_cell(Word())
    with pytest.raises(InputError):
        PeriodicRay(start, Word(), Word()).check(rose2)
    with pytest.raises(InputError):
        PeriodicRay(start, Word.parse("ea"), Word.parse("ea^-1")).check(rose2)


def test_same_end_ignores_presentation(rose2):
    start = rose2.vertex_cell(Word())
    first = PeriodicRay(start, Word(), Word.parse("ea eb"))
    second = PeriodicRay(start, Word.parse("ea eb ea"), Word.parse("eb ea"))
    assert same_end(first, second)
    assert not same_end(first, PeriodicRay(start, Word(), Word.parse("eb ea")))


@pytest.fixture
def conjugated_rose():
    return MarkedGraph.from_dict({
        "schema_version": 1,
        "name": "Γc",
        "basis": ["a", "b"],
        "vertices": ["o"],
        "edges": [{"id": "ηa", "from": "o", "to": "o"}, {"id": "ηb", "from": "o", "to": "o"}],
        "base": "o",
        "spanning_tree": [],
        "marking": {"a": "ηa ηb ηa^-1", "b": "ηa ηa ηb ηa^-1"},
    })


def test_gate_repair_certifies_conjugated_images(rose2, conjugated_rose):
    m = make_morphism(rose2, conjugated_rose)
    assert m.certified
    assert m.issues == []


def test_uncertified_morphism_is_rejected(monkeypatch, rose2, conjugated_rose):
    monkeypatch.setattr(tree_morphism, "repair_gates", lambda m: m)
    with pytest.raises(ContractError) as raised:
        make_morphism(rose2, conjugated_rose)
    assert "vertex o has 1 gate(s)" in raised.value.details["issues"]
    collapsed = make_morphism(rose2, conjugated_rose, allow_collapse=True)
    assert not collapsed.certified
    assert collapsed.issues
