import pytest

from app.core.errors import InputError, SurgeryConsistencyError
from app.services import square_complex
from app.services.core_builder import (
    H_EDGE, SQUARE, V_EDGE, VERTEX, Cell, CellKey, QuotientCore, build_core, product_core,
)
from app.services.free_group import Word
from app.services.rng import SplitMix64
from app.services.square_complex import (
    S_SIDE,
    SIGMA_SIDE,
    boundary,
    canonical_form,
    free_edges,
    is_isomorphic,
    maximal_rectangles,
    rips_move,
    swap,
)
from app.services.tree_morphism import make_morphism


@pytest.fixture
def single_core(rose2, single_square):
    return build_core(make_morphism(rose2, single_square))


@pytest.fixture
def seven(seven_square_data):
    return product_core(seven_square_data)


def test_single_square_rectangles(single_core):
    assert len(maximal_rectangles(single_core, S_SIDE)) == 2
    assert len(maximal_rectangles(single_core, SIGMA_SIDE)) == 2
    for rectangle in maximal_rectangles(single_core, S_SIDE):
        assert rectangle.run == tuple(single_core.squares())


def test_single_square_free_edges(single_core):
    kinds = sorted(c.edge.kind for c in free_edges(single_core))
    assert kinds == [H_EDGE, V_EDGE]
    assert all(c.distance_bound == 2 for c in free_edges(single_core))


def test_rips_move_on_single_square(single_core):
    rectangle = maximal_rectangles(single_core, S_SIDE)[0]
    after = rips_move(single_core, rectangle)
    assert after.area == 0
    assert len(after.vertices()) == 4
    assert len(after.edges()) == 5


def test_rips_move_rejects_foreign_rectangle(single_core, seven):
    with pytest.raises(InputError):
        rips_move(single_core, maximal_rectangles(seven, S_SIDE)[0])


def test_unknown_side(single_core):
    with pytest.raises(InputError):
        boundary(single_core, "X")


def test_seven_square_rectangles(seven):
    rectangles = maximal_rectangles(seven, S_SIDE)
    assert len(rectangles) == 10
    at_left = [r for r in rectangles if r.vertex == "Pl"]
    assert len(at_left) == 2
    assert {(r.fixed_edge, r.end) for r in at_left} == {("b", "tail")}
    runs = sorted(sorted(k.t for k in r.run) for r in at_left)
    assert runs == [["η2", "η3"], ["η4", "η5"]]
    at_c1 = sorted(len(r.run) for r in rectangles if r.vertex == "C1")
    assert at_c1 == [1, 1, 3]


def test_seven_square_boundary(seven):
    cells = boundary(seven, S_SIDE)
    assert CellKey(VERTEX, "Pl", "Π") not in cells
    assert CellKey(VERTEX, "Pl", "Π23") in cells
    assert CellKey(V_EDGE, "Pl", "η0") not in cells


def test_seven_square_rips_move(seven):
    rectangle = next(
        r for r in maximal_rectangles(seven, S_SIDE)
        if r.vertex == "Pl" and {k.t for k in r.run} == {"η4", "η5"}
    )
    after = rips_move(seven, rectangle)
    assert after.area == 14
    assert CellKey(VERTEX, "Pl", "Π45") not in after
    assert CellKey(H_EDGE, "b", "Π45") not in after
    assert CellKey(H_EDGE, "b", "Π56") in after
    remaining = {k.t for k in after.squares() if k.g == "b"}
    assert remaining == {"η0", "η1", "η2", "η3", "η6"}


def test_swap_is_an_involution(seven):
    swapped = swap(seven)
    assert swapped.area == seven.area
    assert {k.kind for k in swapped.squares()} == {SQUARE}
    assert swap(swapped).keys() == seven.keys()
    assert len(maximal_rectangles(swapped, SIGMA_SIDE)) == len(maximal_rectangles(seven, S_SIDE))


def test_isomorphism_checks(single_core, seven):
    assert is_isomorphic(seven, seven.subcomplex(seven.keys()))
    assert not is_isomorphic(single_core, seven)
    assert canonical_form(seven).startswith("16:")


def test_splitmix_reference_value():
    rng = SplitMix64(0)
    assert rng.next() == 0xE220A8397B1DCDAF
    assert 0 <= SplitMix64(7).below(5) < 5


def _complex(faces: dict) -> QuotientCore:
    cells = {key: Cell(key, tuple(f)) for key, f in faces.items()}
    for boundary_faces in faces.values():
        for face in boundary_faces:
            cells.setdefault(face, Cell(face))
    return QuotientCore(cells)


def _path(first_kind: str, second_kind: str) -> QuotientCore:
    x, y, z = (CellKey(VERTEX, name, "o") for name in "xyz")
    return _complex({CellKey(first_kind, "e", "o"): (x, y), CellKey(second_kind, "f", "o"): (y, z)})


def test_equal_hashes_do_not_make_cores_isomorphic(monkeypatch, single_core, seven):
    monkeypatch.setattr(square_complex, "canonical_form", lambda core: "same")
    assert not is_isomorphic(_path(H_EDGE, H_EDGE), _path(H_EDGE, V_EDGE))
    assert is_isomorphic(_path(H_EDGE, V_EDGE), _path(H_EDGE, V_EDGE))
    assert is_isomorphic(seven, seven.subcomplex(seven.keys()))


def test_side_touching_two_edges_is_rejected():
    vertex = {name: CellKey(VERTEX, name, "o") for name in ("p", "q", "x", "r", "s", "u")}
    x = vertex["x"]
    # v-ребро конца head у квадрата e и v-ребро конца tail у квадрата f сходятся в x
    head_side = CellKey(V_EDGE, "y", "η", Word.letter("a"))
    tail_side = CellKey(V_EDGE, "y", "θ", Word.letter("b"))
    h_at_x = CellKey(H_EDGE, "e", "q")
    core = _complex({
        CellKey(SQUARE, "e", "η"): (
            CellKey(H_EDGE, "e", "p"), h_at_x, CellKey(V_EDGE, "w", "η"), head_side,
        ),
        CellKey(SQUARE, "f", "θ"): (
            CellKey(H_EDGE, "f", "r"), CellKey(H_EDGE, "f", "s"), tail_side, CellKey(V_EDGE, "z", "θ"),
        ),
        head_side: (vertex["p"], x),
        tail_side: (x, vertex["u"]),
        h_at_x: (vertex["q"], x),
    })
    with pytest.raises(SurgeryConsistencyError) as raised:
        maximal_rectangles(core, S_SIDE)
    assert len(raised.value.details["roles"]) == 2
