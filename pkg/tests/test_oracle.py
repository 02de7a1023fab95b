import random

import pytest

from app.core.config import get_settings
from app.core.errors import CoreError, InputError, ResourceLimitError
from app.services.core_builder import build_core
from app.services.free_group import Word
from app.services.marked_graph import MarkedGraph
from app.services.oracle import ABSENT, PRESENT, oracle_core, oracle_square
from app.services.tree_morphism import make_morphism


@pytest.fixture
def small_bounds():
    return get_settings(depth=3, period=2, window=2)


def test_identity_square_is_absent(rose2):
    other = rose2.renamed("G'")
    m = make_morphism(rose2, other)
    verdict = oracle_square(m, rose2.lift_edge("ea"), other.lift_edge("ea"), depth=2, period=2)
    assert verdict.verdict == ABSENT
    assert len(verdict.witnesses) < 4


def test_oracle_rejects_vertices(rose2):
    other = rose2.renamed("G'")
    m = make_morphism(rose2, other)
    with pytest.raises(InputError):
        oracle_square(m, rose2.vertex_cell(Word()), other.lift_edge("ea"))
    with pytest.raises(InputError):
        oracle_square(m, rose2.lift_edge("ea"), other.lift_edge("ea"), depth=-1)


def test_identity_core_agrees(rose2, small_bounds):
    other = rose2.renamed("G'")
    m = make_morphism(rose2, other)
    report = oracle_core(m, small_bounds)
    assert report.squares == []
    assert report.agrees_with(build_core(m))


def test_compatible_pair_agrees(rose2, rose_ab, small_bounds):
    m = make_morphism(rose2, rose_ab)
    report = oracle_core(m, small_bounds)
    assert report.squares == []
    assert not report.inconclusive
    assert report.agrees_with(build_core(m))
    reasons = {v.reason for v in report.verdicts}
    assert "band" in reasons
    assert reasons <= {"search", "band"}


def test_band_edges_are_searched(rose2, single_square):
    m = make_morphism(rose2, single_square)
    report = oracle_core(m, get_settings(depth=3, period=2, oracle_band=1))
    band = [v for v in report.verdicts if v.reason == "band"]
    assert band
    assert all(v.verdict == ABSENT for v in band)
    assert all(len(v.witnesses) < 4 for v in band)
    without = oracle_core(m, get_settings(depth=3, period=2, oracle_band=0))
    assert len(without.verdicts) < len(report.verdicts)
    assert "band" not in {v.reason for v in without.verdicts}


def test_single_square_oracle_agrees(rose2, single_square):
    m = make_morphism(rose2, single_square)
    report = oracle_core(m, get_settings(depth=4, period=2, oracle_band=0))
    core = build_core(m)
    assert report.bounds["window"] == 4
    assert report.agrees_with(core)
    present = [v for v in report.verdicts if v.verdict == PRESENT]
    assert len(present) == 1
    assert len(present[0].witnesses) == 4


def _random_target(rng: random.Random, name: str) -> MarkedGraph:
    x, y = Word.letter("ηa"), Word.letter("ηb")
    for _ in range(rng.randint(1, 3)):
        move = rng.randrange(6)
        if move == 0:
            x = x * y
        elif move == 1:
            x = y * x
        elif move == 2:
            x = x * y.inverse()
        elif move == 3:
            y = y * x
        elif move == 4:
            y = x.inverse() * y
        else:
            x, y = y, x.inverse()
    return MarkedGraph.from_dict({
        "schema_version": 1,
        "name": name,
        "basis": ["a", "b"],
        "vertices": ["o"],
        "edges": [{"id": "ηa", "from": "o", "to": "o"}, {"id": "ηb", "from": "o", "to": "o"}],
        "base": "o",
        "spanning_tree": [],
        "marking": {"a": str(x), "b": str(y)},
    })


def test_oracle_matches_core_on_random_targets(rose2):
    rng = random.Random(2024)
    bounds = get_settings(depth=3, period=2, window=6, oracle_band=0)
    seen = set()
    checked = 0
    for attempt in range(200):
        if checked >= 25:
            break
        target = _random_target(rng, f"Γ{attempt}")
        marking = tuple(sorted(target.to_dict()["marking"].items()))
        if marking in seen:
            continue
        seen.add(marking)
        try:
            m = make_morphism(rose2, target)
            report = oracle_core(m, bounds)
        except (ResourceLimitError, CoreError):
            continue
        core = build_core(m)
        assert set(report.squares) <= set(core.squares()), target.name
        if not report.inconclusive:
            assert report.squares == core.squares(), target.name
        checked += 1
    assert checked >= 25


def test_window_must_contain_hull(rose2, single_square):
    m = make_morphism(rose2, single_square)
    with pytest.raises(ResourceLimitError) as raised:
        oracle_core(m, get_settings(window=0))
    assert "orbit" in raised.value.details


def test_window_respects_ball_cap(rose2, rose_ab):
    m = make_morphism(rose2, rose_ab)
    with pytest.raises(ResourceLimitError):
        oracle_core(m, get_settings(window=5, ball_cap=2))
