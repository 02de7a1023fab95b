"""Границы ядра, стороны, максимальные граничные прямоугольники и ходы Рипса."""
import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Set, Tuple

import networkx as nx

from app.core.errors import InputError, SurgeryConsistencyError
from app.services.core_builder import H_EDGE, SQUARE, V_EDGE, VERTEX, CellKey, QuotientCore

logger = logging.getLogger(__name__)

S_SIDE, SIGMA_SIDE = "S", "Σ"
SIDES = (S_SIDE, SIGMA_SIDE)


def _check_side(side: str) -> None:
    if side not in SIDES:
        raise InputError(f"Unknown side: {side}", {"side": side})


def boundary(core: QuotientCore, side: str = S_SIDE) -> Set[CellKey]:
    """Открытые рёбра ровно одного квадрата и вершины ровно трёх рёбер"""
    _check_side(side)
    own, other = (V_EDGE, H_EDGE) if side == S_SIDE else (H_EDGE, V_EDGE)
    cofaces = core.cofaces
    cells = set()
    for key in core.cells:
        if key.kind == own and len(cofaces[key]) == 1:
            cells.add(key)
        elif key.kind == VERTEX:
            kinds = [c.kind for c in cofaces[key]]
            if kinds.count(own) == 2 and kinds.count(other) == 1:
                cells.add(key)
    return cells


def sides(core: QuotientCore, side: str = S_SIDE) -> List[FrozenSet[CellKey]]:
    """Связные компоненты границы"""
    cells = boundary(core, side)
    graph = nx.Graph()
    graph.add_nodes_from(cells)
    for key in cells:
        if key.kind != VERTEX:
            for face in core.faces(key):
                if face in cells:
                    graph.add_edge(key, face)
    components = [frozenset(c) for c in nx.connected_components(graph)]
    return sorted(components, key=lambda c: min(c))


@dataclass(frozen=True)
class BoundaryRectangle:
    side_label: str
    fixed_edge: str
    end: str
    vertex: str
    run: Tuple[CellKey, ...]
    side_cells: FrozenSet[CellKey]

    def swapped(self) -> "BoundaryRectangle":
        return BoundaryRectangle(
            SIGMA_SIDE if self.side_label == S_SIDE else S_SIDE,
            self.fixed_edge,
            self.end,
            self.vertex,
            tuple(sorted(k.swapped() for k in self.run)),
            frozenset(k.swapped() for k in self.side_cells),
        )

    def sort_key(self) -> tuple:
        return self.fixed_edge, min(self.run), min(self.side_cells)

    def to_dict(self) -> dict:
        return {
            "side": self.side_label,
            "fixed_edge": self.fixed_edge,
            "end": self.end,
            "vertex": self.vertex,
            "run": [k.to_dict() for k in self.run],
            "side_cells": [k.to_dict() for k in sorted(self.side_cells)],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BoundaryRectangle":
        return cls(
            data["side"],
            data["fixed_edge"],
            data["end"],
            data["vertex"],
            tuple(CellKey.from_dict(k) for k in data["run"]),
            frozenset(CellKey.from_dict(k) for k in data["side_cells"]),
        )


def _rectangle(core: QuotientCore, component: FrozenSet[CellKey]) -> Optional[BoundaryRectangle]:
    side_edges = [k for k in component if k.kind == V_EDGE]
    if not side_edges:
        return None
    run: Set[CellKey] = set()
    roles: Set[Tuple[str, str]] = set()
    for edge in side_edges:
        for square in core.cofaces[edge]:
            faces = core.faces(square)
            role = "tail" if faces[2] == edge else "head"
            run.add(square)
            roles.add((square.g, role))
    if len(roles) != 1:
        raise SurgeryConsistencyError(
            "Boundary side touches squares of different edges or ends",
            {"side": [str(k) for k in sorted(component)], "roles": [list(r) for r in sorted(roles)]},
        )
    fixed_edge, end = roles.pop()
    return BoundaryRectangle(S_SIDE, fixed_edge, end, side_edges[0].g, tuple(sorted(run)), component)


def maximal_rectangles(core: QuotientCore, side: str = S_SIDE) -> List[BoundaryRectangle]:
    """По одному прямоугольнику на каждую сторону, в каноническом порядке"""
    _check_side(side)
    if side == SIGMA_SIDE:
        return sorted((r.swapped() for r in maximal_rectangles(core.swapped(), S_SIDE)), key=BoundaryRectangle.sort_key)
    found = [r for r in (_rectangle(core, c) for c in sides(core, S_SIDE)) if r is not None]
    return sorted(found, key=BoundaryRectangle.sort_key)


def rips_move(core: QuotientCore, rectangle: BoundaryRectangle) -> QuotientCore:
    """Удаляет орбиту прямоугольника: квадраты, открытые рёбра стороны и общие рёбра"""
    missing = [k for k in tuple(rectangle.run) + tuple(rectangle.side_cells) if k not in core]
    if missing:
        raise InputError("Rectangle is not present in the core", {"missing": [str(k) for k in missing]})
    run = set(rectangle.run)
    own = V_EDGE if rectangle.side_label == S_SIDE else H_EDGE
    removed = set(run) | {k for k in rectangle.side_cells if k.kind == own}
    cross = H_EDGE if own == V_EDGE else V_EDGE
    for square in run:
        for face in core.faces(square):
            if face.kind != cross:
                continue
            cofaces = core.cofaces[face]
            if len(cofaces & run) >= 2 and cofaces <= run:
                removed.add(face)
    kept = {k for k in core.cells if k not in removed}
    still_bounding = set()
    for key in kept:
        if key.kind in (H_EDGE, V_EDGE):
            still_bounding.update(core.faces(key))
    kept = {k for k in kept if k.kind != VERTEX or k in still_bounding}
    result = core.subcomplex(kept, diagnostics={"rips_from": rectangle.to_dict()})
    logger.debug("Rips move on %s: area %d -> %d", rectangle.fixed_edge, core.area, result.area)
    return result


@dataclass(frozen=True)
class FreeEdgeCertificate:
    edge: CellKey
    distance_bound: int = 2

    def to_dict(self) -> dict:
        return {"edge": self.edge.to_dict(), "distance_bound": self.distance_bound}


def free_edges(core: QuotientCore) -> List[FreeEdgeCertificate]:
    """Рёбра, не лежащие ни на одном квадрате"""
    return [FreeEdgeCertificate(k) for k in core.edges() if not core.cofaces[k]]


def incidence_graph(core: QuotientCore) -> nx.Graph:
    """Граф инцидентности с метками вида клеток и принадлежности границам"""
    s_boundary = boundary(core, S_SIDE)
    sigma_boundary = boundary(core, SIGMA_SIDE)
    graph = nx.Graph()
    for key, cell in core.cells.items():
        label = key.kind
        if key in s_boundary:
            label += "|S"
        if key in sigma_boundary:
            label += "|Σ"
        graph.add_node(key, label=label)
    for key, cell in core.cells.items():
        for position, face in enumerate(cell.faces):
            graph.add_edge(key, face, role=_role(key.kind, position))
    return graph


def _role(kind: str, position: int) -> str:
    if kind == SQUARE:
        return ("h", "h", "v", "v")[position]
    return "end"


def canonical_form(core: QuotientCore) -> str:
    """Хэш Вейсфейлера-Лемана помеченного графа инцидентности.

    Изоморфные ядра дают равные формы, обратное не гарантировано:
    равенство ядер решает только is_isomorphic.
    """
    graph = incidence_graph(core)
    digest = nx.weisfeiler_lehman_graph_hash(graph, node_attr="label", edge_attr="role", iterations=4)
    return f"{core.area}:{len(core)}:{digest}"


def is_isomorphic(first: QuotientCore, second: QuotientCore) -> bool:
    """Точная проверка изоморфизма с учётом меток (VF2); хэш служит только фильтром"""
    if len(first) != len(second) or first.area != second.area:
        return False
    if canonical_form(first) != canonical_form(second):
        return False
    matcher = nx.algorithms.isomorphism.GraphMatcher(
        incidence_graph(first),
        incidence_graph(second),
        node_match=lambda a, b: a["label"] == b["label"],
        edge_match=lambda a, b: a["role"] == b["role"],
    )
    return matcher.is_isomorphic()


def swap(core: QuotientCore) -> QuotientCore:
    return core.swapped()
