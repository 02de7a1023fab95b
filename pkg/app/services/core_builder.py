"""Оболочки прообразов и сборка факторизованного ядра Гирарделя.

Клетки ядра нумеруются ключами (вид, метка в G, метка в Γ, слово w):
клетка - орбита произведения канонического поднятия клетки G на
w-сдвиг канонического поднятия клетки Γ.
"""
import logging
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Set, Tuple

from app.core.errors import InputError
from app.services.free_group import Word
from app.services.marked_graph import MarkedGraph, OrientedTreeEdge, TreeCell, cell_sort_key, geodesic_edges
from app.services.tree_morphism import GraphMap, make_morphism, preimage_crossings

logger = logging.getLogger(__name__)

SQUARE, H_EDGE, V_EDGE, VERTEX = "square", "h", "v", "vertex"
SWAPPED_KIND = {SQUARE: SQUARE, H_EDGE: V_EDGE, V_EDGE: H_EDGE, VERTEX: VERTEX}


@dataclass(frozen=True, order=True)
class CellKey:
    kind: str
    g: str
    t: str
    word: Word = Word()

    def swapped(self) -> "CellKey":
        return CellKey(SWAPPED_KIND[self.kind], self.t, self.g, self.word.inverse())

    def to_dict(self) -> dict:
        return {"kind": self.kind, "g": self.g, "t": self.t, "word": str(self.word)}

    @classmethod
    def from_dict(cls, data: dict) -> "CellKey":
        if data.get("kind") not in SWAPPED_KIND:
            raise InputError(f"Unknown cell kind: {data.get('kind')}")
        return cls(data["kind"], str(data["g"]), str(data["t"]), Word.parse(data.get("word", "")))

    def __str__(self) -> str:
        return f"{self.kind}({self.g},{self.t},{self.word or '1'})"


@dataclass(frozen=True)
class Cell:
    key: CellKey
    faces: Tuple[CellKey, ...] = ()


class Factor:
    """Комбинаторика одного сомножителя: концы рёбер и их элементы λ"""

    def __init__(self, name: str, ends: Mapping[str, Tuple[str, str]], lambdas: Optional[Mapping[str, Word]] = None):
        self.name = name
        self.ends = dict(ends)
        self.lambdas = dict(lambdas or {})

    @classmethod
    def of(cls, graph: MarkedGraph) -> "Factor":
        return cls(graph.name, {e.id: (e.tail, e.head) for e in graph.edges.values()}, graph.lambdas)

    def lam(self, eid: str) -> Word:
        return self.lambdas.get(eid, Word())


def square_faces(key: CellKey, g: Factor, t: Factor) -> Tuple[CellKey, ...]:
    """Грани квадрата в порядке: h у начала η, h у конца η, v у начала e, v у конца e"""
    g_tail, g_head = g.ends[key.g]
    t_tail, t_head = t.ends[key.t]
    w = key.word
    return (
        CellKey(H_EDGE, key.g, t_tail, w),
        CellKey(H_EDGE, key.g, t_head, w * t.lam(key.t)),
        CellKey(V_EDGE, g_tail, key.t, w),
        CellKey(V_EDGE, g_head, key.t, g.lam(key.g).inverse() * w),
    )


def edge_faces(key: CellKey, g: Factor, t: Factor) -> Tuple[CellKey, ...]:
    w = key.word
    if key.kind == H_EDGE:
        tail, head = g.ends[key.g]
        return CellKey(VERTEX, tail, key.t, w), CellKey(VERTEX, head, key.t, g.lam(key.g).inverse() * w)
    tail, head = t.ends[key.t]
    return CellKey(VERTEX, key.g, tail, w), CellKey(VERTEX, key.g, head, w * t.lam(key.t))


def faces_of(key: CellKey, g: Factor, t: Factor) -> Tuple[CellKey, ...]:
    if key.kind == SQUARE:
        return square_faces(key, g, t)
    if key.kind in (H_EDGE, V_EDGE):
        return edge_faces(key, g, t)
    return ()


class QuotientCore:
    """Конечный квадратный комплекс с клетками, гранями и диагностикой"""

    def __init__(
        self,
        cells: Mapping[CellKey, Cell],
        source: str = "G",
        target: str = "Γ",
        metadata: Optional[dict] = None,
        diagnostics: Optional[dict] = None,
        hulls: Optional[List[dict]] = None,
    ):
        self.cells: Dict[CellKey, Cell] = dict(cells)
        self.source = source
        self.target = target
        self.metadata = dict(metadata or {})
        self.diagnostics = dict(diagnostics or {})
        self.hulls = list(hulls or [])
        self._cofaces: Optional[Dict[CellKey, Set[CellKey]]] = None

    @classmethod
    def from_keys(cls, keys: Iterable[CellKey], g: Factor, t: Factor, **kwargs) -> "QuotientCore":
        """Замыкание набора клеток по граням"""
        cells: Dict[CellKey, Cell] = {}
        queue = deque(keys)
        while queue:
            key = queue.popleft()
            if key in cells:
                continue
            faces = faces_of(key, g, t)
            cells[key] = Cell(key, faces)
            queue.extend(faces)
        return cls(cells, g.name, t.name, **kwargs)

    # --- доступ ---

    def keys(self, kind: Optional[str] = None) -> List[CellKey]:
        return sorted(k for k in self.cells if kind is None or k.kind == kind)

    def squares(self) -> List[CellKey]:
        return self.keys(SQUARE)

    def edges(self) -> List[CellKey]:
        return sorted(k for k in self.cells if k.kind in (H_EDGE, V_EDGE))

    def vertices(self) -> List[CellKey]:
        return self.keys(VERTEX)

    @property
    def area(self) -> int:
        return len(self.squares())

    def euler_characteristic(self) -> int:
        return len(self.vertices()) - len(self.edges()) + self.area

    def faces(self, key: CellKey) -> Tuple[CellKey, ...]:
        return self.cells[key].faces

    @property
    def cofaces(self) -> Dict[CellKey, Set[CellKey]]:
        if self._cofaces is None:
            cofaces: Dict[CellKey, Set[CellKey]] = {k: set() for k in self.cells}
            for key, cell in self.cells.items():
                for face in cell.faces:
                    if face in cofaces:
                        cofaces[face].add(key)
            self._cofaces = cofaces
        return self._cofaces

    def __contains__(self, key: CellKey) -> bool:
        return key in self.cells

    def __len__(self) -> int:
        return len(self.cells)

    # --- преобразования ---

    def subcomplex(self, keys: Iterable[CellKey], **overrides) -> "QuotientCore":
        keep = set(keys)
        return QuotientCore(
            {k: c for k, c in self.cells.items() if k in keep},
            overrides.get("source", self.source),
            overrides.get("target", self.target),
            overrides.get("metadata", self.metadata),
            overrides.get("diagnostics", {}),
            overrides.get("hulls", []),
        )

    def swapped(self) -> "QuotientCore":
        """Ядро с переставленными сомножителями"""
        cells = {}
        for key, cell in self.cells.items():
            faces = tuple(f.swapped() for f in cell.faces)
            if key.kind == SQUARE:
                faces = faces[2:] + faces[:2]
            cells[key.swapped()] = Cell(key.swapped(), faces)
        metadata = dict(self.metadata)
        metadata["swapped"] = not metadata.get("swapped", False)
        return QuotientCore(cells, self.target, self.source, metadata, dict(self.diagnostics))

    def restrict_to(self, keys: Iterable[CellKey]) -> "QuotientCore":
        """Подкомплекс, порождённый клетками keys вместе с их гранями"""
        keep: Set[CellKey] = set()
        queue = deque(k for k in keys if k in self.cells)
        while queue:
            key = queue.popleft()
            if key in keep:
                continue
            keep.add(key)
            queue.extend(self.cells[key].faces)
        return self.subcomplex(keep)

    # --- сериализация ---

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "source": self.source,
            "target": self.target,
            "area": self.area,
            "cells": [
                {**key.to_dict(), "faces": [f.to_dict() for f in self.cells[key].faces]}
                for key in self.keys()
            ],
            "metadata": self.metadata,
            "diagnostics": self.diagnostics,
            "hulls": self.hulls,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "QuotientCore":
        if data.get("schema_version", 1) != 1:
            raise InputError("Unsupported schema version", {"schema_version": data.get("schema_version")})
        cells = {}
        for item in data.get("cells", []):
            key = CellKey.from_dict(item)
            cells[key] = Cell(key, tuple(CellKey.from_dict(f) for f in item.get("faces", [])))
        for cell in cells.values():
            for face in cell.faces:
                if face not in cells:
                    raise InputError("Core is not closed under faces", {"cell": str(cell.key), "face": str(face)})
        return cls(
            cells,
            data.get("source", "G"),
            data.get("target", "Γ"),
            data.get("metadata"),
            data.get("diagnostics"),
            data.get("hulls"),
        )


# --- оболочки ---


@dataclass
class HullData:
    """Оболочка прообраза ребра цели"""
    graph: MarkedGraph
    eta: TreeCell
    P: List[TreeCell]
    crossing_signs: Dict[TreeCell, int]
    hull_edges: FrozenSet[TreeCell]
    hull_vertices: FrozenSet[TreeCell]
    H: FrozenSet[TreeCell]
    P_hat: FrozenSet[TreeCell]
    CH: FrozenSet[TreeCell] = frozenset()
    colours: Dict[TreeCell, int] = field(default_factory=dict)

    def degree_in_hull(self, vertex: TreeCell) -> int:
        return sum(1 for _ in self._hull_steps(vertex))

    def _hull_steps(self, vertex: TreeCell):
        for token, other in self.graph.neighbors(vertex):
            edge = self.graph.edge_cell(vertex.address, token)
            if edge in self.hull_edges:
                yield edge, other

    def escape_capable(self, vertex: TreeCell) -> bool:
        """Есть ли у вершины ребро дерева вне оболочки"""
        return self.graph.valence(self.graph.end_of(vertex)) > self.degree_in_hull(vertex)

    def component(self, start: TreeCell, removed: TreeCell) -> Set[TreeCell]:
        """Вершины оболочки, достижимые из start без ребра removed"""
        seen = {start}
        queue = deque([start])
        while queue:
            vertex = queue.popleft()
            for edge, other in self._hull_steps(vertex):
                if edge != removed and other not in seen:
                    seen.add(other)
                    queue.append(other)
        return seen

    def end_colours(self, vertices: Iterable[TreeCell]) -> Set[int]:
        return {self.colours[v] for v in vertices if self.escape_capable(v)}

    def crosses(self, edge: TreeCell) -> bool:
        """Точный критерий: обе стороны ребра несут концы обоих цветов"""
        if edge not in self.hull_edges:
            return False
        tail, head = self.graph.edge_endpoints(edge)
        full = {-1, 1}
        return (
            self.end_colours(self.component(tail, edge)) == full
            and self.end_colours(self.component(head, edge)) == full
        )

    def blowup_vertices(self) -> List[TreeCell]:
        """Вершины, где ни одна ветвь не отделяет концы разных цветов"""
        found = []
        full = {-1, 1}
        for vertex in sorted(self.hull_vertices, key=cell_sort_key):
            branches = []
            for token, other in self.graph.neighbors(vertex):
                edge = self.graph.edge_cell(vertex.address, token)
                if edge in self.hull_edges:
                    branches.append(self.end_colours(self.component(other, edge)))
                else:
                    branches.append({self.colours[vertex]})
            if all(
                set().union(*(b for j, b in enumerate(branches) if j != i)) == full
                for i in range(len(branches))
            ):
                found.append(vertex)
        return found

    def separating_edge(self) -> Optional[Tuple[TreeCell, TreeCell, TreeCell]]:
        """Ребро оболочки, делящее концы точно по цветам: (ребро, вершина цвета -1, вершина цвета +1)"""
        for edge in sorted(self.hull_edges, key=cell_sort_key):
            tail, head = self.graph.edge_endpoints(edge)
            sides = (self.end_colours(self.component(tail, edge)), self.end_colours(self.component(head, edge)))
            if sides == ({-1}, {1}):
                return edge, tail, head
            if sides == ({1}, {-1}):
                return edge, head, tail
        return None

    def summary(self) -> dict:
        return {
            "eta": self.eta.edge,
            "P": len(self.P),
            "H": len(self.H),
            "CH": len(self.CH),
            "hull_equals_consolidated": self.H == self.CH,
        }


def hull(m: GraphMap, eta: TreeCell) -> HullData:
    """P, выпуклая оболочка P, её внутренность H и экстремальное множество P̂"""
    graph = m.source
    crossings = preimage_crossings(m, eta)
    P = [c.edge for c in crossings]
    endpoints: Set[TreeCell] = set()
    for edge in P:
        endpoints.update(graph.edge_endpoints(edge))
    hull_edges: Set[TreeCell] = set(P)
    if endpoints:
        root = min(endpoints, key=cell_sort_key)
        for vertex in endpoints:
            hull_edges.update(geodesic_edges(graph, root, vertex))
    degree: Counter = Counter()
    hull_vertices: Set[TreeCell] = set(endpoints)
    for edge in hull_edges:
        for end in graph.edge_endpoints(edge):
            degree[end] += 1
            hull_vertices.add(end)
    interior = frozenset(e for e in hull_edges if all(degree[v] > 1 for v in graph.edge_endpoints(e)))
    data = HullData(
        graph=graph,
        eta=eta,
        P=P,
        crossing_signs={c.edge: c.sign for c in crossings},
        hull_edges=frozenset(hull_edges),
        hull_vertices=frozenset(hull_vertices),
        H=interior,
        P_hat=frozenset(set(P) - interior),
    )
    data.colours = {v: m.target.side_of(eta, m.lift_address(v.address).letters) for v in hull_vertices}
    data.CH = frozenset(
        e for e in interior
        if can_escape(OrientedTreeEdge(e, 1), data) and can_escape(OrientedTreeEdge(e, -1), data)
    )
    logger.debug("Hull of %s: |P|=%d |H|=%d |CH|=%d", eta, len(P), len(interior), len(data.CH))
    return data


def can_escape(oriented: OrientedTreeEdge, hd: HullData) -> bool:
    """Выходит ли луч вперёд по ребру из оболочки, не пересекая P̂"""
    graph = hd.graph
    tail, head = graph.edge_endpoints(oriented.cell)
    start = head if oriented.direction > 0 else tail
    blocked = set(hd.P_hat) | {oriented.cell}
    seen = {start}
    queue = deque([start])
    while queue:
        vertex = queue.popleft()
        if vertex not in hd.hull_vertices:
            return True
        for token, other in graph.neighbors(vertex):
            if graph.edge_cell(vertex.address, token) in blocked or other in seen:
                continue
            seen.add(other)
            queue.append(other)
    return False


def consolidated_hull(m: GraphMap, eta: TreeCell) -> FrozenSet[TreeCell]:
    return hull(m, eta).CH


def _slice_keys(m: GraphMap, hd: HullData, edges: Iterable[TreeCell]) -> List[CellKey]:
    keys = []
    for edge in edges:
        g1 = m.source.element(edge.address)
        keys.append(CellKey(SQUARE, edge.edge, hd.eta.edge, g1.inverse()))
    return keys


def _free_keys(m: GraphMap, hd: HullData, kind: str) -> List[CellKey]:
    keys = []
    for vertex in hd.blowup_vertices():
        g1 = m.source.element(vertex.address)
        keys.append(CellKey(kind, m.source.end_of(vertex), hd.eta.edge, g1.inverse()))
    return keys


def _corner_keys(m: GraphMap, hd: HullData) -> List[Tuple[CellKey, CellKey]]:
    """Два способа заменить общее ребро парой h- и v-рёбер с угловой вершиной"""
    found = hd.separating_edge()
    if found is None:
        return []
    edge, low, high = found
    g1 = m.source.element(edge.address).inverse()
    t_tail, t_head = m.target.edges[hd.eta.edge].tail, m.target.edges[hd.eta.edge].head

    def v_key(vertex: TreeCell) -> CellKey:
        return CellKey(V_EDGE, m.source.end_of(vertex), hd.eta.edge, m.source.element(vertex.address).inverse())

    return [
        (v_key(low), CellKey(H_EDGE, edge.edge, t_head, g1 * m.target.lambdas[hd.eta.edge])),
        (v_key(high), CellKey(H_EDGE, edge.edge, t_tail, g1)),
    ]


def build_core(
    m: GraphMap,
    reverse: Optional[GraphMap] = None,
    free_cells: bool = True,
    ambient: Optional[Callable[[CellKey], bool]] = None,
) -> QuotientCore:
    """Ядро по критерию оболочек, с гранями и свободными клетками.

    ambient - признак клеток объемлющего ядра; если задан, общее ребро
    заменяется тем углом (h-ребро + v-ребро), чьи клетки ему принадлежат.
    """
    source, target = m.source, m.target
    certified = getattr(m, "certified", False)
    square_keys: List[CellKey] = []
    free: List[CellKey] = []
    shared: List[dict] = []
    corners: List[dict] = []
    resolved: Set[str] = set()
    hull_table = []
    mismatches = []
    for eta_id in target.edges:
        hd = hull(m, target.lift_edge(eta_id))
        exact = frozenset(e for e in hd.hull_edges if hd.crosses(e))
        chosen = hd.CH if certified else exact
        if hd.CH != exact:
            mismatches.append(eta_id)
            logger.warning("Consolidated hull and end-colour criterion differ over %s", eta_id)
        if hd.H != hd.CH:
            logger.debug("Hull interior differs from consolidated hull over %s", eta_id)
        row = hd.summary()
        row["squares"] = len(chosen)
        hull_table.append(row)
        square_keys.extend(_slice_keys(m, hd, chosen))
        if chosen or not free_cells:
            continue
        found = _free_keys(m, hd, V_EDGE)
        free.extend(found)
        if found:
            continue
        pair = None
        if ambient is not None:
            pair = next((p for p in _corner_keys(m, hd) if all(ambient(k) for k in p)), None)
        if pair is None:
            shared.append({"factor": "target", "edge": eta_id})
            continue
        free.extend(pair)
        resolved.add(pair[1].g)
        corners.append({"edge": pair[1].g, "eta": eta_id, "corner": str(pair[0])})

    g_with_squares = {k.g for k in square_keys}
    lonely = [e for e in source.edges if e not in g_with_squares and e not in resolved]
    if lonely and free_cells:
        if reverse is None:
            reverse = make_morphism(target, source, allow_collapse=True)
        for eid in lonely:
            hd = hull(reverse, source.lift_edge(eid))
            found = [k.swapped() for k in _free_keys(reverse, hd, V_EDGE)]
            free.extend(found)
            if not found:
                shared.append({"factor": "source", "edge": eid})

    if shared:
        logger.warning("Shared edges between %s and %s: %s", source.name, target.name, shared)
    if corners:
        logger.debug("Shared edges resolved by corners: %s", corners)
    core = QuotientCore.from_keys(
        square_keys + free,
        Factor.of(source),
        Factor.of(target),
        metadata={"certified": certified, "criterion": "consolidated_hull" if certified else "end_colour"},
        diagnostics={"shared_edges": shared, "shared_corners": corners, "criterion_mismatches": mismatches},
        hulls=hull_table,
    )
    logger.info("Core of %s and %s: area %d, %d cells", source.name, target.name, core.area, len(core))
    return core


def slice_support(core: QuotientCore, eta: str, graph: Optional[MarkedGraph] = None) -> Set:
    """Рёбра G, образующие квадраты с каноническим поднятием eta"""
    members = [k for k in core.squares() if k.t == eta]
    if graph is None:
        return {(k.g, k.word) for k in members}
    return {graph.cell_at(k.word.inverse(), k.g, is_edge=True) for k in members}


def core_area(core: QuotientCore) -> int:
    return core.area


def product_core(data: dict) -> QuotientCore:
    """Ядро, заданное явным списком квадратов в произведении двух деревьев"""
    try:
        g = Factor(data["source"]["name"], {e: tuple(ends) for e, ends in data["source"]["edges"].items()})
        t = Factor(data["target"]["name"], {e: tuple(ends) for e, ends in data["target"]["edges"].items()})
        keys = [CellKey(SQUARE, str(a), str(b)) for a, b in data["squares"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"Malformed product core: {exc}")
    for key in keys:
        if key.g not in g.ends or key.t not in t.ends:
            raise InputError(f"Unknown edge in square {key}")
    return QuotientCore.from_keys(keys, g, t, metadata={"kind": "product"})
