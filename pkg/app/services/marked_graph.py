"""Маркированные графы и клетки их универсальных накрытий.

Вершина дерева задаётся приведённым путём по рёбрам из базовой вершины
(адресом), ребро дерева - адресом своего начала и идентификатором ребра
факторграфа. Группа действует переписыванием адреса: g·A = Loop(g)·A.
"""
import logging
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

import networkx as nx

from app.core.errors import CoreError, InputError, ResourceLimitError
from app.schemas.graph import MarkedGraphSchema
from app.services.free_group import (
    Basis, Letter, Word, inverse_letter, invert_isomorphism, is_pi1_isomorphism, reduce, substitute,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GraphEdge:
    id: str
    tail: str
    head: str
    label: Optional[str] = None


@dataclass(frozen=True)
class TreeCell:
    """Вершина (edge=None) или ребро универсального накрытия"""
    graph: str
    address: Word
    edge: Optional[str] = None

    @property
    def is_edge(self) -> bool:
        return self.edge is not None

    def __str__(self) -> str:
        where = str(self.address) or "1"
        return f"{self.graph}[{where}]" + (f"·{self.edge}" if self.edge else "")


@dataclass(frozen=True)
class OrientedTreeEdge:
    cell: TreeCell
    direction: int = 1

    def reversed(self) -> "OrientedTreeEdge":
        return OrientedTreeEdge(self.cell, -self.direction)


@dataclass(frozen=True)
class Subtree:
    vertices: FrozenSet[TreeCell]
    edges: FrozenSet[TreeCell]


@dataclass
class Issue:
    code: str
    message: str
    cell: Optional[str] = None

    def to_dict(self) -> dict:
        return {"code": self.code, "cell": self.cell, "message": self.message}


@dataclass
class GraphDiagnostics:
    rank: int
    issues: List[Issue] = field(default_factory=list)

    @property
    def accepted(self) -> bool:
        return not self.issues

    def to_dict(self) -> dict:
        return {"accepted": self.accepted, "rank": self.rank, "issues": [i.to_dict() for i in self.issues]}


class MarkedGraph:
    """Конечный граф с базовой вершиной, остовным деревом и маркировкой"""

    def __init__(
        self,
        basis: Basis,
        vertices: Sequence[str],
        edges: Sequence[GraphEdge],
        base: str,
        spanning_tree: Iterable[str],
        name: str = "G",
        marking: Optional[Mapping[str, Word]] = None,
    ):
        self.basis = basis
        self.vertices: Tuple[str, ...] = tuple(vertices)
        self.edges: Dict[str, GraphEdge] = {e.id: e for e in edges}
        self.base = base
        self.spanning_tree: FrozenSet[str] = frozenset(spanning_tree)
        self.name = name
        self.explicit_marking: Optional[Dict[str, Word]] = dict(marking) if marking is not None else None
        if len(self.edges) != len(edges):
            raise InputError("Duplicate edge id", {"graph": name})

    # --- построение и сериализация ---

    @classmethod
    def from_dict(cls, data: dict, name: Optional[str] = None) -> "MarkedGraph":
        schema = MarkedGraphSchema.model_validate(data)
        return cls.from_schema(schema, name)

    @classmethod
    def from_schema(cls, schema: MarkedGraphSchema, name: Optional[str] = None) -> "MarkedGraph":
        basis = Basis(tuple(schema.basis))
        edges = [GraphEdge(e.id, e.from_, e.to, e.label) for e in schema.edges]
        marking = None
        if schema.marking is not None:
            marking = {symbol: Word.parse(path) for symbol, path in schema.marking.items()}
        return cls(
            basis=basis,
            vertices=schema.vertices,
            edges=edges,
            base=schema.base,
            spanning_tree=schema.spanning_tree,
            name=name or schema.name or "G",
            marking=marking,
        )

    def to_dict(self) -> dict:
        data = {
            "schema_version": 1,
            "name": self.name,
            "basis": list(self.basis.symbols),
            "vertices": list(self.vertices),
            "edges": [],
            "base": self.base,
            "spanning_tree": sorted(self.spanning_tree),
        }
        for edge in self.edges.values():
            item = {"id": edge.id, "from": edge.tail, "to": edge.head}
            if edge.label is not None:
                item["label"] = edge.label
            data["edges"].append(item)
        if self.explicit_marking is not None:
            data["marking"] = {s: str(p) for s, p in self.explicit_marking.items()}
        return data

    def renamed(self, name: str) -> "MarkedGraph":
        return MarkedGraph(
            self.basis, self.vertices, list(self.edges.values()), self.base,
            self.spanning_tree, name, self.explicit_marking,
        )

    # --- комбинаторика факторграфа ---

    @property
    def rank(self) -> int:
        return len(self.edges) - len(self.vertices) + 1

    @property
    def non_tree_edges(self) -> List[str]:
        return [eid for eid in self.edges if eid not in self.spanning_tree]

    def token_start(self, token: Letter) -> str:
        edge = self.edges[token[0]]
        return edge.tail if token[1] > 0 else edge.head

    def token_end(self, token: Letter) -> str:
        edge = self.edges[token[0]]
        return edge.head if token[1] > 0 else edge.tail

    def half_edges(self, vertex: str) -> List[Letter]:
        """Исходящие полурёбра вершины в порядке объявления рёбер"""
        found: List[Letter] = []
        for edge in self.edges.values():
            if edge.tail == vertex:
                found.append((edge.id, 1))
            if edge.head == vertex:
                found.append((edge.id, -1))
        return found

    def valence(self, vertex: str) -> int:
        return len(self.half_edges(vertex))

    def walk(self, path: Word, start: Optional[str] = None) -> str:
        """Конечная вершина пути; путь обязан быть связным"""
        current = self.base if start is None else start
        for token in path:
            if token[0] not in self.edges:
                raise InputError(f"Unknown edge: {token[0]}", {"graph": self.name, "edge": token[0]})
            if self.token_start(token) != current:
                raise InputError(
                    "Edge path is not contiguous",
                    {"graph": self.name, "path": str(path), "at": token[0]},
                )
            current = self.token_end(token)
        return current

    def nx_graph(self) -> nx.MultiGraph:
        graph = nx.MultiGraph()
        graph.add_nodes_from(self.vertices)
        for edge in self.edges.values():
            graph.add_edge(edge.tail, edge.head, key=edge.id)
        return graph

    # --- маркировка ---

    @cached_property
    def tree_paths(self) -> Dict[str, Word]:
        """Путь по остовному дереву из базы в каждую вершину"""
        paths = {self.base: Word()}
        queue = deque([self.base])
        while queue:
            vertex = queue.popleft()
            for token in self.half_edges(vertex):
                if token[0] not in self.spanning_tree:
                    continue
                other = self.token_end(token)
                if other not in paths:
                    paths[other] = paths[vertex] * Word([token])
                    queue.append(other)
        return paths

    def tree_path(self, vertex: str) -> Word:
        try:
            return self.tree_paths[vertex]
        except KeyError:
            raise InputError(f"Vertex not reached by spanning tree: {vertex}", {"graph": self.name, "vertex": vertex})

    def _default_assignment(self) -> Dict[str, str]:
        """Символ базиса -> неостовное ребро (по метке, иначе по порядку)"""
        non_tree = self.non_tree_edges
        labelled = {self.edges[e].label: e for e in non_tree if self.edges[e].label is not None}
        if labelled:
            return {symbol: labelled[symbol] for symbol in self.basis.symbols if symbol in labelled}
        return dict(zip(self.basis.symbols, non_tree))

    @cached_property
    def marking_loops(self) -> Dict[str, Word]:
        """Замкнутые пути m(x) в базовой вершине"""
        if self.explicit_marking is not None:
            return {s: Word(p.letters) for s, p in self.explicit_marking.items()}
        loops = {}
        for symbol, eid in self._default_assignment().items():
            edge = self.edges[eid]
            loops[symbol] = self.tree_path(edge.tail) * Word.letter(eid) * self.tree_path(edge.head).inverse()
        return loops

    def _non_tree_word(self, path: Word) -> Word:
        return Word(t for t in path if t[0] not in self.spanning_tree)

    @cached_property
    def lambdas(self) -> Dict[str, Word]:
        """Элемент F_n, соответствующий каждому ребру (1 для рёбер дерева)"""
        values = {eid: Word() for eid in self.spanning_tree}
        if self.explicit_marking is None:
            for symbol, eid in self._default_assignment().items():
                values[eid] = Word.letter(symbol)
        else:
            images = {s: self._non_tree_word(p) for s, p in self.marking_loops.items()}
            values.update(invert_isomorphism(images, self.basis, self.non_tree_edges))
        return values

    def lam(self, eid: str) -> Word:
        return self.lambdas[eid]

    def element(self, path: Word) -> Word:
        """Элемент F_n, записанный путём по рёбрам"""
        letters: List[Letter] = []
        for eid, sign in path:
            value = self.lambdas[eid]
            letters.extend(value.letters if sign > 0 else value.inverse().letters)
        return Word(letters)

    def loop(self, g: Word) -> Word:
        """Замкнутый путь в базе, представляющий g"""
        reduce(g.letters, self.basis)
        return substitute(g, self.marking_loops)

    # --- проверка ---

    def validate(self) -> GraphDiagnostics:
        """Проверяет инварианты маркированного графа"""
        diagnostics = GraphDiagnostics(rank=self.rank)
        issues = diagnostics.issues
        known = set(self.vertices)
        if len(known) != len(self.vertices):
            issues.append(Issue("duplicate_vertex", "Vertex ids must be unique"))
        for edge in self.edges.values():
            for end in (edge.tail, edge.head):
                if end not in known:
                    issues.append(Issue("unknown_vertex", f"Edge {edge.id} ends at unknown vertex {end}", edge.id))
        if self.base not in known:
            issues.append(Issue("base", f"Base vertex {self.base} is not a vertex", self.base))
        if issues:
            return diagnostics

        graph = self.nx_graph()
        if not nx.is_connected(graph):
            for component in list(nx.connected_components(graph))[1:]:
                issues.append(Issue("disconnected", "Graph is not connected", sorted(component)[0]))
        if self.rank != self.basis.rank:
            issues.append(Issue("rank", f"First Betti number {self.rank} differs from basis rank {self.basis.rank}"))
        for vertex in self.vertices:
            if self.valence(vertex) == 1:
                issues.append(Issue("valence_one", f"Vertex {vertex} has valence 1", vertex))

        unknown = self.spanning_tree - set(self.edges)
        if unknown:
            issues.append(Issue("spanning_tree", f"Unknown spanning tree edges: {sorted(unknown)}"))
        else:
            tree = nx.MultiGraph()
            tree.add_nodes_from(self.vertices)
            for eid in self.spanning_tree:
                edge = self.edges[eid]
                tree.add_edge(edge.tail, edge.head, key=eid)
            if not nx.is_tree(tree):
                issues.append(Issue("spanning_tree", "Spanning tree edges do not form a spanning tree"))
        if issues:
            return diagnostics

        self._check_marking(issues)
        if not issues:
            logger.debug("Marked graph %s accepted (rank %d)", self.name, self.rank)
        return diagnostics

    def _check_marking(self, issues: List[Issue]) -> None:
        if self.explicit_marking is None:
            labels = [self.edges[e].label for e in self.non_tree_edges]
            if any(label is not None for label in labels) and sorted(map(str, labels)) != sorted(self.basis.symbols):
                issues.append(Issue("labels", "Non-tree edge labels must biject with basis symbols"))
            return
        if set(self.explicit_marking) != set(self.basis.symbols):
            issues.append(Issue("marking", "Marking must assign a loop to every basis symbol"))
            return
        for symbol, path in self.explicit_marking.items():
            try:
                end = self.walk(path)
            except CoreError as exc:
                issues.append(Issue("marking", exc.message, symbol))
                continue
            if end != self.base:
                issues.append(Issue("marking", f"Marking loop of {symbol} is not closed at the base", symbol))
        if issues:
            return
        images = {s: self._non_tree_word(p) for s, p in self.explicit_marking.items()}
        if not is_pi1_isomorphism(images, self.basis, self.non_tree_edges):
            issues.append(Issue("marking", "Marking does not induce an isomorphism onto the fundamental group"))

    def ensure_valid(self) -> "MarkedGraph":
        diagnostics = self.validate()
        if not diagnostics.accepted:
            raise InputError(f"Invalid marked graph {self.name}", diagnostics.to_dict())
        return self

    # --- клетки дерева ---

    def vertex_cell(self, address: Word) -> TreeCell:
        self.walk(address)
        return TreeCell(self.name, address)

    def end_of(self, cell: TreeCell) -> str:
        """Вершина факторграфа под вершиной дерева (или ребро под ребром)"""
        return cell.edge if cell.is_edge else self.walk(cell.address)

    def edge_endpoints(self, cell: TreeCell) -> Tuple[TreeCell, TreeCell]:
        head = cell.address * Word.letter(cell.edge)
        return TreeCell(self.name, cell.address), TreeCell(self.name, head)

    def edge_cell(self, address: Word, token: Letter) -> TreeCell:
        """Ребро дерева, пересекаемое шагом token из вершины address"""
        if token[1] > 0:
            return TreeCell(self.name, address, token[0])
        return TreeCell(self.name, address * Word([token]), token[0])

    def neighbors(self, cell: TreeCell) -> Iterator[Tuple[Letter, TreeCell]]:
        for token in self.half_edges(self.end_of(cell)):
            yield token, TreeCell(self.name, cell.address * Word([token]))

    def cell_at(self, g: Word, cell_of: str, is_edge: bool = False) -> TreeCell:
        """Клетка с координатами (g, cell_of)"""
        vertex = self.edges[cell_of].tail if is_edge else cell_of
        address = self.loop(g) * self.tree_path(vertex)
        return TreeCell(self.name, address, cell_of if is_edge else None)

    def coordinates(self, cell: TreeCell) -> Tuple[Word, str]:
        return self.element(cell.address), self.end_of(cell)

    def canonical(self, cell: TreeCell) -> TreeCell:
        """Представитель орбиты с тривиальной координатой"""
        return self.cell_at(Word(), self.end_of(cell), cell.is_edge)

    def lift_vertex(self, vertex: str) -> TreeCell:
        return TreeCell(self.name, self.tree_path(vertex))

    def lift_edge(self, eid: str) -> TreeCell:
        return TreeCell(self.name, self.tree_path(self.edges[eid].tail), eid)

    def deck_translate(self, cell: TreeCell, g: Word) -> TreeCell:
        return TreeCell(self.name, self.loop(g) * cell.address, cell.edge)

    def ball(self, center: TreeCell, radius: int, cap: int) -> Subtree:
        return ball(self, center, radius, cap)

    def side_of(self, edge: TreeCell, letters: Sequence[Letter]) -> int:
        """С какой стороны ребра лежит вершина (или конец) с адресом letters: +1 у конца, -1 у начала"""
        tail, head = self.edge_endpoints(edge)
        if len(head.address) > len(tail.address):
            return 1 if tuple(letters[: len(head.address)]) == head.address.letters else -1
        return -1 if tuple(letters[: len(tail.address)]) == tail.address.letters else 1


def cell_sort_key(cell: TreeCell) -> tuple:
    return len(cell.address), cell.address.letters, cell.edge or ""


def _check_same_tree(a: TreeCell, b: TreeCell) -> None:
    if a.graph != b.graph:
        raise InputError("Tree cells belong to different graphs", {"a": a.graph, "b": b.graph})


def tree_geodesic(a: TreeCell, b: TreeCell) -> Word:
    """Приведённый путь по рёбрам из вершины a в вершину b"""
    _check_same_tree(a, b)
    if a.is_edge or b.is_edge:
        raise InputError("Geodesics are computed between tree vertices", {"a": str(a), "b": str(b)})
    first, second = a.address.letters, b.address.letters
    common = 0
    while common < min(len(first), len(second)) and first[common] == second[common]:
        common += 1
    return Word(first[common:]).inverse() * Word(second[common:])


def geodesic_edges(graph: MarkedGraph, a: TreeCell, b: TreeCell) -> List[TreeCell]:
    """Рёбра дерева на геодезической из a в b"""
    cells = []
    address = a.address
    for token in tree_geodesic(a, b):
        cells.append(graph.edge_cell(address, token))
        address = address * Word([token])
    return cells


def ball(graph: MarkedGraph, center: TreeCell, radius: int, cap: int) -> Subtree:
    """Все вершины и рёбра дерева на расстоянии не больше radius"""
    if radius < 0:
        raise InputError("Radius must be non-negative", {"radius": radius})
    if radius > cap:
        raise ResourceLimitError(f"Ball radius {radius} exceeds cap {cap}", {"radius": radius, "cap": cap})
    vertices = {center}
    edges = set()
    frontier = [center]
    for _ in range(radius):
        next_frontier = []
        for cell in frontier:
            for token, other in graph.neighbors(cell):
                edges.add(graph.edge_cell(cell.address, token))
                if other not in vertices:
                    vertices.add(other)
                    next_frontier.append(other)
        frontier = next_frontier
    return Subtree(frozenset(vertices), frozenset(edges))


def deck_translate(graph: MarkedGraph, cell: TreeCell, g: Word) -> TreeCell:
    return graph.deck_translate(cell, g)


def validate(graph: MarkedGraph) -> GraphDiagnostics:
    return graph.validate()


def rose(symbols: Sequence[str], name: str = "rose", edge_prefix: str = "e") -> MarkedGraph:
    """Роза с одной вершиной o и лепестком на каждый символ"""
    edges = [GraphEdge(f"{edge_prefix}{s}", "o", "o", s) for s in symbols]
    return MarkedGraph(Basis(tuple(symbols)), ["o"], edges, "o", [], name)
