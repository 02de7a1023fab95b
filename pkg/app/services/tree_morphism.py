"""Эквивариантные отображения деревьев, заданные на факторграфах.

Поднятие отображения: адрес A в дереве источника переходит в
приведённый путь twist·f(A) в дереве цели.
"""
import logging
from dataclasses import dataclass
from functools import cached_property
from math import lcm
from typing import Dict, Iterator, List, Mapping, Optional, Tuple

from app.core.errors import ContractError, InputError, SharedEdgeError
from app.schemas.graph import GraphMapSchema
from app.services.free_group import Letter, Word, cyclic_reduce, inverse_letter, is_pi1_isomorphism
from app.services.marked_graph import MarkedGraph, TreeCell, cell_sort_key

logger = logging.getLogger(__name__)


def _as_word(value) -> Word:
    return Word.parse(value) if isinstance(value, (str, list)) else Word(value)


class GraphMap:
    """Отображение source -> target: вершины, пути-образы рёбер и подкрутка базы"""

    def __init__(
        self,
        source: MarkedGraph,
        target: MarkedGraph,
        vertex_map: Mapping[str, str],
        edge_map: Mapping[str, Word],
        twist: Word = Word(),
    ):
        self.source = source
        self.target = target
        self.vertex_map: Dict[str, str] = dict(vertex_map)
        self.edge_map: Dict[str, Word] = {e: Word(p.letters) for e, p in edge_map.items()}
        self.twist = twist

    @classmethod
    def from_dict(cls, data: dict, source: MarkedGraph, target: MarkedGraph) -> "GraphMap":
        schema = GraphMapSchema.model_validate(data)
        graph_map = cls(
            source,
            target,
            schema.vertex_map,
            {e: _as_word(p) for e, p in schema.edge_map.items()},
            _as_word(schema.twist),
        )
        graph_map.check()
        return graph_map

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "vertex_map": dict(self.vertex_map),
            "edge_map": {e: str(p) for e, p in self.edge_map.items()},
            "twist": str(self.twist),
        }

    def replace(self, vertex_map=None, edge_map=None, twist=None) -> "GraphMap":
        return GraphMap(
            self.source,
            self.target,
            self.vertex_map if vertex_map is None else vertex_map,
            self.edge_map if edge_map is None else edge_map,
            self.twist if twist is None else twist,
        )

    # --- согласованность ---

    def check(self) -> None:
        """Проверяет концы образов, подкрутку и эквивариантность"""
        if set(self.vertex_map) != set(self.source.vertices):
            raise InputError("Vertex map must cover every source vertex", {"source": self.source.name})
        if set(self.edge_map) != set(self.source.edges):
            raise InputError("Edge map must cover every source edge", {"source": self.source.name})
        for eid, edge in self.source.edges.items():
            end = self.target.walk(self.edge_map[eid], self.vertex_map[edge.tail])
            if end != self.vertex_map[edge.head]:
                raise InputError(
                    f"Image of {eid} does not end at the image of its head",
                    {"edge": eid, "image": str(self.edge_map[eid])},
                )
        if self.target.walk(self.twist) != self.vertex_map[self.source.base]:
            raise InputError("Twist must run from the target base to the image of the source base")
        automorphism = self.induced_automorphism()
        if not is_pi1_isomorphism(automorphism, self.source.basis, self.target.basis.symbols):
            raise InputError("Map does not induce an automorphism of the free group")
        if any(automorphism[x] != Word.letter(x) for x in self.source.basis.symbols):
            raise InputError(
                "Map is not equivariant for the common action",
                {"induced": {x: str(w) for x, w in automorphism.items()}},
            )

    def induced_automorphism(self) -> Dict[str, Word]:
        """Образ каждой образующей при действии на фундаментальные группы"""
        if set(self.source.basis.symbols) != set(self.target.basis.symbols):
            raise InputError("Graphs are marked over different bases")
        result = {}
        for symbol, loop in self.source.marking_loops.items():
            image = self.twist * self.image_path(loop) * self.twist.inverse()
            result[symbol] = self.target.element(image)
        return result

    # --- вычисление ---

    def image_path(self, path: Word) -> Word:
        letters: List[Letter] = []
        for eid, sign in path:
            image = self.edge_map[eid]
            letters.extend(image.letters if sign > 0 else image.inverse().letters)
        return Word(letters)

    def lift_address(self, address: Word) -> Word:
        return self.twist * self.image_path(address)

    def lift_vertex(self, cell: TreeCell) -> TreeCell:
        return TreeCell(self.target.name, self.lift_address(cell.address))

    def total_length(self) -> int:
        return sum(len(p) for p in self.edge_map.values())

    def collapsed_edges(self) -> List[str]:
        return [e for e, p in self.edge_map.items() if p.is_identity()]

    def direction_image(self, direction: Letter) -> Optional[Letter]:
        """Первая буква образа направления (None для стянутого ребра)"""
        image = self.edge_map[direction[0]]
        if image.is_identity():
            return None
        return image.first() if direction[1] > 0 else inverse_letter(image.last())

    def precompose(self, other: "GraphMap") -> "GraphMap":
        """Композиция self ∘ other, где other: X -> self.source"""
        return GraphMap(
            other.source,
            self.target,
            {v: self.vertex_map[w] for v, w in other.vertex_map.items()},
            {e: self.image_path(p) for e, p in other.edge_map.items()},
            self.twist * self.image_path(other.twist),
        )


def tighten(m: GraphMap, allow_collapse: bool = False) -> GraphMap:
    """Приводит образы рёбер; пустой образ означает общее ребро"""
    tightened = m.replace(edge_map={e: Word(p.letters) for e, p in m.edge_map.items()})
    collapsed = tightened.collapsed_edges()
    if collapsed and not allow_collapse:
        raise SharedEdgeError(
            "Edge image reduces to the empty path",
            {"edges": collapsed, "source": m.source.name, "target": m.target.name},
        )
    return tightened


def gates(m: GraphMap, vertex: str) -> List[List[Letter]]:
    """Разбиение направлений в вершине по первой букве образа"""
    classes: Dict[Letter, List[Letter]] = {}
    for direction in m.source.half_edges(vertex):
        first = m.direction_image(direction)
        if first is not None:
            classes.setdefault(first, []).append(direction)
    return list(classes.values())


def _pull_gain(m: GraphMap, vertex: str) -> int:
    directions = m.source.half_edges(vertex)
    nonempty = sum(1 for d in directions if m.direction_image(d) is not None)
    return nonempty - (len(directions) - nonempty)


def pull_vertex(m: GraphMap, vertex: str) -> GraphMap:
    """Сдвигает образ вершины с одним гейтом через его ребро"""
    gate_classes = gates(m, vertex)
    if len(gate_classes) != 1:
        raise ContractError("Only one-gate vertices can be pulled", {"vertex": vertex})
    zeta = m.direction_image(gate_classes[0][0])
    step = Word([zeta])
    edge_map = dict(m.edge_map)
    for eid, edge in m.source.edges.items():
        image = edge_map[eid]
        if edge.tail == vertex:
            image = step.inverse() * image
        if edge.head == vertex:
            image = image * step
        edge_map[eid] = image
    vertex_map = dict(m.vertex_map)
    vertex_map[vertex] = m.target.token_end(zeta)
    twist = m.twist * step if vertex == m.source.base else m.twist
    return m.replace(vertex_map=vertex_map, edge_map=edge_map, twist=twist)


def repair_gates(m: GraphMap) -> GraphMap:
    """Повторяет сдвиги однгейтовых вершин, пока суммарная длина убывает"""
    while True:
        for vertex in m.source.vertices:
            if len(gates(m, vertex)) == 1 and _pull_gain(m, vertex) > 0:
                before = m.total_length()
                m = pull_vertex(m, vertex)
                logger.debug("Pulled %s: image length %d -> %d", vertex, before, m.total_length())
                break
        else:
            return m


@dataclass
class Certificate:
    certified: bool
    issues: List[str]


def certify(m: GraphMap) -> Certificate:
    issues = []
    for eid in m.collapsed_edges():
        issues.append(f"edge {eid} collapses")
    for vertex in m.source.vertices:
        count = len(gates(m, vertex))
        if count < 2:
            issues.append(f"vertex {vertex} has {count} gate(s)")
    return Certificate(not issues, issues)


class Morphism(GraphMap):
    """Отображение после затягивания и ремонта гейтов"""

    def __init__(self, graph_map: GraphMap):
        super().__init__(graph_map.source, graph_map.target, graph_map.vertex_map, graph_map.edge_map, graph_map.twist)
        certificate = certify(self)
        self.certified = certificate.certified
        self.issues = certificate.issues


def initial_map(source: MarkedGraph, target: MarkedGraph) -> GraphMap:
    """Эквивариантное отображение: вершины в канонические поднятия, рёбра в геодезические"""
    if set(source.basis.symbols) != set(target.basis.symbols):
        raise InputError("Graphs are marked over different bases", {"source": source.name, "target": target.name})
    vertex_map = {v: (v if v in target.vertices else target.base) for v in source.vertices}
    edge_map = {}
    for eid, edge in source.edges.items():
        edge_map[eid] = (
            target.tree_path(vertex_map[edge.tail]).inverse()
            * target.loop(source.lam(eid))
            * target.tree_path(vertex_map[edge.head])
        )
    twist = target.tree_path(vertex_map[source.base])
    return GraphMap(source, target, vertex_map, edge_map, twist)


def make_morphism(source: MarkedGraph, target: MarkedGraph, allow_collapse: bool = False) -> Morphism:
    """Строит отображение и чинит вершины с одним гейтом.

    Без allow_collapse результат обязан быть сертифицирован, иначе ContractError.
    """
    m = repair_gates(initial_map(source, target))
    m = tighten(m, allow_collapse=allow_collapse)
    m.check()
    morphism = Morphism(m)
    logger.debug(
        "Morphism %s -> %s: length %d, certified=%s",
        source.name, target.name, morphism.total_length(), morphism.certified,
    )
    if not morphism.certified and not allow_collapse:
        raise ContractError(
            "Morphism could not be certified",
            {"source": source.name, "target": target.name, "issues": morphism.issues},
        )
    return morphism


# --- прообразы рёбер ---


@dataclass(frozen=True)
class Crossing:
    """Ребро источника, образ которого проходит ребро цели"""
    edge: TreeCell
    sign: int


def preimage_crossings(m: GraphMap, eta: TreeCell) -> List[Crossing]:
    target = m.target
    z0, eta_id = target.coordinates(eta)
    found = {}
    for eid, edge in m.source.edges.items():
        tail_lift = m.source.lift_edge(eid)
        y = target.element(m.lift_address(tail_lift.address))
        for token_edge, sign in m.edge_map[eid]:
            mu = target.lam(token_edge)
            if sign > 0:
                crossed, y = y, y * mu
            else:
                y = y * mu.inverse()
                crossed = y
            if token_edge == eta_id:
                member = m.source.deck_translate(tail_lift, z0 * crossed.inverse())
                found[member] = Crossing(member, sign)
    return sorted(found.values(), key=lambda c: cell_sort_key(c.edge))


def preimage_edges(m: GraphMap, eta: TreeCell) -> List[TreeCell]:
    """Рёбра дерева источника, образ которых пересекает eta"""
    return [c.edge for c in preimage_crossings(m, eta)]


# --- периодические лучи ---


@dataclass(frozen=True)
class PeriodicRay:
    """Луч start·prefix·period·period·..."""
    start: TreeCell
    prefix: Word
    period: Word

    def check(self, graph: MarkedGraph) -> "PeriodicRay":
        if self.period.is_identity():
            raise InputError("Ray period must be non-trivial")
        end = graph.walk(self.prefix, graph.walk(self.start.address))
        if graph.walk(self.period, end) != end:
            raise InputError("Ray period must be a closed path", {"period": str(self.period)})
        if len(self.prefix * self.period) != len(self.prefix) + len(self.period):
            raise InputError("Ray backtracks between prefix and period")
        if len(self.period) > 1 and self.period.first() == inverse_letter(self.period.last()):
            raise InputError("Ray period must be cyclically reduced", {"period": str(self.period)})
        return self

    def letters(self, count: int) -> Tuple[Letter, ...]:
        """Первые count букв пути луча от его начала"""
        out = list(self.prefix.letters[:count])
        while len(out) < count:
            out.extend(self.period.letters)
        return tuple(out[:count])

    def to_dict(self) -> dict:
        return {"start": str(self.start.address), "prefix": str(self.prefix), "period": str(self.period)}


def _normalize(prefix: Word, period: Word) -> Tuple[Word, Word]:
    """Приводит prefix·period^∞ к виду с приведённым стыком"""
    conjugator, core = cyclic_reduce(period)
    prefix = prefix * conjugator
    letters = list(core.letters)
    head = list(prefix.letters)
    while head and letters and head[-1] == inverse_letter(letters[0]):
        head.pop()
        letters = letters[1:] + letters[:1]
    return Word(head), Word(letters)


def image_ray(m: GraphMap, ray: PeriodicRay) -> PeriodicRay:
    """Образ периодического луча (снова периодический луч)"""
    period = m.image_path(ray.period)
    if period.is_identity():
        raise InputError("Image of the ray period is trivial", {"period": str(ray.period)})
    prefix, period = _normalize(m.image_path(ray.prefix), period)
    start = m.lift_vertex(ray.start)
    return PeriodicRay(start, prefix, period)


def absolute_ray(ray: PeriodicRay) -> Tuple[Word, Word]:
    """Луч как бесконечное приведённое слово из базового поднятия"""
    return _normalize(ray.start.address * ray.prefix, ray.period)


def absolute_letters(ray: PeriodicRay, count: int) -> Tuple[Letter, ...]:
    prefix, period = absolute_ray(ray)
    return PeriodicRay(ray.start, prefix, period).letters(count)


def same_end(first: PeriodicRay, second: PeriodicRay) -> bool:
    """Определяют ли два луча один и тот же конец дерева"""
    a_prefix, a_period = absolute_ray(first)
    b_prefix, b_period = absolute_ray(second)
    horizon = max(len(a_prefix), len(b_prefix)) + lcm(len(a_period), len(b_period))
    return absolute_letters(first, horizon) == absolute_letters(second, horizon)


def ray_side(graph: MarkedGraph, ray: PeriodicRay, edge: TreeCell) -> int:
    """Сторона ребра, содержащая конец луча"""
    depth = len(edge.address) + 2
    return graph.side_of(edge, absolute_letters(ray, depth))
