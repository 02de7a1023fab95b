"""Независимая проверка квадратов ядра перебором периодических лучей.

Квадрат ē × η̃ присутствует, если для каждой пары ориентаций найдётся
конец дерева впереди ē, образ которого лежит впереди η̃.
"""
import logging
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, FrozenSet, Iterator, List, Optional, Tuple

from app.core.config import Settings, get_settings
from app.core.errors import InputError, ResourceLimitError
from app.services.core_builder import SQUARE, CellKey, HullData, QuotientCore, hull
from app.services.free_group import Letter, Word, inverse_letter
from app.services.marked_graph import MarkedGraph, TreeCell, ball, cell_sort_key
from app.services.tree_morphism import GraphMap, PeriodicRay, image_ray, ray_side

logger = logging.getLogger(__name__)

__all__ = ["PeriodicRay", "OracleVerdict", "OracleReport", "oracle_square", "oracle_core"]

PRESENT, ABSENT, INCONCLUSIVE = "present", "absent", "inconclusive"
ORIENTATIONS = ((1, 1), (1, -1), (-1, 1), (-1, -1))


@dataclass
class Witness:
    edge_orientation: int
    eta_orientation: int
    ray: PeriodicRay
    image: PeriodicRay

    def to_dict(self) -> dict:
        return {
            "edge_orientation": self.edge_orientation,
            "eta_orientation": self.eta_orientation,
            "ray": self.ray.to_dict(),
            "image": self.image.to_dict(),
        }


@dataclass
class OracleVerdict:
    edge: TreeCell
    eta: TreeCell
    key: CellKey
    verdict: str
    witnesses: List[Witness] = field(default_factory=list)
    reason: str = "search"

    def to_dict(self) -> dict:
        return {
            "edge": str(self.edge),
            "eta": str(self.eta),
            "key": self.key.to_dict(),
            "verdict": self.verdict,
            "reason": self.reason,
            "witnesses": [w.to_dict() for w in self.witnesses],
        }


def _start_of(graph: MarkedGraph, edge: TreeCell, orientation: int) -> Tuple[TreeCell, Letter]:
    """Вершина впереди ориентированного ребра и шаг назад через него"""
    tail, head = graph.edge_endpoints(edge)
    start = head if orientation > 0 else tail
    for token, _ in graph.neighbors(start):
        if graph.edge_cell(start.address, token) == edge:
            return start, token
    raise InputError("Edge is not incident to its endpoint", {"edge": str(edge)})


def _closed_paths(graph: MarkedGraph, vertex: str, bound: int) -> List[Tuple[Letter, ...]]:
    """Циклически приведённые замкнутые пути длины от 1 до bound"""
    found = []
    stack: List[Tuple[Tuple[Letter, ...], str]] = [((), vertex)]
    while stack:
        path, at = stack.pop()
        if path and at == vertex and (len(path) == 1 or path[0] != inverse_letter(path[-1])):
            found.append(path)
        if len(path) == bound:
            continue
        for token in graph.half_edges(at):
            if path and token == inverse_letter(path[-1]):
                continue
            stack.append((path + (token,), graph.token_end(token)))
    return sorted(found, key=lambda p: (len(p), p))


def _rays(graph: MarkedGraph, start: TreeCell, back: Letter, depth: int, period_bound: int) -> Iterator[PeriodicRay]:
    """Лучи из start, не возвращающиеся через back, по возрастанию длины префикса"""
    loops = lru_cache(maxsize=None)(lambda v: _closed_paths(graph, v, period_bound))
    queue = deque([((), graph.end_of(start))])
    while queue:
        prefix, vertex = queue.popleft()
        last = prefix[-1] if prefix else None
        for period in loops(vertex):
            if last is None and period[0] == back:
                continue
            if last is not None and period[0] == inverse_letter(last):
                continue
            yield PeriodicRay(start, Word(prefix), Word(period))
        if len(prefix) == depth:
            continue
        for token in graph.half_edges(vertex):
            if (last is None and token == back) or (last is not None and token == inverse_letter(last)):
                continue
            queue.append((prefix + (token,), graph.token_end(token)))


def _witness(
    m: GraphMap, edge: TreeCell, edge_orientation: int, eta: TreeCell, eta_orientation: int, depth: int, period: int,
) -> Optional[Witness]:
    start, back = _start_of(m.source, edge, edge_orientation)
    for ray in _rays(m.source, start, back, depth, period):
        image = image_ray(m, ray)
        if ray_side(m.target, image, eta) == eta_orientation:
            return Witness(edge_orientation, eta_orientation, ray, image)
    return None


def _square_key(m: GraphMap, edge: TreeCell, eta: TreeCell) -> CellKey:
    g1 = m.source.element(edge.address)
    z = m.target.element(eta.address)
    return CellKey(SQUARE, edge.edge, eta.edge, g1.inverse() * z)


def oracle_square(m: GraphMap, edge: TreeCell, eta: TreeCell, depth: int = 6, period: int = 4) -> OracleVerdict:
    """Вердикт для пары рёбер; отсутствие подтверждается на увеличенных границах"""
    if depth < 0 or period < 1:
        raise InputError("Oracle bounds must be positive", {"depth": depth, "period": period})
    if not edge.is_edge or not eta.is_edge:
        raise InputError("Oracle candidates are tree edges", {"edge": str(edge), "eta": str(eta)})
    key = _square_key(m, edge, eta)
    witnesses = []
    missing = []
    for edge_orientation, eta_orientation in ORIENTATIONS:
        found = _witness(m, edge, edge_orientation, eta, eta_orientation, depth, period)
        if found is None:
            missing.append((edge_orientation, eta_orientation))
        else:
            witnesses.append(found)
    if not missing:
        return OracleVerdict(edge, eta, key, PRESENT, witnesses)
    for edge_orientation, eta_orientation in missing:
        late = _witness(m, edge, edge_orientation, eta, eta_orientation, depth + 1, period + 1)
        if late is not None:
            logger.debug("Witness for %s x %s appears only at larger bounds", edge, eta)
            return OracleVerdict(edge, eta, key, INCONCLUSIVE, witnesses + [late], "unstable")
    return OracleVerdict(edge, eta, key, ABSENT, witnesses)


@dataclass
class OracleReport:
    verdicts: List[OracleVerdict]
    bounds: Dict[str, int]

    @property
    def squares(self) -> List[CellKey]:
        return sorted(v.key for v in self.verdicts if v.verdict == PRESENT)

    @property
    def inconclusive(self) -> List[OracleVerdict]:
        return [v for v in self.verdicts if v.verdict == INCONCLUSIVE]

    def agrees_with(self, core: QuotientCore) -> bool:
        return not self.inconclusive and self.squares == core.squares()

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "bounds": self.bounds,
            "squares": [k.to_dict() for k in self.squares],
            "inconclusive": [v.to_dict() for v in self.inconclusive],
            "verdicts": [v.to_dict() for v in self.verdicts],
        }


def _band(m: GraphMap, hd: HullData, window: FrozenSet[TreeCell], settings: Settings) -> List[TreeCell]:
    """Рёбра оболочки и полосы ширины oracle_band вокруг неё в пределах окна"""
    edges = set(hd.hull_edges)
    if settings.oracle_band:
        for vertex in hd.hull_vertices:
            edges |= ball(m.source, vertex, settings.oracle_band, settings.ball_cap).edges & window
    return sorted(edges, key=cell_sort_key)


def oracle_core(m: GraphMap, settings: Optional[Settings] = None, **bounds) -> OracleReport:
    """Квадраты ядра над каноническими поднятиями рёбер цели.

    Окно вокруг базы обязано содержать оболочку каждого ребра цели;
    перебором проверяются рёбра оболочки и полосы вокруг неё.
    """
    settings = settings or get_settings(**bounds)
    source = m.source
    window = ball(source, source.vertex_cell(Word()), settings.window, settings.ball_cap)
    verdicts = []
    for eta_id in m.target.edges:
        eta = m.target.lift_edge(eta_id)
        hd = hull(m, eta)
        outside = hd.hull_edges - window.edges
        if outside:
            raise ResourceLimitError(
                f"Oracle window {settings.window} does not contain the hull over {eta_id}",
                {"orbit": eta_id, "window": settings.window, "outside": len(outside)},
            )
        for edge in _band(m, hd, window.edges, settings):
            verdict = oracle_square(m, edge, eta, settings.depth, settings.period)
            if edge not in hd.hull_edges:
                verdict.reason = "band"
            verdicts.append(verdict)
    report = OracleReport(
        verdicts,
        {"depth": settings.depth, "period": settings.period, "window": settings.window, "band": settings.oracle_band},
    )
    logger.info(
        "Oracle %s -> %s: %d squares, %d inconclusive",
        source.name, m.target.name, len(report.squares), len(report.inconclusive),
    )
    return report
