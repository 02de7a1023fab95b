"""Шаги хирургии как расщепления рёбер, последовательности хирургий,
генеалогия рёбер и проверка теорем о сопровождении путей.
"""
import logging
from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, Iterator, List, Optional, Sequence, Set, Tuple

from app.core.config import Settings, get_settings
from app.core.errors import ContractError, InputError, SurgeryConsistencyError, TheoremViolation
from app.services.core_builder import H_EDGE, SQUARE, V_EDGE, VERTEX, Cell, CellKey, QuotientCore, build_core
from app.services.free_group import Letter, Word
from app.services.marked_graph import GraphEdge, MarkedGraph
from app.services.rng import SplitMix64
from app.services.square_complex import (
    S_SIDE, SIDES, BoundaryRectangle, FreeEdgeCertificate, free_edges, is_isomorphic, maximal_rectangles, rips_move,
)
from app.services.tree_morphism import GraphMap, Morphism, make_morphism, repair_gates, tighten

logger = logging.getLogger(__name__)


# --- генеалогия ---


@dataclass
class HistoryMap:
    """Предок каждой вершины и ребра и координата образа канонического поднятия"""
    edges: Dict[str, Tuple[str, Word]]
    vertices: Dict[str, Tuple[str, Word]]

    @classmethod
    def identity(cls, graph: MarkedGraph) -> "HistoryMap":
        return cls({e: (e, Word()) for e in graph.edges}, {v: (v, Word()) for v in graph.vertices})

    @classmethod
    def of_fold(cls, fold: GraphMap) -> "HistoryMap":
        """Генеалогия одного шага по отображению, переводящему рёбра в рёбра"""
        new, old = fold.source, fold.target
        edges = {}
        for eid, edge in new.edges.items():
            image = fold.edge_map[eid]
            if len(image) != 1 or image.first()[1] != 1:
                raise ContractError("Fold must send edges to edges preserving orientation", {"edge": eid})
            coordinate = old.element(fold.lift_address(new.tree_path(edge.tail)))
            edges[eid] = (image.first()[0], coordinate)
        vertices = {}
        for vertex in new.vertices:
            coordinate = old.element(fold.lift_address(new.tree_path(vertex)))
            vertices[vertex] = (fold.vertex_map[vertex], coordinate)
        return cls(edges, vertices)

    def then(self, older: "HistoryMap") -> "HistoryMap":
        """Композиция: сначала self (к предыдущему графу), затем older"""
        def compose(label: str, table: Dict[str, Tuple[str, Word]], older_table: Dict[str, Tuple[str, Word]]):
            ancestor, x1 = table[label]
            root, x0 = older_table[ancestor]
            return root, x1 * x0

        return HistoryMap(
            {e: compose(e, self.edges, older.edges) for e in self.edges},
            {v: compose(v, self.vertices, older.vertices) for v in self.vertices},
        )

    def lookup(self, is_edge: bool, label: str) -> Tuple[str, Word]:
        return (self.edges if is_edge else self.vertices)[label]

    def to_dict(self) -> dict:
        return {
            "edges": {e: [a, str(x)] for e, (a, x) in self.edges.items()},
            "vertices": {v: [a, str(x)] for v, (a, x) in self.vertices.items()},
        }


def _map_key(key: CellKey, left: Optional[HistoryMap], right: Optional[HistoryMap]) -> CellKey:
    g, x = left.lookup(key.kind in (SQUARE, H_EDGE), key.g) if left else (key.g, Word())
    t, y = right.lookup(key.kind in (SQUARE, V_EDGE), key.t) if right else (key.t, Word())
    return CellKey(key.kind, g, t, x.inverse() * key.word * y)


def map_core(core: QuotientCore, left: Optional[HistoryMap] = None, right: Optional[HistoryMap] = None, **kwargs) -> QuotientCore:
    """Образ ядра при отображениях генеалогии в обоих сомножителях"""
    cells: Dict[CellKey, Cell] = {}
    for key, cell in core.cells.items():
        image = _map_key(key, left, right)
        if image not in cells:
            cells[image] = Cell(image, tuple(_map_key(f, left, right) for f in cell.faces))
    return QuotientCore(cells, kwargs.get("source", core.source), kwargs.get("target", core.target), core.metadata)


# --- состояние ---


@dataclass
class SurgeryState:
    index: int
    graph: MarkedGraph
    target: MarkedGraph
    morphism: GraphMap
    core: QuotientCore
    history: HistoryMap
    original: Tuple[str, str]
    rectangle: Optional[BoundaryRectangle] = None
    rectangle_index: Optional[int] = None
    partition: Optional[dict] = None
    compatible_with_previous: Optional[bool] = None
    warnings: List[str] = field(default_factory=list)

    @property
    def area(self) -> int:
        return self.core.area

    def tracked_core(self) -> QuotientCore:
        """Текущее ядро в клетках исходного ядра"""
        return map_core(self.core, left=self.history, source=self.original[0], target=self.original[1])

    def summary(self) -> dict:
        return {
            "index": self.index + 1,
            "graph": self.graph.name,
            "area": self.area,
            "vertices": list(self.graph.vertices),
            "edges": len(self.graph.edges),
            "rectangle_index": self.rectangle_index,
            "rectangle": self.rectangle.to_dict() if self.rectangle else None,
            "partition": self.partition,
            "compatible_with_previous": self.compatible_with_previous,
            "warnings": list(self.warnings),
        }


def initial_state(graph: MarkedGraph, target: MarkedGraph) -> SurgeryState:
    graph.ensure_valid()
    target.ensure_valid()
    morphism = make_morphism(graph, target)
    core = build_core(morphism)
    return SurgeryState(0, graph, target, morphism, core, HistoryMap.identity(graph), (graph.name, target.name))


# --- расщепление ребра ---


def _fresh_name(base: str, taken: Set[str]) -> str:
    name = base
    while name in taken:
        name += "'"
    return name


@dataclass
class SplitCandidate:
    graph: MarkedGraph
    fold: GraphMap
    plus: List[Letter]
    minus: List[Letter]


@dataclass(frozen=True)
class SplitCopies:
    """Две копии вершины и ребра после расщепления"""
    p_plus: str
    p_minus: str
    b1: str
    b2: str
    sign: int


def split_half_edge(rectangle: BoundaryRectangle) -> Letter:
    return (rectangle.fixed_edge, 1 if rectangle.end == "tail" else -1)


def partitions(graph: MarkedGraph, half_edge: Letter, limit: int) -> Iterator[Tuple[List[Letter], List[Letter]]]:
    """Разбиения остальных полурёбер вершины на две непустые части"""
    vertex = graph.token_start(half_edge)
    others = [h for h in graph.half_edges(vertex) if h != half_edge]
    if len(others) < 2:
        return
    count = 0
    rest = others[1:]
    for size in range(0, len(rest)):
        for chosen in combinations(rest, size):
            if count >= limit:
                logger.warning("Partition search capped at %d candidates", limit)
                return
            plus = [others[0], *chosen]
            minus = [h for h in rest if h not in chosen]
            count += 1
            yield plus, minus


def split_graph(graph: MarkedGraph, half_edge: Letter, plus: Sequence[Letter], name: str) -> SplitCandidate:
    """Расщепляет вершину у полуребра на две, ребро - на два с общим другим концом"""
    eid, sign = half_edge
    p0 = graph.token_start(half_edge)
    plus_set = set(plus)
    minus = [h for h in graph.half_edges(p0) if h != half_edge and h not in plus_set]
    taken = set(graph.vertices)
    p_plus = _fresh_name(f"{p0}+", taken)
    p_minus = _fresh_name(f"{p0}-", taken | {p_plus})
    edge_ids = set(graph.edges)
    b1 = _fresh_name(f"{eid}.1", edge_ids)
    b2 = _fresh_name(f"{eid}.2", edge_ids | {b1})

    def copy_of(token: Letter) -> str:
        return p_plus if token in plus_set else p_minus

    def end_of(edge: GraphEdge, at_tail: bool) -> str:
        vertex = edge.tail if at_tail else edge.head
        if vertex != p0:
            return vertex
        return copy_of((edge.id, 1 if at_tail else -1))

    vertices = [v for v in graph.vertices if v != p0] + [p_plus, p_minus]
    edges: List[GraphEdge] = []
    for edge in graph.edges.values():
        if edge.id != eid:
            edges.append(GraphEdge(edge.id, end_of(edge, True), end_of(edge, False)))
            continue
        # Второй конец расщепляемого ребра общий для обеих копий
        other = end_of(edge, sign < 0)
        if sign > 0:
            edges.append(GraphEdge(b1, p_plus, other))
            edges.append(GraphEdge(b2, p_minus, other))
        else:
            edges.append(GraphEdge(b1, other, p_plus))
            edges.append(GraphEdge(b2, other, p_minus))
    base = p_plus if graph.base == p0 else graph.base
    tree = _bfs_tree(vertices, edges, base)

    vertex_map = {v: (p0 if v in (p_plus, p_minus) else v) for v in vertices}
    edge_map = {e.id: Word.letter(eid if e.id in (b1, b2) else e.id) for e in edges}
    skeleton = MarkedGraph(graph.basis, vertices, edges, base, tree, name)
    copies = SplitCopies(p_plus, p_minus, b1, b2, sign)
    marking = {
        symbol: _lift_path(skeleton, loop, eid, copies)
        for symbol, loop in graph.marking_loops.items()
    }
    split = MarkedGraph(graph.basis, vertices, edges, base, tree, name, marking)
    fold = GraphMap(split, graph, vertex_map, edge_map, Word())
    return SplitCandidate(split, fold, list(plus), minus)


def _bfs_tree(vertices: Sequence[str], edges: Sequence[GraphEdge], base: str) -> List[str]:
    seen = {base}
    tree = []
    queue = deque([base])
    while queue:
        vertex = queue.popleft()
        for edge in edges:
            for here, there in ((edge.tail, edge.head), (edge.head, edge.tail)):
                if here == vertex and there not in seen:
                    seen.add(there)
                    tree.append(edge.id)
                    queue.append(there)
    return tree


def _connector(start: str, end: str, copies: "SplitCopies") -> Word:
    """Путь между копиями вершины через обе копии ребра; свёртка даёт пустое слово"""
    if start == end:
        return Word()
    forward = Word([(copies.b1, copies.sign), (copies.b2, -copies.sign)])
    if (start, end) == (copies.p_plus, copies.p_minus):
        return forward
    if (start, end) == (copies.p_minus, copies.p_plus):
        return forward.inverse()
    raise SurgeryConsistencyError("Split copies are not connected", {"from": start, "to": end})


def _lift_path(new: MarkedGraph, path: Word, eid: str, copies: "SplitCopies") -> Word:
    """Поднимает замкнутый путь через свёртку копий ребра"""
    tokens = list(path)

    def candidates(token: Letter) -> List[Letter]:
        if token[0] == eid:
            return [(copies.b1, token[1]), (copies.b2, token[1])]
        return [token]

    current = new.base
    letters: List[Letter] = []
    for position, token in enumerate(tokens):
        options = [c for c in candidates(token) if new.token_start(c) == current]
        if not options:
            start = new.token_start(candidates(token)[0])
            letters.extend(_connector(current, start, copies).letters)
            current = start
            options = [c for c in candidates(token) if new.token_start(c) == current]
        if position + 1 < len(tokens):
            wanted = {new.token_start(c) for c in candidates(tokens[position + 1])}
        else:
            wanted = {new.base}
        preferred = [c for c in options if new.token_end(c) in wanted]
        choice = (preferred or options)[0]
        letters.append(choice)
        current = new.token_end(choice)
    letters.extend(_connector(current, new.base, copies).letters)
    return Word(letters)


def derived_morphism(state: SurgeryState, fold: GraphMap) -> Morphism:
    """f' = f ∘ fold, затянутое и с отремонтированными гейтами"""
    composed = state.morphism.precompose(fold)
    repaired = tighten(repair_gates(composed), allow_collapse=True)
    repaired.check()
    return Morphism(repaired)


def _same_cells(first: QuotientCore, second: QuotientCore) -> bool:
    return set(first.cells) == set(second.cells)


def split_from_rectangle(
    state: SurgeryState,
    rectangle: BoundaryRectangle,
    settings: Optional[Settings] = None,
    rectangle_index: Optional[int] = None,
) -> SurgeryState:
    """Шаг хирургии: расщепление ребра прямоугольника, проверенное ходом Рипса.

    Разбиение принимается, если образ нового ядра совпадает с результатом
    хода Рипса поклеточно либо новое ядро ему изоморфно при совпадении квадратов.
    """
    settings = settings or get_settings()
    if rectangle.side_label != S_SIDE:
        raise InputError("Surgery splits the source side only", {"side": rectangle.side_label})
    expected = rips_move(state.core, rectangle)
    half_edge = split_half_edge(rectangle)
    name = f"{state.original[0]}_{state.index + 1}"
    up_to_isomorphism = None
    tried = 0
    for plus, minus in partitions(state.graph, half_edge, settings.max_partitions):
        tried += 1
        candidate = split_graph(state.graph, half_edge, plus, name)
        if not candidate.graph.validate().accepted:
            continue
        try:
            morphism = derived_morphism(state, candidate.fold)
        except (InputError, ContractError) as exc:
            logger.debug("Partition %s | %s rejected: %s", plus, minus, exc.message)
            continue
        step = HistoryMap.of_fold(candidate.fold)
        fresh = build_core(morphism, ambient=lambda key: _map_key(key, step, None) in expected.cells)
        mapped = map_core(fresh, left=step)
        logger.debug("Partition %s | %s: mapped area %d, expected %d", plus, minus, mapped.area, expected.area)
        if _same_cells(mapped, expected):
            return _next_state(state, candidate, morphism, fresh, step, rectangle, rectangle_index, [])
        if (
            up_to_isomorphism is None
            and set(mapped.squares()) == set(expected.squares())
            and is_isomorphic(fresh, expected)
        ):
            up_to_isomorphism = (candidate, morphism, fresh, step)
    if up_to_isomorphism is not None:
        logger.info("Step %d on %s matches the Rips move up to isomorphism", state.index + 1, rectangle.fixed_edge)
        return _next_state(state, *up_to_isomorphism, rectangle, rectangle_index, [])
    raise SurgeryConsistencyError(
        "No partition reproduces the Rips move",
        {"edge": rectangle.fixed_edge, "end": rectangle.end, "partitions_tried": tried},
    )


def _next_state(state, candidate, morphism, fresh, step, rectangle, rectangle_index, warnings) -> SurgeryState:
    compatible = build_core(candidate.fold, free_cells=False).area == 0
    if not compatible:
        warnings = warnings + ["Consecutive splittings are not compatible"]
    logger.info(
        "Surgery step %d on %s: area %d -> %d",
        state.index + 1, rectangle.fixed_edge, state.area, fresh.area,
    )
    return SurgeryState(
        index=state.index + 1,
        graph=candidate.graph,
        target=state.target,
        morphism=morphism,
        core=fresh,
        history=step.then(state.history),
        original=state.original,
        rectangle=rectangle,
        rectangle_index=rectangle_index,
        partition={"plus": [list(h) for h in candidate.plus], "minus": [list(h) for h in candidate.minus]},
        compatible_with_previous=compatible,
        warnings=warnings,
    )


# --- последовательности ---


@dataclass
class ReplayStep:
    step: int
    side: str
    rectangle: int
    seed: Optional[int] = None

    def to_dict(self) -> dict:
        return {"step": self.step, "side": self.side, "rectangle": self.rectangle, "seed": self.seed}


def surgery_sequence(
    graph: MarkedGraph,
    target: MarkedGraph,
    policy: str = "canonical",
    seed: int = 0,
    settings: Optional[Settings] = None,
    replay: Optional[Sequence[ReplayStep]] = None,
) -> List[SurgeryState]:
    """Хирургии до ядра без квадратов; площадь строго убывает"""
    settings = settings or get_settings()
    if policy not in ("canonical", "seeded"):
        raise InputError(f"Unknown policy: {policy}", {"policy": policy})
    rng = SplitMix64(seed)
    states = [initial_state(graph, target)]
    while states[-1].area > 0:
        state = states[-1]
        rectangles = maximal_rectangles(state.core, S_SIDE)
        if not rectangles:
            raise SurgeryConsistencyError("Core with squares has no maximal rectangle", {"step": state.index + 1})
        if replay is not None:
            if state.index >= len(replay):
                raise InputError("Replay ended before the sequence terminated", {"step": state.index + 1})
            index = replay[state.index].rectangle
            if not 0 <= index < len(rectangles):
                raise InputError("Replayed rectangle no longer exists", {"step": state.index + 1, "rectangle": index})
        elif policy == "seeded":
            index = rng.below(len(rectangles))
        else:
            index = 0
        rectangle = rectangles[index]
        following = split_from_rectangle(state, rectangle, settings, index)
        if following.area != state.area - len(rectangle.run):
            raise SurgeryConsistencyError(
                "Surgery step did not remove exactly the rectangle",
                {"step": following.index, "before": state.area, "after": following.area, "run": len(rectangle.run)},
            )
        states.append(following)
    logger.info("Surgery sequence %s -> %s: %d states", graph.name, target.name, len(states))
    return states


def replay_of(states: Sequence[SurgeryState], seed: Optional[int] = None) -> List[ReplayStep]:
    return [ReplayStep(s.index, S_SIDE, s.rectangle_index, seed) for s in states[1:]]


# --- образы и пересечения ---


def include_into_original(history: HistoryMap, core: QuotientCore) -> Set[CellKey]:
    """Образ квадратов текущего ядра в исходном ядре"""
    image = {_map_key(k, history, None) for k in core.squares()}
    if len(image) != core.area:
        logger.warning("Genealogy is not injective on squares")
    return image


def _backward_image(state: SurgeryState) -> QuotientCore:
    return state.tracked_core().swapped()


def _check_pair(forward: SurgeryState, backward: SurgeryState) -> None:
    if forward.original != (backward.original[1], backward.original[0]):
        raise InputError(
            "Sequences do not start from the same pair",
            {"forward": list(forward.original), "backward": list(backward.original)},
        )


def union_condition(forward: SurgeryState, backward: SurgeryState, original: QuotientCore) -> bool:
    """Покрывают ли образы обоих ядер все квадраты исходного ядра"""
    _check_pair(forward, backward)
    covered = include_into_original(forward.history, forward.core)
    covered |= set(_backward_image(backward).squares())
    return covered >= set(original.squares())


def intersection_core(forward: SurgeryState, backward: SurgeryState, original: QuotientCore) -> QuotientCore:
    """Пересечение образов; при условии объединения изоморфно ядру пары"""
    if not union_condition(forward, backward, original):
        raise ContractError(
            "Union condition fails for this pair of indices",
            {"i": forward.index + 1, "j": backward.index + 1},
        )
    first = forward.tracked_core()
    second = _backward_image(backward)
    common = set(first.cells) & set(second.cells)
    return first.subcomplex(common, metadata={"i": forward.index + 1, "j": backward.index + 1})


def direct_core(forward: SurgeryState, backward: SurgeryState, original: QuotientCore) -> QuotientCore:
    """Ядро пары G_i, Γ_j, перенесённое в клетки исходного ядра"""
    morphism = make_morphism(forward.graph, backward.graph, allow_collapse=True)
    core = build_core(
        morphism,
        ambient=lambda key: _map_key(key, forward.history, backward.history) in original.cells,
    )
    return map_core(core, left=forward.history, right=backward.history)


@dataclass
class CrossCheck:
    i: int
    j: int
    cells_equal: bool
    isomorphic: bool

    def to_dict(self) -> dict:
        return {"i": self.i, "j": self.j, "cells_equal": self.cells_equal, "isomorphic": self.isomorphic}


def cross_check_intersection(forward: SurgeryState, backward: SurgeryState, original: QuotientCore) -> CrossCheck:
    expected = intersection_core(forward, backward, original)
    direct = direct_core(forward, backward, original)
    return CrossCheck(
        forward.index + 1,
        backward.index + 1,
        _same_cells(expected, direct),
        _same_cells(expected, direct) or is_isomorphic(expected, direct),
    )


def one_rips_move_apart(before: QuotientCore, after: QuotientCore) -> Optional[BoundaryRectangle]:
    """Прямоугольник, ход Рипса по которому переводит before в after"""
    for side in SIDES:
        for rectangle in maximal_rectangles(before, side):
            if _same_cells(rips_move(before, rectangle), after):
                return rectangle
    return None


# --- сопровождение путей ---


@dataclass
class Certificate:
    kind: str
    free_edge: Optional[FreeEdgeCertificate] = None
    distance_bound: int = 2

    @property
    def present(self) -> bool:
        return self.kind != "missing"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "free_edge": self.free_edge.to_dict() if self.free_edge else None,
            "distance_bound": self.distance_bound,
        }


def certify_core(core: QuotientCore) -> Certificate:
    edges = free_edges(core)
    if edges:
        return Certificate("free_edge", edges[0])
    if core.area == 0:
        return Certificate("compatible", None, 1)
    return Certificate("missing", None, 0)


@dataclass
class FellowTravelEntry:
    i: int
    j: int
    certificate: Certificate
    intersection_area: int

    def to_dict(self) -> dict:
        return {"i": self.i, "j": self.j, "intersection_area": self.intersection_area, "certificate": self.certificate.to_dict()}


@dataclass
class FellowTravelReport:
    entries: List[FellowTravelEntry]
    forward: List[dict]
    backward: List[dict]
    monotone: bool
    cross_checks: List[CrossCheck] = field(default_factory=list)
    rips_checks: List[dict] = field(default_factory=list)
    config: dict = field(default_factory=dict)

    @property
    def consistent(self) -> bool:
        """Прямые ядра изоморфны пересечениям, соседние пересечения отличаются ходом Рипса"""
        return all(c.isomorphic for c in self.cross_checks) and all(r["one_rips_move"] for r in self.rips_checks)

    @property
    def certified(self) -> bool:
        return self.consistent and all(e.certificate.present for e in self.entries)

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "certified": self.certified,
            "consistent": self.consistent,
            "bound": 2,
            "monotone": self.monotone,
            "entries": [e.to_dict() for e in self.entries],
            "forward": self.forward,
            "backward": self.backward,
            "cross_checks": [c.to_dict() for c in self.cross_checks],
            "rips_checks": self.rips_checks,
            "config": self.config,
        }


def _largest_index(conditions: List[bool]) -> Tuple[int, bool]:
    """Последний индекс с истинным условием и монотонность списка"""
    largest = max(k for k, ok in enumerate(conditions) if ok)
    monotone = all(conditions[: largest + 1])
    return largest, monotone


def fellow_traveling(
    forward: List[SurgeryState],
    backward: List[SurgeryState],
    cross_check: bool = False,
) -> FellowTravelReport:
    original = forward[0].core
    entries = []
    monotone = True
    checks: List[CrossCheck] = []
    rips_checks: List[dict] = []
    for state in forward:
        conditions = [union_condition(state, other, original) for other in backward]
        j, ordered = _largest_index(conditions)
        monotone = monotone and ordered
        inter = intersection_core(state, backward[j], original)
        certificate = certify_core(inter)
        if not certificate.present:
            logger.error("No certificate for i=%d, j=%d", state.index + 1, j + 1)
        entries.append(FellowTravelEntry(state.index + 1, j + 1, certificate, inter.area))
        if cross_check:
            cores = {k: intersection_core(state, backward[k], original) for k in range(len(backward)) if conditions[k]}
            for k in sorted(cores):
                checks.append(cross_check_intersection(state, backward[k], original))
                if k + 1 in cores:
                    found = one_rips_move_apart(cores[k], cores[k + 1])
                    rips_checks.append({"i": state.index + 1, "j": k + 1, "one_rips_move": found is not None})
    return FellowTravelReport(
        entries,
        [s.summary() for s in forward],
        [s.summary() for s in backward],
        monotone,
        checks,
        rips_checks,
    )


def verify_fellow_traveling(
    graph: MarkedGraph,
    target: MarkedGraph,
    policy: str = "canonical",
    seeds: Sequence[int] = (0,),
    settings: Optional[Settings] = None,
    cross_check: bool = False,
    strict: bool = True,
) -> FellowTravelReport:
    """Для каждого S_i находит Σ_j на расстоянии не больше 2"""
    settings = settings or get_settings()
    seed = seeds[0] if seeds else 0
    backward_seed = seeds[1] if len(seeds) > 1 else seed
    forward = surgery_sequence(graph, target, policy, seed, settings)
    backward = surgery_sequence(target, graph, policy, backward_seed, settings)
    report = fellow_traveling(forward, backward, cross_check)
    report.config = {"policy": policy, "seeds": [seed, backward_seed]}
    logger.info("Fellow traveling %s / %s: certified=%s", graph.name, target.name, report.certified)
    if strict and not report.certified:
        message = "Missing distance certificate" if report.consistent else "Cross checks disagree with the intersection cores"
        raise TheoremViolation(message, report.to_dict())
    return report


@dataclass
class ChainEntry:
    i: int
    j: int
    i_prime: int
    first: Certificate
    second: Certificate

    @property
    def present(self) -> bool:
        return self.first.present and self.second.present

    def to_dict(self) -> dict:
        return {
            "i": self.i,
            "j": self.j,
            "i_prime": self.i_prime,
            "first": self.first.to_dict(),
            "second": self.second.to_dict(),
            "distance_bound": 4,
        }


@dataclass
class ChainReport:
    entries: List[ChainEntry]
    first_forward: List[dict]
    second_forward: List[dict]
    backward: List[dict]
    config: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return all(e.present for e in self.entries)

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "certified": self.certified,
            "bound": 4,
            "entries": [e.to_dict() for e in self.entries],
            "first_forward": self.first_forward,
            "second_forward": self.second_forward,
            "backward": self.backward,
            "config": self.config,
        }


def verify_theorem_2(
    graph: MarkedGraph,
    target: MarkedGraph,
    seed1: int,
    seed2: int,
    settings: Optional[Settings] = None,
    strict: bool = True,
) -> ChainReport:
    """Сцепляет два сертификата через общую обратную последовательность"""
    settings = settings or get_settings()
    first = surgery_sequence(graph, target, "seeded", seed1, settings)
    second = surgery_sequence(graph, target, "seeded", seed2, settings)
    backward = surgery_sequence(target, graph, "canonical", 0, settings)
    original = first[0].core
    entries = []
    partner: Dict[int, Tuple[int, Certificate]] = {}
    for state in first:
        j, _ = _largest_index([union_condition(state, other, original) for other in backward])
        first_cert = certify_core(intersection_core(state, backward[j], original))
        if j not in partner:
            conditions = [union_condition(other, backward[j], original) for other in second]
            i_prime, _ = _largest_index(conditions)
            partner[j] = (i_prime, certify_core(intersection_core(second[i_prime], backward[j], original)))
        i_prime, second_cert = partner[j]
        entries.append(ChainEntry(state.index + 1, j + 1, i_prime + 1, first_cert, second_cert))
    report = ChainReport(
        entries,
        [s.summary() for s in first],
        [s.summary() for s in second],
        [s.summary() for s in backward],
        {"seeds": [seed1, seed2]},
    )
    logger.info("Chained fellow traveling %s / %s: certified=%s", graph.name, target.name, report.certified)
    if strict and not report.certified:
        raise TheoremViolation("Missing chained certificate", report.to_dict())
    return report
