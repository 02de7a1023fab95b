"""Общие шаги команд CLI и HTTP: загрузка пары, сборка ядра, сводки."""
import logging
from typing import List, Optional, Sequence, Tuple

from app.core.config import Settings
from app.core.errors import InputError
from app.schemas.graph import GraphMapSchema, MarkedGraphSchema
from app.services.core_builder import QuotientCore, build_core
from app.services.marked_graph import MarkedGraph
from app.services.square_complex import SIDES, BoundaryRectangle, canonical_form, free_edges, maximal_rectangles
from app.services.surgery_engine import ReplayStep, SurgeryState, replay_of, surgery_sequence
from app.services.tree_morphism import GraphMap, Morphism, make_morphism

logger = logging.getLogger(__name__)


def load_pair(source: MarkedGraphSchema, target: MarkedGraphSchema) -> Tuple[MarkedGraph, MarkedGraph]:
    """Два маркированных графа с различными именами"""
    first = MarkedGraph.from_schema(source, source.name or "G").ensure_valid()
    second = MarkedGraph.from_schema(target, target.name or "Γ").ensure_valid()
    if first.name == second.name:
        second = second.renamed(f"{second.name}'")
    return first, second


def morphism_for(graph: MarkedGraph, target: MarkedGraph, graph_map: Optional[GraphMapSchema] = None) -> GraphMap:
    if graph_map is None:
        return make_morphism(graph, target)
    given = GraphMap.from_dict(graph_map.model_dump(), graph, target)
    return Morphism(given)


def core_summary(core: QuotientCore) -> dict:
    return {
        "area": core.area,
        "vertices": len(core.vertices()),
        "edges": len(core.edges()),
        "euler_characteristic": core.euler_characteristic(),
        "free_edges": [c.edge.to_dict() for c in free_edges(core)],
        "shared_edges": core.diagnostics.get("shared_edges", []),
        "canonical_form": canonical_form(core),
    }


def rectangles_of(core: QuotientCore, side: Optional[str] = None) -> List[BoundaryRectangle]:
    if side is not None and side not in SIDES:
        raise InputError(f"Unknown side: {side}", {"side": side})
    sides = [side] if side else list(SIDES)
    return [r for s in sides for r in maximal_rectangles(core, s)]


def build(graph: MarkedGraph, target: MarkedGraph, graph_map: Optional[GraphMapSchema] = None) -> QuotientCore:
    return build_core(morphism_for(graph, target, graph_map))


def replay_steps(data: Optional[dict]) -> Optional[List[ReplayStep]]:
    if data is None:
        return None
    steps = sorted(data.get("steps", []), key=lambda s: s["step"])
    return [ReplayStep(s["step"], s.get("side", "S"), s["rectangle"], s.get("seed")) for s in steps]


def surgery_payload(states: Sequence[SurgeryState], settings: Settings) -> dict:
    """Сводка последовательности вместе с файлом воспроизведения"""
    first = states[0]
    return {
        "areas": [s.area for s in states],
        "states": [s.summary() for s in states],
        "replay": {
            "schema_version": 1,
            "policy": settings.policy,
            "seed": settings.seed,
            "source": first.original[0],
            "target": first.original[1],
            "steps": [step.to_dict() for step in replay_of(states, settings.seed)],
        },
        "config": settings.model_dump(),
    }


def run_surgery(
    graph: MarkedGraph, target: MarkedGraph, settings: Settings, replay: Optional[dict] = None,
) -> Tuple[List[SurgeryState], Settings]:
    """Последовательность хирургий; при воспроизведении политика и сид берутся из файла"""
    if replay is not None:
        recorded = (replay.get("source", graph.name), replay.get("target", target.name))
        if recorded != (graph.name, target.name):
            raise InputError("Replay was recorded for another pair", {"replay": list(recorded)})
        settings = settings.model_copy(
            update={"policy": replay.get("policy", settings.policy), "seed": replay.get("seed", settings.seed)}
        )
    states = surgery_sequence(graph, target, settings.policy, settings.seed, settings, replay_steps(replay))
    return states, settings
