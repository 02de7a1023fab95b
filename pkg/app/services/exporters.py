"""Запись ядер, отчётов и файлов воспроизведения в JSON и DOT."""
import json
import logging
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

from app.core.config import SCHEMA_VERSION
from app.core.errors import InputError
from app.services.core_builder import H_EDGE, SQUARE, VERTEX, CellKey, QuotientCore
from app.services.square_complex import BoundaryRectangle

logger = logging.getLogger(__name__)


def dumps(data: dict) -> str:
    """Детерминированный JSON: сортированные ключи, версия схемы"""
    payload = dict(data)
    payload.setdefault("schema_version", SCHEMA_VERSION)
    return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_json(path: Path, data: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(data), encoding="utf-8")
    logger.info("Wrote %s", path)
    return path


def read_json(path: Path) -> dict:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise InputError(f"File not found: {path}", {"path": str(path)})
    except json.JSONDecodeError as exc:
        raise InputError(f"Corrupt JSON in {path}: {exc.msg}", {"path": str(path), "line": exc.lineno})
    if isinstance(data, dict) and data.get("schema_version", SCHEMA_VERSION) != SCHEMA_VERSION:
        raise InputError("Unsupported schema version", {"path": str(path), "schema_version": data["schema_version"]})
    return data


def _node_id(key: CellKey, ids: Dict[CellKey, str]) -> str:
    if key not in ids:
        ids[key] = f"n{len(ids)}"
    return ids[key]


def _corners(core: QuotientCore, square: CellKey) -> List[CellKey]:
    corners: List[CellKey] = []
    for face in core.faces(square)[:2]:
        for corner in core.faces(face):
            if corner not in corners:
                corners.append(corner)
    return corners


def core_to_dot(core: QuotientCore, rectangles: Sequence[BoundaryRectangle] = ()) -> str:
    """Граф ядра: вершины, рёбра с метками, квадраты как закрашенные узлы"""
    ids: Dict[CellKey, str] = {}
    runs: Dict[CellKey, int] = {}
    for index, rectangle in enumerate(rectangles):
        for square in rectangle.run:
            runs.setdefault(square, index)
    out = [
        f'graph "{core.source} x {core.target}" {{',
        "graph [",
        "splines=true,",
        "];",
        'node [fontsize = "10", shape = "point"];',
    ]
    for key in core.keys(VERTEX):
        out.append(f'{_node_id(key, ids)} [xlabel="{key.g},{key.t}"];')
    for key in core.edges():
        first, second = core.faces(key)
        colour = "black" if key.kind == H_EDGE else "blue"
        label = key.g if key.kind == H_EDGE else key.t
        out.append(f'{_node_id(first, ids)} -- {_node_id(second, ids)} [label="{label}", color="{colour}"];')
    for key in core.keys(SQUARE):
        node = _node_id(key, ids)
        label = f"{key.g}x{key.t}"
        fill = "lightgrey"
        if key in runs:
            label += f" run {runs[key]}"
            fill = "gold"
        out.append(f'{node} [shape="box", style="filled", fillcolor="{fill}", label="{label}"];')
        for corner in _corners(core, key):
            out.append(f'{node} -- {_node_id(corner, ids)} [style="dotted"];')
    out.append("}")
    return "\n".join(out) + "\n"


def write_dot(path: Path, core: QuotientCore, rectangles: Iterable[BoundaryRectangle] = ()) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(core_to_dot(core, list(rectangles)), encoding="utf-8")
    logger.info("Wrote %s", path)
    return path


def export_core(
    out: Path, core: QuotientCore, stem: str = "core", rectangles: Optional[Sequence[BoundaryRectangle]] = None,
) -> List[Path]:
    """core.json и core.dot в каталоге out"""
    rectangles = list(rectangles or [])
    data = core.to_dict()
    data["rectangles"] = [dict(r.to_dict(), index=i) for i, r in enumerate(rectangles)]
    return [write_json(Path(out) / f"{stem}.json", data), write_dot(Path(out) / f"{stem}.dot", core, rectangles)]
