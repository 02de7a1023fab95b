from fastapi import APIRouter, Depends
from sqlalchemy.orm import Session

from app.database.database import get_db
from app.core.errors import CoreError
from app.schemas.core import BuildCoreRequest, BuildCoreResponse, RectanglesRequest
from app.schemas.graph import DiagnosticsResponse, MarkedGraphSchema
from app.services.marked_graph import MarkedGraph
from app.services.pipeline import build, core_summary, load_pair, rectangles_of
from app.services.run_archive import record_run
from app.api.v1.common import http_error

router = APIRouter()

@router.post("/validate", response_model=DiagnosticsResponse)
def validate_graph_endpoint(graph: MarkedGraphSchema):
    """Проверить маркированный граф"""
    try:
        diagnostics = MarkedGraph.from_schema(graph).validate()
    except CoreError as exc:
        raise http_error(exc)
    return diagnostics.to_dict()

@router.post("/build", response_model=BuildCoreResponse)
def build_core_endpoint(request: BuildCoreRequest, db: Session = Depends(get_db)):
    """Построить факторизованное ядро пары расщеплений"""
    try:
        graph, target = load_pair(request.source, request.target)
        core = build(graph, target, request.map)
    except CoreError as exc:
        raise http_error(exc)

    summary = core_summary(core)
    run = record_run(db, "build-core", None, summary, area=core.area)
    return BuildCoreResponse(run_id=run.id, summary=summary, core=core.to_dict())

@router.post("/rectangles")
def rectangles_endpoint(request: RectanglesRequest, db: Session = Depends(get_db)):
    """Максимальные граничные прямоугольники ядра"""
    try:
        graph, target = load_pair(request.source, request.target)
        core = build(graph, target, request.map)
        rectangles = rectangles_of(core, request.side)
    except CoreError as exc:
        raise http_error(exc)

    payload = {
        "area": core.area,
        "rectangles": [dict(r.to_dict(), index=i) for i, r in enumerate(rectangles)],
    }
    run = record_run(db, "rectangles", None, payload, area=core.area)
    return {"run_id": run.id, **payload}
