from fastapi import APIRouter, Depends
from sqlalchemy.orm import Session

from app.database.database import get_db
from app.core.errors import CoreError
from app.schemas.oracle import OracleRequest, OracleResponse
from app.services.core_builder import build_core
from app.services.oracle import oracle_core
from app.services.pipeline import load_pair, morphism_for
from app.services.run_archive import record_run
from app.api.v1.common import http_error, request_settings

router = APIRouter()

@router.post("/core", response_model=OracleResponse)
def oracle_core_endpoint(request: OracleRequest, db: Session = Depends(get_db)):
    """Перебор лучей для проверки квадратов ядра"""
    try:
        settings = request_settings(
            depth=request.depth,
            period=request.period,
            window=request.window,
            ball_cap=request.ball_cap,
            oracle_band=request.band,
        )
        graph, target = load_pair(request.source, request.target)
        morphism = morphism_for(graph, target, request.map)
        report = oracle_core(morphism, settings)
        agrees = report.agrees_with(build_core(morphism))
    except CoreError as exc:
        raise http_error(exc)

    payload = report.to_dict()
    payload["agrees_with_core"] = agrees
    run = record_run(db, "oracle", settings, payload, area=len(report.squares))
    return OracleResponse(
        run_id=run.id,
        agrees_with_core=agrees,
        squares=payload["squares"],
        inconclusive=payload["inconclusive"],
        bounds=payload["bounds"],
    )
