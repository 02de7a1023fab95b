from fastapi import APIRouter, Depends
from sqlalchemy.orm import Session

from app.database.database import get_db
from app.core.errors import CoreError
from app.schemas.surgery import VerifyRequest, Theorem2Request, ReportResponse
from app.services.pipeline import load_pair
from app.services.run_archive import record_run
from app.services.surgery_engine import verify_fellow_traveling, verify_theorem_2
from app.api.v1.common import http_error, request_settings

router = APIRouter()

@router.post("/fellow-traveling", response_model=ReportResponse)
def fellow_traveling_endpoint(request: VerifyRequest, db: Session = Depends(get_db)):
    """Сертификаты расстояния не больше 2 между прямым и обратным путями"""
    try:
        seeds = request.seeds or [0]
        settings = request_settings(policy=request.policy, seed=seeds[0])
        graph, target = load_pair(request.source, request.target)
        report = verify_fellow_traveling(
            graph, target, settings.policy, seeds, settings, cross_check=request.cross_check, strict=False
        )
    except CoreError as exc:
        raise http_error(exc)

    payload = report.to_dict()
    status = "ok" if report.certified else "uncertified"
    run = record_run(db, "verify-fellow-traveling", settings, payload, status=status)
    return ReportResponse(run_id=run.id, certified=report.certified, report=payload)

@router.post("/theorem2", response_model=ReportResponse)
def chained_endpoint(request: Theorem2Request, db: Session = Depends(get_db)):
    """Сцепленные сертификаты расстояния не больше 4 для двух прямых путей"""
    try:
        settings = request_settings(policy="seeded", seed=request.seed1)
        graph, target = load_pair(request.source, request.target)
        report = verify_theorem_2(graph, target, request.seed1, request.seed2, settings, strict=False)
    except CoreError as exc:
        raise http_error(exc)

    payload = report.to_dict()
    status = "ok" if report.certified else "uncertified"
    run = record_run(db, "verify-theorem2", settings, payload, status=status)
    return ReportResponse(run_id=run.id, certified=report.certified, report=payload)
