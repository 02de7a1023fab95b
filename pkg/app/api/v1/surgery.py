from fastapi import APIRouter, Depends
from sqlalchemy.orm import Session

from app.database.database import get_db
from app.core.errors import CoreError
from app.schemas.surgery import SurgeryRequest, SurgeryResponse
from app.services.pipeline import load_pair, run_surgery, surgery_payload
from app.services.run_archive import record_run
from app.api.v1.common import http_error, request_settings

router = APIRouter()

@router.post("/sequence", response_model=SurgeryResponse)
def surgery_sequence_endpoint(request: SurgeryRequest, db: Session = Depends(get_db)):
    """Последовательность хирургий до ядра без квадратов"""
    try:
        settings = request_settings(policy=request.policy, seed=request.seed)
        graph, target = load_pair(request.source, request.target)
        replay = request.replay.model_dump() if request.replay else None
        states, settings = run_surgery(graph, target, settings, replay)
    except CoreError as exc:
        raise http_error(exc)

    payload = surgery_payload(states, settings)
    run = record_run(db, "surgery", settings, payload, area=states[0].area)
    return SurgeryResponse(run_id=run.id, areas=payload["areas"], states=payload["states"], replay=payload["replay"])
