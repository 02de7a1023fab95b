"""Архив вычислений: каждый успешный запуск сохраняется как Run."""
import json
import logging
from typing import List, Optional

from sqlalchemy.orm import Session

from app.core.config import Settings
from app.models.run import Run
from app.schemas.run import RunCreate

logger = logging.getLogger(__name__)


def record_run(
    db: Session,
    command: str,
    settings: Optional[Settings],
    payload: dict,
    area: Optional[int] = None,
    status: str = "ok",
) -> Run:
    data = RunCreate(
        command=command,
        policy=settings.policy if settings else None,
        # BigInteger знаковый: 64-битные сиды храним по модулю 2^63
        seed=(settings.seed % (1 << 63)) if settings else None,
        status=status,
        area=area,
        summary=json.dumps(payload, sort_keys=True, ensure_ascii=False),
    )
    run = Run(**data.model_dump())
    db.add(run)
    db.commit()
    db.refresh(run)
    logger.info("Archived run %d (%s, %s)", run.id, command, status)
    return run


def get_run(db: Session, run_id: int) -> Optional[Run]:
    return db.query(Run).filter(Run.id == run_id).first()


def list_runs(db: Session, limit: int = 50) -> List[Run]:
    """Последние запуски, новые первыми"""
    return db.query(Run).order_by(Run.created_at.desc(), Run.id.desc()).limit(limit).all()
