from fastapi import APIRouter, Depends, HTTPException, Query
from sqlalchemy.orm import Session

from app.database.database import get_db
from app.schemas.run import RunResponse, RunsResponse
from app.services.run_archive import get_run, list_runs

router = APIRouter()

@router.get("/", response_model=RunsResponse)
def get_runs(limit: int = Query(50, ge=1, le=500), db: Session = Depends(get_db)):
    """Получить последние запуски"""
    return RunsResponse(runs=list_runs(db, limit))

@router.get("/{run_id}", response_model=RunResponse)
def get_run_by_id(run_id: int, db: Session = Depends(get_db)):
    """Получить запуск по идентификатору"""
    run = get_run(db, run_id)
    if not run:
        raise HTTPException(status_code=404, detail="Run not found")
    return run
