from pydantic import BaseModel, Field
from typing import Optional, List, Dict, Any

from app.core.config import SCHEMA_VERSION
from app.schemas.core import PairRequest


class ReplayStepSchema(BaseModel):
    step: int = Field(ge=1)
    side: str = "S"
    rectangle: int = Field(ge=0)
    seed: Optional[int] = None


class ReplaySchema(BaseModel):
    schema_version: int = SCHEMA_VERSION
    policy: str = "canonical"
    seed: int = 0
    source: str
    target: str
    steps: List[ReplayStepSchema]


class SurgeryRequest(PairRequest):
    policy: Optional[str] = None
    seed: Optional[int] = None
    replay: Optional[ReplaySchema] = None


class SurgeryResponse(BaseModel):
    run_id: Optional[int] = None
    areas: List[int]
    states: List[Dict[str, Any]]
    replay: ReplaySchema


class VerifyRequest(PairRequest):
    policy: Optional[str] = None
    seeds: List[int] = [0]
    cross_check: bool = False


class Theorem2Request(PairRequest):
    seed1: int = 0
    seed2: int = 1


class ReportResponse(BaseModel):
    run_id: Optional[int] = None
    certified: bool
    report: Dict[str, Any]
