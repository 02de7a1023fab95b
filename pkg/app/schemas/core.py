from pydantic import BaseModel
from typing import Optional, List, Dict, Any

from app.core.config import SCHEMA_VERSION
from app.schemas.graph import MarkedGraphSchema, GraphMapSchema


class CellKeySchema(BaseModel):
    kind: str
    g: str
    t: str
    word: str = ""


class CellSchema(CellKeySchema):
    faces: List[CellKeySchema] = []


class QuotientCoreSchema(BaseModel):
    schema_version: int = SCHEMA_VERSION
    source: str
    target: str
    area: int
    cells: List[CellSchema]
    metadata: Dict[str, Any] = {}
    diagnostics: Dict[str, Any] = {}
    hulls: List[Dict[str, Any]] = []
    rectangles: List[Dict[str, Any]] = []


class PairRequest(BaseModel):
    source: MarkedGraphSchema
    target: MarkedGraphSchema


class BuildCoreRequest(PairRequest):
    # Необязательное готовое отображение source -> target
    map: Optional[GraphMapSchema] = None


class RectanglesRequest(BuildCoreRequest):
    side: str = "S"


class CoreSummary(BaseModel):
    area: int
    vertices: int
    edges: int
    euler_characteristic: int
    free_edges: List[CellKeySchema] = []
    shared_edges: List[Dict[str, Any]] = []
    canonical_form: str


class BuildCoreResponse(BaseModel):
    run_id: Optional[int] = None
    summary: CoreSummary
    core: QuotientCoreSchema
