from pydantic import BaseModel, ConfigDict, Field
from typing import Optional, List, Dict, Union

from app.core.config import SCHEMA_VERSION


class EdgeSchema(BaseModel):
    id: str
    from_: str = Field(alias="from")
    to: str
    label: Optional[str] = None

    model_config = ConfigDict(populate_by_name=True)


class MarkedGraphSchema(BaseModel):
    schema_version: int = SCHEMA_VERSION
    name: Optional[str] = None
    basis: List[str]
    vertices: List[str]
    edges: List[EdgeSchema]
    base: str
    spanning_tree: List[str]
    # Явная маркировка: символ -> замкнутый путь по рёбрам в базовой вершине
    marking: Optional[Dict[str, str]] = None


class GraphMapSchema(BaseModel):
    schema_version: int = SCHEMA_VERSION
    vertex_map: Dict[str, str]
    edge_map: Dict[str, Union[str, List[str]]]
    twist: Union[str, List[str]] = ""


class IssueResponse(BaseModel):
    code: str
    cell: Optional[str] = None
    message: str


class DiagnosticsResponse(BaseModel):
    accepted: bool
    rank: int
    issues: List[IssueResponse] = []
