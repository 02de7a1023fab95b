from pydantic import BaseModel
from typing import Optional, List, Dict, Any

from app.schemas.core import BuildCoreRequest


class OracleRequest(BuildCoreRequest):
    depth: Optional[int] = None
    period: Optional[int] = None
    window: Optional[int] = None
    ball_cap: Optional[int] = None
    band: Optional[int] = None


class OracleResponse(BaseModel):
    run_id: Optional[int] = None
    agrees_with_core: bool
    squares: List[Dict[str, Any]]
    inconclusive: List[Dict[str, Any]] = []
    bounds: Dict[str, int]
