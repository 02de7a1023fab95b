from pydantic import BaseModel, ConfigDict
from typing import Optional, List
from datetime import datetime


class RunBase(BaseModel):
    command: str
    policy: Optional[str] = None
    seed: Optional[int] = None
    status: str = "ok"
    area: Optional[int] = None


class RunCreate(RunBase):
    summary: str = "{}"


class RunResponse(RunBase):
    id: int
    summary: str
    created_at: Optional[datetime] = None

    model_config = ConfigDict(from_attributes=True)


class RunsResponse(BaseModel):
    runs: List[RunResponse]
