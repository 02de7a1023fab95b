from .graph import MarkedGraphSchema, GraphMapSchema, EdgeSchema, DiagnosticsResponse
from .core import (
    CellKeySchema, CellSchema, QuotientCoreSchema,
    PairRequest, BuildCoreRequest, RectanglesRequest,
    CoreSummary, BuildCoreResponse
)
from .surgery import (
    ReplayStepSchema, ReplaySchema, SurgeryRequest, SurgeryResponse,
    VerifyRequest, Theorem2Request, ReportResponse
)
from .oracle import OracleRequest, OracleResponse
from .run import RunBase, RunCreate, RunResponse, RunsResponse
