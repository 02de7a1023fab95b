from typing import Any, Dict, Optional


class CoreError(Exception):
    """Базовая ошибка вычислений ядра"""

    code = "core_error"
    status_code = 400

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        return {"error": self.code, "message": self.message, "details": self.details}


class InputError(CoreError):
    code = "input_error"
    status_code = 422


class SharedEdgeError(CoreError):
    """Ребро схлопывается: разбиения имеют общее ребро"""

    code = "shared_edge"
    status_code = 422


class ResourceLimitError(CoreError):
    code = "resource_limit"
    status_code = 413


class ContractError(CoreError):
    code = "contract_violation"
    status_code = 409


class SurgeryConsistencyError(CoreError):
    code = "surgery_inconsistent"
    status_code = 500


class TheoremViolation(CoreError):
    code = "theorem_violation"
    status_code = 500
