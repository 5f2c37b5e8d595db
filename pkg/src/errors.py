"""Exception hierarchy for the modal workbench.

Every error raised by the library derives from WorkbenchError (a
RuntimeError). The CLI turns these into structured error JSON via to_dict().
"""

from typing import Any, Dict, Optional


class WorkbenchError(RuntimeError):
    """Base class for all domain errors."""

    code = "workbench_error"

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {"type": self.code, "message": self.message}
        if self.details:
            payload["details"] = {k: _jsonable(v) for k, v in self.details.items()}
        return payload


def _jsonable(value: Any) -> Any:
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return str(value)


class ConfigError(WorkbenchError):
    code = "config_error"


class FormulaSyntaxError(WorkbenchError):
    """Malformed formula text. `offset` is a byte offset into the UTF-8 input."""

    code = "syntax_error"

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at byte {offset}", offset=offset)
        self.offset = offset


class FormulaError(WorkbenchError):
    code = "formula_error"


class FrameError(WorkbenchError):
    code = "frame_error"


class UnknownWorld(WorkbenchError):
    code = "unknown_world"

    def __init__(self, world: str):
        super().__init__(f"Unknown world: {world!r}", world=world)
        self.world = world


class NonTransitive(WorkbenchError):
    code = "non_transitive"


class DirtyCluster(WorkbenchError):
    code = "dirty_cluster"


class UnknownLogic(WorkbenchError):
    code = "unknown_logic"


class UnknownSuite(WorkbenchError):
    code = "unknown_suite"


class BudgetExceeded(WorkbenchError):
    code = "budget_exceeded"

    def __init__(self, what: str, required: int, budget: int):
        super().__init__(
            f"{what} needs {required} steps, budget is {budget}",
            what=what,
            required=required,
            budget=budget,
        )
        self.required = required
        self.budget = budget


class NotRefuted(WorkbenchError):
    code = "not_refuted"


class SmaxNotFound(WorkbenchError):
    code = "smax_not_found"


class SourceClassMismatch(WorkbenchError):
    code = "source_class_mismatch"


class WitnessNotFound(WorkbenchError):
    """The source model has no witness of the kind a filtration step needs."""

    code = "witness_not_found"

    def __init__(self, step: str, formula: str, world: str, instance: Optional[str] = None):
        message = f"No {step} witness for {formula} at {world}"
        if instance:
            message += f" ({instance})"
        super().__init__(message, step=step, formula=formula, world=world, instance=instance)
        self.step = step
        self.formula = formula
        self.world = world
