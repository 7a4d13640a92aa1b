from typing import Any
from typing import NoReturn

from core.helper.enums import ExitCode


class LabException(Exception):  # noqa: N818
    exit_code: int = ExitCode.CONFIG_ERROR
    default_detail = "lab error"
    default_code = "lab_error"

    def __init__(self, detail: str | None = None, **context: Any) -> None:
        self.detail = detail or self.default_detail
        self.context = context
        super().__init__(self.detail)

    def as_dict(self) -> dict[str, Any]:
        return {
            "code": self.default_code,
            "detail": self.detail,
            "exit_code": int(self.exit_code),
            **{key: value for key, value in self.context.items() if _plain(value)},
        }


def _plain(value: Any) -> bool:
    return isinstance(value, (str, int, float, bool, list, tuple, dict, type(None)))


class LabError:
    class ConfigError(LabException):
        exit_code = ExitCode.CONFIG_ERROR
        default_detail = "invalid configuration"
        default_code = "config_error"

    class DomainError(LabException):
        exit_code = ExitCode.CONFIG_ERROR
        default_detail = "argument outside the operation's domain"
        default_code = "domain_error"

    class ConeViolation(LabException):
        exit_code = ExitCode.CONFIG_ERROR
        default_detail = "eigenvalues outside the admissible cone"
        default_code = "cone_violation"

    class GeometryError(LabException):
        exit_code = ExitCode.CONFIG_ERROR
        default_detail = "invalid form or field"
        default_code = "geometry_error"

    class SolverError(LabException):
        exit_code = ExitCode.SOLVER_FAILURE
        default_detail = "Monge-Ampere solve failed"
        default_code = "solver_error"

    class PreconditionError(LabException):
        exit_code = ExitCode.BOUND_VIOLATION
        default_detail = "precondition fails on computed data"
        default_code = "precondition_error"

    class BoundViolation(LabException):
        exit_code = ExitCode.BOUND_VIOLATION
        default_detail = "bound violated"
        default_code = "bound_violation"

    @classmethod
    def raise_error(
        cls,
        message: str,
        exception: str = "DomainError",
        **context: Any,
    ) -> NoReturn:
        e: type[LabException] = getattr(cls, exception)
        raise e(message, **context)
