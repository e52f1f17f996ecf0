"""
Error Taxonomy
Every failure carries a readable detail and the exit code the CLI returns for it
"""
from typing import Any, Optional


class CertifyError(Exception):
    """Base error; `exit_code` is what the CLI exits with when it is not handled"""

    exit_code: int = 1

    def __init__(self, detail: str, exit_code: Optional[int] = None, witness: Any = None):
        super().__init__(detail)
        self.detail = detail
        self.witness = witness
        if exit_code is not None:
            self.exit_code = exit_code


# Configuration problems -> exit 2
class ConfigError(CertifyError):
    exit_code = 2


class InvalidParameterError(ConfigError):
    pass


class UnsupportedDimensionError(ConfigError):
    pass


class UnknownKernelError(ConfigError):
    pass


# Numerical failures; the certifier maps them to inconclusive verdicts
class OriginEvaluationError(CertifyError):
    pass


class NonRadialModelError(CertifyError):
    pass


class TraceError(CertifyError):
    pass


class NoRootError(TraceError):
    pass


class LostBranchError(TraceError):
    pass


class BranchMismatchError(TraceError):
    pass


class DivergentQuadratureError(CertifyError):
    pass


class FarkasConsistencyError(CertifyError):
    pass


# Run-level outcomes
class HypothesisFailure(CertifyError):
    exit_code = 3


class ReproductionMismatch(CertifyError):
    exit_code = 4


class ReportIOError(CertifyError):
    exit_code = 5
