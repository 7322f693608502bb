# core/exceptions.py

from typing import Any


class SolverError(Exception):
    """Base class for every error raised by the numeric modules."""


class DomainError(SolverError, ValueError):
    """Argument outside the domain of an operation."""


class ContractViolation(SolverError):
    """Operands that must share a grid (or a shape) do not."""


class NumericError(SolverError, ArithmeticError):
    """A non-finite value appeared; ``location`` says where."""

    def __init__(self, message: str, location: dict[str, Any] | None = None):
        self.location = dict(location or {})
        if self.location:
            where = ", ".join(f"{k}={v!r}" for k, v in self.location.items())
            message = f"{message} ({where})"
        super().__init__(message)


class ToleranceNotMet(SolverError):
    """Quadrature refinement budget exhausted before the tolerance was met."""

    def __init__(self, best_estimate: float, achieved_difference: float, t: float | None = None):
        self.best_estimate = best_estimate
        self.achieved_difference = achieved_difference
        self.t = t
        super().__init__(
            f"quadrature tolerance not met at t={t!r}: "
            f"best estimate {best_estimate!r}, last difference {achieved_difference:.3e}"
        )


class DivergenceError(SolverError):
    """Picard residual exceeded the divergence guard."""

    def __init__(self, residuals: list[float], threshold: float):
        self.residuals = list(residuals)
        self.threshold = threshold
        last = self.residuals[-1] if self.residuals else float("nan")
        super().__init__(
            f"iteration diverged after {len(self.residuals)} steps: "
            f"residual {last:.3e} exceeds guard {threshold:.3e}"
        )


class InsufficientSamples(SolverError):
    """Every sample drawn by a probe was degenerate."""


class UsageError(SolverError):
    """An operation was called without its prerequisites."""


class UnknownProblem(SolverError, LookupError):
    """Problem name is not in the registry."""


class InvalidProblem(SolverError):
    """Sampled structural checks failed for a problem on a grid."""

    def __init__(self, violations: list):
        self.violations = list(violations)
        summary = "; ".join(str(v) for v in self.violations[:5])
        super().__init__(f"problem failed {len(self.violations)} structural check(s): {summary}")


class ConfigError(SolverError):
    """Run configuration could not be parsed or validated."""
