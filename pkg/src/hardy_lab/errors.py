"""Exception hierarchy for hardy-lab.

Every failure an operation can report has its own class so callers (and the
CLI exit-code contract) can tell configuration mistakes apart from numerical
failures.
"""

from __future__ import annotations


class HardyLabError(Exception):
    """Base class for every error raised by hardy-lab."""


class ConfigInvalidError(HardyLabError):
    """A run configuration or a textual spec failed validation."""


# geometry kernel


class PointOutsideDomainError(HardyLabError):
    def __init__(self, point, domain_kind: str):
        self.point = tuple(float(c) for c in point)
        self.domain_kind = domain_kind
        super().__init__(f"point {self.point} is not inside {domain_kind}")


class FailedMinimizationError(HardyLabError):
    """Near-point refinement did not converge within its iteration budget."""


class ParameterOutOfRangeError(HardyLabError):
    pass


class OnRidgeError(HardyLabError):
    """The distance function is not twice differentiable at this point."""


class StencilLeavesDomainError(HardyLabError):
    pass


class StencilCrossesRidgeError(HardyLabError):
    pass


class MarchExceedsTruncationError(HardyLabError):
    pass


# verifier


class InadmissiblePointError(HardyLabError):
    pass


class DomainVariantMismatchError(HardyLabError):
    def __init__(self, spec_kind: str, domain_kind: str):
        self.spec_kind = spec_kind
        self.domain_kind = domain_kind
        super().__init__(f"{spec_kind} is not stated for {domain_kind}")


class BandTouchesRidgeError(HardyLabError):
    pass


class BandEmptyError(HardyLabError):
    pass


class QuadratureUnconvergedError(HardyLabError):
    def __init__(self, coarse: float, refined: float, tolerance: float):
        self.coarse = coarse
        self.refined = refined
        self.tolerance = tolerance
        super().__init__(
            f"resolution doubling moved the integral from {coarse!r} to "
            f"{refined!r} (tolerance {tolerance:g})"
        )


class InadmissibleCombinationError(HardyLabError):
    pass


class AlphaOutOfRangeError(HardyLabError):
    pass


# conformal


class AnnulusBoundaryError(HardyLabError):
    pass


class BranchDiscontinuityError(HardyLabError):
    pass


class SampleOutsideDomainError(HardyLabError):
    pass


__all__ = [
    "AlphaOutOfRangeError",
    "AnnulusBoundaryError",
    "BandEmptyError",
    "BandTouchesRidgeError",
    "BranchDiscontinuityError",
    "ConfigInvalidError",
    "DomainVariantMismatchError",
    "FailedMinimizationError",
    "HardyLabError",
    "InadmissibleCombinationError",
    "InadmissiblePointError",
    "MarchExceedsTruncationError",
    "OnRidgeError",
    "ParameterOutOfRangeError",
    "PointOutsideDomainError",
    "QuadratureUnconvergedError",
    "SampleOutsideDomainError",
    "StencilCrossesRidgeError",
    "StencilLeavesDomainError",
]
