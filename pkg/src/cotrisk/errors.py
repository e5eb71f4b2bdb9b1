"""Exception hierarchy.

Every error carries a module-qualified ``code`` so the CLI can emit a
machine-readable record without string matching.
"""


class CotriskError(Exception):
    code = "cotrisk.error"

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details

    def to_record(self):
        return {"code": self.code, "message": str(self), "details": self.details}


class InvalidArgument(CotriskError, ValueError):
    code = "cotrisk.invalid_argument"

    def __init__(self, message, module="cotrisk", **details):
        super().__init__(message, **details)
        self.code = f"{module}.invalid_argument"


class InvalidData(CotriskError, ValueError):
    code = "transport.invalid_data"


class DegenerateConfiguration(CotriskError):
    """Raised when no positive margin separates the affine pieces."""

    code = "smooth_quantile.degenerate_configuration"

    def __init__(self, message, pair=None, delta=None):
        super().__init__(message, pair=pair, delta=delta)
        self.pair = pair
        self.delta = delta


class InsufficientTailPoints(CotriskError):
    code = "risk_measures.insufficient_tail_points"


class AccuracyNotReached(CotriskError):
    code = "volumes.accuracy_not_reached"

    def __init__(self, message, best_estimate, **details):
        super().__init__(message, best_estimate=best_estimate, **details)
        self.best_estimate = best_estimate


class InsufficientData(CotriskError):
    code = "extreme_tails.insufficient_data"


class ParseError(CotriskError, ValueError):
    code = "io_cli.parse_error"

    def __init__(self, message, line=None, **details):
        super().__init__(message, line=line, **details)
        self.line = line
