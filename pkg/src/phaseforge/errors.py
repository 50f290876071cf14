"""Exception hierarchy.  Each class carries a stable ``code`` and CLI ``exit_code``."""


class PhaseforgeError(Exception):
    code = "ERROR"
    exit_code = 6
    stage = None

    def detail(self):
        msg = str(self)
        return f"[{self.stage}] {msg}" if self.stage else msg


class ConfigError(PhaseforgeError, ValueError):
    code = "CONFIG"
    exit_code = 2

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class GeometryError(PhaseforgeError, ValueError):
    code = "GEOMETRY"


class InvalidSurface(GeometryError):
    code = "INVALID_SURFACE"


class NoIntersection(GeometryError):
    code = "NO_INTERSECTION"

    def __init__(self, message, pixel=None):
        if pixel is not None:
            message = f"pixel {pixel}: {message}"
        super().__init__(message)
        self.pixel = pixel


class AmbiguousIntersection(GeometryError):
    code = "AMBIGUOUS_INTERSECTION"

    def __init__(self, message, pixel=None):
        if pixel is not None:
            message = f"pixel {pixel}: {message}"
        super().__init__(message)
        self.pixel = pixel


class OutOfRange(PhaseforgeError, ValueError):
    code = "OUT_OF_RANGE"


class NotOnSurface(GeometryError):
    code = "NOT_ON_SURFACE"


class TargetUnreachable(GeometryError):
    code = "TARGET_UNREACHABLE"

    def __init__(self, message, pixel=None):
        if pixel is not None:
            message = f"pixel {pixel}: {message}"
        super().__init__(message)
        self.pixel = pixel


class EmptyInput(PhaseforgeError, ValueError):
    code = "EMPTY_INPUT"


class NonPositiveFootprint(PhaseforgeError, ValueError):
    code = "NON_POSITIVE_FOOTPRINT"


class EvanescentDeflection(PhaseforgeError, ValueError):
    code = "EVANESCENT_DEFLECTION"


class NonMonotoneLut(PhaseforgeError, ValueError):
    code = "NON_MONOTONE_LUT"
    exit_code = 3


class DeflectionBudgetExceeded(PhaseforgeError, ValueError):
    """A requested shift lies outside the calibrated LUT range."""

    code = "DEFLECTION_BUDGET_EXCEEDED"
    exit_code = 4

    def __init__(self, required, available, pixel=None):
        lo, hi = available
        shortfall = required - hi if required > hi else lo - required
        where = f"pixel {pixel}: " if pixel is not None else ""
        super().__init__(
            f"{where}required shift {required:.9g} m outside available "
            f"[{lo:.9g}, {hi:.9g}] m (shortfall {shortfall:.9g} m)"
        )
        self.required = required
        self.available = available
        self.shortfall = shortfall
        self.pixel = pixel


class PhaseRangeExceeded(PhaseforgeError, ValueError):
    code = "PHASE_RANGE_EXCEEDED"


class FormatError(PhaseforgeError, ValueError):
    code = "FORMAT"
    exit_code = 5

    def __init__(self, path, offset, message):
        super().__init__(f"{path}: byte {offset}: {message}")
        self.path = str(path)
        self.offset = offset
