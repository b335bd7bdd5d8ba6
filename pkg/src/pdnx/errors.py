"""Exception types shared across the power-delivery model."""


class PdnxError(Exception):
    """Base class for all model errors."""


class ZeroConnections(PdnxError):
    """A parallel via field was requested with zero connections."""


class CapExceeded(PdnxError):
    """A vertical level needs more connections than its usage cap allows.

    Carries the maximum current the level can support within the cap so
    callers can report how far off the operating point is.
    """

    def __init__(self, message: str, achievable_max_a: float):
        super().__init__(message)
        self.achievable_max_a = achievable_max_a


class LoadExceedsRating(PdnxError):
    """A converter was asked for more output current than its rating."""

    def __init__(self, message: str, vr_index: int | None = None):
        super().__init__(message)
        self.vr_index = vr_index


class MarginExceeded(PdnxError):
    """Periphery placement needs more ring depth than the interposer margin."""


class AreaExceeded(PdnxError):
    """Under-die placement occupies more than the full die shadow."""


class DegenerateGrid(PdnxError):
    """Two VR sites collapse onto one grid node even after refinement."""


class SingularSystem(PdnxError):
    """The resistive grid has nodes unreachable from any source."""


class RatingViolation(PdnxError):
    """Strict-mode evaluation hit a converter rating violation."""


class NoConvergence(PdnxError):
    """The load/efficiency fixed point did not settle within the iteration cap."""


class Unsatisfiable(PdnxError):
    """No die area within the search bound satisfies the utilization caps."""


class TargetUnreachable(PdnxError):
    """Calibration search could not reach the requested target.

    The message includes the best residual found so the caller can decide
    whether the partial result is usable.
    """

    def __init__(self, message: str, best_value: float | None = None,
                 best_residual: float | None = None):
        super().__init__(message)
        self.best_value = best_value
        self.best_residual = best_residual


class ConfigError(PdnxError):
    """Bad run configuration (unknown dataset, unparseable field, bad units)."""
