"""Exception types shared across the package."""


class OtfkmError(Exception):
    """Base class for package-specific failures."""


class DimensionError(OtfkmError, ValueError):
    """A dimension is inadmissible for the requested construction."""


class NumericError(OtfkmError, RuntimeError):
    """A numerical kernel failed to converge."""


class ProjectionError(NumericError):
    """Newton projection onto a constraint set did not converge."""


class SamplingError(OtfkmError, RuntimeError):
    """Repeated attempts to sample a manifold point failed."""


class FrameError(OtfkmError, RuntimeError):
    """Tangent/normal frame construction failed (non-regular point)."""


class DegenerateError(OtfkmError, ValueError):
    """Multiplicities are degenerate; the geometric operation is refused."""


class NearFocalError(OtfkmError, ValueError):
    """Level-set value too close to a focal value; spectrum degenerates."""


class IntegrationError(OtfkmError, RuntimeError):
    """ODE integration produced a non-finite state or drifted off-manifold."""
