"""Exception types shared across the solver."""


class VesselflowError(Exception):
    """Base class for all solver errors."""


class ConfigError(VesselflowError):
    """Invalid run configuration (schema, ranges, missing keys)."""


class GeometryError(VesselflowError):
    """Geometry violates the change-of-variables validity or has no valid inverse."""


class ClosureSingularityError(VesselflowError):
    """A closure denominator dropped below the safe threshold."""


class CollapsedVesselError(VesselflowError):
    """Pressure evaluation requested at non-positive cross section."""


class HyperbolicityError(VesselflowError):
    """Eigenvalue computation lost hyperbolicity (negative discriminant or complex pair)."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class NumericError(VesselflowError):
    """Non-finite values or failed iteration inside the time stepper.

    Carries the offending cell indices and simulation time when known so the
    CLI can report them on exit code 2.
    """

    def __init__(self, message, j=None, k=None, t=None):
        super().__init__(message)
        self.j = j
        self.k = k
        self.t = t

    def location(self):
        return f"(j={self.j}, k={self.k}, t={self.t})"
