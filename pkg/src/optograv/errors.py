"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class OptogravError(Exception):
    exit_code = 1


class ConfigError(OptogravError, ValueError):
    """Malformed configuration, unknown keys, bad sweep specs."""

    exit_code = 2


class ValidationError(OptogravError, ValueError):
    """A parameter set violates a physical invariant."""

    exit_code = 2

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class SingularGeometryError(OptogravError, ValueError):
    exit_code = 2


class NumericalFailure(OptogravError, RuntimeError):
    exit_code = 3

    def __init__(self, message, achieved=None, step=None):
        self.achieved = achieved
        self.step = step
        super().__init__(message)


class UnstableSystemError(OptogravError, RuntimeError):
    """Linearized dynamics are not asymptotically stable; variances diverge."""

    exit_code = 3
