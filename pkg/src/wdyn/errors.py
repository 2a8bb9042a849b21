"""Exception taxonomy shared across the package."""


class ShapeError(ValueError):
    """Operand dimensions are incompatible."""


class ArgumentError(ValueError):
    """A scalar argument is out of its documented domain."""


class ConfigError(ValueError):
    """A configuration value violates the documented schema."""


class NumericError(RuntimeError):
    """An iterative numerical routine failed to converge."""


class StateError(RuntimeError):
    """An object was used outside its legal lifecycle (e.g. a spent tape)."""


class DivergenceError(RuntimeError):
    """A trajectory or rollout left the finite/bounded regime."""


class StiffnessError(NumericError):
    """An implicit solve failed; typically the problem is too stiff for the
    requested step size."""


class TrainingError(RuntimeError):
    """Optimization hit a non-finite loss or an unrecoverable rollout."""
