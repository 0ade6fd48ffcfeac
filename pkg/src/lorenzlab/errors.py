"""Exception types shared across the package."""


class LorenzLabError(Exception):
    """Base class for all errors raised by lorenzlab."""


class InvalidParameterError(LorenzLabError, ValueError):
    """A parameter value is outside its admissible range."""


class ChartMismatchError(LorenzLabError, ValueError):
    """A state was given in a chart the operation does not accept."""


class DomainError(LorenzLabError, ValueError):
    """A point lies outside the domain of a coordinate map."""


class StepRejectedError(LorenzLabError, RuntimeError):
    """An integrator step was rejected; the caller must shrink dt."""


class BlowUpError(LorenzLabError, RuntimeError):
    """A trajectory coordinate exceeded the overflow guard."""


class SingularSolveError(LorenzLabError, RuntimeError):
    """A linear solve failed or left an unacceptable residual."""


class TooFewExcursionsError(LorenzLabError, ValueError):
    """Not enough complete excursions to form the requested estimate."""


class BracketError(LorenzLabError, ValueError):
    """A root bracket does not straddle a sign change."""


class DegenerateLambdaError(LorenzLabError, ValueError):
    """The stability exponent is exactly zero; no sign to build on."""


class DegenerateDiffusionError(LorenzLabError, ValueError):
    """The diffusion coefficient is zero where the solver needs it positive."""


class EmptyTrajectoryError(LorenzLabError, ValueError):
    """A sample stream contains no usable samples."""


class PreconditionError(LorenzLabError, ValueError):
    """Inputs violate a hypothesis the check is supposed to run under."""


class NoCrossingError(LorenzLabError, ValueError):
    """An ODE cannot cross the requested strip (drift not uniformly positive)."""
