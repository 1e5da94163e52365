"""Exception hierarchy shared by all lab modules."""


class LabError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(LabError):
    """An argument violates a documented precondition."""


class InsufficientDepthError(LabError):
    """The stored continued-fraction depth cannot guarantee the requested precision."""


class InvalidHolesError(LabError):
    """Two hole projections lie on the same rotation orbit."""


class InvalidMassError(LabError):
    """Gap masses and Cantor mass cannot be normalized to total 1."""


class UnbalancedJumpsError(LabError):
    """Jump coefficients do not sum to zero within tolerance."""


class NotOneHoleError(LabError):
    """Operation requires a model with exactly one hole."""


class NotFullGapMeasureError(LabError):
    """Operation requires a model whose gaps carry full measure (cantor_mass = 0)."""


class IntegrationFailureError(LabError):
    """The ODE integrator failed (step-size collapse or non-finite state)."""


class MinimizationFailedError(LabError):
    """Action minimization did not reach a monotone critical point."""
