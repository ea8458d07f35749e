"""Exception types shared across geolab modules."""


class GeolabError(Exception):
    """Base class for all geolab errors."""


class DimensionMismatch(GeolabError):
    pass


class NonTimelikePoint(GeolabError):
    """The graph of u is not timelike at the requested point (margin <= 0)."""


class DegeneratePlane(GeolabError):
    """Tangent plane discriminant within the null tolerance of zero."""


class LeftTimelikeRegion(GeolabError):
    """Geodesic integration crossed into a region where the graph fails
    to be timelike."""


class StepUnderflow(GeolabError):
    pass


class ConnectionNotFound(GeolabError):
    """Boundary-value shooting exhausted its restarts.

    Carries the best endpoint residual seen; absence of a numeric
    solution is not a disproof of existence.
    """

    def __init__(self, message, best_residual=None):
        super().__init__(message)
        self.best_residual = best_residual


class Trapped(GeolabError):
    """A geodesic exhausted its parameter budget inside a sublevel set."""


class InsufficientSamples(GeolabError):
    """Consecutive first-exit points jumped by more than a half-turn."""


class CriticalPoint(GeolabError):
    pass


class ConditionThreeViolated(GeolabError):
    """Hess u(x,x)=0 on a level tangent but Hess u(x,N) != 0."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NegativeTangentHessian(GeolabError):
    """Hess u restricted to a level tangent space has a negative value."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class SigmaSlopeViolation(GeolabError):
    """The warble map's slope left the interval (0, 1]."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class FailedVerification(GeolabError):
    """Assembled Hessian of the convexified field has a negative eigenvalue."""

    def __init__(self, message, witness=None, min_eigenvalue=None):
        super().__init__(message)
        self.witness = witness
        self.min_eigenvalue = min_eigenvalue


class DimensionTooLarge(GeolabError):
    """Polyhedral cone algebra is capped at ambient dimension 6."""


class NotInCone(GeolabError):
    pass


class ConeDegenerate(GeolabError):
    """Cone lies in a proper subspace where the construction degenerates."""


class OrthogonalTangentPoint(GeolabError):
    """Base curve has a tangent hyperplane orthogonal to the ruling."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class PathSearchExhausted(GeolabError):
    """Path search was inconclusive (not a disproof)."""


class SchemaError(GeolabError):
    """Scenario configuration failed validation."""
