"""Exception hierarchy shared across the package."""


class RetroOpsError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatch(RetroOpsError):
    """Operands have incompatible shapes or dimensions."""


class NotHermitian(RetroOpsError):
    """A matrix required to be Hermitian fails the tolerance check."""


class NoConvergence(RetroOpsError):
    """The iterative eigensolver exhausted its sweep budget."""


class NotCP(RetroOpsError):
    """Kraus extraction was requested for a map that is not completely positive."""


class NotProjector(RetroOpsError):
    """Builder input fails the P = P* = P^2 check."""


class NotUnitary(RetroOpsError):
    """Builder input fails the U*U = I check."""


class NotOperation(RetroOpsError):
    """A superoperator required to be an operation (CP, sub-unital, sub-tracial) is not."""


class NotResolution(RetroOpsError):
    """A family of operations does not sum to a trivial operation."""


class NotTrivialSum(RetroOpsError):
    """Instrument components do not sum to a unital, trace-preserving map."""


class ZeroCondition(RetroOpsError):
    """A conditional probability was requested with a zero-weight condition."""


class InvariantViolation(RetroOpsError):
    """A numerical quantity violated an invariant by more than the tolerance."""


class ZeroProbabilityBranch(RetroOpsError):
    """The sampler selected an outcome whose branch probability is numerically zero."""


class NoConditionHits(RetroOpsError):
    """No sampled trajectory produced the conditioning outcome."""


class ParseError(RetroOpsError):
    """Scenario text is not valid JSON."""


class ValidationError(RetroOpsError):
    """Scenario content violates a schema or consistency requirement."""
