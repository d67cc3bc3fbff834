"""Exception hierarchy shared by all h2contain modules."""


class H2ContainError(Exception):
    """Base class for every error raised by this package."""


# ---------------------------------------------------------------------------
# matrix kernels
# ---------------------------------------------------------------------------

class NotSymmetric(H2ContainError):
    """A matrix required to be symmetric is not, beyond tolerance."""


class NotHurwitz(H2ContainError):
    """A matrix required to be Hurwitz has an eigenvalue with real part >= -margin."""


class NoStabilizingSolution(H2ContainError):
    """The Riccati equation has no stabilizing solution for the given data."""


class IllConditioned(H2ContainError):
    """A matrix-equation solve failed numerically or could not reach its residual target."""


class DimensionMismatch(H2ContainError):
    """Operands have inconsistent shapes."""


# ---------------------------------------------------------------------------
# communication graph
# ---------------------------------------------------------------------------

class GraphError(H2ContainError):
    """Base class for communication-topology violations."""


class SelfLoop(GraphError):
    """An edge connects a node to itself."""


class EdgeIntoLeader(GraphError):
    """An edge terminates at a leader (leaders must not receive information)."""


class FollowersDisconnected(GraphError):
    """The undirected follower subgraph is not connected."""


class IsolatedLeader(GraphError):
    """A leader has no edge into any follower."""


# ---------------------------------------------------------------------------
# protocol design
# ---------------------------------------------------------------------------

class RegularityViolation(H2ContainError):
    """A regularity condition on the disturbance/feedthrough matrices fails."""


class InvalidSpectrum(H2ContainError):
    """Eigenvalue data violates a required spectral property."""


class CpOutOfRange(H2ContainError):
    """The coupling parameter lies outside the admissible interval."""


class BoundExceedsGamma(H2ContainError):
    """The certified cost bound is not below the requested budget gamma."""

    def __init__(self, bound, gamma):
        super().__init__(
            f"certified cost bound {bound:.6g} is not below gamma = {gamma:.6g}"
        )
        self.bound = bound
        self.gamma = gamma


class ThresholdExceeded(H2ContainError):
    """A per-agent cost term is not below the shared acceptance threshold."""

    def __init__(self, agents, threshold):
        ids = ", ".join(str(i + 1) for i in agents)
        super().__init__(
            f"per-agent cost terms exceed threshold {threshold:.6g} for agents {ids}"
        )
        self.agents = tuple(agents)
        self.threshold = threshold


class RegulatorInfeasible(H2ContainError):
    """The regulator equations admit no solution within tolerance."""


class CertificateFailed(H2ContainError):
    """A certificate condition does not hold for the supplied gains."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


# ---------------------------------------------------------------------------
# simulation
# ---------------------------------------------------------------------------

class NonFiniteState(H2ContainError):
    """A simulated state left the finite range (divergence guard)."""


class HorizonTooShort(H2ContainError):
    """The quadrature horizon does not cover enough of the impulse-response tail."""


# ---------------------------------------------------------------------------
# model files
# ---------------------------------------------------------------------------

class ModelParseError(H2ContainError):
    """The model file is not readable as JSON."""


class ModelInvariantError(H2ContainError):
    """The model file parses but violates a schema or model invariant."""

    def __init__(self, pointer, message):
        super().__init__(f"{pointer}: {message}")
        self.pointer = pointer
