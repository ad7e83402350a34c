"""Exception hierarchy.

Three branches map onto the CLI exit codes: configuration problems (2),
numerical solver failures (3), and guarded physics preconditions (4).
"""


class AdiametricError(Exception):
    """Base class for all package errors."""


class ConfigError(AdiametricError):
    """Invalid or unparseable model configuration."""


class SolverError(AdiametricError):
    """A numerical routine failed to produce a trustworthy result."""


class StepSizeUnderflow(SolverError):
    """Adaptive step control shrank the step below the representable floor."""


class NoConvergence(SolverError):
    """An asymptotic limit did not stabilise under horizon doubling."""


class PhysicsError(AdiametricError):
    """A mathematical precondition of the requested operation is violated."""


class NonHermitianInput(PhysicsError):
    """Operand must be Hermitian within tolerance."""


class NotPositive(PhysicsError):
    """Operand must be positive definite."""


class DegenerateSpectrum(PhysicsError):
    """Eigenvalue gap below tolerance; biorthogonal basis ill-defined."""


class NotDiagonalizable(PhysicsError):
    """Eigenvector matrix numerically defective."""


class ComplexSpectrum(PhysicsError):
    """Operation requires a real spectrum (no positive static metric exists)."""


class NonpositiveWeight(PhysicsError):
    """Static-metric weights must all be positive."""


class NotPseudoHermitian(PhysicsError):
    """Two-level parameters violate the static-solution conditions."""


class RealSpectrumViolated(PhysicsError):
    """A schedule leaves the real-spectrum region."""


class SingularMetric(PhysicsError):
    """Metric is not invertible within working precision."""


class DimensionMismatch(PhysicsError):
    """Operand has the wrong shape."""


class OutOfRange(PhysicsError):
    """Scalar argument outside its admissible interval."""
