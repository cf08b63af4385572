"""Exception hierarchy for the ustat_resample package.

Every error raised on a documented failure path derives from
:class:`UStatError` so callers can catch library failures as one family
while tests pin the specific class.
"""


class UStatError(Exception):
    """Base class for all package errors."""


class ConfigInvalid(UStatError):
    """A run configuration failed validation.

    Carries the offending field name so CLI diagnostics can point at it.
    """

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class OrderMismatch(UStatError):
    """Kernel order does not match the data or companion object."""


class DimensionMismatch(UStatError):
    """Observation dimension does not match the kernel or law."""


class NonSymmetricKernel(UStatError):
    """A kernel failed the symmetry spot check."""


class KernelOrderTooLarge(UStatError):
    """Symmetrization by permutation averaging is limited to order <= 4."""


class SampleTooSmall(UStatError):
    """Fewer observations than the kernel order."""


class EnumerationTooLarge(UStatError):
    """The requested exact enumeration exceeds the documented cap."""


class CovarianceNotPSD(UStatError):
    """A Gaussian covariance matrix has an eigenvalue below -1e-10."""


class DegeneracyCheckFailed(UStatError):
    """A kernel that must be completely degenerate failed the check."""


class W1Violation(UStatError):
    """Weights violate non-negativity or the sum-to-n constraint."""


class InfiniteMomentNorm(UStatError):
    """A bound requires a finite L_{p,1} norm but the norm diverges."""


class SumConstraintViolated(UStatError):
    """A weight vector does not sum to the sample size."""


class EnvelopeIncomplete(UStatError):
    """An envelope does not cover the requested sample size or order."""


class DegeneratePosition(UStatError):
    """Simplicial depth is undefined: the query point coincides with a
    data point or is collinear with two data points."""


class OptimizerBoundsMissing(UStatError):
    """No search bounds were given and none can be derived from data."""


class DesignInvalid(UStatError):
    """A sampling design has invalid parameters or missing inputs."""


class MissingAnalyticFields(UStatError):
    """A criterion lacks the analytic fields an experiment requires."""
