"""Numerical laboratory for R-boundedness, type/cotype, Lorentz and Besov norms."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    DegenerateInput,
    DimensionError,
    InternalError,
    InvalidParameter,
    RBoundLabError,
    Unsupported,
    UnsupportedDual,
)
from .measure import DiscreteMeasureSpace, StepFunction, decreasing_rearrangement, lorentz_norm, lp_norm  # noqa: E402
from .rademacher import (  # noqa: E402
    MomentEstimate,
    NormedSpace,
    RandomConfig,
    Vector,
    gaussian_moment,
    rademacher_moment,
)
from .rbound import (  # noqa: E402
    Assignment,
    OperatorFamily,
    RBoundEstimate,
    adjoint_family,
    rbound_lower,
    rbound_ratio,
    uniform_norm_lower,
)
