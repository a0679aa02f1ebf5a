"""Normal star products, star exponentials and coherent-state path integrals."""

from .errors import (
    DimensionTooSmall,
    DivergentTransform,
    InadmissibleTestFunction,
    NonConvergence,
    NonConvergenceWarning,
    TruncationTooCoarse,
)
from .symbols import (
    NormalSymbol,
    StarSeries,
    evaluate,
    star_commutator,
    star_exponential,
    star_multiply,
    star_power,
)

from .quadrature import ComplexPlaneRule, gauss_hermite_rule, integrate, star_multiply_integral
from .quasiprob import (
    GaussPoly,
    GeneralizedDeltaPair,
    PhaseSpaceFunction,
    QuasiDistribution,
    SOrder,
    characteristic_function,
    delta_sift,
    optical_expectation,
    p_nondiagonal,
    q_representation,
    quasi_distribution,
)
from .pathintegral import (
    AmplitudeReport,
    SliceConfig,
    compare_all,
    convergence_study,
    discrete_exponent,
    novikov_identity_residual,
    sliced_amplitude,
    star_amplitude,
)

__version__ = "0.1.0"
