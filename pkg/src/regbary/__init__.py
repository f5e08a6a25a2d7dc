"""Canonical Wasserstein-regularized barycenters on finite metric measure spaces."""

from .barycenter import (
    BarycenterResult,
    EpsilonPath,
    barycenter_set,
    barycentric_cost,
    canonical_barycenter,
    epsilon_sweep,
    f_epsilon_value,
    flip_threshold,
    minimize_f_epsilon,
)
from .dynamics import (
    OrbitReport,
    jensen_check,
    martingale_check,
    orbit,
    support_determines_check,
    variance_sequence,
)
from .errors import (
    ConvergenceError,
    InvalidArgumentError,
    NoFiniteMetricError,
    PropertyFailure,
    ValidationError,
)
from .estimator import EpsilonBarycenter, RegularizedBarycenter
from .ot import TransportPlan, oracle_ot_uniform, solve_ot, variance, verify_certificate, w2
from .space import (
    Measure,
    MetricMeasureSpace,
    build_circle,
    build_graph,
    build_interval,
    build_sphere_grid,
    read_measure,
    read_space,
    validate,
    write_measure,
    write_space,
)

__version__ = "0.1.0"
