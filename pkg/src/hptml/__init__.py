"""Hawkes process with tempered Mittag-Leffler kernel: special functions,
expected intensity, Laplace inversion and Monte-Carlo simulation."""

__version__ = "0.1.0"

from .intensity import (
    IntensityCurve,
    expected_count,
    intensity_analytic,
    intensity_lt,
    intensity_numeric,
    stationary_intensity,
    stationary_intensity_series,
)
from .kernels import (
    Exponential,
    HawkesParams,
    MittagLeffler,
    NoKernel,
    TemperedML,
    kernel_cdf,
    kernel_density,
    kernel_lt,
)
from .laplace import invert_checked, invert_euler, invert_talbot
from .simulation import (
    CountHistogram,
    EventSequence,
    SeedSpec,
    count_distribution,
    sample_kernel_delay,
    simulate_cluster,
    simulate_thinning,
    tv_distance,
)
from .special import gamma_fn, ml_three_param, ml_two_param

__all__ = [
    "CountHistogram",
    "EventSequence",
    "Exponential",
    "HawkesParams",
    "IntensityCurve",
    "MittagLeffler",
    "NoKernel",
    "SeedSpec",
    "TemperedML",
    "count_distribution",
    "expected_count",
    "gamma_fn",
    "intensity_analytic",
    "intensity_lt",
    "intensity_numeric",
    "invert_checked",
    "invert_euler",
    "invert_talbot",
    "kernel_cdf",
    "kernel_density",
    "kernel_lt",
    "ml_three_param",
    "ml_two_param",
    "sample_kernel_delay",
    "simulate_cluster",
    "simulate_thinning",
    "stationary_intensity",
    "stationary_intensity_series",
    "tv_distance",
]
