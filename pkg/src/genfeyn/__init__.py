"""Generalized Feynman graph calculus for arbitrary base measures, in exact arithmetic."""

from .engine import (
    CompositeMoment,
    ExpansionRequest,
    SeriesResult,
    VolumeSpec,
    evaluate_graph,
    exact_partition_function,
    free_energy_series,
    moment_sum_direct,
    normalized_moment_series,
    perturbation_series,
    truncated_composite_moment,
)
from .errors import CapabilityError, CapacityError, ConfigError, DomainError
from .graphs import FeynmanGraph, alpha, alpha_inverse, enumerate_graphs, has_self_contraction, is_connected, to_dot
from .moments import (
    DiscreteMeasure,
    GaussianOracle,
    IIDCumulantOracle,
    MomentOracle,
    moment_from_truncated,
    truncated_moment,
    truncated_moment_mobius,
)
from .partitions import (
    Partition,
    enumerate_connected_partitions,
    enumerate_pair_partitions,
    enumerate_partitions,
    enumerate_sc_free_partitions,
    transport,
)
from .powerseries import FormalSeries
from .wick import orthogonality_report, wick_expand, wick_expectation_recursive, wick_expectation_sc

__version__ = "0.1.0"
