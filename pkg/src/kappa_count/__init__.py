"""Negative-eigenvalue counts for one-dimensional point-interaction Hamiltonians."""

from .delta_prime import DeltaPrimeWindow, count_negative_strengths, window_count
from .jacobi import SymTridiag, build_S_finite, gerschgorin_lower_bound, sturm_negative_count, sturm_pivots
from .model import (
    INFINITY,
    CountReport,
    KappaError,
    Kind,
    ParseError,
    PointConfig,
    ScalarMode,
    ValidationError,
    parse_config,
    serialize_config,
)
from .oracle import NonConvergence, ScanSettings, count_bound_states
from .recurrence import count_from_gamma, gamma_finite, gamma_tail, is_nonnegative, phi_count

__all__ = [
    "INFINITY",
    "CountReport",
    "DeltaPrimeWindow",
    "KappaError",
    "Kind",
    "NonConvergence",
    "ParseError",
    "PointConfig",
    "ScalarMode",
    "ScanSettings",
    "SymTridiag",
    "ValidationError",
    "build_S_finite",
    "count_bound_states",
    "count_from_gamma",
    "count_negative_strengths",
    "gamma_finite",
    "gamma_tail",
    "gerschgorin_lower_bound",
    "is_nonnegative",
    "parse_config",
    "phi_count",
    "serialize_config",
    "sturm_negative_count",
    "sturm_pivots",
    "window_count",
]
