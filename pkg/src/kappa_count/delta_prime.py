"""Delta-prime interactions: strength counting and the windowed block matrix."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .jacobi import WindowError, symmetric_inertia
from .model import CountReport, Kind, PointConfig, Scalar, ValidationError, is_exact, zero_test


@dataclass(frozen=True)
class DeltaPrimeWindow:
    """Finite section ``T_{s,r}`` of the delta-prime boundary matrix.

    ``strengths`` are ``beta_s .. beta_r``; ``gaps`` are ``d_{s-1} .. d_{r-1}``, so the
    gap paired with ``beta_k`` is the one ending at ``x_k``. The matrix has one slot per
    strength and one coupling slot between neighbouring strengths, interleaved:
    dimension ``2 (r - s) + 1``.
    """

    strengths: tuple[Scalar, ...]
    gaps: tuple[Scalar, ...]
    start: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "strengths", tuple(self.strengths))
        object.__setattr__(self, "gaps", tuple(self.gaps))
        if len(self.strengths) < 1:
            raise WindowError("window needs at least one strength")
        if len(self.gaps) != len(self.strengths):
            raise WindowError(
                f"window with {len(self.strengths)} strengths needs {len(self.strengths)} gaps, "
                f"got {len(self.gaps)}"
            )
        for i, d in enumerate(self.gaps):
            if not d > 0:
                raise WindowError(f"gap d_{self.start - 1 + i} = {d} is not positive")

    @property
    def end(self) -> int:
        return self.start + len(self.strengths) - 1

    @property
    def dimension(self) -> int:
        return 2 * len(self.strengths) - 1

    @property
    def exact(self) -> bool:
        return is_exact(self.strengths + self.gaps)

    @property
    def length(self) -> Scalar:
        """``x_r - x_{s-1}``."""
        return sum(self.gaps[1:], self.gaps[0])

    @property
    def leading_factor(self) -> Scalar:
        return self.length + sum(self.strengths[1:], self.strengths[0])


def count_negative_strengths(config: PointConfig) -> CountReport:
    """Number of strictly negative delta-prime strengths."""
    _require_delta_prime(config)
    return CountReport(sum(1 for b in config.strengths if b < 0), 0, "strength_count")


def _zeros(size: int, exact: bool) -> np.ndarray:
    if exact:
        out = np.empty((size, size), dtype=object)
        out[:, :] = Fraction(0)
        return out
    return np.zeros((size, size))


def build_T_window(window: DeltaPrimeWindow) -> np.ndarray:
    """Band formula of ``T_{s,r}``.

    Slot ``2i`` belongs to ``beta_i`` and slot ``2i + 1`` couples sites i and i + 1;
    with ``g_i`` the gap ending at site i the nonzero entries are::

        T[2i, 2i]       = beta_i + beta_i^2 / g_i
        T[2i, 2i - 1]   = beta_i / g_i
        T[2i, 2i + 1]   = -beta_i / g_i
        T[2i+1, 2i+1]   = 1/g_i + 1/g_{i+1}
        T[2i-1, 2i+1]   = -1/g_i
    """
    beta, g = window.strengths, window.gaps
    m = len(beta)
    T = _zeros(window.dimension, window.exact)
    for i in range(m):
        w = 1 / g[i]
        T[2 * i, 2 * i] = beta[i] + beta[i] * beta[i] * w
        if i >= 1:
            T[2 * i, 2 * i - 1] = T[2 * i - 1, 2 * i] = beta[i] * w
        if i <= m - 2:
            T[2 * i, 2 * i + 1] = T[2 * i + 1, 2 * i] = -beta[i] * w
            T[2 * i + 1, 2 * i + 1] = w + 1 / g[i + 1]
        if 1 <= i <= m - 2:
            T[2 * i - 1, 2 * i + 1] = T[2 * i + 1, 2 * i - 1] = -w
    return T


def rank_one_terms(window: DeltaPrimeWindow) -> tuple[np.ndarray, list[tuple[Scalar, np.ndarray]]]:
    """``A`` (strengths on the site slots) and the weighted vectors of ``B``.

    The vector for site i is ``e_{2i-1} + beta_i e_{2i} - e_{2i+1}`` with weight
    ``1/g_i``; the two end vectors lose the component that falls outside the window.
    """
    beta, g = window.strengths, window.gaps
    m = len(beta)
    exact = window.exact
    one = Fraction(1) if exact else 1.0
    size = window.dimension
    A = _zeros(size, exact)
    terms = []
    for i in range(m):
        A[2 * i, 2 * i] = beta[i]
        v = np.array([0 * one] * size, dtype=object if exact else float)
        v[2 * i] = beta[i]
        if i >= 1:
            v[2 * i - 1] = one
        if i <= m - 2:
            v[2 * i + 1] = -one
        terms.append((1 / g[i], v))
    return A, terms


def assemble_from_rank_one(window: DeltaPrimeWindow) -> np.ndarray:
    A, terms = rank_one_terms(window)
    T = A.copy()
    for w, v in terms:
        T = T + w * np.outer(v, v)
    return T


def det_T_closed_form(window: DeltaPrimeWindow) -> Scalar:
    """``(x_r - x_{s-1} + sum beta_k) * prod(beta_k / d_{k-1})``."""
    prod = window.leading_factor
    for b, d in zip(window.strengths, window.gaps):
        prod = prod * b / d
    return prod


def window_negative_count(window: DeltaPrimeWindow, epsilon: float = 1e-12) -> int:
    return symmetric_inertia(build_T_window(window).tolist(), epsilon)[0]


def rank_one_decomposition_check(window: DeltaPrimeWindow, atol: float = 1e-12) -> bool:
    """Band formula equals ``A + B`` entrywise and ``kappa(T) <= kappa(A)``."""
    band = build_T_window(window)
    summed = assemble_from_rank_one(window)
    if window.exact:
        if not all(band[i, j] == summed[i, j] for i in range(band.shape[0]) for j in range(band.shape[1])):
            return False
    else:
        scale = max(1.0, float(np.max(np.abs(band.astype(float)))))
        if not np.allclose(band.astype(float), summed.astype(float), rtol=0.0, atol=atol * scale):
            return False
    kappa_A = sum(1 for b in window.strengths if b < 0)
    return window_negative_count(window) <= kappa_A


def _merge_zero_strengths(config: PointConfig) -> tuple[list[Scalar], list[Scalar]]:
    """Drop sites whose strength vanishes, merging their two adjacent gaps."""
    scale = config.zero_scale
    strengths: list[Scalar] = []
    gaps: list[Scalar] = []
    pending: Scalar | None = None
    for k, b in enumerate(config.strengths):
        if k > 0:
            d = config.gaps[k - 1]
            pending = d if pending is None else pending + d
        if zero_test(b, scale, config.epsilon, config.exact):
            continue
        if strengths:
            gaps.append(pending)
        strengths.append(b)
        pending = None
    return strengths, gaps


def window_from_config(
    config: PointConfig,
    pad_left: int = 1,
    pad_right: int = 1,
    pad_gap: Scalar = 1,
    pad_strength: Scalar = 1,
) -> DeltaPrimeWindow:
    """Embed a finite delta-prime configuration in a padded window.

    Padding sites carry ``pad_strength`` and sit ``pad_gap`` apart from each other and
    from the support; sites with zero strength are removed first since they do not
    interact. Site ``x_1`` keeps index 1.
    """
    _require_delta_prime(config)
    conv = Fraction if config.exact else float
    pad_gap, pad_strength = conv(pad_gap), conv(pad_strength)
    if not pad_gap > 0:
        raise WindowError("padding gap must be positive")
    if pad_left < 0 or pad_right < 0:
        raise WindowError("padding counts must be nonnegative")
    betas, inner = _merge_zero_strengths(config)
    strengths = [pad_strength] * pad_left + betas + [pad_strength] * pad_right
    if not strengths:
        raise WindowError("window is empty: no nonzero strengths and no padding")
    gaps = [pad_gap] * (pad_left + 1) + inner + [pad_gap] * pad_right
    gaps = gaps[: len(strengths)]
    return DeltaPrimeWindow(tuple(strengths), tuple(gaps), start=1 - pad_left)


def auto_window(config: PointConfig, pad_gap: Scalar = 1, pad_strength: Scalar = 1, max_pad: int = 10_000) -> DeltaPrimeWindow:
    """Smallest symmetric padding (at least one site per side) with positive leading factor."""
    if not pad_strength > 0:
        raise WindowError("padding strength must be positive")
    pad = 1
    while True:
        window = window_from_config(config, pad, pad, pad_gap, pad_strength)
        factor = window.leading_factor
        if factor > 0 and not zero_test(factor, config.zero_scale, config.epsilon, config.exact):
            return window
        pad += 1
        if pad > max_pad:
            raise WindowError("could not make the leading factor positive")


def window_count(config: PointConfig) -> CountReport:
    """Negative squares of the padded window matrix."""
    window = auto_window(config)
    kappa = window_negative_count(window, config.epsilon)
    notes = (f"window s={window.start}, r={window.end}, dimension {window.dimension}",)
    return CountReport(kappa, 0, "window_T", notes)


def _require_delta_prime(config: PointConfig) -> None:
    if config.kind is not Kind.DELTA_PRIME:
        raise ValidationError("kind", "operation requires a delta_prime configuration")
