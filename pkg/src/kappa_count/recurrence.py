"""Gamma recurrences, the continued fraction criterion and the phi signature."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

from .jacobi import build_S_finite, leading_minors
from .model import (
    DEFAULT_EPSILON,
    INFINITY,
    ExtendedReal,
    KappaError,
    Kind,
    PointConfig,
    Scalar,
    ValidationError,
    CountReport,
    is_exact,
    near_zero,
    zero_test,
)

log = logging.getLogger(__name__)

DEFAULT_TAIL_STEPS = 50


class HorizonError(KappaError):
    pass


class GapError(KappaError):
    pass


class DivisionByZero(KappaError, ZeroDivisionError):
    pass


@dataclass(frozen=True)
class GammaSequence:
    values: tuple[ExtendedReal, ...]
    variant: str
    truncation: int | None = None
    stabilization: str | None = None
    stabilized: bool = False
    diagnostics: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.variant not in ("finite", "tail", "semi_infinite"):
            raise ValueError(f"unknown variant {self.variant!r}")


@dataclass(frozen=True)
class PhiSequence:
    phi_values: tuple[Scalar, ...]
    final_term: Scalar
    sign_changes: int
    diagnostics: tuple[str, ...] = ()

    @property
    def sequence(self) -> tuple[Scalar, ...]:
        return self.phi_values + (self.final_term,)


def _gamma_core(
    pairs: Iterable[tuple[Scalar, Scalar]],
    exact: bool,
    epsilon: float,
    scale: float | None,
    notes: list[str],
) -> Iterator[tuple[ExtendedReal, Scalar]]:
    """Run the gamma recurrence over ``(alpha_k, 1/d_k)`` pairs.

    Yields ``(gamma_k, 1/d_k)``. ``1/d_k = 0`` encodes a missing right gap. When
    ``scale`` is None it grows with the inputs seen so far.
    """
    prev: ExtendedReal | None = None
    prev_zero = False
    prev_inv: Scalar = 0
    running = 1.0
    for k, (alpha, inv) in enumerate(pairs, start=1):
        running = max(running, abs(float(alpha)), abs(float(inv)))
        ref = running if scale is None else scale
        a = alpha + prev_inv + inv
        if prev is None or prev is INFINITY:
            g: ExtendedReal = a
        elif prev_zero:
            g = INFINITY
        else:
            g = a - prev_inv * prev_inv / prev
        prev_zero = False
        if g is not INFINITY:
            if zero_test(g, ref, epsilon, exact):
                if g != 0:
                    notes.append(f"ZeroPivot at index {k} ({float(g):.3e} treated as 0)")
                g = g - g
                prev_zero = True
            elif not exact and near_zero(g, ref, epsilon):
                notes.append(f"NearZeroPivot at index {k} ({float(g):.3e})")
        yield g, inv
        prev = g
        prev_inv = inv


def gamma_finite(config: PointConfig) -> GammaSequence:
    """Gamma sequence of a finite delta configuration, one entry per site.

    The last site has no right gap: the zero branch landing on index n uses
    ``alpha_n + 1/d_{n-1}``, the final diagonal entry of the finite Jacobi matrix.
    """
    _require_delta(config)
    notes: list[str] = []
    pairs = [(config.strengths[k - 1], config.inv_gap(k)) for k in range(1, config.n + 1)]
    values = tuple(g for g, _ in _gamma_core(pairs, config.exact, config.epsilon, config.zero_scale, notes))
    return GammaSequence(values, "finite", diagnostics=tuple(notes))


def default_tail_gap(config: PointConfig) -> Scalar:
    """Largest gap of the configuration (1 for a single site)."""
    if config.gaps:
        return max(config.gaps)
    return Fraction(1) if config.exact else 1.0


def gamma_tail(
    config: PointConfig,
    N: int | None = None,
    tail_gap: Scalar | None = None,
    early_exit: bool = True,
    tail_growth: Scalar = 2,
) -> GammaSequence:
    """Gamma sequence of the finite configuration embedded in a semi-infinite lattice.

    Sites beyond ``x_n`` carry zero strength; the j-th tail gap is
    ``tail_gap * tail_growth**j``. Any spacing describes the same operator, but with a
    constant spacing d a small negative ``gamma_n`` needs about ``1/(|gamma_n| d)``
    steps to stabilise, while geometric growth needs only logarithmically many. The run
    stops once an entry ``k >= n`` satisfies ``gamma_k >= 1/d_k``, after which every
    later entry is positive. The stabilization label records the state at index n:
    ``a`` (finite gamma_n >= 0), ``b`` (infinite entry) or ``c`` (negative gamma_n,
    where the tail must be followed until it turns negative or hits zero).
    """
    _require_delta(config)
    n = config.n
    if N is None:
        N = n + DEFAULT_TAIL_STEPS
    if N < n:
        raise HorizonError(f"horizon {N} shorter than the {n} sites")
    if tail_gap is None:
        tail_gap = default_tail_gap(config)
    conv = Fraction if config.exact else float
    tail_gap, tail_growth = conv(tail_gap), conv(tail_growth)
    if not tail_gap > 0:
        raise GapError(f"tail gap must be positive, got {tail_gap}")
    if not tail_growth >= 1:
        raise GapError(f"tail growth must be >= 1, got {tail_growth}")
    zero = conv(0)

    def inv_at(k: int) -> Scalar:
        if k <= n - 1:
            return 1 / config.gaps[k - 1]
        return 1 / (tail_gap * tail_growth ** (k - n))

    def pairs() -> Iterator[tuple[Scalar, Scalar]]:
        for k in range(1, N + 1):
            alpha = config.strengths[k - 1] if k <= n else zero
            yield alpha, inv_at(k)

    notes: list[str] = []
    scale = max(config.zero_scale, float(1 / tail_gap))
    values: list[ExtendedReal] = []
    case = None
    stopped = None
    for k, (g, inv) in enumerate(_gamma_core(pairs(), config.exact, config.epsilon, scale, notes), start=1):
        values.append(g)
        if k < n or g is INFINITY:
            if k == n:
                case = "b"
            continue
        margin = g - inv
        stable = margin >= 0 or zero_test(margin, scale, config.epsilon, config.exact)
        if k == n:
            case = "a" if stable else "c"
        if stable and early_exit:
            stopped = k
            break
    if stopped is not None:
        notes.append(f"stabilized at index {stopped} (case {case})")
        return GammaSequence(tuple(values), "tail", stopped, case, True, tuple(notes))
    stabilized = _tail_is_stable(values, n, config, inv_at, scale)
    if not stabilized:
        notes.append(f"truncated at horizon {N} before stabilization; count is a lower bound")
    return GammaSequence(tuple(values), "tail", N, case, stabilized, tuple(notes))


def _tail_is_stable(values: list[ExtendedReal], n: int, config: PointConfig, inv_at, scale: float) -> bool:
    for k in range(n, len(values) + 1):
        g = values[k - 1]
        if g is INFINITY:
            continue
        margin = g - inv_at(k)
        if margin >= 0 or zero_test(margin, scale, config.epsilon, config.exact):
            return True
    return False


def constant_stream(alpha: Scalar, gap: Scalar) -> Iterator[tuple[Scalar, Scalar]]:
    while True:
        yield alpha, gap


def gamma_semi_infinite(
    strength_stream: Iterable[tuple[Scalar, Scalar]],
    N: int,
    epsilon: float = DEFAULT_EPSILON,
) -> GammaSequence:
    """First N entries of the gamma sequence of a semi-infinite lattice.

    ``strength_stream`` yields ``(alpha_k, d_k)``. The count of the leading entries is a
    lower bound for the infinite problem (interlacing of leading sections).
    """
    if N < 1:
        raise HorizonError(f"horizon must be >= 1, got {N}")
    taken: list[tuple[Scalar, Scalar]] = []
    for k, (alpha, d) in enumerate(strength_stream, start=1):
        if not (d > 0) or (isinstance(d, float) and d == float("inf")):
            raise GapError(f"gap d_{k} = {d} is not a positive finite number")
        taken.append((alpha, d))
        if k == N:
            break
    if len(taken) < N:
        raise HorizonError(f"stream ended after {len(taken)} entries, {N} requested")
    exact = is_exact([v for pair in taken for v in pair])
    notes: list[str] = []
    pairs = [(alpha, 1 / d) for alpha, d in taken]
    values = tuple(g for g, _ in _gamma_core(pairs, exact, epsilon, None, notes))
    notes.append(f"leading {N} entries only; count is a monotone lower bound")
    return GammaSequence(values, "semi_infinite", N, diagnostics=tuple(notes))


def count_from_gamma(seq: GammaSequence) -> CountReport:
    neg = sum(1 for v in seq.values if v is not INFINITY and v < 0)
    inf = sum(1 for v in seq.values if v is INFINITY)
    lower = seq.variant == "semi_infinite" or (seq.variant == "tail" and not seq.stabilized)
    return CountReport(neg, inf, "recurrence", seq.diagnostics, lower_bound=lower)


def continued_fraction_A(config: PointConfig, k: int) -> Scalar:
    """``A_k`` from ``A_1 = alpha_1``, ``A_{j+1} = alpha_{j+1} + 1/(d_j + 1/A_j)``.

    ``k`` is 1-based, ``1 <= k <= n``. Raises DivisionByZero when either reciprocal is
    singular.
    """
    _require_delta(config)
    if not 1 <= k <= config.n:
        raise IndexError(f"index {k} outside 1..{config.n}")
    A = config.strengths[0]
    for j in range(1, k):
        if config.is_zero(A):
            raise DivisionByZero(f"A_{j} = 0")
        denom = config.gaps[j - 1] + 1 / A
        if config.is_zero(denom):
            raise DivisionByZero(f"d_{j} + 1/A_{j} = 0")
        A = config.strengths[j] + 1 / denom
    return A


def is_nonnegative(config: PointConfig, horizon: int | None = None) -> bool:
    """Whether the delta operator has no negative eigenvalues.

    Checks ``A_k > -1/d_k`` for ``k < n``. In the semi-infinite embedding the entries
    from index n on follow ``A_n``: they stay above ``-1/d_k`` forever iff
    ``A_n >= 0``, otherwise the tail eventually drops below. With ``horizon < n`` only
    the first ``horizon`` indices are examined.
    """
    _require_delta(config)
    n = config.n
    last = n if horizon is None else min(horizon, n)
    A = config.strengths[0]
    for k in range(1, last + 1):
        if k > 1:
            prev = A
            if config.is_zero(prev):
                # 1/A_{k-1} blows up; the fraction tends to alpha_k
                A = config.strengths[k - 1]
            else:
                denom = config.gaps[k - 2] + 1 / prev
                if config.is_zero(denom):
                    log.info("d_%d + 1/A_%d = 0: zero gamma entry, infinite marker follows", k - 1, k - 1)
                    return False
                A = config.strengths[k - 1] + 1 / denom
        if k < n:
            margin = A + 1 / config.gaps[k - 1]
            if config.is_zero(margin) or margin < 0:
                return False
        elif not (A >= 0 or config.is_zero(A)):
            return False
    return True


def _sign(v: Scalar) -> int:
    return (v > 0) - (v < 0)


def phi_signature(config: PointConfig) -> PhiSequence:
    """Zero-energy solution values at the sites and their number of sign changes.

    The solution equals 1 left of ``x_1``, is linear between sites and its derivative
    jumps by ``alpha_k phi(x_k)`` at each site. The closing term is
    ``(1 + alpha_n d_{n-1}) phi(x_n) - phi(x_{n-1})``, i.e. ``d_{n-1} phi'(x_n+)``;
    a single site uses ``phi'(x_1+) = alpha_1``. Zero terms are skipped when
    counting sign changes and reported as ``ZeroInSequence``.
    """
    _require_delta(config)
    n = config.n
    eps, exact = config.epsilon, config.exact
    one = Fraction(1) if exact else 1.0
    notes: list[str] = []

    def clean(v: Scalar, ref: float, pos: int) -> Scalar:
        if zero_test(v, ref, eps, exact):
            notes.append(f"ZeroInSequence at position {pos}")
            return v - v
        return v

    phi = [one]
    slope = 0 * one
    for k in range(1, n):
        slope = slope + config.strengths[k - 1] * phi[-1]
        step = slope * config.gaps[k - 1]
        nxt = phi[-1] + step
        phi.append(clean(nxt, max(abs(float(phi[-1])), abs(float(step))), k + 1))
    if n == 1:
        # no left gap to scale by: the closing term is phi'(x_1+) itself
        final = clean(config.strengths[0] * one, abs(float(config.strengths[0])), 2)
    else:
        head = (1 + config.strengths[-1] * config.gaps[-1]) * phi[-1]
        final = clean(head - phi[-2], max(abs(float(head)), abs(float(phi[-2]))), n + 1)
    signs = [_sign(v) for v in phi + [final] if _sign(v) != 0]
    changes = sum(1 for a, b in zip(signs, signs[1:]) if a != b)
    return PhiSequence(tuple(phi), final, changes, tuple(notes))


def phi_count(config: PointConfig) -> CountReport:
    seq = phi_signature(config)
    return CountReport(seq.sign_changes, 0, "phi_signature", seq.diagnostics)


def minors_identity_check(config: PointConfig, rtol: float = 1e-9) -> bool:
    """Compare the leading minors of the Jacobi matrix with the phi sequence.

    ``Delta_k = phi(x_{k+1}) / (d_1 ... d_k)`` for ``k < n`` and
    ``Delta_n = final / (d_1 ... d_{n-1} d_{n-1})``.
    """
    seq = phi_signature(config)
    minors = leading_minors(build_S_finite(config))
    n = config.n
    terms = seq.sequence
    prod = Fraction(1) if config.exact else 1.0
    for k in range(1, n + 1):
        if config.gaps:
            prod = prod * (config.gaps[k - 1] if k < n else config.gaps[-1])
        rhs = terms[k] / prod
        lhs = minors[k]
        if config.exact:
            if lhs != rhs:
                return False
        elif abs(lhs - rhs) > rtol * max(1.0, abs(float(lhs)), abs(float(rhs))):
            return False
    return True


def _require_delta(config: PointConfig) -> None:
    if config.kind is not Kind.DELTA:
        raise ValidationError("kind", "operation requires a delta configuration")
