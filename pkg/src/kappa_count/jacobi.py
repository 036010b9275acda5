"""Jacobi matrices of delta interactions and their inertia."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .model import (
    DEFAULT_EPSILON,
    INFINITY,
    ExtendedReal,
    KappaError,
    Kind,
    PointConfig,
    Scalar,
    ValidationError,
    is_exact,
    near_zero,
    zero_test,
)


class WindowError(KappaError):
    pass


class SingularPivot(KappaError):
    pass


@dataclass(frozen=True)
class SymTridiag:
    diag: tuple[Scalar, ...]
    offdiag: tuple[Scalar, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "diag", tuple(self.diag))
        object.__setattr__(self, "offdiag", tuple(self.offdiag))
        if len(self.diag) < 1:
            raise ValueError("empty matrix")
        if len(self.offdiag) != len(self.diag) - 1:
            raise ValueError(
                f"offdiag must have {len(self.diag) - 1} entries, got {len(self.offdiag)}"
            )
        for v in self.diag + self.offdiag:
            if isinstance(v, float) and not math.isfinite(v):
                raise ValueError("non-finite entry")

    @property
    def n(self) -> int:
        return len(self.diag)

    @property
    def exact(self) -> bool:
        return is_exact(self.diag + self.offdiag)

    def scale(self, shift: Scalar = 0) -> float:
        vals = [abs(float(a - shift)) for a in self.diag] + [abs(float(b)) for b in self.offdiag]
        return max(vals)

    def to_dense(self) -> np.ndarray:
        dtype = object if self.exact else float
        m = np.zeros((self.n, self.n), dtype=dtype)
        if dtype is object:
            m[:, :] = Fraction(0)
        for i, a in enumerate(self.diag):
            m[i, i] = a
        for i, b in enumerate(self.offdiag):
            m[i, i + 1] = m[i + 1, i] = b
        return m

    def leading(self, p: int) -> SymTridiag:
        return SymTridiag(self.diag[:p], self.offdiag[: p - 1])


@dataclass(frozen=True)
class GerschgorinDisk:
    center: float
    radius: float

    def __post_init__(self) -> None:
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return abs(value - self.center) <= self.radius + slack


def _inv(d: Scalar) -> Scalar:
    return 1 / d


def build_S_finite(config: PointConfig) -> SymTridiag:
    """The n x n matrix whose negative eigenvalues count the bound states.

    Diagonal ``alpha_k + 1/d_{k-1} + 1/d_k`` with ``1/d_0 = 1/d_n = 0``, off-diagonal
    ``-1/d_k``. A single interaction gives the 1 x 1 matrix ``(alpha_1)``.
    """
    _require_delta(config)
    n = config.n
    diag = tuple(config.strengths[k - 1] + config.inv_gap(k - 1) + config.inv_gap(k) for k in range(1, n + 1))
    off = tuple(-_inv(d) for d in config.gaps)
    return SymTridiag(diag, off)


def build_S_truncated(config: PointConfig, N: int) -> SymTridiag:
    """Leading N x N section of the semi-infinite Jacobi matrix.

    Row N keeps its ``1/d_N`` term, so the config must supply at least N + 1 points.
    """
    _require_delta(config)
    if N < 1:
        raise WindowError(f"window size must be >= 1, got {N}")
    if N >= config.n:
        raise WindowError(f"window size {N} needs gap d_{N}, config has only {config.n - 1} gaps")
    diag = tuple(
        config.strengths[k - 1] + config.inv_gap(k - 1) + _inv(config.gaps[k - 1]) for k in range(1, N + 1)
    )
    off = tuple(-_inv(config.gaps[k - 1]) for k in range(1, N))
    return SymTridiag(diag, off)


@dataclass(frozen=True)
class SturmResult:
    pivots: tuple[ExtendedReal, ...]
    count: int
    diagnostics: tuple[str, ...]


def sturm_pivots(T: SymTridiag, shift: Scalar = 0, epsilon: float = DEFAULT_EPSILON) -> SturmResult:
    """LDL^T pivots of ``T - shift`` and the number of eigenvalues strictly below ``shift``.

    A zero pivot is not counted; if it is followed by a nonzero coupling the next pivot
    is the infinite marker (counted as negative) and the one after restarts from the
    bare diagonal entry. This is the limit of the pivots at ``shift - 0`` and coincides
    with the zero branch of the gamma recurrence. Float pivots within the tolerance of
    zero take the same branch.
    """
    exact = T.exact and is_exact([shift])
    scale = T.scale(shift)
    pivots: list[ExtendedReal] = []
    notes: list[str] = []
    count = 0
    prev: ExtendedReal | None = None
    prev_zero = False
    for k in range(T.n):
        a = T.diag[k] - shift
        if prev is None or prev is INFINITY:
            p: ExtendedReal = a
        else:
            b = T.offdiag[k - 1]
            if prev_zero:
                p = a if zero_test(b, scale, epsilon, exact) else INFINITY
            else:
                p = a - b * b / prev
        if p is INFINITY:
            count += 1
            prev_zero = False
        else:
            prev_zero = zero_test(p, scale, epsilon, exact)
            if prev_zero:
                p = p - p
                notes.append(f"ZeroPivot at row {k + 1}")
            else:
                if not exact and near_zero(p, scale, epsilon):
                    notes.append(f"NearZeroPivot at row {k + 1} ({float(p):.3e})")
                if p < 0:
                    count += 1
        pivots.append(p)
        prev = p
    return SturmResult(tuple(pivots), count, tuple(notes))


def sturm_negative_count(T: SymTridiag, shift: Scalar = 0, epsilon: float = DEFAULT_EPSILON) -> int:
    """Number of eigenvalues of ``T`` strictly below ``shift``."""
    return sturm_pivots(T, shift, epsilon).count


def gerschgorin_disks(T: SymTridiag) -> list[GerschgorinDisk]:
    disks = []
    for i, a in enumerate(T.diag):
        r = 0.0
        if i > 0:
            r += abs(float(T.offdiag[i - 1]))
        if i < T.n - 1:
            r += abs(float(T.offdiag[i]))
        disks.append(GerschgorinDisk(float(a), r))
    return disks


@dataclass(frozen=True)
class SuffCondResult:
    lower_bound: int
    exact: bool
    diagnostics: tuple[str, ...] = ()


def gerschgorin_threshold(config: PointConfig, k: int) -> Scalar:
    """``-2 (1/d_{k-1} + 1/d_k)`` for 1-based k (boundary gaps read as infinite)."""
    return -2 * (config.inv_gap(k - 1) + config.inv_gap(k))


def suffcond_check(config: PointConfig, K: Iterable[int]) -> SuffCondResult:
    """Gerschgorin sufficient condition for at least ``|K|`` bound states.

    ``K`` holds 1-based site indices. When every ``alpha_k`` with k in K lies strictly
    below its threshold, ``lower_bound = |K|``; ``exact`` is additionally true when
    every strength outside K is positive, in which case the count equals ``|K|``.
    """
    _require_delta(config)
    n = config.n
    ks = sorted(set(K))
    for k in ks:
        if not 1 <= k <= n:
            raise IndexError(f"index {k} outside 1..{n}")
    notes: list[str] = []
    if ks and (ks[0] == 1 or ks[-1] == n):
        notes.append("boundary convention 1/d_0 = 1/d_n = 0 applied")
    for k in ks:
        if not config.strengths[k - 1] < gerschgorin_threshold(config, k):
            notes.append(f"inequality fails at index {k}")
            return SuffCondResult(0, False, tuple(notes))
    outside = [i for i in range(1, n + 1) if i not in set(ks)]
    exact = all(config.strengths[i - 1] > 0 for i in outside)
    return SuffCondResult(len(ks), exact, tuple(notes))


def gerschgorin_lower_bound(config: PointConfig) -> int:
    """Largest Gerschgorin certificate: every index individually meeting the condition."""
    return sum(
        1 for k in range(1, config.n + 1) if config.strengths[k - 1] < gerschgorin_threshold(config, k)
    )


def leading_minors(T: SymTridiag) -> list[Scalar]:
    """``[Delta_0, Delta_1, ..., Delta_n]`` by the three-term recursion, ``Delta_0 = 1``."""
    one: Scalar = Fraction(1) if T.exact else 1.0
    minors = [one, T.diag[0]]
    for k in range(1, T.n):
        b = T.offdiag[k - 1]
        minors.append(T.diag[k] * minors[-1] - b * b * minors[-2])
    return minors


@dataclass(frozen=True)
class SchurSplit:
    kappa_head: int
    complement: SymTridiag


def schur_inertia_split(T: SymTridiag, p: int, epsilon: float = DEFAULT_EPSILON) -> SchurSplit:
    """Split the inertia of ``T`` across its leading p x p block.

    For a tridiagonal matrix the Schur complement is tridiagonal again and differs from
    the trailing block only in its first diagonal entry, which drops by
    ``b_p^2 * (T_11^{-1})_{pp} = b_p^2 * Delta_{p-1} / Delta_p``.
    """
    if not 1 <= p < T.n:
        raise ValueError(f"block size must be in 1..{T.n - 1}, got {p}")
    head = T.leading(p)
    minors = leading_minors(head)
    det = minors[p]
    exact = T.exact
    scale = max(1.0, head.scale())
    if zero_test(det, scale**p, epsilon, exact):
        raise SingularPivot(f"leading {p}x{p} block is singular (det = {det})")
    b = T.offdiag[p - 1]
    corner = b * b * minors[p - 1] / det
    diag = (T.diag[p] - corner,) + T.diag[p + 1 :]
    complement = SymTridiag(diag, T.offdiag[p:])
    return SchurSplit(sturm_negative_count(head, 0, epsilon), complement)


def symmetric_inertia(M: Sequence[Sequence[Scalar]], epsilon: float = DEFAULT_EPSILON) -> tuple[int, int, int]:
    """``(negative, zero, positive)`` eigenvalue counts of a dense symmetric matrix.

    Exact entries go through congruence elimination with 1x1 and 2x2 pivots; floats
    through a symmetric eigensolver with zero band ``epsilon * max|M|``.
    """
    A = [list(row) for row in M]
    n = len(A)
    if n == 0:
        return (0, 0, 0)
    flat = [v for row in A for v in row]
    if not is_exact(flat):
        w = np.linalg.eigvalsh(np.asarray(A, dtype=float))
        tol = epsilon * max(1.0, float(np.max(np.abs(np.asarray(A, dtype=float)))))
        return (int(np.sum(w < -tol)), int(np.sum(np.abs(w) <= tol)), int(np.sum(w > tol)))
    A = [[Fraction(v) for v in row] for row in A]
    neg = zero = pos = 0
    while A:
        m = len(A)
        piv = next((i for i in range(m) if A[i][i] != 0), None)
        if piv is not None:
            c = A[piv][piv]
            if c < 0:
                neg += 1
            else:
                pos += 1
            rest = [i for i in range(m) if i != piv]
            A = [[A[i][j] - A[i][piv] * A[piv][j] / c for j in rest] for i in rest]
            continue
        pair = next(((i, j) for i in range(m) for j in range(i + 1, m) if A[i][j] != 0), None)
        if pair is None:
            zero += m
            break
        i, j = pair
        c = A[i][j]
        # [[0, c], [c, 0]] has one eigenvalue of each sign; its inverse is [[0, 1/c], [1/c, 0]]
        neg += 1
        pos += 1
        rest = [k for k in range(m) if k not in pair]
        A = [
            [A[r][s] - (A[r][i] * A[j][s] + A[r][j] * A[i][s]) / c for s in rest]
            for r in rest
        ]
    return (neg, zero, pos)


def dense_negative_count(M: Sequence[Sequence[Scalar]], epsilon: float = DEFAULT_EPSILON) -> int:
    return symmetric_inertia(M, epsilon)[0]


def _zeros(size: int, exact: bool) -> np.ndarray:
    if exact:
        out = np.empty((size, size), dtype=object)
        out[:, :] = Fraction(0)
        return out
    return np.zeros((size, size))


def assemble_T_delta(config: PointConfig) -> np.ndarray:
    """``C D^T - D M(0) D^T`` for the boundary parametrisation of the delta operator.

    Boundary coordinates are ordered ``(x_1-, x_1+, x_2-, x_2+, ..., x_n-, x_n+)``:
    ``Gamma_0`` reads ``-f(x_k-)`` and ``f(x_k+)``, ``Gamma_1`` reads the one-sided
    derivatives. ``M(0)`` carries the block ``-1/d_k [[1, 1], [1, 1]]`` on the pair
    ``(x_k+, x_{k+1}-)`` and vanishes on the two half-lines.
    """
    _require_delta(config)
    n = config.n
    exact = config.exact
    one = Fraction(1) if exact else 1.0
    size = 2 * n
    C = _zeros(size, exact)
    D = _zeros(size, exact)
    M0 = _zeros(size, exact)
    for k in range(1, n + 1):
        minus, plus = 2 * k - 2, 2 * k - 1
        # derivative jump: f'(x_k+) - f'(x_k-) - alpha_k f(x_k+) = 0
        D[minus, minus] = -one
        D[minus, plus] = one
        C[minus, plus] = config.strengths[k - 1]
        # continuity: -(Gamma_0[x_k-] + Gamma_0[x_k+]) = 0
        C[plus, minus] = one
        C[plus, plus] = one
    for k in range(1, n):
        w = -_inv(config.gaps[k - 1])
        i, j = 2 * k - 1, 2 * k
        M0[i, i] = M0[i, j] = M0[j, i] = M0[j, j] = w
    return C @ D.T - D @ M0 @ D.T


def odd_even_permutation(size: int) -> list[int]:
    """Order placing 1-based odd coordinates first, then even ones."""
    return list(range(0, size, 2)) + list(range(1, size, 2))


def permuted_T_delta(config: PointConfig) -> np.ndarray:
    T = assemble_T_delta(config)
    perm = odd_even_permutation(T.shape[0])
    return T[np.ix_(perm, perm)]


def _require_delta(config: PointConfig) -> None:
    if config.kind is not Kind.DELTA:
        raise ValidationError("kind", "operation requires a delta configuration")
