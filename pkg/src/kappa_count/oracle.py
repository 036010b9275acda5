"""Independent bound-state counts from the differential operator itself.

The exact solution of ``-f'' = -kappa^2 f`` is propagated across the sites with 2x2
transfer matrices. For counting, the direction of the left-decaying solution is tracked
as a continuous angle (every step turns it by less than half a turn, so principal
differences lift exactly). Measured against the direction of the right-decaying
solution the angle gives a phase that decreases strictly in kappa and passes an integer
exactly at each bound state. Counting integers between two phase values is therefore
insensitive to nearly degenerate pairs, which a bare sign-change scan of the matching
function misses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .jacobi import SymTridiag, sturm_negative_count
from .model import CountReport, KappaError, Kind, PointConfig, ValidationError


class NonConvergence(KappaError):
    pass


class MeshError(KappaError):
    pass


@dataclass(frozen=True)
class TransferState:
    f: float
    fp: float

    def __post_init__(self) -> None:
        if self.f == 0 and self.fp == 0:
            raise ValueError("trivial state")

    def apply(self, matrix: np.ndarray) -> TransferState:
        f, fp = matrix @ np.array([self.f, self.fp])
        return TransferState(float(f), float(fp))

    def normalized(self) -> TransferState:
        r = math.hypot(self.f, self.fp)
        return TransferState(self.f / r, self.fp / r)


@dataclass(frozen=True)
class ScanSettings:
    kappa_max: float | None = None
    grid: int = 64
    max_refinements: int = 12
    root_tol: float = 1e-12

    def __post_init__(self) -> None:
        if self.kappa_max is not None and not self.kappa_max > 0:
            raise ValueError("kappa_max must be positive")
        if self.grid < 16:
            raise ValueError("grid must be at least 16")
        if self.max_refinements < 1:
            raise ValueError("max_refinements must be positive")
        if not self.root_tol > 0:
            raise ValueError("root_tol must be positive")


def interval_transfer(d: float, kappa: float) -> np.ndarray:
    """Map ``(f, f')`` across an interval of length d at energy ``-kappa^2``."""
    if not d >= 0 or not kappa > 0:
        raise ValueError("need d >= 0 and kappa > 0")
    x = kappa * d
    if x > 350:
        raise OverflowError("kappa * d > 350; use the scaled propagation in secular")
    c, s = math.cosh(x), math.sinh(x)
    return np.array([[c, s / kappa], [kappa * s, c]])


def _scaled_transfer(d: float, kappa: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Entries of ``exp(-kappa d)`` times the interval transfer; the factor is positive."""
    x = kappa * d
    e = np.exp(-2.0 * x)
    c = 0.5 * (1.0 + e)
    s = -0.5 * np.expm1(-2.0 * x)
    return c, s / kappa, kappa * s, c


def jump_matrix(kind: Kind | str, strength: float) -> np.ndarray:
    kind = Kind(kind)
    if kind is Kind.DELTA:
        return np.array([[1.0, 0.0], [float(strength), 1.0]])
    return np.array([[1.0, float(strength)], [0.0, 1.0]])


def _propagate(config: PointConfig, kappa: np.ndarray, track_phase: bool):
    """Left-decaying state at ``x_n+`` (unit norm) and, optionally, its lifted angle."""
    strengths = [float(s) for s in config.strengths]
    gaps = [float(d) for d in config.gaps]
    f = np.ones_like(kappa)
    fp = kappa.copy()
    r = np.hypot(f, fp)
    f, fp = f / r, fp / r
    angle = np.arctan2(f, fp)
    total = angle.copy()

    def advance(nf, nfp):
        nonlocal f, fp, angle, total
        rr = np.hypot(nf, nfp)
        nf, nfp = nf / rr, nfp / rr
        if track_phase:
            new = np.arctan2(nf, nfp)
            total += np.remainder(new - angle + np.pi, 2.0 * np.pi) - np.pi
            angle = new
        f, fp = nf, nfp

    delta = config.kind is Kind.DELTA
    for k, s in enumerate(strengths):
        if delta:
            advance(f, fp + s * f)
        else:
            advance(f + s * fp, fp)
        if k < len(gaps):
            a, b, c, dd = _scaled_transfer(gaps[k], kappa)
            advance(a * f + b * fp, c * f + dd * fp)
    return f, fp, total


def secular(config: PointConfig, kappa: float) -> float:
    """Matching function ``F' + kappa F`` of the left-decaying solution at ``x_n+``.

    The state is renormalised after every step by positive factors, so only the sign
    and the zeros are meaningful. ``-kappa^2`` is an eigenvalue iff the result is 0.
    """
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    f, fp, _ = _propagate(config, np.array([float(kappa)]), track_phase=False)
    return float(fp[0] + kappa * f[0])


def secular_array(config: PointConfig, kappas: np.ndarray) -> np.ndarray:
    kappas = np.asarray(kappas, dtype=float)
    f, fp, _ = _propagate(config, kappas, track_phase=False)
    return fp + kappas * f


def phase(config: PointConfig, kappas: np.ndarray) -> np.ndarray:
    """Lifted phase in units of pi; integer exactly at bound states, decreasing in kappa."""
    kappas = np.asarray(kappas, dtype=float)
    _, _, total = _propagate(config, kappas, track_phase=True)
    target = np.arctan2(1.0, -kappas)
    return (total - target) / np.pi


def _integers_between(lo: float, hi: float) -> range:
    """Integers strictly inside ``(lo, hi)``."""
    return range(math.floor(lo) + 1, math.ceil(hi))


def initial_kappa_max(config: PointConfig) -> float:
    if config.kind is Kind.DELTA:
        # the ground state obeys kappa <= sum|alpha^-|/2
        return 1.0 + sum(abs(float(a)) for a in config.strengths) / 2.0
    neg = [2.0 / abs(float(b)) for b in config.strengths if b < 0]
    return 1.0 + max([1.0] + neg) * 2.0


@dataclass
class _Scan:
    kappas: np.ndarray
    phases: np.ndarray
    count: int = field(init=False)

    def __post_init__(self) -> None:
        self.count = len(_integers_between(self.phases[-1], self.phases[0]))


def _grid(kmin: float, kmax: float, size: int) -> np.ndarray:
    half = max(size // 2, 8)
    geo = np.geomspace(kmin, kmax, half)
    uni = np.linspace(kmin, kmax, size - half + 1)
    return np.unique(np.concatenate([geo, uni]))


def count_bound_states(config: PointConfig, settings: ScanSettings | None = None) -> CountReport:
    """Number of negative eigenvalues of the operator, with the located roots.

    The upper search bound is doubled (together with the grid size) until the count
    over ``(root_tol, kappa_max]`` agrees on two consecutive doublings. Roots are
    solved on the phase; each is then confirmed by a sign change of ``secular``.
    """
    settings = settings or ScanSettings()
    kmin = settings.root_tol
    kmax = settings.kappa_max or initial_kappa_max(config)
    size = settings.grid
    notes = [
        "search bound chosen by doubling heuristic, not a proven spectral bound",
    ]
    scan = _Scan(_grid(kmin, kmax, size), phase(config, _grid(kmin, kmax, size)))
    stable_runs = 0
    for _ in range(settings.max_refinements):
        kmax *= 2.0
        size *= 2
        kappas = _grid(kmin, kmax, size)
        nxt = _Scan(kappas, phase(config, kappas))
        stable_runs = stable_runs + 1 if nxt.count == scan.count else 0
        scan = nxt
        if stable_runs >= 2:
            break
    else:
        raise NonConvergence(
            f"count did not stabilise within {settings.max_refinements} refinements "
            f"(last count {scan.count} at kappa_max {kmax:g})"
        )
    roots = []
    ks, ph = scan.kappas, scan.phases
    for i in range(len(ks) - 1):
        for j in _integers_between(ph[i + 1], ph[i]):
            root = brentq(lambda k: float(phase(config, np.array([k]))[0]) - j, ks[i], ks[i + 1], xtol=settings.root_tol, rtol=4 * np.finfo(float).eps)
            roots.append(root)
    roots.sort(reverse=True)
    if len(roots) != scan.count:
        notes.append(f"root localisation found {len(roots)} roots for count {scan.count}")
    changes = _secular_sign_changes(config, roots, kmin, kmax)
    if changes != len(roots):
        notes.append(f"secular sign changes {changes} differ from phase count {len(roots)} (near-degenerate pair?)")
    return CountReport(scan.count, 0, "oracle", tuple(notes), roots=tuple(float(r) for r in roots))


def _secular_sign_changes(config: PointConfig, roots: list[float], kmin: float, kmax: float) -> int:
    asc = sorted(roots)
    probes = [kmin] + [0.5 * (a + b) for a, b in zip(asc, asc[1:])] + [kmax]
    values = np.sign(secular_array(config, np.array(probes)))
    values = values[values != 0]
    return int(np.sum(values[1:] != values[:-1]))


def fd_negative_count(config: PointConfig, h: float, L: float) -> int:
    """Negative eigenvalues of the second-difference discretisation on a Dirichlet box.

    The box is ``[x_1 - L, x_n + L]``; each site is snapped to its nearest node, where
    ``alpha_k / h`` is added to the diagonal. Error is O(h) plus O(exp(-c L)).
    """
    if config.kind is not Kind.DELTA:
        raise ValidationError("kind", "finite differences need a delta configuration")
    if not h > 0 or not L > 0:
        raise ValueError("h and L must be positive")
    left = float(config.points[0]) - L
    right = float(config.points[-1]) + L
    nodes = int(round((right - left) / h))
    size = nodes - 1
    diag = [2.0 / h**2] * size
    seen: dict[int, int] = {}
    for k, (x, a) in enumerate(zip(config.points, config.strengths)):
        i = int(round((float(x) - left) / h)) - 1
        if i in seen:
            raise MeshError(f"sites {seen[i] + 1} and {k + 1} share grid node {i}")
        seen[i] = k
        diag[i] += float(a) / h
    off = [-1.0 / h**2] * (size - 1)
    return sturm_negative_count(SymTridiag(tuple(diag), tuple(off)), 0.0, 0.0)
