"""Random configurations shared by the property and acceptance tests."""

from __future__ import annotations

from fractions import Fraction

import numpy as np
from hypothesis import strategies as st

from kappa_count.delta_prime import DeltaPrimeWindow
from kappa_count.model import Kind, PointConfig, ScalarMode


def _avoiding(rng: np.random.Generator, lo: float, hi: float, size: int, floor: float) -> np.ndarray:
    out = rng.uniform(lo, hi, size)
    bad = np.abs(out) < floor
    while bad.any():
        out[bad] = rng.uniform(lo, hi, int(bad.sum()))
        bad = np.abs(out) < floor
    return out


def _points(gaps: np.ndarray) -> tuple[float, ...]:
    return tuple(float(x) for x in np.concatenate([[0.0], np.cumsum(gaps)]))


def random_delta(rng: np.random.Generator, n_max: int = 8, lo: float = -10.0, hi: float = 10.0) -> PointConfig:
    n = int(rng.integers(1, n_max + 1))
    gaps = rng.uniform(0.2, 3.0, n - 1)
    alpha = _avoiding(rng, lo, hi, n, 0.05)
    return PointConfig(Kind.DELTA, _points(gaps), tuple(float(a) for a in alpha))


def random_delta_prime(rng: np.random.Generator, n_max: int = 6) -> PointConfig:
    n = int(rng.integers(1, n_max + 1))
    gaps = rng.uniform(0.2, 3.0, n - 1)
    beta = _avoiding(rng, -5.0, 5.0, n, 0.1)
    return PointConfig(Kind.DELTA_PRIME, _points(gaps), tuple(float(b) for b in beta))


def random_window(rng: np.random.Generator, max_span: int = 5) -> DeltaPrimeWindow:
    m = int(rng.integers(1, max_span + 2))
    beta = _avoiding(rng, -5.0, 5.0, m, 0.1)
    gaps = rng.uniform(0.2, 3.0, m)
    return DeltaPrimeWindow(tuple(float(b) for b in beta), tuple(float(g) for g in gaps))


def gerschgorin_config(rng: np.random.Generator, n_max: int = 8) -> tuple[PointConfig, int]:
    """Config meeting the Gerschgorin condition at m indices, positive strengths elsewhere."""
    n = int(rng.integers(1, n_max + 1))
    gaps = rng.uniform(0.2, 3.0, n - 1)
    m = int(rng.integers(0, n + 1))
    chosen = set(int(i) for i in rng.choice(n, size=m, replace=False))
    inv = np.concatenate([[0.0], 1.0 / gaps, [0.0]])
    alpha = []
    for k in range(n):
        if k in chosen:
            alpha.append(-2.0 * (inv[k] + inv[k + 1]) - float(rng.uniform(0.05, 5.0)))
        else:
            alpha.append(float(rng.uniform(0.05, 10.0)))
    return PointConfig(Kind.DELTA, _points(gaps), tuple(alpha)), m


def random_tridiagonal(rng: np.random.Generator, n_max: int = 10) -> tuple[list[Fraction], list[Fraction]]:
    """Exact tridiagonal with small rational entries."""
    n = int(rng.integers(2, n_max + 1))
    diag = [Fraction(int(rng.integers(-12, 13)), int(rng.integers(1, 5))) for _ in range(n)]
    off = [Fraction(int(rng.integers(-6, 7)), int(rng.integers(1, 4))) for _ in range(n - 1)]
    return diag, off


# hypothesis strategies

small_fraction = st.builds(Fraction, st.integers(-40, 40), st.integers(1, 8))
positive_fraction = st.builds(Fraction, st.integers(1, 30), st.integers(1, 8))


@st.composite
def rational_delta(draw, n_max: int = 7) -> PointConfig:
    n = draw(st.integers(1, n_max))
    gaps = draw(st.lists(positive_fraction, min_size=n - 1, max_size=n - 1))
    alpha = draw(st.lists(small_fraction, min_size=n, max_size=n))
    points = [Fraction(0)]
    for d in gaps:
        points.append(points[-1] + d)
    return PointConfig(Kind.DELTA, tuple(points), tuple(alpha), ScalarMode.RATIONAL)


@st.composite
def float_delta(draw, n_max: int = 7) -> PointConfig:
    n = draw(st.integers(1, n_max))
    gaps = draw(st.lists(st.floats(0.2, 3.0), min_size=n - 1, max_size=n - 1))
    alpha = draw(
        st.lists(
            st.floats(-10, 10).filter(lambda a: abs(a) >= 0.05),
            min_size=n,
            max_size=n,
        )
    )
    points = [0.0]
    for d in gaps:
        points.append(points[-1] + d)
    return PointConfig(Kind.DELTA, tuple(points), tuple(alpha))


@st.composite
def rational_window(draw, max_len: int = 6) -> DeltaPrimeWindow:
    m = draw(st.integers(1, max_len))
    beta = draw(st.lists(small_fraction, min_size=m, max_size=m))
    gaps = draw(st.lists(positive_fraction, min_size=m, max_size=m))
    return DeltaPrimeWindow(tuple(beta), tuple(gaps))
