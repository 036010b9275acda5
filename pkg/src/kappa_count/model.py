"""Domain types, scalar backends and configuration ingestion."""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence, Union

Scalar = Union[float, Fraction]

DEFAULT_EPSILON = 1e-12


class KappaError(Exception):
    """Base class for every error raised by this package."""


class ParseError(KappaError):
    def __init__(self, field_name: str, message: str) -> None:
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


class ValidationError(KappaError):
    def __init__(self, field_name: str, message: str) -> None:
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


class _Infinity:
    """The infinite marker produced by the zero branch of the gamma recurrences.

    It is only ever counted; it supports no arithmetic and is equal to nothing but itself.
    """

    _instance: _Infinity | None = None

    def __new__(cls) -> _Infinity:
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INFINITY"

    def __eq__(self, other: object) -> bool:
        return other is self

    def __hash__(self) -> int:
        return hash("kappa_count.INFINITY")

    def __reduce__(self) -> str:
        return "INFINITY"


INFINITY = _Infinity()

ExtendedReal = Union[float, Fraction, _Infinity]


def is_infinite(value: object) -> bool:
    return value is INFINITY


class ScalarMode(enum.Enum):
    FLOAT = "float64"
    RATIONAL = "rational"


class Kind(enum.Enum):
    DELTA = "delta"
    DELTA_PRIME = "delta_prime"


def is_exact(values: Sequence[object]) -> bool:
    """True when every value is an int or a Fraction (exact branch decisions)."""
    return all(isinstance(v, (int, Fraction)) and not isinstance(v, bool) for v in values)


def zero_test(value: Scalar, scale: float, epsilon: float, exact: bool) -> bool:
    """Decide whether ``value`` is zero.

    Exact scalars are compared with 0; floats are zero when
    ``|value| <= epsilon * max(1, scale)``.
    """
    if exact:
        return value == 0
    return abs(value) <= epsilon * max(1.0, float(scale))


def near_zero(value: Scalar, scale: float, epsilon: float) -> bool:
    return abs(float(value)) <= 10.0 * epsilon * max(1.0, float(scale))


def gaps(points: Sequence[Scalar]) -> list[Scalar]:
    """Consecutive differences ``x[k+1] - x[k]``; raises if any is not positive."""
    if len(points) < 1:
        raise ValidationError("points", "at least one point is required")
    out = []
    for k in range(len(points) - 1):
        d = points[k + 1] - points[k]
        if not d > 0:
            raise ValidationError(
                "points", f"points not increasing at index {k + 1} ({points[k]} >= {points[k + 1]})"
            )
        out.append(d)
    return out


@dataclass(frozen=True)
class PointConfig:
    """Interaction sites ``x_1 < ... < x_n`` with one strength per site.

    ``strengths`` holds the delta strengths (alpha) or the delta-prime strengths (beta)
    depending on ``kind``. Scalars are floats in ``FLOAT`` mode and Fractions in
    ``RATIONAL`` mode.
    """

    kind: Kind
    points: tuple[Scalar, ...]
    strengths: tuple[Scalar, ...]
    scalar: ScalarMode = ScalarMode.FLOAT
    epsilon: float = DEFAULT_EPSILON
    gaps: tuple[Scalar, ...] = field(init=False, compare=False)

    def __post_init__(self) -> None:
        if not isinstance(self.kind, Kind):
            object.__setattr__(self, "kind", Kind(self.kind))
        if not isinstance(self.scalar, ScalarMode):
            object.__setattr__(self, "scalar", ScalarMode(self.scalar))
        conv = Fraction if self.scalar is ScalarMode.RATIONAL else float
        points = tuple(conv(p) for p in self.points)
        strengths = tuple(conv(s) for s in self.strengths)
        for name, values in (("points", points), ("strengths", strengths)):
            for i, v in enumerate(values):
                if isinstance(v, float) and not math.isfinite(v):
                    raise ValidationError(name, f"non-finite value at index {i}")
        if len(points) != len(strengths):
            raise ValidationError(
                "strengths", f"expected {len(points)} strengths, got {len(strengths)}"
            )
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ValidationError("epsilon", "must be a positive finite number")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "strengths", strengths)
        object.__setattr__(self, "gaps", tuple(gaps(points)))

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def exact(self) -> bool:
        return self.scalar is ScalarMode.RATIONAL

    def inv_gap(self, k: int) -> Scalar:
        """``1/d_k`` for 1-based k, with the boundary convention ``1/d_0 = 1/d_n = 0``."""
        if 1 <= k <= self.n - 1:
            return 1 / self.gaps[k - 1]
        return Fraction(0) if self.exact else 0.0

    @property
    def zero_scale(self) -> float:
        """``max(|strength_k|, 1/d_k)``, the reference magnitude for Float-mode zero tests."""
        vals = [abs(float(s)) for s in self.strengths]
        vals += [1.0 / float(d) for d in self.gaps]
        return max(vals) if vals else 1.0

    def is_zero(self, value: Scalar) -> bool:
        return zero_test(value, self.zero_scale, self.epsilon, self.exact)

    def with_strength(self, index: int, value: Scalar) -> PointConfig:
        strengths = list(self.strengths)
        strengths[index] = value
        return PointConfig(self.kind, self.points, tuple(strengths), self.scalar, self.epsilon)


@dataclass(frozen=True)
class CountReport:
    """Outcome of a single counting method.

    ``total`` is ``kappa_minus + n_infinity``: the number of negative squares. Only the
    gamma recurrences produce infinite entries; every other method reports
    ``n_infinity = 0``.
    """

    kappa_minus: int
    n_infinity: int
    method: str
    diagnostics: tuple[str, ...] = ()
    lower_bound: bool = False
    roots: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.kappa_minus < 0 or self.n_infinity < 0:
            raise ValueError("counts must be nonnegative")

    @property
    def total(self) -> int:
        return self.kappa_minus + self.n_infinity

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "kappa_minus": self.kappa_minus,
            "n_infinity": self.n_infinity,
            "total": self.total,
            "method": self.method,
            "diagnostics": list(self.diagnostics),
            "lower_bound": self.lower_bound,
        }
        if self.roots:
            out["roots"] = list(self.roots)
        return out


def _parse_number(raw: Any, name: str, index: int, mode: ScalarMode) -> Scalar:
    where = f"{name}[{index}]"
    if isinstance(raw, bool):
        raise ParseError(where, "booleans are not numbers")
    if mode is ScalarMode.RATIONAL:
        if isinstance(raw, str):
            try:
                return Fraction(raw.strip())
            except (ValueError, ZeroDivisionError) as exc:
                raise ParseError(where, f"not a rational literal: {raw!r}") from exc
        if isinstance(raw, int):
            return Fraction(raw)
        if isinstance(raw, float):
            if not math.isfinite(raw):
                raise ValidationError(where, "non-finite value")
            return Fraction(raw)
        raise ParseError(where, f"expected number or 'p/q' string, got {type(raw).__name__}")
    if isinstance(raw, (int, float)):
        value = float(raw)
        if not math.isfinite(value):
            raise ValidationError(where, "non-finite value")
        return value
    raise ParseError(where, f"expected number, got {type(raw).__name__}")


def config_from_dict(doc: Any) -> PointConfig:
    if not isinstance(doc, dict):
        raise ParseError("document", "top level must be a JSON object")
    for key in ("kind", "points", "strengths"):
        if key not in doc:
            raise ParseError(key, "missing required field")
    unknown = set(doc) - {"kind", "points", "strengths", "scalar", "epsilon"}
    if unknown:
        raise ParseError(sorted(unknown)[0], "unknown field")
    try:
        kind = Kind(doc["kind"])
    except ValueError as exc:
        raise ValidationError("kind", f"expected 'delta' or 'delta_prime', got {doc['kind']!r}") from exc
    try:
        mode = ScalarMode(doc.get("scalar", "float64"))
    except ValueError as exc:
        raise ValidationError("scalar", f"expected 'float64' or 'rational', got {doc['scalar']!r}") from exc
    epsilon = doc.get("epsilon", DEFAULT_EPSILON)
    if isinstance(epsilon, bool) or not isinstance(epsilon, (int, float)):
        raise ParseError("epsilon", "expected a number")
    for key in ("points", "strengths"):
        if not isinstance(doc[key], list):
            raise ParseError(key, "expected a list")
    points = [_parse_number(v, "points", i, mode) for i, v in enumerate(doc["points"])]
    strengths = [_parse_number(v, "strengths", i, mode) for i, v in enumerate(doc["strengths"])]
    return PointConfig(kind, tuple(points), tuple(strengths), mode, float(epsilon))


def parse_config(text: str | bytes) -> PointConfig:
    """Parse and validate a JSON configuration document."""
    try:
        doc = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParseError("document", f"malformed JSON ({exc})") from exc
    return config_from_dict(doc)


def _encode_scalar(value: Scalar) -> Any:
    if isinstance(value, Fraction):
        return str(value)
    return float(value)


def config_to_dict(config: PointConfig) -> dict[str, Any]:
    return {
        "kind": config.kind.value,
        "points": [_encode_scalar(p) for p in config.points],
        "strengths": [_encode_scalar(s) for s in config.strengths],
        "scalar": config.scalar.value,
        "epsilon": config.epsilon,
    }


def serialize_config(config: PointConfig) -> str:
    # repr-based float output round-trips bit-exactly
    return json.dumps(config_to_dict(config), sort_keys=True)
