"""Command-line entry point: count, verify, sweep and oracle."""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import re
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

from . import delta_prime, jacobi, oracle, recurrence
from .model import INFINITY, CountReport, KappaError, Kind, ParseError, PointConfig, ScalarMode, ValidationError, config_to_dict, parse_config

SCHEMA = 1
EPSILON_ENV = "KAPPA_COUNT_EPSILON"

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NONCONVERGENCE = 3
EXIT_DISAGREE = 4


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def dumps(obj: Any) -> str:
    """Deterministic JSON: sorted keys, floats with 17 significant digits."""
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, Fraction):
        return json.dumps(f"{obj.numerator}/{obj.denominator}")
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = sorted(obj.items())
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    if obj is INFINITY:
        return '"inf"'
    raise TypeError(f"cannot serialise {type(obj).__name__}")


@dataclass
class VerifyReport:
    reports: list[CountReport]
    config: PointConfig
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def agreement(self) -> bool:
        return len({r.total for r in self.reports}) <= 1

    @property
    def first_disagreement(self) -> tuple[str, str] | None:
        for i, a in enumerate(self.reports):
            for b in self.reports[i + 1 :]:
                if a.total != b.total:
                    return (a.method, b.method)
        return None

    def to_dict(self, with_timings: bool = False) -> dict[str, Any]:
        out: dict[str, Any] = {
            "schema": SCHEMA,
            "reports": [r.to_dict() for r in self.reports],
            "agreement": self.agreement,
            "first_disagreement": list(self.first_disagreement) if self.first_disagreement else None,
            "config": config_to_dict(self.config),
        }
        if with_timings:
            out["timings"] = dict(self.timings)
        return out


def _jacobi_report(config: PointConfig) -> CountReport:
    res = jacobi.sturm_pivots(jacobi.build_S_finite(config), 0, config.epsilon)
    return CountReport(res.count, 0, "jacobi", res.diagnostics)


def _recurrence_report(config: PointConfig) -> CountReport:
    return recurrence.count_from_gamma(recurrence.gamma_finite(config))


METHODS: dict[str, Callable[[PointConfig], CountReport]] = {
    "recurrence": _recurrence_report,
    "jacobi": _jacobi_report,
    "phi": recurrence.phi_count,
    "strengths": delta_prime.count_negative_strengths,
    "oracle": oracle.count_bound_states,
}


def load_config(path: str) -> PointConfig:
    try:
        with open(path, "rb") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError("file", f"cannot read {path}: {exc.strerror}") from exc
    config = parse_config(text)
    raw = os.environ.get(EPSILON_ENV)
    if raw is not None and config.scalar is ScalarMode.FLOAT:
        try:
            eps = float(raw)
        except ValueError as exc:
            raise ValidationError(EPSILON_ENV, f"not a number: {raw!r}") from exc
        config = PointConfig(config.kind, config.points, config.strengths, config.scalar, eps)
    return config


def verify(config: PointConfig, with_oracle: bool = False, settings: oracle.ScanSettings | None = None) -> VerifyReport:
    if config.kind is Kind.DELTA:
        steps = [("recurrence", _recurrence_report), ("jacobi", _jacobi_report), ("phi", recurrence.phi_count)]
    else:
        steps = [("strengths", delta_prime.count_negative_strengths), ("window_T", delta_prime.window_count)]
    if with_oracle:
        steps.append(("oracle", lambda c: oracle.count_bound_states(c, settings)))
    reports, timings = [], {}
    for name, fn in steps:
        t0 = time.perf_counter()
        reports.append(fn(config))
        timings[name] = time.perf_counter() - t0
    return VerifyReport(reports, config, timings)


_PARAM = re.compile(r"^strengths\[(\d+)\]$")


def parse_param(text: str, config: PointConfig) -> int:
    m = _PARAM.match(text.strip())
    if not m:
        raise ValidationError("param", f"expected 'strengths[i]', got {text!r}")
    index = int(m.group(1))
    if index >= config.n:
        raise ValidationError("param", f"index {index} out of range for {config.n} strengths")
    return index


def sweep_values(start: float, stop: float, steps: int, exact: bool) -> list:
    if steps < 2:
        raise ValidationError("steps", "need at least 2 steps")
    if exact:
        a, b = Fraction(str(start)), Fraction(str(stop))
    else:
        a, b = float(start), float(stop)
    if exact:
        return [a + (b - a) * i / (steps - 1) for i in range(steps)]
    return [a + (b - a) * (i / (steps - 1)) for i in range(steps)]


def sweep_row(config: PointConfig, index: int, value) -> list:
    c = config.with_strength(index, value)
    if c.kind is Kind.DELTA:
        return [value, _recurrence_report(c).total, _jacobi_report(c).total, jacobi.gerschgorin_lower_bound(c)]
    return [value, delta_prime.count_negative_strengths(c).total, delta_prime.window_count(c).total]


def sweep_csv(config: PointConfig, index: int, values: list, workers: int | None = None) -> str:
    if config.kind is Kind.DELTA:
        header = ["param_value", "kappa_recurrence", "kappa_jacobi", "gerschgorin_lower_bound"]
    else:
        header = ["param_value", "kappa_strengths", "kappa_window_T"]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(lambda v: sweep_row(config, index, v), values))
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(format(float(row[0]), ".17g") if i == 0 else str(x) for i, x in enumerate(row)) + "\n")
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise ParseError("out", f"cannot write {out}: {exc.strerror}") from exc


def _report_json(report: CountReport, config: PointConfig) -> str:
    doc = report.to_dict()
    doc["schema"] = SCHEMA
    doc["config"] = config_to_dict(config)
    return dumps(doc) + "\n"


def _settings(args: argparse.Namespace) -> oracle.ScanSettings:
    try:
        return oracle.ScanSettings(kappa_max=args.kappa_max, grid=args.grid, max_refinements=args.max_refinements)
    except ValueError as exc:
        raise ValidationError("settings", str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kappa-count", description="Count negative eigenvalues of point-interaction Hamiltonians.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("count", help="run one counting method")
    c.add_argument("file")
    c.add_argument("--method", choices=sorted(METHODS), required=True)
    c.add_argument("--out")

    v = sub.add_parser("verify", help="run every applicable method and compare")
    v.add_argument("file")
    v.add_argument("--oracle", action="store_true")
    v.add_argument("--timings", action="store_true", help="include wall-clock timings (breaks byte-identical output)")
    v.add_argument("--out")

    s = sub.add_parser("sweep", help="sweep one strength and write CSV")
    s.add_argument("file")
    s.add_argument("--param", required=True, help="strengths[i], 0-based")
    s.add_argument("--from", dest="start", type=float, required=True)
    s.add_argument("--to", dest="stop", type=float, required=True)
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--out")

    o = sub.add_parser("oracle", help="transfer-matrix bound-state scan")
    o.add_argument("file")
    o.add_argument("--kappa-max", type=float)
    o.add_argument("--grid", type=int, default=64)
    o.add_argument("--max-refinements", type=int, default=12)
    o.add_argument("--out")
    return p


def run(args: argparse.Namespace) -> int:
    config = load_config(args.file)
    if args.command == "count":
        report = METHODS[args.method](config)
        _emit(_report_json(report, config), args.out)
        return EXIT_OK
    if args.command == "oracle":
        report = oracle.count_bound_states(config, _settings(args))
        _emit(_report_json(report, config), args.out)
        return EXIT_OK
    if args.command == "verify":
        rep = verify(config, args.oracle)
        _emit(dumps(rep.to_dict(args.timings)) + "\n", args.out)
        return EXIT_OK if rep.agreement else EXIT_DISAGREE
    index = parse_param(args.param, config)
    values = sweep_values(args.start, args.stop, args.steps, config.exact)
    _emit(sweep_csv(config, index, values), args.out)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return run(args)
    except oracle.NonConvergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (KappaError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
