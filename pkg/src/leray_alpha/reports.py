"""EstimateReport records and their JSON / CSV serialisation."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

DOMAIN_NOTE = "periodic torus discretisation (estimates stated on R^n)"

CSV_COLUMNS = (
    "check",
    "params",
    "sample",
    "constant",
    "exponent",
    "predicted",
    "passed",
    "tol",
    "domain",
)


def fmt(x) -> str:
    """17 significant digits, so reruns diff cleanly."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


@dataclass
class EstimateReport:
    """Outcome of one empirical inequality check.

    ``passed`` is decided by the check from the fitted-vs-predicted
    comparison and ``tol``; ``details`` carries per-sample series.
    """

    check: str
    params: dict
    sample: str
    passed: bool
    tol: float
    constant: float | None = None
    exponent: float | None = None
    predicted: float | None = None
    details: dict = field(default_factory=dict)
    domain: str = DOMAIN_NOTE

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))

    def csv_row(self) -> list[str]:
        return [
            self.check,
            json.dumps(_jsonable(self.params), sort_keys=True),
            self.sample,
            fmt(self.constant),
            fmt(self.exponent),
            fmt(self.predicted),
            fmt(bool(self.passed)),
            fmt(self.tol),
            self.domain,
        ]

    def summary(self) -> str:
        bits = [f"{self.check}: {'PASS' if self.passed else 'FAIL'}"]
        if self.exponent is not None:
            bits.append(f"exponent={self.exponent:.4g}")
        if self.predicted is not None:
            bits.append(f"predicted={self.predicted:.4g}")
        if self.constant is not None:
            bits.append(f"C={self.constant:.4g}")
        return " ".join(bits)


def _sort_key(r: EstimateReport):
    return (r.check, json.dumps(_jsonable(r.params), sort_keys=True), r.sample)


def reports_to_csv(reports, path=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in sorted(reports, key=_sort_key):
        w.writerow(r.csv_row())
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def reports_to_json(reports, path=None) -> str:
    text = json.dumps([r.to_dict() for r in sorted(reports, key=_sort_key)], indent=2, sort_keys=True)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text


def fit_loglog(x, y) -> tuple[float, float]:
    """Least-squares slope and prefactor of log y against log x."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, icpt = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope), float(np.exp(icpt))
