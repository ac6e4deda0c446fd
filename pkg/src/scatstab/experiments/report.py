"""Tabular experiment reports with a JSON manifest."""

import csv
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..exceptions import NumericalFailure

__all__ = ["ExperimentReport", "format_value", "map_rows"]


def format_value(v):
    """CSV cell text; floats use 17 significant digits so they round-trip."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if np.isfinite(x) else str(x)
    return obj


def map_rows(fn, items, threads=1):
    """``[fn(x) for x in items]``, optionally on a thread pool; order is preserved.

    A :class:`NumericalFailure` escaping ``fn`` is tagged with the failing
    item as ``exc.row``.
    """
    items = list(items)

    def tagged(x):
        try:
            return fn(x)
        except NumericalFailure as exc:
            exc.row = x
            raise

    if threads is None or threads <= 1 or len(items) <= 1:
        return [tagged(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(tagged, items))


@dataclass
class ExperimentReport:
    """Rows of measurements plus provenance and a summary.

    Every row carries the truncation residuals of the scattering runs it
    used (``tail_*`` columns).
    """

    experiment: str
    columns: list
    rows: list
    provenance: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    banks: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        for i, row in enumerate(self.rows):
            missing = [c for c in self.columns if c not in row]
            if missing:
                raise ValueError(f"row {i} lacks columns {missing}")

    def column(self, name, where=None):
        rows = self.rows if where is None else [r for r in self.rows if where(r)]
        return np.array([r[name] for r in rows])

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.columns)
            for row in self.rows:
                w.writerow([format_value(row[c]) for c in self.columns])

    def manifest(self):
        return _jsonable({"experiment": self.experiment, "columns": self.columns,
                          "rows": len(self.rows), "summary": self.summary,
                          "provenance": self.provenance})

    def write(self, output_dir):
        """Write ``report.csv`` and ``manifest.json``; returns their paths."""
        os.makedirs(output_dir, exist_ok=True)
        csv_path = os.path.join(output_dir, "report.csv")
        man_path = os.path.join(output_dir, "manifest.json")
        self.to_csv(csv_path)
        with open(man_path, "w", encoding="utf-8") as fh:
            json.dump(self.manifest(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        return csv_path, man_path
