"""Decay of the scattering distance between a signal and its translate as ``J`` grows."""

import numpy as np

from ..scattering import scatter, scattering_distance
from ..signal import translate
from ._common import provenance
from .config import make_bank, make_grid
from .families import make_signal
from .report import ExperimentReport, map_rows

__all__ = ["run_translation", "support_length"]

COLUMNS = ["J", "shift", "dist", "first_term", "tail_f", "tail_Tf"]


def support_length(f, rtol=1e-12):
    """Length of the smallest interval outside which ``|f| <= rtol * max|f|``."""
    a = np.abs(f.samples)
    idx = np.nonzero(a > rtol * a.max())[0] if a.max() > 0 else np.array([0])
    return float((idx[-1] - idx[0]) * f.grid.spacing)


def run_translation(cfg, threads=1):
    """``dist(J) = ||S_J f - S_J f(. - c)||`` for every ``J`` in ``J_list``.

    ``c`` is ``shift`` if given, else ``shift_fraction`` times the support
    length of ``f``.  The summary holds the least-squares slope of
    ``log2 dist`` against ``J`` and a monotonicity flag.
    """
    p = cfg.params
    grid = make_grid(cfg.grid)
    M = cfg.bank["M"]
    f = make_signal(cfg.signal, grid)
    c = p["shift"] if p["shift"] is not None else p["shift_fraction"] * support_length(f)
    fc = translate(f, c)
    banks = {J: make_bank(grid, cfg.bank, J) for J in p["J_list"]}

    def row(J):
        S0, S1 = scatter(f, banks[J], M), scatter(fc, banks[J], M)
        return {"J": J, "shift": c, "dist": scattering_distance(S0, S1),
                "first_term": 2.0 ** -J * abs(c),
                "tail_f": float(S0.layer_u_norms[-1]), "tail_Tf": float(S1.layer_u_norms[-1])}

    rows = map_rows(row, sorted(p["J_list"]), threads)
    d = np.array([r["dist"] for r in rows])
    J = np.array([r["J"] for r in rows], dtype=float)
    slope = float(np.polyfit(J, np.log2(d), 1)[0]) if d.size > 1 and np.all(d > 0) else None
    summary = {"shift": c, "log2_slope": slope,
               "nonincreasing": bool(np.all(d[1:] <= d[:-1] * (1 + 1e-9) + 1e-300))}
    return ExperimentReport("translation", COLUMNS, rows, provenance(cfg, banks.values()),
                            summary, banks=list(banks.values()))
