"""Shared pieces of the experiment runners."""

import numpy as np

from .. import __version__
from ..signal import fourier

__all__ = ["provenance", "weighted_energy", "loglog_slope"]


def provenance(cfg, banks, excluded=()):
    """Config echo, hash, library version and the frame residual of every bank used."""
    return {
        "config": cfg.to_dict(),
        "config_hash": cfg.config_hash,
        "library_version": __version__,
        "banks": {b.bank_id: {"J": b.J, "j_values": list(b.j_values),
                              "lp_residual": b.lp_residual,
                              "covered_band": b.covered_band} for b in banks},
        "max_lp_residual": max((b.lp_residual for b in banks), default=0.0),
        "excluded": list(excluded),
    }


def weighted_energy(f, weight):
    """``(1 / 2 pi) int |f^(w)|^2 weight(|w|) dw`` on the frequency grid."""
    F = fourier(f)
    return float(np.sum(np.abs(F.bins) ** 2 * weight(np.abs(F.omega))) / f.grid.period)


def loglog_slope(x, y):
    """Least-squares slope of ``log y`` against ``x`` (``x`` already transformed)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or np.any(y <= 0):
        return float("nan")
    return float(np.polyfit(x, np.log(y), 1)[0])
