"""Layer-by-layer decay of the propagated energy."""

from dataclasses import dataclass

import numpy as np

from ..scattering import scatter
from ..signal import l2_norm
from ._common import provenance, weighted_energy
from .config import make_bank, make_grid
from .families import describe, make_signal
from .report import ExperimentReport, map_rows

__all__ = ["DecayProfile", "run_energy_decay"]


@dataclass(frozen=True)
class DecayProfile:
    """``A_m(w) = 1 - exp(-2 w^2 / (r a^m)^2)`` with ``a > 1`` and ``r > 0``."""

    a: float
    r: float

    def __post_init__(self):
        if not self.a > 1:
            raise ValueError("a must exceed 1")
        if not self.r > 0:
            raise ValueError("r must be positive")

    def __call__(self, omega, m):
        w = np.asarray(omega, dtype=float)
        return -np.expm1(-2 * w ** 2 / (self.r * self.a ** m) ** 2)


def _columns(n_profiles):
    cols = ["signal", "m", "layer_norm", "layer_norm_rel", "l2_ratio", "mixed_ratio"]
    for k in range(n_profiles):
        cols += [f"profile{k}_bound", f"profile{k}_pass"]
    return cols + ["tail"]


def run_energy_decay(cfg, threads=1):
    """``||U[Lambda^m] f||`` for ``m = 0 .. M + 1`` and every configured signal.

    ``l2_ratio`` compares the truncated ``||U f||^2`` with the logarithmic
    energy ``(1/2 pi) int |f^|^2 log(e + |w|)``; ``mixed_ratio`` compares
    the truncated ``||U f||_1`` with the square root of the ``log^beta``
    energy.  Each decay profile adds the bound ``(1/2 pi) int |f^|^2 A_m``
    on ``||U[Lambda^m] f||^2`` and a pass flag.
    """
    p = cfg.params
    grid = make_grid(cfg.grid)
    M = cfg.bank["M"]
    bank = make_bank(grid, cfg.bank)
    descs = cfg.signal if isinstance(cfg.signal, list) else [cfg.signal]
    profiles = [DecayProfile(float(d["a"]), float(d["r"])) for d in p["profiles"]]
    beta = p["beta"]

    def rows_for(item):
        i, desc = item
        f = make_signal(desc, grid, f"signal.{i}")
        S = scatter(f, bank, M)
        layers = S.layer_u_norms
        norm = l2_norm(f)
        log_e = weighted_energy(f, lambda w: np.log(np.e + w))
        log_b = weighted_energy(f, lambda w: np.log(np.e + w) ** beta)
        l2_ratio = float(np.sum(layers[:M + 1] ** 2) / log_e) if log_e else 0.0
        mixed_ratio = float(np.sum(layers[:M + 1]) / np.sqrt(log_b)) if log_b else 0.0
        out = []
        for m in range(M + 2):
            row = {"signal": describe(desc), "m": m, "layer_norm": float(layers[m]),
                   "layer_norm_rel": float(layers[m] / norm) if norm else 0.0,
                   "l2_ratio": l2_ratio, "mixed_ratio": mixed_ratio,
                   "tail": float(layers[M + 1])}
            for k, prof in enumerate(profiles):
                bound = weighted_energy(f, lambda w: prof(w, m))
                row[f"profile{k}_bound"] = bound
                row[f"profile{k}_pass"] = bool(layers[m] ** 2 <= bound * (1 + 1e-12) + 1e-300)
            out.append(row)
        return out

    rows = [r for chunk in map_rows(rows_for, list(enumerate(descs)), threads) for r in chunk]
    last = [r for r in rows if r["m"] == M + 1]
    summary = {"depth": M + 1,
               "max_rel_at_depth": float(max(r["layer_norm_rel"] for r in last)),
               "per_signal": {r["signal"]: r["layer_norm_rel"] for r in last}}
    if profiles:
        summary["profile_pass"] = [bool(all(r[f"profile{k}_pass"] for r in rows))
                                   for k in range(len(profiles))]
    return ExperimentReport("decay", _columns(len(profiles)), rows,
                            provenance(cfg, [bank]), summary, banks=[bank])
