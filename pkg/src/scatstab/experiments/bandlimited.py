"""Growth of the deformation distance with signal bandwidth under a Lipschitz field."""

import numpy as np

from ..deformation import apply_deformation
from ..scattering import scatter, scattering_distance
from ._common import loglog_slope, provenance, weighted_energy
from .config import make_bank, make_grid
from .families import make_deformation, make_signal
from .report import ExperimentReport, map_rows

__all__ = ["run_bandlimited_lipschitz"]

COLUMNS = ["seed", "tau_scale", "R", "J", "log_1_plus_2JR", "dist", "sup_dtau",
           "log_weighted_norm", "tail_f", "tail_Lf"]


def run_bandlimited_lipschitz(cfg, threads=1):
    """``dist(R)`` for unit-norm band-limited ``f`` and a fixed Lipschitz field.

    The signal descriptor's ``R`` and ``seed`` are replaced by every entry
    of ``R_list`` and ``seeds``; the field is scaled by each ``tau_scales``
    entry.  The summary fits ``log dist`` against ``log(1 + 2^J R)`` per
    ``(seed, tau_scale)``.
    """
    p = cfg.params
    grid = make_grid(cfg.grid)
    M = cfg.bank["M"]
    J = cfg.bank["J"]
    bank = make_bank(grid, cfg.bank)
    base_tau = make_deformation(cfg.deformation, grid)
    beta = p["beta"]
    tasks = [(s, t, R) for s in p["seeds"] for t in p["tau_scales"] for R in p["R_list"]]

    def row(task):
        seed, scale, R = task
        f = make_signal({**cfg.signal, "R": R, "seed": seed}, grid)
        tau = base_tau.scaled(scale)
        S0 = scatter(f, bank, M)
        S1 = scatter(apply_deformation(f, tau), bank, M)
        lw = weighted_energy(f, lambda w: np.log(np.e + 2.0 ** J * w) ** beta)
        return {"seed": seed, "tau_scale": scale, "R": R, "J": J,
                "log_1_plus_2JR": float(np.log1p(2.0 ** J * R)),
                "dist": scattering_distance(S1, S0), "sup_dtau": tau.sup_dtau,
                "log_weighted_norm": float(np.sqrt(lw)),
                "tail_f": float(S0.layer_u_norms[-1]), "tail_Lf": float(S1.layer_u_norms[-1])}

    rows = map_rows(row, tasks, threads)
    slopes = []
    for s in p["seeds"]:
        for t in p["tau_scales"]:
            grp = sorted((r for r in rows if r["seed"] == s and r["tau_scale"] == t),
                         key=lambda r: r["R"])
            slopes.append({"seed": s, "tau_scale": t, "slope": loglog_slope(
                [r["log_1_plus_2JR"] for r in grp], [r["dist"] for r in grp])})
    doubling = []
    scales = sorted(p["tau_scales"])
    r0 = min(p["R_list"])
    for s in p["seeds"]:
        d = {r["tau_scale"]: r["dist"] for r in rows if r["seed"] == s and r["R"] == r0}
        for a, b in zip(scales, scales[1:]):
            if d[a] > 0:
                doubling.append({"seed": s, "from": a, "to": b, "ratio": d[b] / d[a]})
    vals = [x["slope"] for x in slopes]
    summary = {"slopes": slopes, "max_slope": float(np.max(vals)),
               "mean_slope": float(np.mean(vals)), "scale_ratios_small_R": doubling}
    return ExperimentReport("bandlimited", COLUMNS, rows, provenance(cfg, [bank]), summary,
                            banks=[bank])
