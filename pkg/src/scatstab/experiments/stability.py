"""Scattering distance under small smooth deformations, normalised by the stability bound."""

import numpy as np

from ..deformation import apply_deformation, k1alpha_functional, k2_functional
from ..scattering import scatter, scattering_distance, u_norm_mixed
from ._common import provenance
from .config import make_bank, make_grid
from .families import describe, make_deformation, make_signal
from .report import ExperimentReport, map_rows

__all__ = ["run_stability_sweep"]

COLUMNS = ["signal", "deformation", "eps", "J", "alpha", "dist", "sup_tau", "sup_dtau",
           "delta_tau", "sup_d2tau", "holder_dtau", "K1alpha", "K1alpha_Jvariant", "K2",
           "u_norm_mixed", "ratio", "ratio_Jvariant", "ratio_K2", "tail_f", "tail_Lf"]


def _as_list(x):
    return x if isinstance(x, list) else [x]


def run_stability_sweep(cfg, threads=1):
    """``dist / (K_{1+alpha}(tau) ||U f||_1)`` over signals, fields, scales ``eps`` and ``alpha``.

    Each base field is rescaled by every ``eps`` in ``eps_list``; the
    ``K2`` and ``max{J, 1}`` variants are reported alongside.
    """
    p = cfg.params
    grid = make_grid(cfg.grid)
    M = cfg.bank["M"]
    alphas = tuple(p["alphas"])
    sig_desc = _as_list(cfg.signal)
    def_desc = _as_list(cfg.deformation)
    signals = [make_signal(d, grid, f"signal.{i}") for i, d in enumerate(sig_desc)]
    fields = [make_deformation(d, grid, f"deformation.{i}") for i, d in enumerate(def_desc)]
    banks = {J: make_bank(grid, cfg.bank, J) for J in p["J_list"]}
    base = {(i, J): scatter(f, banks[J], M) for i, f in enumerate(signals) for J in banks}

    tasks = [(i, k, eps, J) for i in range(len(signals)) for k in range(len(fields))
             for eps in p["eps_list"] for J in p["J_list"]]

    def rows_for(task):
        i, k, eps, J = task
        tau = fields[k].scaled(eps)
        S0 = base[(i, J)]
        S1 = scatter(apply_deformation(signals[i], tau), banks[J], M)
        dist = scattering_distance(S1, S0)
        u1, _ = u_norm_mixed(signals[i], None, M, coefficients=S0)
        m = tau.metrics(alphas)
        k2 = k2_functional(m, J)
        out = []
        for a in alphas:
            K = k1alpha_functional(m, J, a)
            KJ = k1alpha_functional(m, J, a, variant="J")
            out.append({
                "signal": describe(sig_desc[i]), "deformation": describe(def_desc[k]),
                "eps": eps, "J": J, "alpha": a, "dist": dist, "sup_tau": m.sup_tau,
                "sup_dtau": m.sup_dtau, "delta_tau": m.delta_tau, "sup_d2tau": m.sup_d2tau,
                "holder_dtau": m.holder_dtau[a], "K1alpha": K, "K1alpha_Jvariant": KJ,
                "K2": k2, "u_norm_mixed": u1,
                "ratio": _ratio(dist, K * u1), "ratio_Jvariant": _ratio(dist, KJ * u1),
                "ratio_K2": _ratio(dist, k2 * u1),
                "tail_f": float(S0.layer_u_norms[-1]), "tail_Lf": float(S1.layer_u_norms[-1]),
            })
        return out

    rows = [r for chunk in map_rows(rows_for, tasks, threads) for r in chunk]
    return ExperimentReport("stability", COLUMNS, rows, provenance(cfg, banks.values()),
                            _summary(rows), banks=list(banks.values()))


def _ratio(num, den):
    return num / den if den else 0.0


def _summary(rows):
    ratios = np.array([r["ratio"] for r in rows])
    spread = []
    groups = {}
    for r in rows:
        groups.setdefault((r["signal"], r["deformation"], r["J"], r["alpha"]), []).append(
            r["ratio"])
    for vals in groups.values():
        vals = np.array([v for v in vals if v > 0])
        if vals.size:
            spread.append(float(vals.max() / vals.min()))
    return {
        "rows": len(rows),
        "max_ratio": float(ratios.max()) if ratios.size else 0.0,
        "max_ratio_Jvariant": float(max(r["ratio_Jvariant"] for r in rows)) if rows else 0.0,
        "max_ratio_K2": float(max(r["ratio_K2"] for r in rows)) if rows else 0.0,
        "max_eps_spread": max(spread) if spread else 1.0,
        "max_tail": float(max(max(r["tail_f"], r["tail_Lf"]) for r in rows)) if rows else 0.0,
    }
