"""Dilated oscillatory deformations that stay a fixed scattering distance away."""

import numpy as np

from ..deformation import Bump, apply_deformation, scale_pair
from ..exceptions import ConfigError, DomainEscape
from ..scattering import scatter, scattering_distance, u_norm, u_norm_mixed
from ..signal import band_project, l2_norm
from ._common import provenance
from .config import make_bank, make_grid
from .families import make_deformation, make_signal
from .report import ExperimentReport, map_rows

__all__ = ["run_instability"]


def _columns(alphas):
    cols = ["N_osc", "n", "J", "A", "status", "dist", "dist_times_N", "sup_tau", "sup_dtau"]
    cols += [f"c_alpha_{a}" for a in alphas]
    cols += ["g_l2", "g_low", "g_high", "g_low_fraction", "g_norm_ratio",
             "u_norm", "u_norm_mixed"]
    cols += [f"pro0_ratio_{a}" for a in alphas]
    cols += [f"pro0_ratio_mixed_{a}" for a in alphas]
    cols += ["audit_dist", "audit_rel_error", "tail_f", "tail_Lf"]
    return cols


def run_instability(cfg, threads=1):
    """Distances between ``f_n`` and its warp by ``tau_n`` as the dilation ``n`` grows.

    Each row holds ``dist = ||S_J(L_{tau_n} f_n) - S_J(f_n)||`` for one
    ``(N_osc, n, J)``, the Hölder norms of ``tau_n``, the high/low split of
    the residual ``g = L_{tau_n} f_n - f_n`` at ``cutoff_fraction * N_osc * 2^n``
    and lower-bound ratios normalised by the propagator norms of ``f_n``.
    With ``audit`` the same distance is recomputed as ``dist(0, J + n)`` on
    the undilated grid.
    """
    p = cfg.params
    grid = make_grid(cfg.grid)
    bank_cfg = cfg.bank
    M = bank_cfg["M"]
    alphas = list(p["alphas"])
    f = make_signal(cfg.signal, grid)
    kind = cfg.deformation["kind"]
    if kind not in ("theorem1", "zero"):
        raise ConfigError("deformation.kind", "instability needs 'theorem1' or 'zero'")
    for N in p["N_list"]:
        per_osc = 2 * np.pi / (N * grid.spacing)
        if per_osc < p["min_samples_per_oscillation"]:
            raise ConfigError("experiment.N_list",
                              f"N={N} gives {per_osc:.3g} samples per oscillation, "
                              f"need {p['min_samples_per_oscillation']}")
    phi_l2 = Bump().l2_norm()
    fields = {}
    for N in p["N_list"]:
        desc = dict(cfg.deformation)
        if kind == "theorem1":
            desc["N"] = N
        fields[N] = make_deformation(desc, grid)
    banks = {}

    def bank_for(g, J):
        key = (g, J)
        if key not in banks:
            banks[key] = make_bank(g, bank_cfg, J)
        return banks[key]

    # Prebuild banks so worker threads only read the cache.
    tasks = [(N, n, J) for N in p["N_list"] for n in p["n_list"] for J in p["J_list"]]
    for N, n, J in tasks:
        bank_for(grid.scaled(n), J)
        if p["J_prime"] is not None:
            bank_for(grid.scaled(n), p["J_prime"])
        if p["audit"] and 0 < n <= p["audit_max_n"]:
            bank_for(grid, J + n)

    def row(task):
        N, n, J = task
        tau = fields[N]
        A = tau.source.get("A", float("nan"))
        fn, tn = scale_pair(f, tau, n)
        bank = bank_for(fn.grid, J)
        out = {c: float("nan") for c in _columns(alphas)}
        out.update(N_osc=N, n=n, J=J, A=A)
        try:
            Lf = apply_deformation(fn, tn)
        except DomainEscape as exc:
            out["status"] = f"domain_escape: {exc}"
            return out
        S0, S1 = scatter(fn, bank, M), scatter(Lf, bank, M)
        dist = scattering_distance(S1, S0)
        m = tn.metrics((), tuple(alphas))
        g = Lf - fn
        wc = p["cutoff_fraction"] * N * 2.0 ** n
        g_l2 = l2_norm(g)
        g_low = l2_norm(band_project(g, ("low", wc)))
        if p["J_prime"] is None:
            Sp, Jp = S0, J
        else:
            Jp = p["J_prime"]
            Sp = scatter(fn, bank_for(fn.grid, Jp), M)
        u2, _ = u_norm(fn, None, M, coefficients=Sp)
        u1, _ = u_norm_mixed(fn, None, M, coefficients=Sp)
        out.update(status="ok", dist=dist, dist_times_N=dist * N,
                   sup_tau=m.sup_tau, sup_dtau=m.sup_dtau, g_l2=g_l2, g_low=g_low,
                   g_high=l2_norm(band_project(g, ("high", wc))),
                   g_low_fraction=g_low / g_l2 if g_l2 else 0.0,
                   g_norm_ratio=g_l2 * N / (A * phi_l2 / np.sqrt(2)) if A == A else 0.0,
                   u_norm=u2, u_norm_mixed=u1,
                   tail_f=float(S0.layer_u_norms[-1]), tail_Lf=float(S1.layer_u_norms[-1]))
        lead = max(Jp + n, 1)
        for a in alphas:
            c = m.c_alpha_norm(a)
            out[f"c_alpha_{a}"] = c
            denom = 2.0 ** (n * (1 - a)) * c
            out[f"pro0_ratio_{a}"] = dist * lead ** 0.5 / (denom * u2) if denom else 0.0
            out[f"pro0_ratio_mixed_{a}"] = (dist * lead ** p["beta"] / (denom * u1)
                                            if denom else 0.0)
        if p["audit"] and 0 < n <= p["audit_max_n"]:
            ba = bank_for(grid, J + n)
            d0 = scattering_distance(scatter(apply_deformation(f, tau), ba, M),
                                     scatter(f, ba, M))
            out["audit_dist"] = d0
            out["audit_rel_error"] = abs(dist - d0) / d0 if d0 else abs(dist)
        return out

    rows = map_rows(row, tasks, threads)
    excluded = [dict(N_osc=r["N_osc"], n=r["n"], J=r["J"], reason=r["status"])
                for r in rows if r["status"] != "ok"]
    return ExperimentReport("instability", _columns(alphas), rows,
                            provenance(cfg, banks.values(), excluded),
                            _summary(rows, alphas), banks=list(banks.values()))


def _summary(rows, alphas):
    ok = [r for r in rows if r["status"] == "ok"]
    out = {"groups": []}
    for N in sorted({r["N_osc"] for r in ok}):
        for J in sorted({r["J"] for r in ok}):
            grp = sorted((r for r in ok if r["N_osc"] == N and r["J"] == J),
                         key=lambda r: r["n"])
            if not grp:
                continue
            dn = np.array([r["dist_times_N"] for r in grp])
            entry = {"N_osc": N, "J": J, "n": [r["n"] for r in grp],
                     "dist_times_N": dn.tolist(),
                     "max_over_min": float(dn.max() / dn.min()) if dn.min() > 0 else None,
                     "min_over_first": float(dn.min() / dn[0]) if dn[0] > 0 else None}
            for a in alphas:
                c = np.array([r[f"c_alpha_{a}"] for r in grp])
                entry[f"c_alpha_{a}_over_first"] = (c / c[0]).tolist() if c[0] else None
            out["groups"].append(entry)
    audits = [r["audit_rel_error"] for r in ok if r["audit_rel_error"] == r["audit_rel_error"]]
    out["max_audit_rel_error"] = max(audits) if audits else None
    return out
