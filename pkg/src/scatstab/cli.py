"""Command-line entry point.

Every subcommand reads one JSON document with sections ``grid``, ``bank``,
``signal``, ``deformation`` and ``experiment``; missing entries take their
defaults and ``--set dotted.key=value`` overrides single entries.  Outputs
go to ``DIR/report.csv``, ``DIR/manifest.json`` and ``DIR/profiles/``.

Exit codes: 0 on success, 1 for configuration errors, 2 for numerical
failures.
"""

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from .deformation import (apply_deformation, k1alpha_functional, k2_functional)
from .exceptions import ConfigError, NumericalFailure, ScatStabError
from .experiments import RUNNERS, config_from_document
from .experiments.config import make_bank, make_grid
from .experiments.families import describe, make_deformation, make_signal
from .experiments.report import ExperimentReport
from .filters import export_profiles_csv, uncovered_energy
from .operators import adjoint_defect, commutator_bound_ratio, commutator_handle
from .scattering import save_coefficients, scatter

log = logging.getLogger("scatstab")

SUBCOMMANDS = ("lp-check", "scatter", "deform", "instability", "stability",
               "translation", "bandlimited", "decay", "commutator")

_HELP = {
    "lp-check": "build a filter bank and report its Littlewood-Paley residual",
    "scatter": "scattering coefficients of one signal",
    "deform": "warp one signal and report deformation metrics",
    "instability": "dilated oscillatory deformations (lower bound study)",
    "stability": "stability ratio sweep over smooth deformations",
    "translation": "distance decay of translates as J grows",
    "bandlimited": "bandwidth growth under a Lipschitz deformation",
    "decay": "layer energy decay",
    "commutator": "operator norm of the wavelet/deformation commutator",
}


def build_parser():
    parser = argparse.ArgumentParser(prog="scatstab", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=_HELP[name])
        p.add_argument("--config", metavar="PATH", help="JSON configuration document")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE", help="override a dotted key (repeatable)")
        p.add_argument("--output", metavar="DIR", help="output directory")
        p.add_argument("--threads", type=int, default=1, metavar="N",
                       help="worker threads for independent rows")
        p.add_argument("--dry-run", action="store_true",
                       help="print the resolved configuration and exit")
        p.add_argument("--seed", type=int, default=None,
                       help="seed for randomized numerical procedures")
        p.add_argument("--profiles", action="store_true",
                       help="also export the wavelet profiles of every bank (experiments)")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _resolve(args):
    doc = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ConfigError("config", f"cannot read {args.config}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON: {exc}") from None
        if not isinstance(doc, dict):
            raise ConfigError("config", "top level must be an object")
    name = args.command
    exp = doc.get("experiment") or {}
    if exp.get("name", name) != name:
        raise ConfigError("experiment.name",
                          f"config is for {exp['name']!r}, not {name!r}")
    overrides = list(args.overrides)
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    if args.output:
        overrides.append(f"output={json.dumps(args.output)}")
    cfg = config_from_document(doc, name, overrides)
    if cfg.output is None:
        cfg = config_from_document(cfg.to_dict(), name, [f'output="{name}-output"'])
    return cfg


def _write_profiles(banks, output_dir):
    pdir = os.path.join(output_dir, "profiles")
    os.makedirs(pdir, exist_ok=True)
    seen = set()
    for bank in banks:
        if bank.bank_id in seen:
            continue
        seen.add(bank.bank_id)
        export_profiles_csv(bank, os.path.join(pdir, f"bank_{bank.bank_id}.csv"))


def _manifest_extra(cfg, report):
    man = report.manifest()
    man["config"] = cfg.to_dict()
    man["config_hash"] = cfg.config_hash
    man["library_version"] = __version__
    return man


def _lp_check(cfg, args):
    grid = make_grid(cfg.grid)
    bank = make_bank(grid, cfg.bank)
    tol = cfg.params["tolerance"]
    row = {"J": bank.J, "length": grid.length, "period": grid.period,
           "n_scales": len(bank.j_values), "j_min": min(bank.j_values),
           "j_max": max(bank.j_values), "covered_band": bank.covered_band,
           "nyquist": grid.nyquist, "lp_residual": bank.lp_residual}
    report = ExperimentReport("lp-check", list(row), [row],
                              {"bank_id": bank.bank_id, "profile": bank.profile.params()},
                              {"lp_residual": bank.lp_residual, "tolerance": tol},
                              banks=[bank])
    print(f"lp_residual = {bank.lp_residual:.3e}")
    if bank.lp_residual >= tol:
        raise NumericalFailure(f"lp_residual {bank.lp_residual:.3e} >= tolerance {tol:g}")
    return report, True


def _scatter(cfg, args):
    grid = make_grid(cfg.grid)
    bank = make_bank(grid, cfg.bank)
    f = make_signal(cfg.signal, grid)
    S = scatter(f, bank, cfg.bank["M"], path_cap=cfg.bank["path_cap"],
                frequency_decreasing=cfg.params["frequency_decreasing"])
    norms = S.path_norms()
    rows = [{"path": p.label(), "depth": p.depth, "l2_norm": float(v)}
            for p, v in zip(S.paths, norms)]
    save_coefficients(S, os.path.join(cfg.output, "coefficients"))
    summary = {"paths": len(S.paths), "norm": S.norm(),
               "layer_u_norms": S.layer_u_norms.tolist(), "tail": S.tail,
               "uncovered_energy": uncovered_energy(f, bank)}
    print(f"{len(S.paths)} paths, ||S f|| = {S.norm():.6g}, tail = {S.tail:.3e}")
    return ExperimentReport("scatter", ["path", "depth", "l2_norm"], rows,
                            {"bank_id": bank.bank_id, "lp_residual": bank.lp_residual},
                            summary, banks=[bank]), True


def _deform(cfg, args):
    grid = make_grid(cfg.grid)
    f = make_signal(cfg.signal, grid)
    tau = make_deformation(cfg.deformation, grid)
    Lf = apply_deformation(f, tau, allow_unusable=cfg.params["allow_unusable"])
    alphas = tuple(cfg.params["alphas"])
    m = tau.metrics(alphas)
    J = cfg.bank["J"]
    rows = [{"x": x, "f": a, "deformed": b, "tau": t, "dtau": d}
            for x, a, b, t, d in zip(grid.points, f.samples, Lf.samples, tau.tau, tau.dtau)]
    summary = {"sup_tau": m.sup_tau, "sup_dtau": m.sup_dtau, "delta_tau": m.delta_tau,
               "sup_d2tau": m.sup_d2tau, "holder_dtau": m.holder_dtau,
               "usable": tau.usable, "K2": k2_functional(m, J),
               "K1alpha": {a: k1alpha_functional(m, J, a) for a in alphas}}
    print(f"sup|tau| = {m.sup_tau:.6g}, sup|tau'| = {m.sup_dtau:.6g}")
    return ExperimentReport("deform", ["x", "f", "deformed", "tau", "dtau"], rows,
                            {"deformation": tau.source}, summary), False


def _commutator(cfg, args):
    grid = make_grid(cfg.grid)
    bank = make_bank(grid, cfg.bank)
    p = cfg.params
    descs = cfg.deformation if isinstance(cfg.deformation, list) else [cfg.deformation]
    rows = []
    for i, desc in enumerate(descs):
        base = make_deformation(desc, grid, f"deformation.{i}")
        for eps in p["eps_list"]:
            tau = base.scaled(eps)
            defect = adjoint_defect(commutator_handle(tau, bank), seed=cfg.seed)
            for a in p["alphas"]:
                ratio, est, bound = commutator_bound_ratio(
                    tau, bank, a, variant=p["variant"], method=p["method"], tol=p["tol"],
                    max_iter=p["max_iter"], seed=cfg.seed)
                rows.append({"deformation": describe(desc), "eps": eps, "alpha": a,
                             "norm": est.value, "iterations": est.iterations,
                             "residual": est.residual, "method": est.method,
                             "K1alpha": bound, "ratio": ratio, "adjoint_defect": defect})
                print(f"{describe(desc)} eps={eps} alpha={a}: norm={est.value:.6g} "
                      f"ratio={ratio:.6g}")
    cols = ["deformation", "eps", "alpha", "norm", "iterations", "residual", "method",
            "K1alpha", "ratio", "adjoint_defect"]
    return ExperimentReport("commutator", cols, rows,
                            {"bank_id": bank.bank_id, "lp_residual": bank.lp_residual},
                            {"max_ratio": max((r["ratio"] for r in rows), default=0.0)},
                            banks=[bank]), True


def _experiment(cfg, args):
    report = RUNNERS[cfg.experiment](cfg, threads=args.threads)
    print(json.dumps(report.summary, indent=2, sort_keys=True, default=str))
    return report, args.profiles


_TOOLS = {"lp-check": _lp_check, "scatter": _scatter, "deform": _deform,
          "commutator": _commutator}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _resolve(args)
        if args.dry_run:
            print(json.dumps(cfg.to_dict(), indent=2, sort_keys=True))
            return 0
        report, profiles = _TOOLS.get(args.command, _experiment)(cfg, args)
        report.write(cfg.output)
        with open(os.path.join(cfg.output, "manifest.json"), "w", encoding="utf-8") as fh:
            json.dump(_manifest_extra(cfg, report), fh, indent=2, sort_keys=True,
                      default=_json_default)
            fh.write("\n")
        if profiles:
            _write_profiles(report.banks, cfg.output)
        log.info("wrote %s", cfg.output)
        return 0
    except NumericalFailure as exc:
        row = getattr(exc, "row", None)
        where = f" (row {row})" if row is not None else ""
        print(f"numerical failure{where}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except ScatStabError as exc:
        print(f"configuration error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return str(obj)


if __name__ == "__main__":
    sys.exit(main())
