import json

import numpy as np
import pytest

import oracles
from scatstab.exceptions import ConfigError
from scatstab.experiments import ExperimentConfig, run
from scatstab.experiments.config import (apply_override, config_from_document,
                                         default_config, load_config, make_bank, make_grid)
from scatstab.experiments.energy import DecayProfile
from scatstab.experiments.families import describe, make_deformation, make_signal
from scatstab.experiments.report import ExperimentReport, format_value, map_rows
from scatstab.exceptions import NumericalFailure
from scatstab.signal import l2_norm

SMALL_INSTABILITY = dict(grid__length=4096, experiment__N_list=[16],
                         experiment__n_list=[0, 1, 2], experiment__audit_max_n=2, bank__M=2)


def test_defaults_validate_for_every_experiment():
    for name in ("instability", "stability", "translation", "bandlimited", "decay",
                 "lp-check", "scatter", "deform", "commutator"):
        cfg = ExperimentConfig.default(name)
        assert cfg.experiment == name
        assert cfg.seed == 0


def test_unknown_keys_are_named():
    with pytest.raises(ConfigError) as info:
        config_from_document({"bank": {"foo": 1}}, "stability")
    assert info.value.key == "bank.foo"
    with pytest.raises(ConfigError) as info:
        apply_override(default_config("stability"), "experiment.nope=3")
    assert info.value.key == "experiment.nope"
    with pytest.raises(ConfigError):
        default_config("nonexistent")


def test_override_parsing_and_lists():
    doc = default_config("stability")
    apply_override(doc, "experiment.eps_list=[0.1, 0.2]")
    apply_override(doc, "deformation.1.seed=9")
    apply_override(doc, 'signal.0.kind="gaussian"')
    apply_override(doc, "signal.0.center=2.5")
    assert doc["experiment"]["eps_list"] == [0.1, 0.2]
    assert doc["deformation"][1]["seed"] == 9
    assert doc["signal"][0]["center"] == 2.5
    with pytest.raises(ConfigError):
        apply_override(doc, "deformation.7.seed=1")
    with pytest.raises(ConfigError):
        apply_override(doc, "no_equals_sign")


def test_validation_errors():
    with pytest.raises(ConfigError) as info:
        ExperimentConfig.default("stability", experiment__alphas=[1.5])
    assert info.value.key == "experiment.alphas"
    with pytest.raises(ConfigError):
        ExperimentConfig.default("stability", experiment__eps_list=[])
    with pytest.raises(ConfigError) as info:
        ExperimentConfig.default("stability", grid__length=1000)
    assert info.value.key == "grid"
    with pytest.raises(ConfigError):
        config_from_document({"experiment": {"name": "decay"}}, "stability")


def test_config_round_trip_and_hash(tmp_path):
    cfg = ExperimentConfig.default("translation", experiment__J_list=[2, 3])
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg.to_dict()))
    again = load_config(path)
    assert again.config_hash == cfg.config_hash
    assert again.params["J_list"] == [2, 3]
    other = ExperimentConfig.default("translation")
    assert other.config_hash != cfg.config_hash
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")


def test_free_sections_replaced_wholesale():
    cfg = config_from_document({"signal": {"kind": "zero"}}, "translation")
    assert cfg.signal == {"kind": "zero"}


def test_families_and_errors():
    grid = make_grid({"period": 32.0, "length": 1024, "origin": -16.0})
    f = make_signal({"kind": "gaussian", "sigma": 1.0}, grid)
    assert l2_norm(f) == pytest.approx(oracles.gaussian_l2(1.0), rel=1e-8)
    assert describe({"kind": "gaussian", "sigma": 1.0}) == "gaussian(sigma=1.0)"
    bl = make_signal({"kind": "bandlimited_random", "R": 4.0, "seed": 1}, grid)
    fcoef = np.abs(np.fft.fft(bl.samples))
    assert l2_norm(bl) == pytest.approx(1.0)
    assert np.max(fcoef[np.abs(grid.omega) > 4.0 + 8.0]) < 1e-6 * np.max(fcoef)
    tau = make_deformation({"kind": "constant", "c": 0.3}, grid)
    assert tau.is_constant
    with pytest.raises(ConfigError) as info:
        make_signal({"kind": "gaussian", "bogus": 1}, grid)
    assert info.value.key == "signal"
    with pytest.raises(ConfigError) as info:
        make_deformation({"kind": "nope"}, grid, "deformation.2")
    assert info.value.key == "deformation.2.kind"


def test_tabulated_families(tmp_path):
    from scatstab.deformation import export_field_csv, smooth_random_field

    grid = make_grid({"period": 32.0, "length": 256, "origin": -16.0})
    tau = smooth_random_field(grid, 0, 1.0, 0.2)
    export_field_csv(tau, tmp_path / "t.csv")
    back = make_deformation({"kind": "tabulated", "path": str(tmp_path / "t.csv")}, grid)
    np.testing.assert_array_equal(back.tau, tau.tau)


def test_report_formatting_and_csv(tmp_path):
    assert format_value(0.1) == "0.10000000000000001"
    assert format_value(True) == "true"
    rep = ExperimentReport("x", ["a", "b"], [{"a": 1, "b": 0.5}], {"k": 1}, {"s": 2.0})
    rep.write(tmp_path / "out")
    lines = (tmp_path / "out" / "report.csv").read_text().splitlines()
    assert lines == ["a,b", "1,0.5"]
    man = json.loads((tmp_path / "out" / "manifest.json").read_text())
    assert man["summary"]["s"] == 2.0
    assert rep.column("b") == [0.5]


def test_map_rows_tags_failures():
    def fail(x):
        if x == 2:
            raise NumericalFailure("boom")
        return x

    assert map_rows(fail, [0, 1], threads=2) == [0, 1]
    with pytest.raises(NumericalFailure) as info:
        map_rows(fail, [0, 1, 2, 3], threads=2)
    assert info.value.row == 2


def test_decay_profile_values():
    for a, r in ((2.0, 1.0), (1.5, 0.3), (3.0, 7.0)):
        prof = DecayProfile(a, r)
        for m in range(5):
            assert abs(prof(r * a ** m, m) - (1 - np.exp(-2))) < 1e-12
            assert prof(0.0, m) == 0.0
            assert prof(1e6, m) == pytest.approx(1.0)
            assert prof(0.7, m) == pytest.approx(oracles.decay_profile(0.7, m, a, r), rel=1e-13)
    with pytest.raises(ValueError):
        DecayProfile(1.0, 1.0)
    with pytest.raises(ValueError):
        DecayProfile(2.0, 0.0)


def test_instability_small():
    rep = run(ExperimentConfig.default("instability", **SMALL_INSTABILITY))
    assert len(rep.rows) == 3 and all(r["status"] == "ok" for r in rep.rows)
    d = np.array(rep.column("dist_times_N"))
    assert d.max() / d.min() < 2
    assert rep.summary["max_audit_rel_error"] < 0.01
    c = np.array(rep.column("c_alpha_0.5"))
    np.testing.assert_allclose(c[1:] / c[0], 2.0 ** (-np.arange(1, 3) / 2), rtol=0.2)
    assert rep.provenance["max_lp_residual"] < 1e-9


def test_instability_zero_field():
    rep = run(ExperimentConfig.default("instability", deformation={"kind": "zero"},
                                       **SMALL_INSTABILITY))
    assert all(r["dist"] == 0 for r in rep.rows)


def test_instability_rejects_unresolved_oscillation():
    with pytest.raises(ConfigError) as info:
        ExperimentConfig.default("instability", grid__length=1024, experiment__N_list=[64])
        run(ExperimentConfig.default("instability", grid__length=1024,
                                     experiment__N_list=[64]))
    assert info.value.key == "experiment.N_list"


def test_stability_small_rows_and_threads():
    cfg = ExperimentConfig.default("stability", grid__length=1024, experiment__eps_list=[0.1],
                                   experiment__alphas=[0.5])
    a = run(cfg)
    b = run(cfg, threads=3)
    assert len(a.rows) == 6
    assert a.rows == b.rows
    assert np.isfinite(a.summary["max_ratio"])
    assert all(r["sup_dtau"] <= 0.5 + 1e-12 for r in a.rows)


def test_translation_small():
    cfg = ExperimentConfig.default("translation", experiment__J_list=[2, 3, 4])
    rep = run(cfg)
    assert rep.summary["nonincreasing"]
    d = rep.column("dist")
    assert d[0] > d[-1] > 0


def test_bandlimited_doubling_small_R():
    rep = run(ExperimentConfig.default("bandlimited"))
    for entry in rep.summary["scale_ratios_small_R"]:
        assert 2 / 1.5 <= entry["ratio"] <= 2 * 1.5
    assert rep.summary["max_slope"] <= 0.5


def test_decay_zero_signal():
    rep = run(ExperimentConfig.default("decay", signal=[{"kind": "zero"}]))
    assert all(r["layer_norm"] == 0 for r in rep.rows)


def test_reports_reproducible(tmp_path):
    cfg = ExperimentConfig.default("decay", signal=[{"kind": "gaussian", "sigma": 1.0}])
    run(cfg).write(tmp_path / "a")
    run(cfg).write(tmp_path / "b")
    assert (tmp_path / "a" / "report.csv").read_bytes() == \
        (tmp_path / "b" / "report.csv").read_bytes()


def test_make_bank_override():
    grid = make_grid({"period": 64.0, "length": 2048})
    bank = make_bank(grid, {"J": 2, "center": 1.0}, J=5)
    assert bank.J == 5 and bank.lp_residual < 1e-9
