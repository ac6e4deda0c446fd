"""Experiment configuration documents: defaults, validation and dotted overrides."""

import copy
import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from ..exceptions import ConfigError
from ..filters import MeyerAnalytic, build_filter_bank
from ..signal import Grid

__all__ = [
    "EXPERIMENTS",
    "ExperimentConfig",
    "default_config",
    "load_config",
    "apply_override",
    "make_grid",
    "make_bank",
]

EXPERIMENTS = ("instability", "stability", "translation", "bandlimited", "decay")

_BANK = {"J": 3, "M": 3, "j_max": None, "center": 1.0, "path_cap": 50_000}

_DEFAULTS = {
    "instability": {
        "grid": {"period": 16 * np.pi, "length": 16384, "origin": -7 * np.pi},
        "bank": {**_BANK, "J": 6},
        "signal": {"kind": "theorem1"},
        "deformation": {"kind": "theorem1", "A": None},
        "experiment": {
            "N_list": [64, 128], "n_list": [0, 1, 2, 3, 4], "J_list": [6],
            "alphas": [0.5], "cutoff_fraction": 0.5, "J_prime": None,
            "beta": 2.5, "audit": True, "audit_max_n": 3,
            "min_samples_per_oscillation": 16,
        },
    },
    "stability": {
        "grid": {"period": 32.0, "length": 2048, "origin": -16.0},
        "bank": {**_BANK, "J": 3},
        "signal": [
            {"kind": "gaussian", "sigma": 1.0},
            {"kind": "modulated_gaussian", "sigma": 2.0, "frequency": 3.0},
        ],
        "deformation": [
            {"kind": "smooth_random", "seed": 0, "bandwidth": 1.0, "amplitude": 1.0},
            {"kind": "smooth_random", "seed": 1, "bandwidth": 1.0, "amplitude": 1.0},
            {"kind": "smooth_random", "seed": 2, "bandwidth": 3.0, "amplitude": 1.0},
        ],
        "experiment": {
            "eps_list": [0.02, 0.05, 0.1, 0.2], "alphas": [0.25, 0.5, 0.75],
            "J_list": [3],
        },
    },
    "translation": {
        "grid": {"period": 4096.0, "length": 8192, "origin": -2048.0},
        "bank": {**_BANK},
        "signal": {"kind": "plateau", "width": 5.0},
        "deformation": {"kind": "zero"},
        "experiment": {"J_list": [2, 3, 4, 5, 6, 7], "shift": None, "shift_fraction": 0.1},
    },
    "bandlimited": {
        "grid": {"period": 32 * np.pi, "length": 4096, "origin": -16 * np.pi},
        "bank": {**_BANK, "J": 0},
        "signal": {"kind": "bandlimited_random", "R": 8.0, "seed": 0,
                   "support": [-15.0, 15.0], "ramp": 3.0},
        "deformation": {"kind": "sawtooth", "slope": 0.25, "tooth": 2.0,
                        "start": -20.0, "teeth": 20, "mollify": 4.0},
        "experiment": {"R_list": [4.0, 8.0, 16.0, 32.0], "seeds": [0, 1, 2],
                       "tau_scales": [1.0, 2.0], "beta": 3.0},
    },
    "decay": {
        "grid": {"period": 64.0, "length": 8192, "origin": -32.0},
        "bank": {**_BANK, "J": 0},
        "signal": [
            {"kind": "gaussian", "sigma": 0.25},
            {"kind": "gaussian", "sigma": 0.5},
            {"kind": "gaussian", "sigma": 1.0},
            {"kind": "gaussian", "sigma": 2.0},
            {"kind": "chirp", "sigma": 2.0, "rate": 1.0},
            {"kind": "theorem1"},
        ],
        "deformation": {"kind": "zero"},
        "experiment": {"beta": 3.0, "profiles": [{"a": 2.0, "r": 1.0}]},
    },
}

# Utility subcommands share the document layout.
_DEFAULTS.update({
    "lp-check": {
        "grid": {"period": 64.0, "length": 8192, "origin": -32.0},
        "bank": {**_BANK, "J": 4},
        "signal": {"kind": "zero"},
        "deformation": {"kind": "zero"},
        "experiment": {"tolerance": 1e-9},
    },
    "scatter": {
        "grid": {"period": 64.0, "length": 4096, "origin": -32.0},
        "bank": {**_BANK, "J": 4},
        "signal": {"kind": "gaussian", "sigma": 1.0},
        "deformation": {"kind": "zero"},
        "experiment": {"frequency_decreasing": False},
    },
    "deform": {
        "grid": {"period": 32.0, "length": 2048, "origin": -16.0},
        "bank": {**_BANK},
        "signal": {"kind": "gaussian", "sigma": 1.0},
        "deformation": {"kind": "smooth_random", "seed": 0, "bandwidth": 1.0,
                        "amplitude": 0.1},
        "experiment": {"alphas": [0.5], "allow_unusable": False},
    },
    "commutator": {
        "grid": {"period": 32.0, "length": 256, "origin": -16.0},
        "bank": {**_BANK, "J": 2},
        "signal": {"kind": "zero"},
        "deformation": [
            {"kind": "smooth_random", "seed": 0, "bandwidth": 2.0, "amplitude": 0.1},
        ],
        "experiment": {"alphas": [0.5], "variant": "log", "method": "power",
                       "tol": 1e-8, "max_iter": 500, "eps_list": [1.0]},
    },
})

# Sections whose contents are family descriptors checked by the family builders.
_FREE_SECTIONS = ("signal", "deformation")


def default_config(name):
    """Fresh default document for experiment or subcommand ``name``."""
    if name not in _DEFAULTS:
        raise ConfigError("experiment.name", f"unknown experiment {name!r}")
    doc = copy.deepcopy(_DEFAULTS[name])
    doc["experiment"] = {"name": name, **doc["experiment"]}
    doc["seed"] = 0
    doc["output"] = None
    return doc


def _merge(base, update, prefix):
    for key, value in update.items():
        path = f"{prefix}.{key}" if prefix else key
        if key not in base:
            raise ConfigError(path, "unknown key")
        if isinstance(base[key], dict) and isinstance(value, dict) and \
                prefix.split(".")[0] not in _FREE_SECTIONS and key not in _FREE_SECTIONS:
            _merge(base[key], value, path)
        else:
            base[key] = value


def _parse_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_override(doc, assignment):
    """Apply ``"dotted.key=value"`` in place; the value is parsed as JSON when possible."""
    if "=" not in assignment:
        raise ConfigError(assignment, "override must look like key=value")
    key, text = assignment.split("=", 1)
    parts = key.strip().split(".")
    node = doc
    for i, part in enumerate(parts):
        last = i == len(parts) - 1
        if isinstance(node, list):
            try:
                idx = int(part)
                node[idx]
            except (ValueError, IndexError):
                raise ConfigError(key, f"no list entry {part!r}") from None
            if last:
                node[idx] = _parse_value(text)
            else:
                node = node[idx]
            continue
        if not isinstance(node, dict):
            raise ConfigError(key, "unknown key")
        free = parts[0] in _FREE_SECTIONS and i > 0
        if part not in node and not (free and last):
            raise ConfigError(key, "unknown key")
        if last:
            node[part] = _parse_value(text)
        else:
            node = node[part]
    return doc


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated configuration of one experiment run.

    ``params`` holds the experiment-specific entries of the
    ``experiment`` section (everything except ``name``).
    """

    experiment: str
    grid: dict
    bank: dict
    signal: object
    deformation: object
    params: dict
    seed: int = 0
    output: str = None
    document: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_dict(cls, doc, experiment=None):
        name = experiment or (doc.get("experiment") or {}).get("name")
        if name is None:
            raise ConfigError("experiment.name", "missing experiment name")
        base = default_config(name)
        user = copy.deepcopy(doc)
        user.setdefault("experiment", {})
        if user["experiment"].get("name", name) != name:
            raise ConfigError("experiment.name",
                              f"config is for {user['experiment']['name']!r}, not {name!r}")
        user["experiment"]["name"] = name
        _merge(base, user, "")
        cfg = cls(
            experiment=name, grid=base["grid"], bank=base["bank"],
            signal=base["signal"], deformation=base["deformation"],
            params={k: v for k, v in base["experiment"].items() if k != "name"},
            seed=base["seed"], output=base["output"], document=base)
        cfg.validate()
        return cfg

    @classmethod
    def default(cls, name, **overrides):
        """Defaults for ``name`` with ``dotted_key=value`` keyword overrides (dots as ``__``)."""
        doc = default_config(name)
        for key, value in overrides.items():
            apply_override(doc, f"{key.replace('__', '.')}={json.dumps(value)}")
        return cls.from_dict(doc)

    def to_dict(self):
        return copy.deepcopy(self.document)

    @property
    def config_hash(self):
        text = json.dumps(self.document, sort_keys=True, default=str)
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def validate(self):
        make_grid(self.grid)
        b = self.bank
        if not isinstance(b["M"], int) or b["M"] < 0:
            raise ConfigError("bank.M", "must be a nonnegative integer")
        for key, value in self.params.items():
            if key.endswith("_list") or key in ("alphas", "seeds", "tau_scales"):
                if not isinstance(value, list) or not value:
                    raise ConfigError(f"experiment.{key}", "must be a nonempty list")
        for a in self.params.get("alphas", []):
            if not 0 < a < 1:
                raise ConfigError("experiment.alphas", f"alpha {a} not in (0, 1)")
        if "beta" in self.params and not self.params["beta"] > 0:
            raise ConfigError("experiment.beta", "must be positive")
        for section in _FREE_SECTIONS:
            entries = getattr(self, section)
            for i, entry in enumerate(entries if isinstance(entries, list) else [entries]):
                if not isinstance(entry, dict) or "kind" not in entry:
                    key = f"{section}.{i}" if isinstance(entries, list) else section
                    raise ConfigError(key, "must be an object with a 'kind'")


def load_config(path, experiment=None, overrides=()):
    """Read a JSON document, apply overrides, merge with defaults and validate."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON in {path}: {exc}") from None
    return config_from_document(doc, experiment, overrides)


def config_from_document(doc, experiment=None, overrides=()):
    name = experiment or (doc.get("experiment") or {}).get("name")
    if name is None:
        raise ConfigError("experiment.name", "missing experiment name")
    full = default_config(name)
    user = copy.deepcopy(doc)
    user.setdefault("experiment", {}).setdefault("name", name)
    _merge(full, user, "")
    for assignment in overrides:
        apply_override(full, assignment)
    return ExperimentConfig.from_dict(full, name)


def make_grid(desc, key="grid"):
    try:
        return Grid.from_period(float(desc["period"]), int(desc["length"]),
                                float(desc.get("origin", 0.0)))
    except KeyError as exc:
        raise ConfigError(f"{key}.{exc.args[0]}", "missing") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(key, str(exc)) from None


def make_bank(grid, desc, J=None):
    """Meyer bank on ``grid`` from a bank section; ``J`` overrides the section."""
    return build_filter_bank(MeyerAnalytic(float(desc.get("center", 1.0))),
                             int(desc["J"] if J is None else J), grid,
                             j_max=desc.get("j_max"))
