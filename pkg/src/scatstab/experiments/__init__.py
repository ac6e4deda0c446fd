"""Reproducible studies of scattering stability under deformations."""

from .bandlimited import run_bandlimited_lipschitz
from .config import (EXPERIMENTS, ExperimentConfig, apply_override, config_from_document,
                     default_config, load_config, make_bank, make_grid)
from .energy import DecayProfile, run_energy_decay
from .families import make_deformation, make_signal
from .instability import run_instability
from .report import ExperimentReport
from .stability import run_stability_sweep
from .translation import run_translation

RUNNERS = {
    "instability": run_instability,
    "stability": run_stability_sweep,
    "translation": run_translation,
    "bandlimited": run_bandlimited_lipschitz,
    "decay": run_energy_decay,
}


def run(cfg, threads=1):
    """Dispatch ``cfg`` to its runner."""
    return RUNNERS[cfg.experiment](cfg, threads=threads)


__all__ = [
    "EXPERIMENTS", "RUNNERS", "run", "ExperimentConfig", "ExperimentReport", "DecayProfile",
    "default_config", "load_config", "config_from_document", "apply_override", "make_grid",
    "make_bank", "make_signal", "make_deformation", "run_instability", "run_stability_sweep",
    "run_translation", "run_bandlimited_lipschitz", "run_energy_decay",
]
