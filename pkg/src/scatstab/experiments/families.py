"""Signals and deformation fields addressable by name and parameters."""

import csv

import numpy as np

from ..deformation import (DeformationField, import_field_csv, sawtooth_field,
                           smooth_random_field, theorem1_f, theorem1_tau, window)
from ..exceptions import ConfigError, ScatStabError
from ..signal import Signal, l2_norm

__all__ = ["make_signal", "make_deformation", "describe", "SIGNAL_KINDS", "DEFORMATION_KINDS"]


def _gaussian(grid, sigma, center=0.0, amplitude=1.0):
    return Signal(grid, amplitude * np.exp(-(grid.points - center) ** 2 / (2 * sigma ** 2)))


def _modulated(grid, sigma, frequency, center=0.0):
    x = grid.points - center
    return Signal(grid, np.exp(-x ** 2 / (2 * sigma ** 2)) * np.cos(frequency * x))


def _chirp(grid, sigma, rate, center=0.0):
    x = grid.points - center
    return Signal(grid, np.exp(-x ** 2 / (2 * sigma ** 2)) * np.cos(rate * x ** 2))


def _plateau(grid, width, ramp=None, center=0.0):
    ramp = width / 4 if ramp is None else ramp
    return Signal(grid, window(grid.points - center, -width / 2, width / 2, ramp))


def _bandlimited(grid, R, seed=0, support=None, ramp=None, normalize=True):
    """Windowed random trigonometric polynomial with frequencies ``|w| <= R``.

    The window leaks a little energy beyond ``R``; it is smooth, so the leak
    decays faster than any power.
    """
    rng = np.random.default_rng(seed)
    band = np.abs(grid.omega) <= R
    fcoef = np.zeros(grid.length, dtype=complex)
    fcoef[band] = rng.normal(size=band.sum()) + 1j * rng.normal(size=band.sum())
    x = np.fft.ifft(fcoef).real
    if support is not None:
        a, b = support
        r = ramp if ramp is not None else 0.1 * (b - a)
        x = x * window(grid.points, a + r, b - r, r)
    f = Signal(grid, x)
    n = l2_norm(f)
    return f * (1 / n) if normalize and n > 0 else f


def _tabulated_signal(grid, path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))[1:]
    values = np.array([float(r[1]) for r in rows])
    if values.size != grid.length:
        raise ConfigError("signal.path", f"{values.size} samples, grid has {grid.length}")
    return Signal(grid, values)


SIGNAL_KINDS = {
    "zero": lambda grid: Signal.zeros(grid),
    "gaussian": _gaussian,
    "modulated_gaussian": _modulated,
    "chirp": _chirp,
    "plateau": _plateau,
    "theorem1": lambda grid, left_ramp=1.5, right_ramp=2.5: theorem1_f(grid, left_ramp,
                                                                        right_ramp),
    "bandlimited_random": _bandlimited,
    "tabulated": _tabulated_signal,
}


def _smooth_random(grid, seed, bandwidth, amplitude, support=None, ramp=None):
    return smooth_random_field(grid, seed, bandwidth, amplitude,
                               tuple(support) if support else None, ramp)


DEFORMATION_KINDS = {
    "zero": lambda grid: DeformationField.zero(grid),
    "constant": lambda grid, c: DeformationField.constant(grid, c),
    "theorem1": lambda grid, N=128, A=None: theorem1_tau(int(N), grid, A),
    "smooth_random": _smooth_random,
    "sawtooth": lambda grid, slope, tooth, start, teeth, mollify=4.0: sawtooth_field(
        grid, slope, tooth, start, int(teeth), mollify),
    "tabulated": lambda grid, path: import_field_csv(path, grid),
}


def _build(table, desc, grid, key):
    if not isinstance(desc, dict) or "kind" not in desc:
        raise ConfigError(key, "must be an object with a 'kind'")
    kind = desc["kind"]
    if kind not in table:
        raise ConfigError(f"{key}.kind", f"unknown kind {kind!r}; choose from {sorted(table)}")
    params = {k: v for k, v in desc.items() if k != "kind"}
    try:
        return table[kind](grid, **params)
    except TypeError as exc:
        raise ConfigError(key, f"bad parameters for {kind!r}: {exc}") from None
    except (ValueError, ScatStabError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(key, f"{type(exc).__name__}: {exc}") from None


def make_signal(desc, grid, key="signal"):
    return _build(SIGNAL_KINDS, desc, grid, key)


def make_deformation(desc, grid, key="deformation"):
    return _build(DEFORMATION_KINDS, desc, grid, key)


def describe(desc):
    """Short stable label such as ``gaussian(sigma=1.0)``."""
    params = ",".join(f"{k}={desc[k]}" for k in sorted(desc) if k != "kind")
    return f"{desc['kind']}({params})"
