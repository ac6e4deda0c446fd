"""Analytic dyadic wavelet banks satisfying the Littlewood-Paley identity.

The default family is a Meyer-type analytic wavelet.  With ``u = log2(w / c)``
for a centre frequency ``c`` and a smooth step ``s`` on ``[0, 1]`` with
``s(t) + s(1 - t) = 1``, the bump::

    q(w) = s(u + 1)      for -1 <= u <= 0
         = 1 - s(u)      for  0 <= u <= 1

satisfies ``sum_j q(2**-j w) = 1`` on ``w > 0``.  Setting ``|psi^|^2 = 2 q`` on
the positive axis and ``phi^(xi)^2 = sum_{j <= 0} q(2**-j xi)`` makes::

    phi^(2^J w)^2 + 1/2 sum_{j > -J} [psi^(2^-j w)^2 + psi^(-2^-j w)^2] = 1

hold exactly, up to the top scale allowed by the grid Nyquist frequency.
"""

import csv
import hashlib
import json
from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import GridMismatch, InvalidProfile, NyquistViolation, UnknownScale
from .signal import Grid, Signal, l2_norm

__all__ = [
    "smooth_step",
    "MeyerAnalytic",
    "TabulatedProfile",
    "ImportedProfile",
    "FilterBank",
    "WaveletCoefficients",
    "build_filter_bank",
    "littlewood_paley_residual",
    "frame_sum",
    "wavelet_transform",
    "uncovered_energy",
    "export_profiles_csv",
    "import_profiles_csv",
]


def smooth_step(t):
    """C-infinity step from 0 (t <= 0) to 1 (t >= 1) with ``s(t) + s(1 - t) = 1``."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    out = np.empty_like(t)
    inner = (t > 0) & (t < 1)
    out[t <= 0] = 0.0
    out[t >= 1] = 1.0
    ti = t[inner]
    a = np.exp(-1.0 / ti)
    b = np.exp(-1.0 / (1.0 - ti))
    out[inner] = a / (a + b)
    return out


@dataclass(frozen=True)
class MeyerAnalytic:
    """Analytic Meyer-type wavelet with two-octave support ``[c/2, 2c]``."""

    center: float = 1.0

    family = "MeyerAnalytic"

    def __post_init__(self):
        if not self.center > 0:
            raise InvalidProfile("center frequency must be positive")

    @property
    def support(self):
        return (self.center / 2.0, 2.0 * self.center)

    def partition(self, w):
        """The bump ``q(w)``; zero for ``w <= 0``."""
        w = np.asarray(w, dtype=float)
        out = np.zeros_like(w)
        pos = w > 0
        u = np.log2(w[pos] / self.center)
        rising = (u >= -1) & (u <= 0)
        falling = (u > 0) & (u <= 1)
        vals = np.zeros_like(u)
        vals[rising] = smooth_step(u[rising] + 1.0)
        vals[falling] = 1.0 - smooth_step(u[falling])
        out[pos] = vals
        return out

    def psi_hat(self, w):
        return np.sqrt(2.0 * self.partition(w))

    def phi_hat_squared(self, xi):
        """``sum_{j <= 0} q(2**-j xi)`` in closed form; equals 1 at ``xi = 0``."""
        a = np.abs(np.asarray(xi, dtype=float))
        out = np.ones_like(a)
        nz = a > self.center
        u = np.log2(a[nz] / self.center)
        out[nz] = np.where(u >= 1, 0.0, 1.0 - smooth_step(u))
        return out

    def params(self):
        return {"family": self.family, "center": self.center}


@dataclass(frozen=True, eq=False)
class TabulatedProfile:
    """Wavelet given by samples of ``|psi^|`` on positive frequencies.

    Values are linearly interpolated and taken as zero outside the table.
    The low-pass is fitted to the residual of the frame sum, so the bank is
    only as exact as the table allows.
    """

    omega: np.ndarray
    values: np.ndarray

    family = "custom-tabulated"

    def __post_init__(self):
        w = np.asarray(self.omega, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if w.ndim != 1 or w.shape != v.shape or w.size < 2:
            raise InvalidProfile("omega and values must be matching 1-D tables")
        if np.any(np.diff(w) <= 0):
            raise InvalidProfile("omega must be strictly increasing")
        if w[0] <= 0:
            raise InvalidProfile("support must lie in (0, inf)")
        if np.any(v < 0):
            raise InvalidProfile("stored |psi^| must be nonnegative")
        object.__setattr__(self, "omega", w)
        object.__setattr__(self, "values", v)

    @property
    def support(self):
        nz = np.nonzero(self.values)[0]
        if nz.size == 0:
            raise InvalidProfile("profile is identically zero")
        return (float(self.omega[max(nz[0] - 1, 0)]),
                float(self.omega[min(nz[-1] + 1, self.omega.size - 1)]))

    def psi_hat(self, w):
        w = np.asarray(w, dtype=float)
        return np.interp(w, self.omega, self.values, left=0.0, right=0.0)

    def params(self):
        return {"family": self.family,
                "omega": self.omega.tolist(), "values": self.values.tolist()}


@dataclass(frozen=True, eq=False)
class FilterBank:
    """Sampled low-pass and wavelet profiles on a grid (FFT order).

    ``psi_hats[i]`` samples ``psi^(2**-j w)`` for ``j = j_values[i]``;
    ``phi_hat`` samples ``phi^(2**J w)``.
    """

    J: int
    j_values: tuple
    psi_hats: np.ndarray = field(repr=False)
    phi_hat: np.ndarray = field(repr=False)
    grid: Grid
    profile: object = field(repr=False)
    covered_band: float = 0.0
    lp_residual: float = field(default=float("nan"))

    def __post_init__(self):
        psi = np.array(self.psi_hats, dtype=float).reshape(len(self.j_values), self.grid.length)
        phi = np.array(self.phi_hat, dtype=float)
        psi.setflags(write=False)
        phi.setflags(write=False)
        object.__setattr__(self, "psi_hats", psi)
        object.__setattr__(self, "phi_hat", phi)
        object.__setattr__(self, "j_values", tuple(int(j) for j in self.j_values))
        if np.isnan(self.lp_residual):
            object.__setattr__(self, "lp_residual", littlewood_paley_residual(self))

    def index_of(self, j):
        try:
            return self.j_values.index(int(j))
        except ValueError:
            raise UnknownScale(f"scale {j} not in bank {self.j_values}") from None

    def psi(self, j):
        return self.psi_hats[self.index_of(j)]

    def without_scale(self, j):
        """Copy with one wavelet removed (residual recomputed)."""
        i = self.index_of(j)
        keep = [k for k in range(len(self.j_values)) if k != i]
        return replace(self, j_values=tuple(self.j_values[k] for k in keep),
                       psi_hats=self.psi_hats[keep], lp_residual=float("nan"))

    def with_profiles(self, psi_hats=None, phi_hat=None):
        """Copy with replaced sampled profiles (residual recomputed)."""
        return replace(self,
                       psi_hats=self.psi_hats if psi_hats is None else psi_hats,
                       phi_hat=self.phi_hat if phi_hat is None else phi_hat,
                       lp_residual=float("nan"))

    @property
    def bank_id(self):
        payload = json.dumps({"profile": self.profile.params(), "J": self.J,
                              "j_values": list(self.j_values),
                              "grid": self.grid.to_dict()}, sort_keys=True)
        return hashlib.sha1(payload.encode()).hexdigest()[:16]

    @property
    def lowpass_support(self):
        """FFT-order indices where ``phi_hat`` is nonzero."""
        return np.nonzero(self.phi_hat)[0]


@dataclass(frozen=True, eq=False)
class WaveletCoefficients:
    """Output of :func:`wavelet_transform`: ``a = A_J f`` and ``w[j] = f * psi_j``."""

    a: Signal
    w: dict

    def energy(self):
        return l2_norm(self.a) ** 2 + sum(l2_norm(s) ** 2 for s in self.w.values())


def _max_scale(profile, grid):
    hi = profile.support[1]
    return int(np.floor(np.log2(grid.nyquist / hi) + 1e-12))


def build_filter_bank(profile, J, grid, j_max=None, prune_empty=True):
    """Sample a wavelet family on ``grid`` for scales ``-J < j <= j_max``.

    Parameters
    ----------
    profile : MeyerAnalytic or TabulatedProfile
    J : int
        Window scale exponent; the low-pass averages at scale ``2**J``.
    grid : Grid
    j_max : int, optional
        Top scale; defaults to the largest ``j`` with ``2**j * w_hi`` at or
        below the Nyquist frequency.
    prune_empty : bool
        Drop scales whose sampled profile vanishes at every grid frequency
        (they cannot contribute to any computation on this grid).

    Raises
    ------
    NyquistViolation
        If ``j_max`` puts wavelet support above the Nyquist frequency.
    InvalidProfile
        If the profile has support outside ``(0, inf)``.
    """
    lo, hi = profile.support
    if not 0 < lo < hi:
        raise InvalidProfile(f"support {profile.support} must satisfy 0 < lo < hi")
    top = _max_scale(profile, grid)
    if j_max is None:
        j_max = top
    elif j_max > top:
        raise NyquistViolation(
            f"j_max={j_max} puts support up to {2.0 ** j_max * hi:.6g} "
            f"above Nyquist {grid.nyquist:.6g} (largest allowed j_max is {top})")
    w = grid.omega
    js, rows = [], []
    for j in range(-J + 1, j_max + 1):
        row = profile.psi_hat(w * 2.0 ** -j)
        if prune_empty and not np.any(row):
            continue
        js.append(j)
        rows.append(row)
    psi = np.array(rows).reshape(len(js), grid.length)

    if isinstance(profile, MeyerAnalytic):
        phi = np.sqrt(profile.phi_hat_squared(w * 2.0 ** J))
        covered = 2.0 ** j_max * profile.center
    else:
        # Fit the low-pass below the lowest wavelet octave to the frame residual.
        frame = 0.5 * np.sum(psi ** 2 + _reflect(psi) ** 2, axis=0)
        low = np.abs(w) <= 2.0 ** (-J + 1) * hi
        phi = np.where(low, np.sqrt(np.clip(1.0 - frame, 0.0, None)), 0.0)
        phi[0] = 1.0
        covered = 2.0 ** j_max * lo
    return FilterBank(J=J, j_values=tuple(js), psi_hats=psi, phi_hat=phi,
                      grid=grid, profile=profile, covered_band=float(covered))


def _reflect(rows):
    """Evaluate FFT-order rows at ``-w`` (the unpaired Nyquist bin maps to itself)."""
    return np.roll(rows[..., ::-1], 1, axis=-1)


def frame_sum(bank):
    """``phi^2 + 1/2 sum_j [psi^(w)^2 + psi^(-w)^2]`` at every grid frequency."""
    psi = bank.psi_hats
    return bank.phi_hat ** 2 + 0.5 * np.sum(psi ** 2 + _reflect(psi) ** 2, axis=0)


def littlewood_paley_residual(bank):
    """Max deviation of the frame sum from 1 over ``|w| <= bank.covered_band``."""
    w = np.abs(bank.grid.omega)
    band = w <= bank.covered_band * (1 + 1e-12)
    return float(np.max(np.abs(frame_sum(bank)[band] - 1.0)))


def uncovered_energy(f, bank):
    """Energy of ``f`` missed by the frame, ``(1/P) sum |F|^2 (1 - frame_sum)``."""
    F = f.grid.spacing * np.fft.fft(f.samples)
    return float(np.sum(np.abs(F) ** 2 * (1.0 - frame_sum(bank))) / f.grid.period)


def wavelet_transform(f, bank):
    """Low-pass and wavelet channels of ``f`` by spectral multiplication."""
    if f.grid != bank.grid:
        raise GridMismatch(f"signal grid {f.grid} differs from bank grid {bank.grid}")
    F = np.fft.fft(f.samples)
    a = np.fft.ifft(F * bank.phi_hat)
    W = np.fft.ifft(F[None, :] * bank.psi_hats, axis=1)
    a = Signal(f.grid, a.real if f.is_real else a)
    return WaveletCoefficients(a=a, w={j: Signal(f.grid, W[i])
                                       for i, j in enumerate(bank.j_values)})


def export_profiles_csv(bank, path):
    """Write ``omega, psi_hat_<j>..., phi_hat`` rows in ascending frequency."""
    order = np.argsort(bank.grid.omega, kind="stable")
    header = ["omega"] + [f"psi_hat_{j}" for j in bank.j_values] + ["phi_hat"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for k in order:
            row = [bank.grid.omega[k], *bank.psi_hats[:, k], bank.phi_hat[k]]
            writer.writerow([f"{v:.17g}" for v in row])


@dataclass(frozen=True)
class ImportedProfile:
    """Provenance record for a bank read back from a profile table."""

    source: str

    family = "imported"

    def params(self):
        return {"family": self.family, "source": self.source}


def _inferred_band(frame, grid, tol):
    """Largest ``|w|`` such that the frame sum is within ``tol`` of 1 on ``[0, |w|]``."""
    w = np.abs(grid.omega)
    order = np.argsort(w, kind="stable")
    bad = np.abs(frame[order] - 1.0) > tol
    if not bad.any():
        return float(w.max())
    first = int(np.argmax(bad))
    return float(w[order][first - 1]) if first > 0 else 0.0


def import_profiles_csv(path, grid, J, covered_band=None, tol=1e-9):
    """Read a profile CSV written by :func:`export_profiles_csv` back into a bank.

    ``covered_band`` defaults to the largest frequency up to which the
    imported frame sum is within ``tol`` of 1.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = np.array([[float(v) for v in row] for row in reader])
    if data.shape[0] != grid.length:
        raise GridMismatch(f"profile table has {data.shape[0]} rows, grid has {grid.length}")
    js = [int(h[len("psi_hat_"):]) for h in header[1:-1]]
    # Map ascending-frequency rows back to FFT order.
    order = np.argsort(grid.omega, kind="stable")
    if not np.allclose(data[:, 0], grid.omega[order], rtol=1e-12, atol=1e-12):
        raise GridMismatch("profile frequencies do not match the grid")
    psi = np.empty((len(js), grid.length))
    phi = np.empty(grid.length)
    psi[:, order] = data[:, 1:-1].T
    phi[order] = data[:, -1]
    if np.any(psi[:, grid.omega <= 0] != 0):
        raise InvalidProfile("imported wavelets must vanish for w <= 0")
    if covered_band is None:
        frame = phi ** 2 + 0.5 * np.sum(psi ** 2 + _reflect(psi) ** 2, axis=0)
        covered_band = _inferred_band(frame, grid, tol)
    return FilterBank(J=J, j_values=tuple(js), psi_hats=psi, phi_hat=phi, grid=grid,
                      profile=ImportedProfile(str(path)), covered_band=float(covered_band))
