"""Windowed scattering transform: cascaded wavelet-modulus propagators.

``U[(j1, ..., jm)] f = |...||f * psi_j1| * psi_j2| ... * psi_jm|`` and
``S_J[p] f = U[p] f * phi_{2^J}``.  The cascade is traversed depth-first in
lexicographic path order, which coincides with the canonical (depth, then
lexicographic) order inside each layer, so every per-layer reduction is
accumulated in a fixed order.

Each ``S_J[p] f`` is band-limited by the low-pass, so coefficients are kept
as their Fourier bins on the low-pass support and expanded to a
:class:`~scatstab.signal.Signal` on access.
"""

import csv
import json
import os
from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DepthBudgetExceeded, GridMismatch, StructureMismatch
from .signal import Signal, Spectrum, inverse_fourier, l2_norm

__all__ = [
    "Path",
    "ScatteringCoefficients",
    "propagate_one",
    "scatter",
    "scatter_path",
    "scattering_distance",
    "u_norm_mixed",
    "u_norm",
    "coefficient_sum",
    "check_separation_additivity",
    "check_dilation_covariance",
    "shift_path",
    "enumerate_paths",
    "path_count",
    "save_coefficients",
    "load_manifest",
    "DEFAULT_PATH_CAP",
]

DEFAULT_PATH_CAP = 50_000


class Path(tuple):
    """Sequence of scale indices ``(j1, ..., jm)``; ``Path()`` is the empty path."""

    def __new__(cls, scales=()):
        return super().__new__(cls, (int(j) for j in scales))

    @property
    def depth(self):
        return len(self)

    def sort_key(self):
        return (len(self), tuple(self))

    def label(self):
        return ";".join(str(j) for j in self) if self else "()"

    def __repr__(self):
        return f"Path({tuple(self)!r})"


def shift_path(p, l):
    """Add ``l`` to every scale of ``p``."""
    return Path(j + l for j in p)


def _children_scales(bank, parent, frequency_decreasing, slack):
    if not frequency_decreasing or not parent:
        return bank.j_values
    return tuple(j for j in bank.j_values if j <= parent[-1] + slack)


def enumerate_paths(bank, M, frequency_decreasing=False, slack=1):
    """All paths of depth ``<= M`` in canonical order."""
    out = [Path()]
    layer = [Path()]
    for _ in range(M):
        layer = [Path(p + (j,)) for p in layer
                 for j in _children_scales(bank, p, frequency_decreasing, slack)]
        out.extend(layer)
    return out


def path_count(bank, M, frequency_decreasing=False, slack=1):
    if not frequency_decreasing:
        n = len(bank.j_values)
        return sum(n ** m for m in range(M + 1))
    return len(enumerate_paths(bank, M, True, slack))


class _CoefficientView(Mapping):
    def __init__(self, owner):
        self._owner = owner

    def __getitem__(self, p):
        return self._owner.coefficient(p)

    def __iter__(self):
        return iter(self._owner.paths)

    def __len__(self):
        return len(self._owner.paths)


@dataclass(frozen=True, eq=False)
class ScatteringCoefficients:
    """Result of :func:`scatter`.

    Attributes
    ----------
    J, max_depth : int
    paths : list of Path
        Canonical order.
    bins : ndarray, shape (n_paths, n_support)
        Fourier bins of each ``S_J[p] f`` on ``support`` (continuous normalisation).
    support : ndarray of int
        FFT-order indices where the low-pass is nonzero.
    layer_u_norms : ndarray, shape (M + 2,)
        ``||U[Lambda^m] f||`` for ``m = 0..M+1``; the last entry is the truncation tail.
    """

    J: int
    max_depth: int
    paths: list = field(repr=False)
    bins: np.ndarray = field(repr=False)
    support: np.ndarray = field(repr=False)
    layer_u_norms: np.ndarray
    grid: object = field(repr=False)
    bank_id: str = ""
    real: bool = True

    def __post_init__(self):
        for name in ("bins", "support", "layer_u_norms"):
            getattr(self, name).setflags(write=False)
        object.__setattr__(self, "_index", {p: i for i, p in enumerate(self.paths)})

    @property
    def coeffs(self):
        """Mapping ``Path -> Signal`` of ``S_J[p] f`` (expanded lazily)."""
        return _CoefficientView(self)

    @property
    def tail(self):
        return float(self.layer_u_norms[-1])

    def index(self, p):
        try:
            return self._index[Path(p)]
        except KeyError:
            raise StructureMismatch(f"path {tuple(p)} not present") from None

    def coefficient(self, p):
        full = np.zeros(self.grid.length, dtype=complex)
        full[self.support] = self.bins[self.index(p)]
        return inverse_fourier(Spectrum(self.grid, full), real=self.real)

    def path_norms(self):
        """``||S_J[p] f||`` per path in canonical order."""
        return np.sqrt(np.sum(np.abs(self.bins) ** 2, axis=1) / self.grid.period)

    def layer_s_norms(self):
        """``||S_J[Lambda^m] f||`` for ``m = 0..M``."""
        sq = np.sum(np.abs(self.bins) ** 2, axis=1) / self.grid.period
        depth = np.array([len(p) for p in self.paths])
        return np.sqrt(np.array([sq[depth == m].sum() for m in range(self.max_depth + 1)]))

    def norm(self):
        """``||S_J[P_J] f||`` over the stored paths."""
        return float(np.sqrt(np.sum(np.abs(self.bins) ** 2) / self.grid.period))

    def structure(self):
        return (self.J, self.max_depth, self.bank_id, tuple(self.paths))

    def __add__(self, other):
        return coefficient_sum(self, other)


def _check_grid(f, bank):
    if f.grid != bank.grid:
        raise GridMismatch(f"signal grid {f.grid} differs from bank grid {bank.grid}")


def propagate_one(f, j, bank):
    """One-step propagator ``U[2^j] f = |f * psi_j|``."""
    _check_grid(f, bank)
    row = bank.psi(j)
    return Signal(f.grid, np.abs(np.fft.ifft(np.fft.fft(f.samples) * row)))


def scatter_path(f, bank, p):
    """``S_J[p] f`` for a single path, as a Signal."""
    _check_grid(f, bank)
    x = f.samples
    for j in p:
        x = np.abs(np.fft.ifft(np.fft.fft(x) * bank.psi(j)))
    out = np.fft.ifft(np.fft.fft(x) * bank.phi_hat)
    return Signal(f.grid, out.real if np.isrealobj(x) else out)


def scatter(f, bank, M=3, path_cap=DEFAULT_PATH_CAP, frequency_decreasing=False,
            slack=1):
    """Windowed scattering coefficients of ``f`` over all paths of depth ``<= M``.

    Parameters
    ----------
    f : Signal
        Must live on ``bank.grid``.
    bank : FilterBank
    M : int
        Maximum path depth.
    path_cap : int
        Raise :class:`DepthBudgetExceeded` when more paths would be visited.
    frequency_decreasing : bool
        Keep only children with ``j_next <= j_prev + slack``.  Off by default;
        the full path set is needed for the energy identities.

    Returns
    -------
    ScatteringCoefficients
    """
    _check_grid(f, bank)
    if M < 0:
        raise ValueError("M must be nonnegative")
    count = path_count(bank, M, frequency_decreasing, slack)
    if count > path_cap:
        raise DepthBudgetExceeded(count, path_cap)

    grid = bank.grid
    h = grid.spacing
    support = bank.lowpass_support
    phase = h * np.exp(-1j * grid.omega[support] * grid.origin)
    phi_s = bank.phi_hat[support]
    psi = bank.psi_hats
    psi_sq = psi ** 2

    paths, bins = [], []
    layer_sq = np.zeros(M + 2)

    def visit(parents, X, m):
        # X holds sibling nodes of depth m, one signal per row.
        F = np.fft.fft(X, axis=1)
        layer_sq[m] += h * np.sum(np.abs(X) ** 2)
        for i, p in enumerate(parents):
            paths.append(p)
            bins.append(F[i, support] * phi_s * phase)
        if m == M:
            layer_sq[M + 1] += (h / grid.length) * np.sum(
                (np.abs(F) ** 2) @ psi_sq.T)
            return
        for i, p in enumerate(parents):
            scales = _children_scales(bank, p, frequency_decreasing, slack)
            if not scales:
                continue
            rows = psi if len(scales) == len(bank.j_values) else psi[
                [bank.index_of(j) for j in scales]]
            children = np.abs(np.fft.ifft(F[i][None, :] * rows, axis=1))
            visit([Path(p + (j,)) for j in scales], children, m + 1)

    visit([Path()], np.asarray(f.samples)[None, :], 0)
    order = sorted(range(len(paths)), key=lambda i: paths[i].sort_key())
    paths = [paths[i] for i in order]
    bins = np.array([bins[i] for i in order]).reshape(len(paths), support.size)
    return ScatteringCoefficients(
        J=bank.J, max_depth=M, paths=paths, bins=bins, support=support.copy(),
        layer_u_norms=np.sqrt(layer_sq), grid=grid, bank_id=bank.bank_id,
        real=f.is_real)


def _check_structure(a, b):
    if a.structure() != b.structure() or a.grid != b.grid:
        raise StructureMismatch(
            f"coefficient sets differ (J={a.J}/{b.J}, M={a.max_depth}/{b.max_depth}, "
            f"bank={a.bank_id}/{b.bank_id})")


def scattering_distance(a, b):
    """``sqrt(sum_p ||S_J[p] f - S_J[p] h||^2)`` over the shared paths."""
    _check_structure(a, b)
    per_path = np.sum(np.abs(a.bins - b.bins) ** 2, axis=1)
    return float(np.sqrt(np.sum(per_path) / a.grid.period))


def coefficient_sum(a, b):
    """Path-wise sum of two coefficient sets with the same structure."""
    _check_structure(a, b)
    return ScatteringCoefficients(
        J=a.J, max_depth=a.max_depth, paths=list(a.paths), bins=a.bins + b.bins,
        support=a.support.copy(), layer_u_norms=np.full(a.max_depth + 2, np.nan),
        grid=a.grid, bank_id=a.bank_id, real=a.real and b.real)


def u_norm_mixed(f, bank, M=3, coefficients=None, **kwargs):
    """Truncated mixed norm ``sum_{m<=M} ||U[Lambda^m] f||`` and the tail term.

    Returns
    -------
    value : float
    tail : float
        ``||U[Lambda^{M+1}] f||``, a bound on the next omitted term.
    """
    s = coefficients if coefficients is not None else scatter(f, bank, M, **kwargs)
    return float(np.sum(s.layer_u_norms[:M + 1])), float(s.layer_u_norms[M + 1])


def u_norm(f, bank, M=3, coefficients=None, **kwargs):
    """Truncated l2 propagator norm ``(sum_{m<=M} ||U[Lambda^m] f||^2)^(1/2)`` and tail."""
    s = coefficients if coefficients is not None else scatter(f, bank, M, **kwargs)
    return (float(np.sqrt(np.sum(s.layer_u_norms[:M + 1] ** 2))),
            float(s.layer_u_norms[M + 1]))


def check_separation_additivity(f, g, bank, M=3):
    """Distance between ``S(f + g)`` and ``S(f) + S(g)``; zero for wavelet-separated inputs."""
    joint = scatter(f + g, bank, M)
    return scattering_distance(joint, coefficient_sum(scatter(f, bank, M),
                                                      scatter(g, bank, M)))


def check_dilation_covariance(f, bank_J, bank_Jl, p, l):
    """Defect of ``S_J[p](D_l f) = D_l S_{J+l}[p - l] f`` for a single path.

    ``bank_J`` must live on ``f.grid.scaled(l)`` with window ``J`` and
    ``bank_Jl`` on ``f.grid`` with window ``J + l``; ``D_l`` is the
    L2-normalised dilation onto the nested grid.
    """
    from .signal import dilate

    if bank_Jl.J != bank_J.J + l:
        raise StructureMismatch("bank_Jl must have window scale J + l")
    lhs = scatter_path(dilate(f, l), bank_J, Path(p))
    rhs = dilate(scatter_path(f, bank_Jl, shift_path(p, -l)), l)
    if lhs.grid != rhs.grid:
        raise GridMismatch("bank_J is not on the nested grid of f")
    return l2_norm(lhs - rhs)


def save_coefficients(s, directory, extra=None):
    """Write one ``layer_<m>.csv`` per depth plus ``manifest.json``.

    Layer files have columns ``path_id, scales, l2_norm``.
    """
    os.makedirs(directory, exist_ok=True)
    norms = s.path_norms()
    for m in range(s.max_depth + 1):
        with open(os.path.join(directory, f"layer_{m}.csv"), "w", newline="",
                  encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["path_id", "scales", "l2_norm"])
            for i, p in enumerate(s.paths):
                if len(p) == m:
                    writer.writerow([i, p.label(), f"{norms[i]:.17g}"])
    manifest = {
        "J": s.J, "M": s.max_depth, "bank_id": s.bank_id, "grid": s.grid.to_dict(),
        "n_paths": len(s.paths),
        "layer_u_norms": [float(v) for v in s.layer_u_norms],
    }
    if extra:
        manifest.update(extra)
    with open(os.path.join(directory, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    return manifest


def load_manifest(directory):
    with open(os.path.join(directory, "manifest.json"), encoding="utf-8") as fh:
        return json.load(fh)
