"""scikit-learn style wrapper around :func:`scatstab.scattering.scatter`."""

import numbers

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .filters import MeyerAnalytic, build_filter_bank
from .scattering import DEFAULT_PATH_CAP, enumerate_paths, scatter
from .signal import Grid, Signal
from .validation import check_scalar_in, check_signal_batch

__all__ = ["ScatteringTransform"]


class ScatteringTransform(TransformerMixin, BaseEstimator):
    """Windowed scattering features of equal-length real signals.

    Parameters
    ----------
    J : int
        Window scale exponent.
    M : int
        Maximum path depth.
    spacing : float
        Sample spacing shared by all rows of ``X``.
    origin : float
        Position of the first sample.
    center : float
        Centre frequency of the Meyer wavelet.
    output : {"norms", "spectral"}
        ``"norms"`` gives one ``||S_J[p] f||`` per path.  ``"spectral"``
        gives the real and imaginary parts of every stored low-pass bin,
        scaled so that Euclidean distances between rows equal scattering
        distances.
    frequency_decreasing : bool
        Restrict to frequency-decreasing paths.
    path_cap : int

    Attributes
    ----------
    grid_ : Grid
    bank_ : FilterBank
    paths_ : list of Path
    n_features_in_ : int
    lp_residual_ : float
    """

    def __init__(self, J=3, M=2, spacing=1.0, origin=0.0, center=1.0, output="norms",
                 frequency_decreasing=False, path_cap=DEFAULT_PATH_CAP):
        self.J = J
        self.M = M
        self.spacing = spacing
        self.origin = origin
        self.center = center
        self.output = output
        self.frequency_decreasing = frequency_decreasing
        self.path_cap = path_cap

    def _check_params(self):
        if not isinstance(self.J, numbers.Integral):
            raise ValueError(f"J must be an integer, got {self.J!r}")
        if not isinstance(self.M, numbers.Integral) or self.M < 0:
            raise ValueError(f"M must be a nonnegative integer, got {self.M!r}")
        if not self.spacing > 0:
            raise ValueError(f"spacing must be positive, got {self.spacing!r}")
        check_scalar_in(self.output, "output", {"norms", "spectral"})

    def fit(self, X, y=None):
        self._check_params()
        X = check_signal_batch(X)
        self.grid_ = Grid(self.origin, self.spacing, X.shape[1])
        self.bank_ = build_filter_bank(MeyerAnalytic(self.center), self.J, self.grid_)
        self.paths_ = enumerate_paths(self.bank_, self.M, self.frequency_decreasing)
        if len(self.paths_) > self.path_cap:
            raise ValueError(f"{len(self.paths_)} paths exceed path_cap={self.path_cap}")
        self.n_features_in_ = X.shape[1]
        self.lp_residual_ = self.bank_.lp_residual
        return self

    def _features(self, row):
        S = scatter(Signal(self.grid_, row), self.bank_, self.M, path_cap=self.path_cap,
                    frequency_decreasing=self.frequency_decreasing)
        if self.output == "norms":
            return S.path_norms()
        b = S.bins.ravel() / np.sqrt(self.grid_.period)
        return np.concatenate([b.real, b.imag])

    def transform(self, X):
        check_is_fitted(self, "bank_")
        X = check_signal_batch(X, self.n_features_in_)
        return np.vstack([self._features(row) for row in X])

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "bank_")
        labels = [f"S[{p.label()}]" for p in self.paths_]
        if self.output == "norms":
            return np.array(labels, dtype=object)
        k = self.bank_.lowpass_support.size
        names = [f"{lab}_bin{i}" for lab in labels for i in range(k)]
        return np.array([f"re_{n}" for n in names] + [f"im_{n}" for n in names], dtype=object)
