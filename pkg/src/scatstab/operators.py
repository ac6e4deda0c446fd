"""Matrix-free operator norms, centred on the commutator ``[W_J, L_tau]``."""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .deformation import (_check_usable, _warp_adjoint_rows, _warp_rows,
                          k1alpha_functional)
from .exceptions import GridMismatch, NoConvergence

__all__ = [
    "LinearOperatorHandle",
    "NormEstimate",
    "operator_norm",
    "dense_matrix",
    "adjoint_defect",
    "commutator_handle",
    "commutator_bound_ratio",
    "multiplier_handle",
]


@dataclass(frozen=True)
class LinearOperatorHandle:
    """A linear map given by its action and the action of its adjoint.

    Vectors are flat numpy arrays.  With ``real_input`` the domain is the
    real subspace: inputs are real and ``adjoint_apply`` returns the real
    part of the complex adjoint, so norms are taken over real signals.
    """

    apply: Callable
    adjoint_apply: Callable
    input_dim: int
    output_dim: int
    real_input: bool = False


@dataclass(frozen=True)
class NormEstimate:
    value: float
    iterations: int
    residual: float
    method: str
    converged: bool = True


def _random(rng, shape, real):
    x = rng.normal(size=shape)
    if not real:
        x = x + 1j * rng.normal(size=shape)
    return x


def adjoint_defect(op, probes=10, seed=0):
    """Largest ``|<Op f, g> - <f, Op* g>| / (|f| |g|)`` over random probes."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(probes):
        f = _random(rng, op.input_dim, op.real_input)
        g = _random(rng, op.output_dim, False)
        lhs = np.vdot(g, op.apply(f))
        rhs = np.vdot(op.adjoint_apply(g), f)
        if op.real_input:
            lhs, rhs = lhs.real, rhs.real
        worst = max(worst, abs(lhs - rhs) / (np.linalg.norm(f) * np.linalg.norm(g)))
    return float(worst)


def dense_matrix(op):
    """Assemble the matrix column by column; real-input operators return ``[Re; Im]`` rows."""
    cols = []
    for i in range(op.input_dim):
        e = np.zeros(op.input_dim)
        e[i] = 1.0
        cols.append(np.asarray(op.apply(e if op.real_input else e.astype(complex))))
    mat = np.stack(cols, axis=1)
    if op.real_input:
        mat = np.vstack([mat.real, mat.imag])
    return mat


def operator_norm(op, tol=1e-6, max_iter=500, seed=0, method="power", block=3,
                  atol=1e-13, raise_on_failure=True):
    """Spectral norm estimate of ``op``.

    ``method="power"`` runs subspace iteration on ``Op* Op`` with a small
    seeded block and Rayleigh-Ritz extraction, stopping when the leading
    Ritz value changes by less than ``tol`` relative or the norm estimate
    falls below ``atol`` (rounding-level operators); ``method="dense"``
    assembles the matrix and takes its largest singular value.

    Raises
    ------
    NoConvergence
        After ``max_iter`` iterations; the exception carries the best
        estimate in ``estimate``.  With ``raise_on_failure=False`` that
        estimate is returned with ``converged=False`` instead.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if method == "dense":
        s = np.linalg.svd(dense_matrix(op), compute_uv=False)
        return NormEstimate(float(s[0]) if s.size else 0.0, 1, 0.0, "DenseSVD")
    if method != "power":
        raise ValueError(f"unknown method {method!r}")

    rng = np.random.default_rng(seed)
    k = max(1, min(block, op.input_dim))
    Q, _ = np.linalg.qr(_random(rng, (op.input_dim, k), op.real_input))

    def gram(V):
        return np.stack([op.adjoint_apply(op.apply(V[:, i])) for i in range(V.shape[1])],
                        axis=1)

    prev = None
    lam = 0.0
    resid = np.inf
    for it in range(1, max_iter + 1):
        Z = gram(Q)
        H = Q.conj().T @ Z
        evals, evecs = np.linalg.eigh(0.5 * (H + H.conj().T))
        lam = max(float(evals[-1]), 0.0)
        if np.sqrt(lam) < atol:
            return NormEstimate(float(np.sqrt(lam)), it, 0.0, "PowerIteration")
        if prev is not None:
            resid = abs(lam - prev) / max(lam, np.finfo(float).tiny)
            if resid < tol:
                return NormEstimate(float(np.sqrt(lam)), it, float(resid), "PowerIteration")
        prev = lam
        Q, _ = np.linalg.qr(Z @ evecs[:, ::-1])
        if op.real_input:
            Q = Q.real
    est = NormEstimate(float(np.sqrt(lam)), max_iter, float(resid), "PowerIteration", False)
    if raise_on_failure:
        raise NoConvergence(f"power iteration stopped at residual {resid:.3g}", est)
    return est


def multiplier_handle(multiplier, real_input=False):
    """Fourier multiplier ``x -> ifft(m * fft(x))``."""
    m = np.asarray(multiplier)
    n = m.shape[0]
    return LinearOperatorHandle(
        apply=lambda x: np.fft.ifft(m * np.fft.fft(x)),
        adjoint_apply=lambda y: _project(np.fft.ifft(np.conj(m) * np.fft.fft(y)), real_input),
        input_dim=n, output_dim=n, real_input=real_input)


def _project(x, real):
    return x.real if real else x


def commutator_handle(tau, bank, allow_unusable=False, real_input=True):
    """``[W_J, L_tau] = W_J L_tau - L_tau W_J`` into stacked channels.

    Output rows are ``A_J`` first, then the wavelets in ascending ``j``,
    flattened.  By default the domain is real signals, matching the frame
    normalisation of the bank.
    """
    if tau.grid != bank.grid:
        raise GridMismatch("deformation and bank live on different grids")
    _check_usable(tau, allow_unusable)
    grid = bank.grid
    n = grid.length
    mults = np.vstack([bank.phi_hat[None, :], bank.psi_hats]).astype(complex)
    channels = mults.shape[0]

    if not np.any(tau.tau):
        zero_in = np.zeros(n) if real_input else np.zeros(n, dtype=complex)
        return LinearOperatorHandle(lambda x: np.zeros(channels * n, dtype=complex),
                                    lambda y: zero_in.copy(), n, channels * n, real_input)

    def apply(x):
        x = np.asarray(x, dtype=complex)
        Lx = _warp_rows(grid, x[None, :], tau)[0]
        WLx = np.fft.ifft(mults * np.fft.fft(Lx)[None, :], axis=1)
        Wx = np.fft.ifft(mults * np.fft.fft(x)[None, :], axis=1)
        return (WLx - _warp_rows(grid, Wx, tau)).ravel()

    def adjoint(y):
        Y = np.asarray(y, dtype=complex).reshape(channels, n)
        WsY = np.sum(np.fft.ifft(np.conj(mults) * np.fft.fft(Y, axis=1), axis=1), axis=0)
        first = _warp_adjoint_rows(grid, WsY[None, :], tau)[0]
        LsY = _warp_adjoint_rows(grid, Y, tau)
        second = np.sum(np.fft.ifft(np.conj(mults) * np.fft.fft(LsY, axis=1), axis=1), axis=0)
        return _project(first - second, real_input)

    return LinearOperatorHandle(apply, adjoint, n, channels * n, real_input)


def commutator_bound_ratio(tau, bank, alpha, variant="log", **norm_kwargs):
    """``||[W_J, L_tau]|| / K_{1+alpha}(tau)``; zero when both vanish.

    Returns
    -------
    ratio : float
    estimate : NormEstimate
    bound : float
    """
    est = operator_norm(commutator_handle(tau, bank), **norm_kwargs)
    bound = k1alpha_functional(tau.metrics((alpha,)), bank.J, alpha, variant)
    if bound == 0:
        return (0.0 if est.value < 1e-10 else np.inf), est, bound
    return est.value / bound, est, bound
