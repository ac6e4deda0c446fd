"""Deformations ``L_tau f(x) = f(x - tau(x))``, their metrics and test families."""

import csv
from math import factorial
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainEscape, GridMismatch, ParameterViolation, UsabilityViolation
from .filters import smooth_step
from .signal import (Grid, Signal, _nearest_offsets, _taylor_stack, _TAYLOR_TERMS,
                     derivative_multiplier, dilate, resample_at, translate)

__all__ = [
    "DeformationField",
    "DeformationMetrics",
    "Bump",
    "apply_deformation",
    "deformation_adjoint",
    "change_of_variables_adjoint",
    "inverse_warp",
    "holder_seminorm",
    "holder_norm",
    "compute_metrics",
    "k2_functional",
    "k1alpha_functional",
    "theorem1_tau",
    "theorem1_f",
    "theorem1_amplitude",
    "scale_pair",
    "smooth_random_field",
    "sawtooth_field",
    "window",
    "export_field_csv",
    "import_field_csv",
    "USABILITY_BOUND",
]

USABILITY_BOUND = 0.5
_USABILITY_SLACK = 1e-12


def _spectral(grid, values, order):
    out = np.fft.ifft(np.fft.fft(values) * derivative_multiplier(grid, order))
    return out.real


@dataclass(frozen=True, eq=False)
class DeformationField:
    """Real displacement field sampled on a grid.

    ``dtau`` and ``d2tau`` hold the first two derivatives; they are analytic
    for closed-form families and spectral otherwise.  ``source`` records how
    the field was built, e.g. ``{"kind": "theorem1", "N": 128, "A": 0.2}``.
    """

    grid: Grid
    tau: np.ndarray = field(repr=False)
    dtau: np.ndarray = field(repr=False)
    d2tau: np.ndarray = field(repr=False)
    source: dict = field(default_factory=lambda: {"kind": "tabulated"})

    def __post_init__(self):
        for name in ("tau", "dtau", "d2tau"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != (self.grid.length,):
                raise ValueError(f"{name} must have one value per grid point")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} must be finite")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "_metrics_cache", {})

    @classmethod
    def from_samples(cls, grid, tau, source=None):
        tau = np.asarray(tau, dtype=float)
        return cls(grid, tau, _spectral(grid, tau, 1), _spectral(grid, tau, 2),
                   source or {"kind": "tabulated"})

    @classmethod
    def zero(cls, grid):
        z = np.zeros(grid.length)
        return cls(grid, z, z, z, {"kind": "constant", "c": 0.0})

    @classmethod
    def constant(cls, grid, c):
        z = np.zeros(grid.length)
        return cls(grid, np.full(grid.length, float(c)), z, z,
                   {"kind": "constant", "c": float(c)})

    @property
    def is_constant(self):
        return self.source.get("kind") == "constant" or (
            not np.any(self.dtau) and np.ptp(self.tau) == 0)

    @property
    def sup_dtau(self):
        return float(np.max(np.abs(self.dtau)))

    @property
    def usable(self):
        return self.sup_dtau <= USABILITY_BOUND + _USABILITY_SLACK

    def scaled(self, eps):
        """The field ``eps * tau``."""
        src = dict(self.source)
        src["scale"] = src.get("scale", 1.0) * eps
        return DeformationField(self.grid, eps * self.tau, eps * self.dtau,
                                eps * self.d2tau, src)

    def metrics(self, alphas=(0.5,), tau_alphas=()):
        key = (tuple(alphas), tuple(tau_alphas))
        if key not in self._metrics_cache:
            self._metrics_cache[key] = compute_metrics(self, alphas, tau_alphas)
        return self._metrics_cache[key]


@dataclass(frozen=True)
class DeformationMetrics:
    """Size and regularity measurements of a field."""

    sup_tau: float
    sup_dtau: float
    delta_tau: float
    sup_d2tau: float
    holder_dtau: dict
    holder_tau: dict = field(default_factory=dict)

    def c_alpha_norm(self, alpha):
        """``||tau||_{C^alpha} = sup|tau| + |tau|_{C^alpha}`` for ``0 < alpha < 1``."""
        return self.sup_tau + self.holder_tau[alpha]


def _check_usable(tau, allow_unusable):
    if not allow_unusable and not tau.usable:
        raise UsabilityViolation(
            f"sup|tau'| = {tau.sup_dtau:.6g} exceeds {USABILITY_BOUND}")


def _check_domain(tau):
    if tau.is_constant:
        return
    g = tau.grid
    # Sub-1e-12-spacing displacements cannot wrap anything around.
    moved = np.abs(tau.tau) > 1e-12 * g.spacing
    if not np.any(moved):
        return
    margin = 2 * np.max(np.abs(tau.tau)) + 8 * g.spacing
    y = g.points[moved] - tau.tau[moved]
    lo, hi = g.origin + margin, g.origin + g.period - margin
    bad = (y < lo) | (y > hi)
    if np.any(bad):
        i = int(np.nonzero(moved)[0][np.argmax(bad)])
        raise DomainEscape(
            f"warped point at x={g.points[i]:.6g} lands outside "
            f"[{lo:.6g}, {hi:.6g}] (safety margin {margin:.3g})")


def apply_deformation(f, tau, allow_unusable=False, check_domain=True):
    """Warp ``f`` by ``tau``: sample ``i`` is ``f(x_i - tau_i)``.

    ``f`` is evaluated through its trigonometric interpolant.  Constant fields
    are exact periodic translations and skip the domain check.

    Raises
    ------
    UsabilityViolation
        If ``sup|tau'| > 1/2`` and ``allow_unusable`` is false.
    DomainEscape
        If displaced points come within ``2 sup|tau| + 8 spacing`` of the
        period boundary.
    """
    if f.grid != tau.grid:
        raise GridMismatch("signal and deformation live on different grids")
    _check_usable(tau, allow_unusable)
    if not np.any(tau.tau):
        return f
    if tau.is_constant:
        return translate(f, float(tau.tau[0]))
    if check_domain:
        _check_domain(tau)
    return Signal(f.grid, resample_at(f, f.grid.points - tau.tau))


def _warp_rows(grid, rows, tau):
    """Apply the warp to every row of a 2-D array (no checks)."""
    if tau.is_constant:
        c = float(tau.tau[0])
        phase = np.exp(-1j * grid.omega * c)
        phase[grid.nyquist_index] = np.cos(grid.omega[grid.nyquist_index] * c)
        return np.fft.ifft(np.fft.fft(rows, axis=-1) * phase, axis=-1)
    idx, delta = _nearest_offsets(grid, grid.points - tau.tau)
    fcoef = np.fft.fft(rows, axis=-1)
    out = np.zeros(rows.shape, dtype=complex)
    for m in range(_TAYLOR_TERMS, -1, -1):
        deriv = np.fft.ifft(fcoef * (derivative_multiplier(grid, m) / factorial(m)), axis=-1)
        out = deriv[..., idx] + delta * out
    return out


def _warp_adjoint_rows(grid, rows, tau):
    """Exact transpose-conjugate of :func:`_warp_rows` (no checks)."""
    if tau.is_constant:
        c = float(tau.tau[0])
        phase = np.exp(1j * grid.omega * c)
        phase[grid.nyquist_index] = np.cos(grid.omega[grid.nyquist_index] * c)
        return np.fft.ifft(np.fft.fft(rows, axis=-1) * phase, axis=-1)
    n = grid.length
    idx, delta = _nearest_offsets(grid, grid.points - tau.tau)
    rows = np.asarray(rows, dtype=complex)
    flat = rows.reshape(-1, n)
    offsets = (np.arange(flat.shape[0]) * n)[:, None] + idx[None, :]
    fcoef = np.zeros(flat.shape, dtype=complex)
    weights = flat
    for m in range(_TAYLOR_TERMS + 1):
        gathered = (np.bincount(offsets.ravel(), weights=weights.real.ravel(), minlength=flat.size)
                    + 1j * np.bincount(offsets.ravel(), weights=weights.imag.ravel(),
                                       minlength=flat.size)).reshape(flat.shape)
        mult = np.conj(derivative_multiplier(grid, m)) / factorial(m)
        fcoef += mult * np.fft.fft(gathered, axis=-1)
        weights = weights * delta
    return np.fft.ifft(fcoef, axis=-1).reshape(rows.shape)


def deformation_adjoint(g, tau):
    """Exact adjoint of the discrete warp for the inner product ``spacing * sum u conj(v)``.

    The warp is ``sum_m diag(delta^m) P E_m`` where ``E_m`` is the spectral
    ``m``-th derivative divided by ``m!`` and ``P`` picks the nearest sample;
    the adjoint scatters ``conj(delta)^m g`` back and applies ``E_m^*``.
    """
    if g.grid != tau.grid:
        raise GridMismatch("signal and deformation live on different grids")
    out = _warp_adjoint_rows(g.grid, np.asarray(g.samples)[None, :], tau)[0]
    return Signal(g.grid, out.real if g.is_real else out)


def inverse_warp(tau, y, iterations=30, tol=1e-13, newton_steps=8):
    """Solve ``x - tau(x) = y`` by the contraction ``x <- y + tau(x)``.

    The contraction gains a factor ``sup|tau'|`` per step, so a few Newton
    steps on the converged iterate bring the residual to ``tol``.

    Returns the solution and the final residual ``max|x - tau(x) - y|``.
    """
    grid = tau.grid
    t = Signal(grid, tau.tau)
    dt = Signal(grid, tau.dtau)
    y = np.asarray(y, dtype=float)
    x = y.copy()
    if not x.size:
        return x, 0.0
    for _ in range(iterations):
        x = y + resample_at(t, x)
    r = x - resample_at(t, x) - y
    for _ in range(newton_steps):
        if np.max(np.abs(r)) < tol:
            break
        x = x - r / (1.0 - resample_at(dt, x))
        r = x - resample_at(t, x) - y
    return x, float(np.max(np.abs(r)))


def change_of_variables_adjoint(g, tau, iterations=30):
    """Continuous-formula adjoint ``g(y(z)) / (1 - tau'(y(z)))`` with ``y - tau(y) = z``.

    Approximates :func:`deformation_adjoint` up to discretisation error of
    the composition; exact only in the continuum limit.
    """
    grid = g.grid
    y, _ = inverse_warp(tau, grid.points, iterations)
    jac = 1.0 - resample_at(Signal(grid, tau.dtau), y)
    return Signal(grid, resample_at(g, y) / jac)


def holder_seminorm(g, alpha, spacing=1.0):
    """Exact grid value of ``sup_{x != y} |g(x) - g(y)| / |x - y|^alpha``.

    Sweeps separations ``s = 1, 2, ...`` and stops once the oscillation bound
    ``osc(g) / (s h)^alpha`` can no longer beat the running maximum, which
    keeps the sweep exact while touching only short separations for smooth
    or oscillatory inputs.

    Parameters
    ----------
    g : array_like or Signal
    alpha : float in (0, 1]
    spacing : float
        Ignored when ``g`` is a Signal.
    """
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    if isinstance(g, Signal):
        spacing = g.grid.spacing
        g = g.samples
    g = np.asarray(g)
    n = g.shape[0]
    if n < 2:
        return 0.0
    if np.iscomplexobj(g):
        osc = 2 * float(np.max(np.abs(g - g.mean())))
    else:
        osc = float(np.max(g) - np.min(g))
    if osc == 0:
        return 0.0
    best = 0.0
    for s in range(1, n):
        d = (s * spacing) ** alpha
        if osc / d <= best:
            break
        v = float(np.max(np.abs(g[s:] - g[:-s]))) / d
        if v > best:
            best = v
    return best


def holder_norm(g, alpha, spacing=1.0):
    """``sup|g| + |g|_{C^alpha}``."""
    arr = g.samples if isinstance(g, Signal) else np.asarray(g)
    return float(np.max(np.abs(arr))) + holder_seminorm(g, alpha, spacing)


def compute_metrics(tau, alphas=(0.5,), tau_alphas=()):
    """Sup norms, oscillation and Hölder seminorms of ``tau`` and ``tau'``.

    ``tau_alphas`` additionally measures ``|tau|_{C^alpha}`` itself.
    """
    h = tau.grid.spacing
    return DeformationMetrics(
        sup_tau=float(np.max(np.abs(tau.tau))),
        sup_dtau=float(np.max(np.abs(tau.dtau))),
        delta_tau=float(np.max(tau.tau) - np.min(tau.tau)),
        sup_d2tau=float(np.max(np.abs(tau.d2tau))),
        holder_dtau={a: holder_seminorm(tau.dtau, a, h) for a in alphas},
        holder_tau={a: holder_seminorm(tau.tau, a, h) for a in tau_alphas},
    )


def _log_factor(m):
    if m.sup_dtau == 0:
        return 0.0
    if m.delta_tau == 0:
        return 1.0
    return max(np.log(m.delta_tau / m.sup_dtau), 1.0)


def k2_functional(m, J):
    """``2^-J |tau| + max{log(Delta tau / |Dtau|), 1} |Dtau| + |D^2 tau|`` (natural log).

    The middle term is 0 when ``|Dtau| = 0``.
    """
    return 2.0 ** -J * m.sup_tau + _log_factor(m) * m.sup_dtau + m.sup_d2tau


def k1alpha_functional(m, J, alpha, variant="log"):
    """``2^-J |tau| + max{log(Delta tau / |Dtau|), 1} |Dtau| + |Dtau|_{C^alpha}``.

    ``variant="J"`` replaces the logarithmic factor by ``max{J, 1}``.
    """
    if variant == "J":
        factor = max(J, 1) if m.sup_dtau else 0.0
    elif variant == "log":
        factor = _log_factor(m)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return 2.0 ** -J * m.sup_tau + factor * m.sup_dtau + m.holder_dtau[alpha]


@dataclass(frozen=True)
class Bump:
    """``exp(1 - pi^2 / (x (2 pi - x)))`` on ``(0, 2 pi)``, zero elsewhere; peak 1 at ``pi``."""

    def _parts(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x > 0) & (x < 2 * np.pi)
        u = np.where(inside, x * (2 * np.pi - x), 1.0)
        du = 2 * np.pi - 2 * x
        v = np.where(inside, np.exp(1 - np.pi ** 2 / u), 0.0)
        return inside, u, du, v

    def __call__(self, x):
        return self._parts(x)[3]

    def derivative(self, x):
        _, u, du, v = self._parts(x)
        return v * np.pi ** 2 * du / u ** 2

    def second_derivative(self, x):
        _, u, du, v = self._parts(x)
        a = np.pi ** 2 * du / u ** 2
        da = np.pi ** 2 * (-2 / u ** 2 - 2 * du ** 2 / u ** 3)
        return v * (a ** 2 + da)

    def sup_derivative(self, samples=200_001):
        x = np.linspace(0, 2 * np.pi, samples)
        return float(np.max(np.abs(self.derivative(x))))

    def l2_norm(self, samples=200_001):
        x = np.linspace(0, 2 * np.pi, samples)
        return float(np.sqrt(np.trapezoid(self(x) ** 2, x)))


def theorem1_amplitude(bump=None):
    """Largest ``A`` with ``A (1 + sup|bump'|) <= 1/2``."""
    bump = bump or Bump()
    return 0.5 / (1 + bump.sup_derivative())


def theorem1_tau(N, grid, A=None, bump=None):
    """``tau(x) = -(A/N) sin(N x) bump(x)`` with analytic derivatives.

    Raises
    ------
    ParameterViolation
        If ``A (1 + sup|bump'|) > 1/2``.
    """
    bump = bump or Bump()
    if N < 1 or int(N) != N:
        raise ParameterViolation("N must be a positive integer")
    lim = theorem1_amplitude(bump)
    if A is None:
        A = lim
    if A <= 0 or A > lim * (1 + 1e-12):
        raise ParameterViolation(
            f"A={A:.6g} violates A(1 + sup|bump'|) <= 1/2 (max {lim:.6g})")
    x = grid.points
    s, c = np.sin(N * x), np.cos(N * x)
    p, dp, d2p = bump(x), bump.derivative(x), bump.second_derivative(x)
    tau = -(A / N) * s * p
    dtau = -A * c * p - (A / N) * s * dp
    d2tau = A * N * s * p - 2 * A * c * dp - (A / N) * s * d2p
    return DeformationField(grid, tau, dtau, d2tau,
                            {"kind": "theorem1", "N": int(N), "A": float(A)})


def window(x, a, b, ramp):
    """Smooth plateau, 1 on ``[a, b]`` and 0 outside ``[a - ramp, b + ramp]``."""
    x = np.asarray(x, dtype=float)
    return smooth_step((x - (a - ramp)) / ramp) * (1 - smooth_step((x - b) / ramp))


def theorem1_f(grid, left_ramp=1.5, right_ramp=2.5):
    """Smooth compactly supported signal equal to ``x`` on ``[0, 2 pi]``."""
    x = grid.points
    cut = smooth_step((x + left_ramp) / left_ramp) * \
        (1 - smooth_step((x - 2 * np.pi) / right_ramp))
    return Signal(grid, x * cut)


def scale_pair(f, tau, n):
    """Nested-grid pair ``(2^{n/2} f(2^n x), 2^-n tau(2^n x))``."""
    if f.grid != tau.grid:
        raise GridMismatch("signal and deformation live on different grids")
    fn = dilate(f, n)
    s = 2.0 ** -n
    src = dict(tau.source)
    src["dilation"] = src.get("dilation", 0) + n
    taun = DeformationField(fn.grid, s * tau.tau, tau.dtau, tau.d2tau / s, src)
    return fn, taun


def smooth_random_field(grid, seed, bandwidth, amplitude, support=None, ramp=None):
    """Band-limited random field windowed to ``support`` and scaled so ``sup|tau'| = amplitude``.

    ``support`` defaults to the middle half of the period.
    """
    rng = np.random.default_rng(seed)
    if support is None:
        a = grid.origin + grid.period / 4
        support = (a, a + grid.period / 2)
    a, b = support
    ramp = ramp if ramp is not None else 0.25 * (b - a)
    w = np.abs(grid.omega)
    fcoef = np.zeros(grid.length, dtype=complex)
    band = (w <= bandwidth) & (w > 0)
    fcoef[band] = rng.normal(size=band.sum()) + 1j * rng.normal(size=band.sum())
    raw = np.fft.ifft(fcoef).real
    raw = raw * window(grid.points, a + ramp, b - ramp, ramp)
    field_ = DeformationField.from_samples(grid, raw)
    if field_.sup_dtau == 0:
        return field_
    out = field_.scaled(amplitude / field_.sup_dtau)
    return DeformationField(grid, out.tau, out.dtau, out.d2tau,
                            {"kind": "smooth_random", "seed": int(seed),
                             "bandwidth": float(bandwidth),
                             "amplitude": float(amplitude)})


def sawtooth_field(grid, slope, tooth, start, teeth, mollify=4.0):
    """Triangle wave of the given slope, mollified by a Gaussian of width ``mollify * spacing``.

    The wave rises and falls with ``|tau'| = slope`` over ``teeth`` teeth of
    length ``tooth`` starting at ``start`` and vanishes elsewhere.
    """
    x = grid.points
    t = (x - start) / tooth
    inside = (t >= 0) & (t <= teeth)
    frac = t - np.floor(t)
    tri = np.where(inside, slope * tooth * (0.5 - np.abs(frac - 0.5)), 0.0)
    sigma = mollify * grid.spacing
    kernel = np.exp(-0.5 * (grid.omega * sigma) ** 2)
    smooth = np.fft.ifft(np.fft.fft(tri) * kernel).real
    field_ = DeformationField.from_samples(grid, smooth)
    return DeformationField(grid, field_.tau, field_.dtau, field_.d2tau,
                            {"kind": "sawtooth", "slope": float(slope),
                             "tooth": float(tooth), "start": float(start),
                             "teeth": int(teeth), "mollify": float(mollify)})


def export_field_csv(tau, path):
    """Two-column CSV ``x, tau``."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "tau"])
        for x, t in zip(tau.grid.points, tau.tau):
            w.writerow([f"{x:.17g}", f"{t:.17g}"])


def import_field_csv(path, grid=None):
    """Read a field written by :func:`export_field_csv`; the grid is inferred if omitted."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader)
        data = np.array([[float(v) for v in row] for row in reader])
    x, t = data[:, 0], data[:, 1]
    if grid is None:
        spacing = (x[-1] - x[0]) / (len(x) - 1)
        grid = Grid(x[0], spacing, len(x))
    elif not np.allclose(grid.points, x, rtol=0, atol=1e-9 * grid.spacing):
        raise GridMismatch("CSV positions do not match the grid")
    return DeformationField.from_samples(grid, t, {"kind": "tabulated", "path": str(path)})
