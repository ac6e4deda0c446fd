import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from conftest import random_bandlimited
from scatstab.deformation import (Bump, DeformationField, DeformationMetrics,
                                  apply_deformation, change_of_variables_adjoint,
                                  compute_metrics, deformation_adjoint, export_field_csv,
                                  holder_norm, holder_seminorm, import_field_csv,
                                  inverse_warp, k1alpha_functional, k2_functional,
                                  sawtooth_field, scale_pair, smooth_random_field,
                                  theorem1_amplitude, theorem1_f, theorem1_tau)
from scatstab.exceptions import DomainEscape, ParameterViolation, UsabilityViolation
from scatstab.signal import (Grid, Signal, band_project, inner, l2_norm, spectral_derivative,
                             translate)

GRID = Grid.from_period(32.0, 1024, origin=-16.0)
PI_GRID = Grid.from_period(16 * np.pi, 4096, origin=-7 * np.pi)


def gaussian(grid, sigma=1.0, center=0.0):
    return Signal.from_function(grid, lambda x: np.exp(-(x - center) ** 2 / (2 * sigma ** 2)))


def test_zero_field_is_identity(rng):
    f = random_bandlimited(rng, GRID, 5.0)
    out = apply_deformation(f, DeformationField.zero(GRID))
    np.testing.assert_allclose(out.samples, f.samples, atol=1e-12)


def test_constant_field_is_translation(rng):
    f = random_bandlimited(rng, GRID, 5.0)
    tau = DeformationField.constant(GRID, 0.7)
    np.testing.assert_allclose(apply_deformation(f, tau).samples,
                               translate(f, 0.7).samples, atol=1e-10)


def test_nonconstant_warp_matches_interpolant(rng):
    f = random_bandlimited(rng, GRID, 5.0)
    tau = smooth_random_field(GRID, seed=4, bandwidth=1.0, amplitude=0.3)
    ref = oracles.trig_interpolant(f.samples, GRID.spacing, GRID.origin,
                                   GRID.points - tau.tau).real
    np.testing.assert_allclose(apply_deformation(f, tau).samples, ref, atol=1e-10)


def test_oscillatory_residual_equals_minus_tau():
    f = theorem1_f(PI_GRID)
    tau = theorem1_tau(16, PI_GRID)
    g = apply_deformation(f, tau) - f
    box = (PI_GRID.points >= 0) & (PI_GRID.points <= 2 * np.pi)
    assert np.max(np.abs(g.samples[box] + tau.tau[box])) < 1e-8


def test_usability_and_domain_errors(rng):
    f = random_bandlimited(rng, GRID, 5.0)
    steep = smooth_random_field(GRID, seed=1, bandwidth=1.0, amplitude=0.8)
    with pytest.raises(UsabilityViolation):
        apply_deformation(f, steep)
    apply_deformation(f, steep, allow_unusable=True)
    x = GRID.points
    wide = DeformationField.from_samples(GRID, 0.2 * np.sin(2 * np.pi * x / GRID.period) + 0.3)
    with pytest.raises(DomainEscape):
        apply_deformation(f, wide)


def test_boundedness_sqrt2(rng):
    for k in range(20):
        f = random_bandlimited(rng, GRID, rng.uniform(1, 20))
        tau = smooth_random_field(GRID, seed=k, bandwidth=rng.uniform(0.5, 3),
                                  amplitude=rng.uniform(0.05, 0.5))
        assert tau.usable
        assert l2_norm(apply_deformation(f, tau)) <= np.sqrt(2) * l2_norm(f) * (1 + 1e-3)


def test_taylor_sensitivity(rng):
    worst = 0.0
    for k in range(10):
        f = gaussian(GRID, rng.uniform(0.5, 2), rng.uniform(-3, 3))
        t0 = smooth_random_field(GRID, seed=2 * k, bandwidth=1.0, amplitude=0.4)
        t1 = smooth_random_field(GRID, seed=2 * k + 1, bandwidth=1.0, amplitude=0.4)
        lhs = l2_norm(apply_deformation(f, t0) - apply_deformation(f, t1))
        rhs = np.max(np.abs(t0.tau - t1.tau)) * l2_norm(spectral_derivative(f))
        worst = max(worst, lhs / rhs)
    assert worst <= 2.1


def test_deformation_adjoint_exact(rng):
    tau = smooth_random_field(GRID, seed=3, bandwidth=2.0, amplitude=0.4)
    for _ in range(5):
        x = Signal(GRID, rng.normal(size=GRID.length) + 1j * rng.normal(size=GRID.length))
        y = Signal(GRID, rng.normal(size=GRID.length) + 1j * rng.normal(size=GRID.length))
        lhs = inner(apply_deformation(x, tau), y)
        rhs = inner(x, deformation_adjoint(y, tau))
        assert abs(lhs - rhs) < 1e-10 * l2_norm(x) * l2_norm(y)


def test_change_of_variables_adjoint_on_smooth_input():
    tau = smooth_random_field(GRID, seed=3, bandwidth=1.0, amplitude=0.3)
    g = gaussian(GRID, 1.5, 1.0)
    exact = deformation_adjoint(g, tau)
    approx = change_of_variables_adjoint(g, tau)
    assert l2_norm(exact - approx) < 1e-5 * l2_norm(g)


def test_inverse_warp_converges():
    tau = smooth_random_field(GRID, seed=3, bandwidth=1.0, amplitude=0.5)
    _, resid = inverse_warp(tau, GRID.points)
    assert resid < 1e-12


def test_holder_constant_is_zero():
    assert holder_seminorm(np.full(50, 3.0), 0.5) == 0.0


def test_holder_identity_on_unit_interval():
    x = np.linspace(0, 1, 1025)
    v = holder_seminorm(x, 0.5, spacing=x[1] - x[0])
    assert v == pytest.approx(1.0, abs=1e-12)
    assert abs(v - oracles.holder_pairs(x, x[1] - x[0], 0.5)) < 1e-12


@pytest.mark.parametrize("n", [64, 512, 2048])
@pytest.mark.parametrize("alpha", [0.25, 0.5, 1.0])
def test_holder_matches_pair_sweep(rng, n, alpha):
    for g in (rng.normal(size=n), np.cumsum(rng.normal(size=n)),
              np.sin(np.linspace(0, 40, n)) * np.linspace(0, 1, n)):
        ref = oracles.holder_pairs(g, 0.1, alpha)
        assert holder_seminorm(g, alpha, 0.1) == pytest.approx(ref, rel=1e-14, abs=0)


def test_holder_norm_and_signal_input(rng):
    f = Signal(GRID, rng.normal(size=GRID.length))
    assert holder_norm(f, 0.5) == pytest.approx(
        np.max(np.abs(f.samples)) + holder_seminorm(f.samples, 0.5, GRID.spacing))
    with pytest.raises(ValueError):
        holder_seminorm(f, 0.0)


def test_interpolation_inequality(rng):
    grid = Grid.from_period(32.0, 2048, origin=-16.0)
    for k in range(20):
        g = smooth_random_field(grid, seed=100 + k, bandwidth=rng.uniform(0.5, 4), amplitude=1.0)
        sup, dsup = np.max(np.abs(g.tau)), np.max(np.abs(g.dtau))
        for a in (0.25, 0.5, 0.75):
            bound = 2 ** (1 - a) * sup ** (1 - a) * dsup ** a
            assert holder_seminorm(g.tau, a, grid.spacing) <= bound * 1.05


def test_constant_metrics():
    m = compute_metrics(DeformationField.constant(GRID, -0.4))
    assert (m.sup_tau, m.sup_dtau, m.delta_tau) == (0.4, 0.0, 0.0)
    assert k2_functional(m, 0) == pytest.approx(0.4)
    assert k1alpha_functional(m, 0, 0.5) == pytest.approx(0.4)


def test_smooth_random_derivative_vs_finite_difference():
    grid = Grid.from_period(32.0, 256, origin=-16.0)
    tau = smooth_random_field(grid, seed=7, bandwidth=2.0, amplitude=0.3)

    def interp(x):
        return oracles.trig_interpolant(tau.tau, grid.spacing, grid.origin, x).real

    fd = oracles.central_difference(interp, grid.points, 1e-3)
    assert abs(np.max(np.abs(fd)) / tau.sup_dtau - 1) < 1e-6
    assert tau.sup_dtau == pytest.approx(0.3, rel=1e-12)


def example_metrics(holder=0.3):
    return DeformationMetrics(sup_tau=1.0, sup_dtau=0.5, delta_tau=2.0, sup_d2tau=0.25,
                              holder_dtau={0.5: holder})


def test_k2_example():
    m = example_metrics()
    assert k2_functional(m, 0) == pytest.approx(1 + np.log(4) * 0.5 + 0.25, abs=1e-12)
    assert k2_functional(m, 0) == pytest.approx(1.94315, abs=5e-6)
    assert k2_functional(m, 0) - k2_functional(m, 1) == pytest.approx(0.5)


def test_k1alpha_example_and_variant():
    m = example_metrics()
    assert k1alpha_functional(m, 0, 0.5) == pytest.approx(1.99315, abs=5e-6)
    v = k1alpha_functional(m, 5, 0.5, variant="J")
    assert v == pytest.approx(2 ** -5 + 5 * 0.5 + 0.3)
    with pytest.raises(ValueError):
        k1alpha_functional(m, 0, 0.5, variant="bad")


def test_log_factor_floor():
    m = DeformationMetrics(1.0, 0.5, 0.6, 0.0, {0.5: 0.0})
    assert k2_functional(m, 0) == pytest.approx(1.5)


def test_bump_derivatives():
    b = Bump()
    x = np.linspace(0.3, 2 * np.pi - 0.3, 101)
    np.testing.assert_allclose(b.derivative(x), oracles.central_difference(b, x, 1e-4),
                               atol=1e-8)
    np.testing.assert_allclose(b.second_derivative(x),
                               oracles.central_difference(b.derivative, x, 1e-4), atol=1e-7)
    assert b(np.array([np.pi]))[0] == pytest.approx(1.0)


def test_oscillatory_field_properties():
    A = theorem1_amplitude()
    assert A * (1 + Bump().sup_derivative()) == pytest.approx(0.5)
    tau = theorem1_tau(32, PI_GRID)
    assert tau.usable
    assert np.max(np.abs(tau.tau)) <= A / 32
    ends = np.isclose(PI_GRID.points, 0.0) | np.isclose(PI_GRID.points, 2 * np.pi)
    assert np.all(tau.tau[ends] == 0)
    num = DeformationField.from_samples(PI_GRID, tau.tau)
    np.testing.assert_allclose(num.dtau, tau.dtau, atol=1e-9)
    with pytest.raises(ParameterViolation):
        theorem1_tau(32, PI_GRID, A=1.0)
    with pytest.raises(ParameterViolation):
        theorem1_tau(0, PI_GRID)


@pytest.mark.parametrize("N", [64, 128])
def test_oscillatory_field_l2_asymptotics(N):
    grid = Grid.from_period(16 * np.pi, 16384, origin=-7 * np.pi)
    tau = theorem1_tau(N, grid)
    A = tau.source["A"]
    measured = grid.spacing * np.sum(tau.tau ** 2)
    predicted = A ** 2 * Bump().l2_norm() ** 2 / (2 * N ** 2)
    assert abs(measured / predicted - 1) < 0.1


def test_linear_test_signal():
    f = theorem1_f(PI_GRID)
    x = PI_GRID.points
    i = np.argmin(np.abs(x - np.pi))
    assert f.samples[i] == pytest.approx(x[i], abs=1e-10)
    outside = (x < -1.5) | (x > 2 * np.pi + 2.5)
    assert np.max(np.abs(f.samples[outside])) < 1e-12
    tail = band_project(f, ("high", 64.0))
    assert l2_norm(tail) ** 2 / l2_norm(f) ** 2 < 1e-6


def test_scale_pair():
    f = theorem1_f(PI_GRID)
    tau = theorem1_tau(8, PI_GRID)
    f0, t0 = scale_pair(f, tau, 0)
    np.testing.assert_array_equal(f0.samples, f.samples)
    np.testing.assert_array_equal(t0.tau, tau.tau)
    base = tau.metrics(tau_alphas=(0.5,)).c_alpha_norm(0.5)
    for n in range(1, 6):
        fn, tn = scale_pair(f, tau, n)
        assert l2_norm(fn) == pytest.approx(l2_norm(f), rel=1e-12)
        assert tn.sup_dtau == pytest.approx(tau.sup_dtau, rel=1e-10)
        ratio = tn.metrics(tau_alphas=(0.5,)).c_alpha_norm(0.5) / base
        assert abs(ratio / 2 ** (-n / 2) - 1) < 0.2
        # The pair warps consistently: L_{tau_n} f_n is the dilation of L_tau f.
        lhs = apply_deformation(fn, tn).samples
        rhs = 2 ** (n / 2) * apply_deformation(f, tau).samples
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_sawtooth_field():
    grid = Grid.from_period(32 * np.pi, 4096, origin=-16 * np.pi)
    tau = sawtooth_field(grid, slope=0.25, tooth=2.0, start=-20.0, teeth=20)
    assert 0.2 < tau.sup_dtau <= 0.25 + 1e-9
    assert tau.usable
    # Mollification rounds the peaks of height slope * tooth / 2.
    assert 0.2 < np.max(np.abs(tau.tau)) <= 0.25


def test_field_csv_round_trip(tmp_path):
    tau = smooth_random_field(GRID, seed=2, bandwidth=1.0, amplitude=0.2)
    path = tmp_path / "tau.csv"
    export_field_csv(tau, path)
    back = import_field_csv(path)
    assert back.grid.length == GRID.length
    assert back.grid.spacing == pytest.approx(GRID.spacing)
    np.testing.assert_array_equal(back.tau, tau.tau)
    np.testing.assert_allclose(import_field_csv(path, GRID).dtau, tau.dtau, atol=1e-12)


def test_scaled_field_metrics_linear():
    tau = smooth_random_field(GRID, seed=5, bandwidth=1.0, amplitude=0.2)
    m1, m2 = tau.metrics(), tau.scaled(2.0).metrics()
    assert m2.sup_tau == pytest.approx(2 * m1.sup_tau)
    assert m2.holder_dtau[0.5] == pytest.approx(2 * m1.holder_dtau[0.5])
    assert tau.scaled(2.0).source["scale"] == 2.0


@given(st.integers(min_value=0, max_value=2 ** 32 - 1),
       st.integers(min_value=2, max_value=300),
       st.floats(min_value=0.05, max_value=1.0))
def test_holder_property_matches_oracle(seed, n, alpha):
    rng = np.random.default_rng(seed)
    g = np.cumsum(rng.normal(size=n)) * rng.uniform(0.1, 10)
    h = rng.uniform(0.01, 2)
    # Equal up to the rounding of scalar versus vectorised pow.
    ref = oracles.holder_pairs(g, h, alpha)
    assert holder_seminorm(g, alpha, h) == pytest.approx(ref, rel=1e-14, abs=0)
