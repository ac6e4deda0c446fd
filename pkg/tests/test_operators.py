import numpy as np
import pytest

from scatstab.deformation import DeformationField, smooth_random_field
from scatstab.exceptions import NoConvergence, UsabilityViolation
from scatstab.operators import (LinearOperatorHandle, adjoint_defect, commutator_bound_ratio,
                                commutator_handle, dense_matrix, multiplier_handle,
                                operator_norm)


def matrix_handle(A):
    return LinearOperatorHandle(lambda x: A @ x, lambda y: A.conj().T @ y,
                                A.shape[1], A.shape[0])


def test_scalar_operator():
    n = 32
    op = LinearOperatorHandle(lambda x: 3 * x, lambda y: 3 * y, n, n)
    assert operator_norm(op, tol=1e-12).value == pytest.approx(3.0, abs=1e-10)


def test_multiplier_norm(rng):
    m = rng.uniform(0, 0.6, size=128) * np.exp(1j * rng.uniform(0, 6, size=128))
    m[17] = 0.7
    op = multiplier_handle(m)
    assert adjoint_defect(op) < 1e-12
    assert operator_norm(op, tol=1e-12).value == pytest.approx(0.7, abs=1e-8)


def test_power_iteration_matches_svd(rng):
    A = rng.normal(size=(256, 256)) + 1j * rng.normal(size=(256, 256))
    est = operator_norm(matrix_handle(A), tol=1e-10, max_iter=2000)
    ref = np.linalg.svd(A, compute_uv=False)[0]
    assert abs(est.value - ref) / ref < 1e-3
    assert est.method == "PowerIteration" and est.converged
    dense = operator_norm(matrix_handle(A), method="dense")
    assert dense.value == pytest.approx(ref, rel=1e-12)


def test_power_iteration_deterministic(rng):
    A = rng.normal(size=(64, 64))
    a = operator_norm(matrix_handle(A), seed=5)
    b = operator_norm(matrix_handle(A), seed=5)
    assert a == b


def test_no_convergence_carries_estimate(rng):
    A = rng.normal(size=(64, 64))
    with pytest.raises(NoConvergence) as info:
        operator_norm(matrix_handle(A), tol=1e-15, max_iter=2, block=1)
    assert info.value.estimate.iterations == 2
    est = operator_norm(matrix_handle(A), tol=1e-15, max_iter=2, block=1,
                        raise_on_failure=False)
    assert not est.converged
    with pytest.raises(ValueError):
        operator_norm(matrix_handle(A), tol=0)


def test_dense_matrix_columns(rng):
    A = rng.normal(size=(5, 3))
    np.testing.assert_allclose(dense_matrix(matrix_handle(A.astype(complex))), A)


def test_commutator_zero_and_constant(small_grid, small_bank):
    zero = commutator_handle(DeformationField.zero(small_grid), small_bank)
    assert operator_norm(zero).value < 1e-10
    const = commutator_handle(DeformationField.constant(small_grid, 0.4), small_bank)
    assert operator_norm(const).value < 1e-8
    ratio, est, bound = commutator_bound_ratio(DeformationField.zero(small_grid), small_bank,
                                               0.5)
    assert ratio == 0.0 and bound == 0.0


def test_commutator_adjoint_consistency(small_grid, small_bank):
    for seed in range(3):
        tau = smooth_random_field(small_grid, seed=seed, bandwidth=2.0, amplitude=0.3)
        for real in (True, False):
            op = commutator_handle(tau, small_bank, real_input=real)
            assert adjoint_defect(op, probes=10, seed=seed) < 1e-8


def test_commutator_matches_dense_oracle(small_grid, small_bank):
    tau = smooth_random_field(small_grid, seed=1, bandwidth=1.0, amplitude=0.1)
    op = commutator_handle(tau, small_bank)
    est = operator_norm(op, tol=1e-10)
    # Assemble the full real matrix column by column (real inputs, [Re; Im] outputs).
    cols = []
    for i in range(op.input_dim):
        e = np.zeros(op.input_dim)
        e[i] = 1.0
        cols.append(op.apply(e))
    M = np.array(cols).T
    ref = np.linalg.svd(np.vstack([M.real, M.imag]), compute_uv=False)[0]
    assert abs(est.value - ref) / ref < 1e-3


def test_commutator_crude_bound(small_grid, small_bank):
    for seed in range(3):
        tau = smooth_random_field(small_grid, seed=seed, bandwidth=3.0, amplitude=0.5)
        assert operator_norm(commutator_handle(tau, small_bank)).value <= \
            2 * np.sqrt(2) * (1 + 1e-3)


def test_commutator_usability(small_grid, small_bank):
    tau = smooth_random_field(small_grid, seed=0, bandwidth=1.0, amplitude=0.9)
    with pytest.raises(UsabilityViolation):
        commutator_handle(tau, small_bank)
    commutator_handle(tau, small_bank, allow_unusable=True)


def test_bound_ratio_eps_stable(small_grid, small_bank):
    base = smooth_random_field(small_grid, seed=2, bandwidth=1.0, amplitude=1.0)
    ratios = [commutator_bound_ratio(base.scaled(e), small_bank, 0.5)[0]
              for e in (0.05, 0.1, 0.2)]
    assert max(ratios) / min(ratios) < 2
