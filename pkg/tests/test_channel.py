import math

import numpy as np
import pytest

from starkwalk import (
    AtomGibbs,
    DeformedChannel,
    LatticeWindow,
    ModelParams,
    ParticleDensityMatrix,
    WindowError,
    adjoint_apply,
    apply_channel,
    apply_deformed,
    channel_oracle,
    derive_params,
    free_evolve,
    kraus_weights,
    master_step,
    oracle_unitary,
    theta,
    time_reversal_conjugate,
)

from conftest import random_density, random_interior_operator


@pytest.fixture
def window():
    return LatticeWindow(-16, 15, -16, 15)


def test_kraus_weights_reference_point(params):
    kt = kraus_weights(params)
    d = derive_params(params)
    # frozen from 40-digit evaluation
    assert abs(kt.p_plus - 0.18586058182486645) < 1e-15
    assert abs(kt.p_minus - 0.025153494483789930) < 1e-15
    assert abs(kt.p_minus + kt.p_zero + kt.p_plus - 1.0) <= 1e-14
    assert abs(kt.p_minus - math.exp(-params.beta * params.E) * kt.p_plus) <= 1e-16
    assert abs((kt.p_plus - kt.p_minus) - d.p * math.tanh(params.beta * params.E / 2)) <= 1e-15


def test_kraus_weights_temperature_limits():
    hot = kraus_weights(ModelParams(E=2.0, F=1.0, lam=0.5, tau=1.0, beta=0.0))
    assert abs(hot.p_plus - hot.p_minus) <= 1e-16
    cold = kraus_weights(ModelParams(E=2.0, F=1.0, lam=0.5, tau=1.0, beta=50.0))
    assert cold.p_minus <= 1e-20
    d = derive_params(ModelParams(E=2.0, F=1.0, lam=0.5, tau=1.0, beta=50.0))
    assert abs(cold.p_plus - d.p) <= 1e-15


def test_theta_normalization_and_symmetry(params):
    assert abs(theta(0.0, params) - 1.0) <= 1e-15
    assert abs(theta(1.0, params) - 1.0) <= 1e-15
    # frozen from 40-digit evaluation
    assert abs(theta(0.5, params) - 0.92573449764640562) < 1e-15
    for a in np.arange(-2.0, 3.0001, 0.05):
        assert abs(theta(1.0 - a, params) - theta(a, params)) <= 1e-12


def test_theta_equals_kraus_mgf(params):
    kt = kraus_weights(params)
    be = params.beta * params.E
    for a in np.arange(-2.0, 3.0001, 0.1):
        via_kraus = (math.exp(a * be) * kt.p_minus + kt.p_zero
                     + math.exp(-a * be) * kt.p_plus)
        assert abs(theta(a, params) - via_kraus) <= 1e-13


def test_deformed_on_eigenstate_is_trinomial(params, window):
    kt = kraus_weights(params)
    dm = ParticleDensityMatrix.eigenstate(window, 0)
    out = apply_deformed(dm, 0.0, params)
    i = window.k_index(0)
    diag = np.diagonal(out.coeffs).real
    assert diag[i - 1] == kt.p_minus
    assert diag[i] == kt.p_zero
    assert diag[i + 1] == kt.p_plus
    assert np.count_nonzero(out.coeffs) == 3


def test_deformed_trace_scaling_all_states(params, window):
    rng = np.random.default_rng(20)
    for alpha in (0.0, -0.7, 0.4, 1.3):
        dm = random_density(rng, window, 6)
        out = apply_deformed(dm, alpha, params)
        assert abs(out.trace() - theta(alpha, params) * dm.trace()) <= 1e-14


def test_deformed_preserves_positivity(params, window):
    rng = np.random.default_rng(21)
    for _ in range(100):
        dm = random_density(rng, window, 5)
        out = apply_deformed(dm, 0.3, params)
        assert out.min_eigenvalue() >= -1e-12
        assert out.hermiticity_defect() <= 1e-13


def test_channel_on_diagonal_equals_deformed(params, window):
    rng = np.random.default_rng(22)
    w = np.zeros(window.n_k)
    w[10:22] = rng.random(12)
    w /= w.sum()
    dm = ParticleDensityMatrix.from_diagonal(window, w)
    a = apply_channel(dm, 0.3, params)
    b = apply_deformed(dm, 0.3, params)
    assert np.array_equal(a.coeffs, b.coeffs)


def test_channel_commutes_with_free_evolution(params, window):
    rng = np.random.default_rng(23)
    dm = random_density(rng, window, 6)
    t = 1.234
    a = free_evolve(apply_channel(dm, 0.0, params), t, params)
    b = apply_channel(free_evolve(dm, t, params), 0.0, params)
    assert np.max(np.abs(a.coeffs - b.coeffs)) <= 1e-12


def test_channel_vs_oracle(params, window):
    rng = np.random.default_rng(24)
    for _ in range(10):
        dm = random_density(rng, window, 6)
        for alpha in (0.0, 0.3, 1.0):
            a = apply_channel(dm, alpha, params)
            b = channel_oracle(dm, alpha, params)
            assert np.linalg.norm(a.coeffs - b.coeffs, "nuc") <= 1e-10


def test_oracle_output_is_density(params, window):
    rng = np.random.default_rng(25)
    dm = random_density(rng, window, 6)
    out = channel_oracle(dm, 0.0, params)
    out.check_density()


def test_adjoint_fixes_identity(params, window):
    n = window.n_k
    for alpha in (0.0, 0.4, 1.0):
        out = adjoint_apply(np.eye(n), window, alpha, params)
        inner = out[2:n - 2, 2:n - 2]
        assert np.max(np.abs(inner - theta(alpha, params) * np.eye(n - 4))) <= 1e-15


def test_adjoint_duality(params, window):
    rng = np.random.default_rng(26)
    for alpha in (0.0, 0.3, 1.0):
        A = random_density(rng, window, 6)
        B = rng.normal(size=(window.n_k,) * 2) + 1j * rng.normal(size=(window.n_k,) * 2)
        lhs = np.trace(B @ apply_channel(A, alpha, params).coeffs)
        rhs = np.trace(adjoint_apply(B, window, alpha, params) @ A.coeffs)
        assert abs(lhs - rhs) <= 1e-10


def test_adjoint_matches_defining_partial_trace(params, window):
    # Tr_a (I (x) rho^{1-a}) e^{i tau H} (B (x) rho^a) e^{-i tau H}
    rng = np.random.default_rng(27)
    n = window.n_k
    gibbs = AtomGibbs.from_params(params)
    W = oracle_unitary(params.tau, params, window)
    for alpha in (0.0, 0.3, 1.0):
        B = random_interior_operator(rng, window, 6)
        joint = np.kron(gibbs.power(alpha), B)
        moved = W.conj().T @ joint @ W
        weighted = np.kron(gibbs.power(1.0 - alpha), np.eye(n)) @ moved
        reduced = weighted[:n, :n] + weighted[n:, n:]
        got = adjoint_apply(B, window, alpha, params)
        assert np.max(np.abs(got - reduced)) <= 1e-10


def test_adjoint_unital_positivity(params, window):
    rng = np.random.default_rng(28)
    g = rng.normal(size=(window.n_k,) * 2) + 1j * rng.normal(size=(window.n_k,) * 2)
    B = g @ g.conj().T
    out = adjoint_apply(B, window, 0.0, params)
    assert np.linalg.eigvalsh(0.5 * (out + out.conj().T))[0] >= -1e-10


def test_time_reversal_involution_and_fixed_points(params, window):
    rng = np.random.default_rng(29)
    A = rng.normal(size=(window.n_k,) * 2) + 1j * rng.normal(size=(window.n_k,) * 2)
    assert np.array_equal(time_reversal_conjugate(time_reversal_conjugate(A)), A)
    # operators real in the position basis have real eigenbasis coefficients
    R = rng.normal(size=(window.n_k,) * 2)
    assert np.array_equal(time_reversal_conjugate(R.astype(complex)), R.astype(complex))


def test_time_reversal_relates_adjoint_to_deformation(params, window):
    rng = np.random.default_rng(30)
    for alpha in (0.0, 0.5, 1.0):
        A = random_interior_operator(rng, window, 6)
        lhs = adjoint_apply(A, window, alpha, params)
        conj_in = ParticleDensityMatrix(window, time_reversal_conjugate(A))
        rhs = time_reversal_conjugate(apply_channel(conj_in, 1.0 - alpha, params).coeffs)
        assert np.max(np.abs(lhs - rhs)) <= 1e-10


def test_master_step_delta(params, window):
    kt = kraus_weights(params)
    pmf = np.zeros(window.n_k)
    i = window.k_index(0)
    pmf[i] = 1.0
    out = master_step(pmf, params)
    assert out[i - 1] == kt.p_minus and out[i] == kt.p_zero and out[i + 1] == kt.p_plus
    assert abs(out.sum() - 1.0) <= 1e-15


def test_master_step_equals_channel_diagonal(params, window):
    rng = np.random.default_rng(31)
    w = np.zeros(window.n_k)
    w[8:24] = rng.random(16)
    w /= w.sum()
    out_vec = master_step(w, params)
    out_dm = apply_channel(ParticleDensityMatrix.from_diagonal(window, w), 0.0, params)
    assert np.max(np.abs(out_vec - np.diagonal(out_dm.coeffs).real)) <= 1e-14


def test_master_step_edge_refusal(params, window):
    pmf = np.zeros(window.n_k)
    pmf[0] = 1.0
    with pytest.raises(WindowError):
        master_step(pmf, params)


def test_exponential_family_is_stationary_direction(params, window):
    kt = kraus_weights(params)
    be = params.beta * params.E
    k = window.k_values.astype(float)
    for a, b in ((1.0, 0.0), (0.3, 0.2), (0.0, 1.0)):
        w = a + b * np.exp(be * (k - k[-1]))   # shifted to avoid overflow
        ch = DeformedChannel.build(params, 0.0)
        out = ch.step_diagonal(w)
        rel = np.abs(out[1:-1] / w[1:-1] - 1.0)
        assert np.max(rel) <= 1e-13


def test_no_stationary_state(params):
    # the truncated master matrix is strictly substochastic: spectral radius < 1,
    # so no probability vector is stationary on any finite window
    kt = kraus_weights(params)
    for W in (3, 8, 21):
        M = np.zeros((W, W))
        for i in range(W):
            if i > 0:
                M[i, i - 1] = kt.p_plus
            M[i, i] = kt.p_zero
            if i < W - 1:
                M[i, i + 1] = kt.p_minus
        radius = np.max(np.abs(np.linalg.eigvals(M)))
        assert radius < 1.0 - 1e-6


def test_gauge_sectors_invariant(params, window):
    n = window.n_k
    for d_off in (0, 3, -2):
        A = np.zeros((n, n), dtype=complex)
        idx = np.arange(max(4, 4 - d_off), min(n - 4, n - 4 - d_off))
        A[idx, idx + d_off] = 1.0 + 0.5j
        out = apply_channel(ParticleDensityMatrix(window, A), 0.7, params)
        support = np.nonzero(out.coeffs)
        assert np.all(support[1] - support[0] == d_off)


def test_spectral_radius_growth_rate(params, window):
    rng = np.random.default_rng(32)
    for alpha in (0.25, 0.8):
        dm = random_density(rng, window, 4)
        th = theta(alpha, params)
        traces = [dm.trace()]
        for _ in range(8):
            dm = apply_deformed(dm, alpha, params)
            traces.append(dm.trace())
        rates = np.diff(np.log(traces))
        assert np.max(np.abs(rates - math.log(th))) <= 1e-8
