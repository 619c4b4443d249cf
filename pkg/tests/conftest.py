"""Shared fixtures and independent oracles for the test suite.

The oracles here deliberately avoid the package's own code paths:
Bessel values come from the power series evaluated in 50-digit
arithmetic, propagators from scipy's expm on a directly assembled
Hamiltonian, and walk expectations from explicit enumeration.
"""
import math

import mpmath as mp
import numpy as np
import pytest

from starkwalk import JointDensityMatrix, LatticeWindow, ModelParams, ParticleDensityMatrix


@pytest.fixture
def params():
    return ModelParams(E=2.0, F=1.0, lam=0.5, tau=1.0, beta=1.0)


def bessel_series(nu: int, z: float, dps: int = 50) -> float:
    """Power-series oracle: J_nu(z) = sum (-1)^m (z/2)^{2m+nu} / (m! (m+nu)!)."""
    sign = 1.0
    if nu < 0:
        nu, sign = -nu, (-1.0) ** nu
    with mp.workdps(dps):
        half = mp.mpf(z) / 2
        total = mp.mpf(0)
        term_scale = half**nu
        for m in range(0, 200):
            term = (-1) ** m * half ** (2 * m) * term_scale / (mp.factorial(m) * mp.factorial(m + nu))
            total += term
            if m > 10 and abs(term) < mp.mpf(10) ** (-dps) * (abs(total) + 1):
                break
        return sign * float(total)


def direct_joint_hamiltonian(params: ModelParams, window: LatticeWindow) -> np.ndarray:
    """H = H_p + H_a + lam (T b* + T* b) assembled from first principles."""
    n = window.n_k
    S = np.eye(n, k=-1)          # translation in the eigenbasis
    Ek = np.diag(2.0 - params.F * window.k_values.astype(float))
    b = np.array([[0.0, 1.0], [0.0, 0.0]])
    H = (np.kron(np.eye(2), Ek)
         + np.kron(np.diag([0.0, params.E]), np.eye(n))
         + params.lam * (np.kron(b.T, S) + np.kron(b, S.T)))
    return H


def random_density(rng, window: LatticeWindow, half: int, center: int = 0) -> ParticleDensityMatrix:
    coeffs = np.zeros((window.n_k, window.n_k), dtype=complex)
    s = 2 * half + 1
    g = rng.normal(size=(s, s)) + 1j * rng.normal(size=(s, s))
    block = g @ g.conj().T
    block /= np.trace(block).real
    i0 = window.k_index(center - half)
    coeffs[i0:i0 + s, i0:i0 + s] = block
    return ParticleDensityMatrix(window, coeffs)


def random_joint(rng, window: LatticeWindow, half: int) -> JointDensityMatrix:
    n = window.n_k
    coeffs = np.zeros((2 * n, 2 * n), dtype=complex)
    s = 2 * half + 1
    g = rng.normal(size=(2 * s, 2 * s)) + 1j * rng.normal(size=(2 * s, 2 * s))
    block = g @ g.conj().T
    block /= np.trace(block).real
    i0 = window.k_index(-half)
    idx = np.concatenate([np.arange(i0, i0 + s), n + np.arange(i0, i0 + s)])
    coeffs[np.ix_(idx, idx)] = block
    return JointDensityMatrix(window, coeffs)


def random_interior_operator(rng, window: LatticeWindow, half: int) -> np.ndarray:
    """Arbitrary (non-Hermitian) operator supported on |k| <= half."""
    n = window.n_k
    A = np.zeros((n, n), dtype=complex)
    s = 2 * half + 1
    i0 = window.k_index(-half)
    A[i0:i0 + s, i0:i0 + s] = rng.normal(size=(s, s)) + 1j * rng.normal(size=(s, s))
    return A
