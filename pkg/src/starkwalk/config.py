"""Numerical tolerances, collected in one place.

Every check in the package and in the verification suite reads its
threshold from this record, so a tolerance is never hard-coded at the
point of use.  All arithmetic is IEEE double precision.
"""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # state invariants
    hermiticity: float = 1e-12
    trace: float = 1e-10
    psd_min_eig: float = -1e-10
    leakage: float = 1e-8          # transformed mass allowed outside the window
    boundary: float = 1e-10        # occupancy at the window edge before an op refuses

    # special functions
    bessel_normalization: float = 1e-12
    bessel_vs_series: float = 1e-12

    # channel / propagator cross-checks
    channel_oracle: float = 1e-10
    propagator_agreement: float = 1e-10
    adjoint_duality: float = 1e-10
    time_reversal: float = 1e-10
    theta_symmetry: float = 1e-12
    theta_kraus_identity: float = 1e-13
    master_vs_channel: float = 1e-14

    # random walk statistics
    walk_moments_rel: float = 1e-10
    walk_cgf_rel: float = 1e-10
    fluctuation_rel: float = 1e-10
    rate_match: float = 1e-8
    scgf_symmetry: float = 1e-12
    clt_kolmogorov: float = 0.02
    ldp_abs: float = 0.05
    einstein: float = 1e-6

    # counting statistics
    fcs_support: float = 1e-12
    fcs_mgf_rel: float = 1e-8
    conservation_commutator: float = 1e-12
    energy_conservation: float = 1e-12
    energy_rate: float = 1e-6
    position_cgf_gap: float = 0.02

    # single-atom dynamics
    position_oracle: float = 1e-9
    quasi_periodic_fit: float = 1e-8
    rabi_factorization: float = 1e-12


TOL = Tolerances()
