"""Self-verification suite: every headline identity at its pinned tolerance.

Each check pits a closed-form object against an independent route
(partial-trace oracle, sector-block exponential, log-space convolution,
brute-force reservoir, finite differences) and reports the measured
error next to the tolerance it must beat.  `run_all` powers both the
acceptance tests and the `verify-all` CLI experiment.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from . import fcs as fcs_mod
from .bessel import bessel_table
from .channel import apply_channel, channel_oracle, kraus_weights, theta
from .config import TOL, Tolerances
from .params import ModelParams, derive_params
from .singleatom import (
    JointDensityMatrix,
    AtomGibbs,
    oracle_unitary,
    position_expectation,
    position_motion_bound,
    propagate_closed,
    propagate_oracle,
)
from .state import LatticeWindow, ParticleDensityMatrix, position_operator, required_order
from .walk import (
    log_convolve_step,
    log_step_kernel,
    rate_function,
    rate_function_numeric,
    sample_walk,
    transport_coefficients,
    walk_pmf_exact,
)

CHECK_PARAMS = ModelParams(E=2.0, F=1.0, lam=0.5, tau=1.0, beta=1.0)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"  [{self.detail}]" if self.detail else ""
        return (f"{status}  {self.name}: measured {self.measured:.3e} "
                f"vs tolerance {self.tolerance:.3e}{extra}")


def _random_density(rng, window: LatticeWindow, half: int) -> ParticleDensityMatrix:
    """Random full-rank density matrix supported on |k| <= half."""
    coeffs = np.zeros((window.n_k, window.n_k), dtype=complex)
    s = 2 * half + 1
    g = rng.normal(size=(s, s)) + 1j * rng.normal(size=(s, s))
    block = g @ g.conj().T
    block /= np.trace(block).real
    i0 = window.k_index(-half)
    coeffs[i0:i0 + s, i0:i0 + s] = block
    return ParticleDensityMatrix(window, coeffs)


def _random_joint(rng, window: LatticeWindow, half: int) -> JointDensityMatrix:
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


def check_channel_oracle(tol: Tolerances = TOL) -> CheckResult:
    """1. Kraus route vs the defining partial trace, 20 states x 3 alphas."""
    params = CHECK_PARAMS
    window = LatticeWindow(-32, 31, -32, 31)
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(20):
        dm = _random_density(rng, window, 10)
        for alpha in (0.0, 0.3, 1.0):
            a = apply_channel(dm, alpha, params)
            b = channel_oracle(dm, alpha, params)
            worst = max(worst, float(np.linalg.norm(a.coeffs - b.coeffs, "nuc")))
    return CheckResult("channel vs partial-trace oracle", worst <= tol.channel_oracle,
                       worst, tol.channel_oracle, "trace-norm distance")


def check_propagator(tol: Tolerances = TOL) -> CheckResult:
    """2. Closed-form propagator vs sector-block exponentials."""
    params = CHECK_PARAMS
    window = LatticeWindow(-24, 23, -24, 23)
    rng = np.random.default_rng(12)
    worst = 0.0
    for _ in range(20):
        state = _random_joint(rng, window, 8)
        for t in (0.1, params.tau, 3.0 * params.tau):
            a = propagate_closed(state, t, params)
            b = propagate_oracle(state, t, params)
            worst = max(worst, float(np.max(np.abs(a.coeffs - b.coeffs))))
    return CheckResult("closed propagator vs 2x2 oracle", worst <= tol.propagator_agreement,
                       worst, tol.propagator_agreement)


def check_theta_identities(tol: Tolerances = TOL) -> CheckResult:
    """3. theta(0) = theta(1) = 1, theta(1-a) = theta(a), Kraus identity."""
    params = CHECK_PARAMS
    triple = kraus_weights(params)
    be = params.beta * params.E
    grid = np.arange(-2.0, 3.0001, 0.05)
    worst_sym = max(abs(theta(0.0, params) - 1.0), abs(theta(1.0, params) - 1.0))
    worst_kraus = 0.0
    for a in grid:
        worst_sym = max(worst_sym, abs(theta(1.0 - a, params) - theta(a, params)))
        viak = (math.exp(a * be) * triple.p_minus + triple.p_zero
                + math.exp(-a * be) * triple.p_plus)
        worst_kraus = max(worst_kraus, abs(theta(a, params) - viak))
    passed = worst_sym <= tol.theta_symmetry and worst_kraus <= tol.theta_kraus_identity
    return CheckResult("theta symmetry and Kraus identity", passed,
                       max(worst_sym, worst_kraus), tol.theta_symmetry,
                       f"kraus defect {worst_kraus:.2e} vs {tol.theta_kraus_identity:.0e}")


def check_transport(tol: Tolerances = TOL) -> CheckResult:
    """4. Exact walk moments at n in {1, 50}; Monte Carlo mean within 4 sigma."""
    params = CHECK_PARAMS
    tc = transport_coefficients(params)
    worst = 0.0
    for n in (1, 50):
        law = walk_pmf_exact(n, params)
        mean_err = abs(law.mean() - n * tc.v_d * params.tau) / (n * tc.v_d * params.tau)
        var_err = abs(law.variance() - n * 2.0 * tc.D * params.tau) / (n * 2.0 * tc.D * params.tau)
        worst = max(worst, mean_err, var_err)
    n, trials = 10_000, 100_000
    sample = sample_walk(n, trials, seed=7, params=params)
    dev = abs(sample.mean() / (n * params.tau) - tc.v_d)
    bound = 4.0 * math.sqrt(2.0 * tc.D / (n * params.tau * trials))
    passed = worst <= tol.walk_moments_rel and dev <= bound
    return CheckResult("transport coefficients vs walk moments", passed, worst,
                       tol.walk_moments_rel,
                       f"MC deviation {dev:.2e} vs 4-sigma {bound:.2e}")


def check_clt(tol: Tolerances = TOL) -> CheckResult:
    """5. Kolmogorov distance of the standardized exact pmf at n = 10^4."""
    params = CHECK_PARAMS
    tc = transport_coefficients(params)
    n = 10_000
    law = walk_pmf_exact(n, params)
    mu = tc.v_d * n * params.tau
    sigma = math.sqrt(2.0 * tc.D * n * params.tau)
    z = (law.support - mu) / sigma
    cdf = np.cumsum(law.pmf)
    phi = ndtr(z)
    dist = float(np.max(np.maximum(np.abs(cdf - phi),
                                   np.abs(np.concatenate([[0.0], cdf[:-1]]) - phi))))
    return CheckResult("central limit theorem (Kolmogorov)", dist <= tol.clt_kolmogorov,
                       dist, tol.clt_kolmogorov)


def check_ldp(tol: Tolerances = TOL) -> CheckResult:
    """6. LDP errors at n = 800 small and monotone in n; closed vs numeric rate."""
    params = CHECK_PARAMS
    tc = transport_coefficients(params)
    xs = [-0.3, 0.0, 0.3, tc.v_d * params.tau]
    errs = {}
    laws = {n: walk_pmf_exact(n, params) for n in (200, 400, 800)}
    for n, law in laws.items():
        with np.errstate(divide="ignore"):
            logp = np.log(law.pmf)
        for x in xs:
            k = round(x * n)
            errs[(n, x)] = abs(-logp[k + n] / n - rate_function(x, params))
    worst800 = max(errs[(800, x)] for x in xs)
    monotone = all(errs[(200, x)] >= errs[(400, x)] >= errs[(800, x)] for x in xs)
    grid = np.linspace(-0.999, 0.999, 401)
    rate_gap = max(abs(rate_function(float(x), params) - rate_function_numeric(float(x), params))
                   for x in grid)
    passed = worst800 <= tol.ldp_abs and monotone and rate_gap <= tol.rate_match
    return CheckResult("large deviations rate", passed, worst800, tol.ldp_abs,
                       f"monotone={monotone}, closed-vs-numeric {rate_gap:.2e}")


def check_fluctuation(tol: Tolerances = TOL) -> CheckResult:
    """7. Exact walk fluctuation symmetry for all n <= 200; energy FT at n <= 3."""
    params = CHECK_PARAMS
    be = params.beta * params.E
    logk = log_step_kernel(params)
    logp = np.array([0.0])
    worst = 0.0
    for n in range(1, 201):
        logp = log_convolve_step(logp, logk)
        k = np.arange(1, n + 1)
        defect = np.abs(logp[n - k] - (logp[n + k] - be * k))
        worst = max(worst, float(np.max(defect)))

    worst_energy = 0.0
    window = LatticeWindow(-16, 15, -16, 15)
    rho = ParticleDensityMatrix.eigenstate(window, 0)
    for n in (1, 2, 3):
        cfg = fcs_mod.ReservoirConfig(params=params, M=3, n=n, window=window)
        result = fcs_mod.run_energy_fcs(cfg, rho)
        m, probs = result.entropy_distribution()
        # P[dS = -sigma] = e^{sigma} P[dS = sigma]: negative increments dominate
        for j in range(1, n + 1):
            pj = probs[np.searchsorted(m, j)]
            pmj = probs[np.searchsorted(m, -j)]
            worst_energy = max(worst_energy,
                               abs(pmj / (math.exp(be * j) * pj) - 1.0))
    passed = worst <= tol.fluctuation_rel and worst_energy <= tol.fluctuation_rel
    return CheckResult("fluctuation identities", passed, max(worst, worst_energy),
                       tol.fluctuation_rel,
                       f"walk log-defect {worst:.2e}, energy FT {worst_energy:.2e}")


def check_energy_fcs(tol: Tolerances = TOL) -> CheckResult:
    """8. Brute force M = n = 3: diagonal support and E[e^{a dS}] = theta(a)^n."""
    params = CHECK_PARAMS
    window = LatticeWindow(-16, 15, -16, 15)
    rho = ParticleDensityMatrix.eigenstate(window, 0)
    cfg = fcs_mod.ReservoirConfig(params=params, M=3, n=3, window=window)
    result = fcs_mod.run_energy_fcs(cfg, rho)
    off = result.off_diagonal_mass()
    worst = 0.0
    for alpha in (-1.0, 0.0, 0.5, 1.0, 2.0):
        target = theta(alpha, params) ** cfg.n
        worst = max(worst, abs(result.mgf(alpha) / target - 1.0))
    passed = off <= tol.fcs_support and worst <= tol.fcs_mgf_rel
    return CheckResult("energy counting statistics", passed, worst, tol.fcs_mgf_rel,
                       f"off-diagonal mass {off:.2e}")


def check_position_fcs(tol: Tolerances = TOL) -> CheckResult:
    """9. (1/n) g_n within 0.02 of the limit at n = 500; FT ratio bracket."""
    params = CHECK_PARAMS
    n = 500
    window = LatticeWindow.for_dynamics(0, 0, steps=n + 40, F=params.F)
    table = bessel_table(params.F, required_order(window))
    rho = ParticleDensityMatrix.eigenstate(window, 0)
    dressing = fcs_mod.free_dressing_weights(n, params, window, table)
    worst_gap = 0.0
    for eta in (-0.5, 0.5):
        g = fcs_mod.position_cgf(n, eta, rho, params, table=table, dressing=dressing)
        worst_gap = max(worst_gap, abs(g.value / n - g.rate_limit))

    small = LatticeWindow(-8, 7, -8, 7)
    dist = fcs_mod.run_position_fcs(n, ParticleDensityMatrix.eigenstate(small, 0),
                                    params, method="reduced")
    v, delta = 0.1, 0.02
    ratio = dist.ft_log_ratio(v, delta, params.tau)
    be = params.beta * params.E
    in_bracket = -be * (v + delta) <= ratio <= -be * (v - delta)
    passed = worst_gap <= tol.position_cgf_gap and in_bracket
    return CheckResult("position counting statistics", passed, worst_gap,
                       tol.position_cgf_gap,
                       f"FT ratio {ratio:.4f} in [{-be*(v+delta):.2f}, {-be*(v-delta):.2f}]: {in_bracket}")


def check_einstein(tol: Tolerances = TOL) -> CheckResult:
    """10. Einstein relation D beta / mu = 1 on the E = F line at F = 1e-3."""
    params = ModelParams(E=1e-3, F=1e-3, lam=0.3, tau=1.0, beta=1.0)
    tc = transport_coefficients(params)
    defect = abs(tc.D * params.beta / tc.mobility - 1.0)
    return CheckResult("Einstein relation", defect <= tol.einstein, defect, tol.einstein)


def check_energy_bookkeeping(tol: Tolerances = TOL) -> CheckResult:
    """11. Total energy: rate (E-F) v_d tau off resonance, exact conservation at E = F."""
    window = LatticeWindow(-16, 15, -16, 15)
    rho = ParticleDensityMatrix.eigenstate(window, 0)

    params = CHECK_PARAMS
    tc = transport_coefficients(params)
    cfg = fcs_mod.ReservoirConfig(params=params, M=3, n=3, window=window)
    result = fcs_mod.run_energy_fcs(cfg, rho)
    rate_err = abs(result.total_energy_change_mean() / cfg.n
                   - (params.E - params.F) * tc.v_d * params.tau)

    balanced = ModelParams(E=1.0, F=1.0, lam=0.5, tau=1.0, beta=1.0)
    cfg_b = fcs_mod.ReservoirConfig(params=balanced, M=3, n=3, window=window)
    conins = fcs_mod.run_energy_fcs(cfg_b, rho).max_total_energy_change()
    passed = rate_err <= tol.energy_rate and conins <= tol.energy_conservation
    return CheckResult("energy bookkeeping", passed, rate_err, tol.energy_rate,
                       f"E=F conservation defect {conins:.2e}")


def check_boundedness(tol: Tolerances = TOL) -> CheckResult:
    """12. Single-atom <X(t)> within the closed-form bound and equal to the oracle."""
    params = CHECK_PARAMS
    window = LatticeWindow(-24, 23, -24, 23)
    n = window.n_k
    # particle state with coherence between neighbouring rungs, atom thermal
    vec = np.zeros(n, dtype=complex)
    vec[window.k_index(0)] = 1.0 / math.sqrt(2.0)
    vec[window.k_index(1)] = 1.0 / math.sqrt(2.0)
    rho_p = ParticleDensityMatrix(window, np.outer(vec, vec.conj()))
    state = JointDensityMatrix.product(rho_p, AtomGibbs.from_params(params).density())

    xop = np.kron(np.eye(2), position_operator(window, params.F))
    bound = position_motion_bound(params)
    x0 = position_expectation(0.0, state, params)
    worst_dev, worst_excess = 0.0, -math.inf
    for t in np.linspace(0.0, 50.0 * params.tau, 201):
        xt = position_expectation(float(t), state, params)
        W = oracle_unitary(float(t), params, window)
        evolved = W @ state.coeffs @ W.conj().T
        oracle = float(np.trace(xop @ evolved).real)
        worst_dev = max(worst_dev, abs(xt - oracle))
        worst_excess = max(worst_excess, abs(xt - x0) - bound)
    passed = worst_dev <= tol.position_oracle and worst_excess <= 0.0
    return CheckResult("single-atom boundedness", passed, worst_dev, tol.position_oracle,
                       f"max |<X>-<X_0>| - bound = {worst_excess:.3f}")


ALL_CHECKS = [
    ("channel-oracle", check_channel_oracle),
    ("propagator", check_propagator),
    ("theta", check_theta_identities),
    ("transport", check_transport),
    ("clt", check_clt),
    ("ldp", check_ldp),
    ("fluctuation", check_fluctuation),
    ("energy-fcs", check_energy_fcs),
    ("position-fcs", check_position_fcs),
    ("einstein", check_einstein),
    ("energy-bookkeeping", check_energy_bookkeeping),
    ("boundedness", check_boundedness),
]


def run_all(tol: Tolerances = TOL) -> list[CheckResult]:
    return [fn(tol) for _, fn in ALL_CHECKS]
