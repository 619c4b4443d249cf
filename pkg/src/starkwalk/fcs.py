"""Two-time measurement statistics of energy and position increments.

Energy: the reservoir energy and the particle energy are measured
projectively before the first and after the n-th interaction, on a
finite reservoir of M >= n atoms simulated brute force (joint unitary
product, no channel shortcut).  The entropy-like increments
dS_p = (beta E / F)(E_p' - E_p) and dS_env = -beta (E_env' - E_env)
coincide with probability one, their cumulant generating function is
n log theta(alpha), and the transient fluctuation theorem holds exactly
at every n.

Position: the position is measured at time 0 and time n tau.  The
first measurement dephases the state in the position basis; each
conditional position eigenstate then evolves with n reduced channel
steps.  Iterating the channel on position eigenprojectors is exactly a
trinomial walk followed by the free Bloch kernel (the free evolutions
commute with the kicks and collect at the end), which is how the
`reduced` method evaluates the protocol with relative accuracy deep in
the tails; the `matrix` method iterates the channel literally and is
used to cross-check the reduction at small n.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .bessel import bessel_j_array, bessel_table
from .channel import DeformedChannel, apply_channel
from .config import TOL
from .errors import BudgetError, WindowError
from .params import ModelParams
from .singleatom import oracle_unitary
from .state import (
    LatticeWindow,
    ParticleDensityMatrix,
    position_distribution,
    required_order,
    transform_matrix,
)
from .walk import scgf, walk_pmf_exact

MAX_WINDOW = 64
MAX_ATOMS = 4


@dataclass(frozen=True)
class ReservoirConfig:
    """Brute-force reservoir: M atoms, n <= M interactions, particle window."""

    params: ModelParams
    M: int
    n: int
    window: LatticeWindow

    def __post_init__(self):
        if self.n < 0 or self.M < 1:
            raise ValueError("need n >= 0 and M >= 1")
        if self.n > self.M:
            raise ValueError(f"n = {self.n} interactions exceed the M = {self.M} atoms")
        if self.window.n_k > MAX_WINDOW or self.M > MAX_ATOMS:
            raise BudgetError(
                f"brute-force budget is window <= {MAX_WINDOW}, M <= {MAX_ATOMS} "
                f"(got {self.window.n_k}, {self.M}); use the channel path for more"
            )

    @property
    def dim(self) -> int:
        return self.window.n_k << self.M


def _popcounts(M: int) -> np.ndarray:
    bits = np.arange(1 << M)
    return np.array([bin(b).count("1") for b in bits])


def step_unitary(cfg: ReservoirConfig, j: int) -> np.ndarray:
    """e^{-i tau H_j} on the joint space: atom j interacts, the others idle.

    Joint index = bits * n_k + k; idle excited atoms contribute free
    phases e^{-i tau E} each.
    """
    K = cfg.window.n_k
    W = oracle_unitary(cfg.params.tau, cfg.params, cfg.window)
    nbits = 1 << cfg.M
    mask_j = 1 << (cfg.M - 1 - j)
    idle_phase = np.exp(-1j * cfg.params.tau * cfg.params.E)
    U = np.zeros((cfg.dim, cfg.dim), dtype=complex)
    for bits in range(nbits):
        for bits2 in range(nbits):
            if (bits ^ bits2) & ~mask_j:
                continue
            a = 1 if bits & mask_j else 0
            a2 = 1 if bits2 & mask_j else 0
            idle_exc = bin(bits & ~mask_j).count("1")
            block = W[a * K:(a + 1) * K, a2 * K:(a2 + 1) * K]
            U[bits * K:(bits + 1) * K, bits2 * K:(bits2 + 1) * K] = idle_phase**idle_exc * block
    return U


def repeated_interaction_propagator(cfg: ReservoirConfig) -> np.ndarray:
    """U(n tau, 0) = e^{-i tau H_n} ... e^{-i tau H_1} on the joint space."""
    U = np.eye(cfg.dim, dtype=complex)
    for j in range(cfg.n):
        U = step_unitary(cfg, j) @ U
    return U


def step_hamiltonian(cfg: ReservoirConfig, j: int) -> np.ndarray:
    """H during the j-th interval: particle + all atoms + coupling to atom j."""
    from .singleatom import joint_hamiltonian

    K = cfg.window.n_k
    pair = joint_hamiltonian(cfg.params, cfg.window)  # (particle (x) one atom)
    nbits = 1 << cfg.M
    mask_j = 1 << (cfg.M - 1 - j)
    pops = _popcounts(cfg.M)
    H = np.zeros((cfg.dim, cfg.dim))
    for bits in range(nbits):
        for bits2 in range(nbits):
            if (bits ^ bits2) & ~mask_j:
                continue
            a = 1 if bits & mask_j else 0
            a2 = 1 if bits2 & mask_j else 0
            block = pair[a * K:(a + 1) * K, a2 * K:(a2 + 1) * K].copy()
            if bits == bits2:
                idle_exc = pops[bits & ~mask_j]
                block += cfg.params.E * idle_exc * np.eye(K)
            H[bits * K:(bits + 1) * K, bits2 * K:(bits2 + 1) * K] = block
    return H


def environment_weights(cfg: ReservoirConfig) -> np.ndarray:
    """Diagonal of rho_beta^{(x)M} over the atom-bit configurations."""
    g = math.exp(-cfg.params.beta * cfg.params.E)
    z = 1.0 + g
    pops = _popcounts(cfg.M)
    return g**pops / z**cfg.M


def environment_reduced_map(cfg: ReservoirConfig, A: np.ndarray,
                            alpha: float = 0.0) -> np.ndarray:
    """Brute-force deformed reduction: trace the reservoir out of U (A x rho^{1-a}) U*.

    For alpha = 0 this is the reduced Schroedinger dynamics after n
    interactions; for general alpha it must agree with n applications of
    the deformed channel.
    """
    K = cfg.window.n_k
    g = math.exp(-cfg.params.beta * cfg.params.E)
    z = 1.0 + g
    pops = _popcounts(cfg.M)
    # rho_beta^{1-alpha} and rho_beta^{alpha} are diagonal over bit configurations
    w_in = (g**pops) ** (1.0 - alpha) / z ** (cfg.M * (1.0 - alpha))
    w_out = (g**pops) ** alpha / z ** (cfg.M * alpha)
    U = repeated_interaction_propagator(cfg)
    joint = np.kron(np.diag(w_in.astype(complex)), np.asarray(A, dtype=complex))
    evolved = U @ joint @ U.conj().T
    out = np.zeros((K, K), dtype=complex)
    for bits in range(1 << cfg.M):
        out += w_out[bits] * evolved[bits * K:(bits + 1) * K, bits * K:(bits + 1) * K]
    return out


@dataclass(frozen=True)
class MeasurementRecord:
    """One (first outcome, second outcome) pair of the energy protocol."""

    e_particle_0: float
    e_env_0: float
    e_particle_1: float
    e_env_1: float
    ds_particle: float
    ds_env: float
    weight: float


@dataclass(frozen=True)
class EnergyFcsResult:
    """Joint law of the two-time energy measurement on the brute-force reservoir.

    prob4[i, m, j, m0] is the probability of first outcome (k_j, m0
    excited atoms) followed by second outcome (k_i, m excited atoms);
    k indices refer to window.k_values.
    """

    cfg: ReservoirConfig
    prob4: np.ndarray

    @property
    def beta_E(self) -> float:
        return self.cfg.params.beta * self.cfg.params.E

    def records(self, prune: float = 0.0) -> list[MeasurementRecord]:
        kv = self.cfg.window.k_values
        E, F = self.cfg.params.E, self.cfg.params.F
        be = self.beta_E
        out = []
        K, nm = self.prob4.shape[0], self.prob4.shape[1]
        for i in range(K):
            for m in range(nm):
                for j in range(K):
                    for m0 in range(nm):
                        w = self.prob4[i, m, j, m0]
                        if w <= prune:
                            continue
                        ep0, ep1 = 2.0 - F * kv[j], 2.0 - F * kv[i]
                        ee0, ee1 = E * m0, E * m
                        out.append(MeasurementRecord(
                            e_particle_0=ep0, e_env_0=ee0,
                            e_particle_1=ep1, e_env_1=ee1,
                            ds_particle=(be / F) * (ep1 - ep0),
                            ds_env=-self.cfg.params.beta * (ee1 - ee0),
                            weight=w))
        return out

    def total_weight(self) -> float:
        return float(np.sum(self.prob4))

    def increment_tables(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(mp, me, weight) arrays: dS_p = beta E * mp, dS_env = beta E * me."""
        K, nm = self.prob4.shape[0], self.prob4.shape[1]
        kv = self.cfg.window.k_values
        ks = np.broadcast_to(kv[None, None, :, None], self.prob4.shape)
        ke = np.broadcast_to(kv[:, None, None, None], self.prob4.shape)
        ms = np.broadcast_to(np.arange(nm)[None, None, None, :], self.prob4.shape)
        me_ = np.broadcast_to(np.arange(nm)[None, :, None, None], self.prob4.shape)
        mp = (ks - ke).ravel()          # k - k'
        me = (ms - me_).ravel()         # m - m'
        return mp, me, self.prob4.ravel()

    def off_diagonal_mass(self) -> float:
        mp, me, w = self.increment_tables()
        return float(np.sum(w[mp != me]))

    def entropy_distribution(self) -> tuple[np.ndarray, np.ndarray]:
        """Increments m with dS = beta E * m, and their probabilities.

        Trimmed to the carrying range (at most |m| <= n interactions).
        """
        mp, _, w = self.increment_tables()
        values = np.arange(mp.min(), mp.max() + 1)
        probs = np.zeros(values.size)
        np.add.at(probs, mp - mp.min(), w)
        live = np.nonzero(probs)[0]
        return values[live[0]:live[-1] + 1], probs[live[0]:live[-1] + 1]

    def mgf(self, alpha: float) -> float:
        """E[e^{alpha dS_n}] over the joint law."""
        m, probs = self.entropy_distribution()
        return float(np.dot(np.exp(alpha * self.beta_E * m), probs))

    def entropy_mean(self) -> float:
        m, probs = self.entropy_distribution()
        return self.beta_E * float(np.dot(m, probs))

    def entropy_variance(self) -> float:
        m, probs = self.entropy_distribution()
        mu = float(np.dot(m, probs))
        return self.beta_E**2 * float(np.dot((m - mu) ** 2, probs))

    def total_energy_change_mean(self) -> float:
        """Mean of (E_p' + E_env') - (E_p + E_env)."""
        mp, me, w = self.increment_tables()
        E, F = self.cfg.params.E, self.cfg.params.F
        return float(np.sum(w * (F * mp - E * me)))

    def max_total_energy_change(self) -> float:
        """Largest |energy change| carried by any outcome with real weight."""
        mp, me, w = self.increment_tables()
        E, F = self.cfg.params.E, self.cfg.params.F
        change = np.abs(F * mp - E * me).astype(float)
        return float(np.max(np.where(w > TOL.fcs_support, change, 0.0)))


def run_energy_fcs(cfg: ReservoirConfig, rho_p: ParticleDensityMatrix) -> EnergyFcsResult:
    """Exact two-time energy measurement statistics on the finite reservoir.

    The particle energy projections are the eigenbasis projectors (the
    ladder is nondegenerate for F > 0); reservoir levels are grouped by
    total excitation number.  The first measurement dephases rho_p in the
    eigenbasis; conditional states are diagonal, so only |U|^2 enters.
    """
    if rho_p.window != cfg.window:
        raise WindowError("rho_p window differs from the reservoir window")
    band = cfg.n + 1
    if rho_p.boundary_mass(band) > TOL.boundary:
        raise WindowError(f"rho_p support within {band} sites of the window edge")
    K = cfg.window.n_k
    pops = _popcounts(cfg.M)
    w_env = environment_weights(cfg)
    qk = np.diagonal(rho_p.coeffs).real

    U = repeated_interaction_propagator(cfg)
    W2 = np.abs(U) ** 2
    # starting states are diagonal, so outcome probabilities only mix |U|^2
    W2r = W2.reshape(1 << cfg.M, K, 1 << cfg.M, K)
    start = w_env[:, None] * qk[None, :]
    weighted = W2r * start[None, None, :, :]
    C = np.zeros((cfg.M + 1, 1 << cfg.M))
    C[pops, np.arange(1 << cfg.M)] = 1.0
    prob4 = np.einsum("aibj,ma,nb->imjn", weighted, C, C)
    return EnergyFcsResult(cfg=cfg, prob4=prob4)


def energy_cgf(n: int, alpha: float, params: ModelParams) -> float:
    """Cumulant generating function of dS_n: exactly n log theta(alpha)."""
    be = params.beta * params.E
    return n * scgf(-alpha * be, params)


def free_kernel(t: float, params: ModelParams,
                halfwidth: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """|<x+d| e^{-i t H_p} |x>|^2 = J_d((4/F) sin(F t / 2))^2.

    The free propagator is translation covariant up to phases, so the
    kernel depends only on the displacement d; the closed form follows
    from the generating function of the Bessel profile and is verified
    against the windowed transform in the test suite.
    """
    z = abs(4.0 / params.F * math.sin(0.5 * params.F * t))
    if halfwidth is None:
        be = params.beta * params.E
        halfwidth = int(math.ceil(3.0 * z)) + 80 + int(20.0 * be)
    j = bessel_j_array(z, halfwidth)
    half = j**2
    kernel = np.concatenate([half[:0:-1], half])
    d = np.arange(-halfwidth, halfwidth + 1)
    return d, kernel


@dataclass(frozen=True)
class PositionFcsResult:
    """Law of the position increment dX after n interactions."""

    n: int
    dx: np.ndarray
    probs: np.ndarray
    method: str

    def mean(self) -> float:
        return float(np.dot(self.dx, self.probs))

    def variance(self) -> float:
        m = self.mean()
        return float(np.dot((self.dx - m) ** 2, self.probs))

    def log_mgf(self, eta: float) -> float:
        # factor the largest exponent out so tails cannot overflow
        expo = eta * self.dx + np.log(np.where(self.probs > 0.0, self.probs, 1e-320))
        top = float(np.max(expo))
        return top + math.log(float(np.sum(np.exp(expo - top))))

    def window_probability(self, lo: float, hi: float) -> float:
        sel = (self.dx >= lo) & (self.dx <= hi)
        return float(np.sum(self.probs[sel]))

    def ft_log_ratio(self, v: float, delta: float, tau: float) -> float:
        """(1/n) log Q[dX/(n tau) in [-v-delta, -v+delta]] / Q[... in [v-delta, v+delta]]."""
        scale = self.n * tau
        num = self.window_probability(-scale * (v + delta), -scale * (v - delta))
        den = self.window_probability(scale * (v - delta), scale * (v + delta))
        return (math.log(num) - math.log(den)) / self.n


def run_position_fcs(n: int, rho_p: ParticleDensityMatrix, params: ModelParams,
                     method: str = "auto", prune: float = 1e-12) -> PositionFcsResult:
    """Distribution of the two-time position increment dX = x' - x.

    The first measurement dephases rho_p in the position basis; each
    conditional state |x><x| then evolves through n channel steps.  By
    translation covariance of the channel the conditional increment law
    does not depend on x, so dX is independent of the initial state
    (which is the content of the protocol's insensitivity to
    localization).

    method='reduced' (default for large n) evaluates the conditional
    evolution exactly: the kicks keep position eigenprojectors diagonal,
    giving the trinomial walk, and the deferred free evolutions
    contribute the Bloch kernel; the two laws convolve.  The tails keep
    relative accuracy, which direct matrix evolution cannot provide.
    method='matrix' iterates apply_channel literally on the conditional
    states (small n; used to validate the reduction).
    """
    if method == "auto":
        method = "matrix" if n <= 16 else "reduced"
    if method == "reduced":
        walk = walk_pmf_exact(n, params)
        d, kernel = free_kernel(n * params.tau, params)
        probs = np.convolve(walk.pmf, kernel)
        lo = -walk.n + d[0]
        dx = np.arange(lo, lo + probs.size)
        return PositionFcsResult(n=n, dx=dx, probs=probs, method="reduced")
    if method != "matrix":
        raise ValueError(f"unknown method {method!r}")

    window = rho_p.window
    table = bessel_table(params.F, required_order(window))
    xs, q = position_distribution(rho_p, table)
    span = window.n_x - 1
    dx = np.arange(-span, span + 1)
    probs = np.zeros(dx.size)
    skipped = 0.0
    for xi, qx in enumerate(q):
        if qx <= prune:
            # conditional states too light to evolve on this window;
            # accounted for and bounded by the leakage budget below
            skipped += max(qx, 0.0)
            continue
        cond = ParticleDensityMatrix.position_state(window, int(xs[xi]), table)
        for _ in range(n):
            cond = apply_channel(cond, 0.0, params)
        _, pmf = position_distribution(cond, table)
        # pmf index x' contributes to dX = x' - x
        probs[span - xi: 2 * span + 1 - xi] += qx * pmf
    if skipped > TOL.leakage:
        raise WindowError(
            f"pruned conditional weight {skipped:.3e} exceeds the leakage "
            f"budget {TOL.leakage:.1e}; enlarge the window or raise `prune`"
        )
    return PositionFcsResult(n=n, dx=dx, probs=probs, method="matrix")


class PositionCgf(NamedTuple):
    """Exact finite-n cumulant generating function and its per-step limit."""

    value: float        # g_n(eta) = log E[e^{eta dX_n}]
    rate_limit: float   # log theta(-eta / beta E) = lim g_n / n


def free_dressing_weights(n: int, params: ModelParams, window: LatticeWindow,
                          table) -> np.ndarray:
    """|<x| e^{i n tau H_p} |z>|^2 over the x-window, for the CGF dressing.

    The transform is real, so the complex propagator splits into two real
    matrix products.
    """
    psi = transform_matrix(window, table)
    arg = n * params.tau * params.F * window.k_values
    v_re = (psi * np.cos(arg)[None, :]) @ psi.T
    v_im = (psi * np.sin(arg)[None, :]) @ psi.T
    return v_re**2 + v_im**2


def position_cgf(n: int, eta: float, rho_p: ParticleDensityMatrix,
                 params: ModelParams, table=None,
                 dressing: np.ndarray | None = None) -> PositionCgf:
    """g_n(eta) evaluated exactly on the window through the deformed channel.

    Sandwiching the kicks between e^{+-eta X/2} turns the interaction-
    picture map into its deformation with exponent -eta, so

        g_n(eta) = log Tr[ Ldef^n(q) * Q_n(eta) ],

    where q is the position-dephased diagonal of rho_p (a classical
    weight vector, since the kicks preserve position diagonality) and
    Q_n(eta) = e^{-eta X/2} e^{i n tau H_p} e^{eta X} e^{-i n tau H_p} e^{-eta X/2}
    is the uniformly bounded free dressing, whose diagonal is computed
    from the windowed transform.
    """
    window = rho_p.window
    if table is None:
        table = bessel_table(params.F, required_order(window))
    xs, q = position_distribution(rho_p, table)

    ch = DeformedChannel.build(params, 0.0)
    gamma = -eta
    w_down = math.exp(gamma) * ch.triple.p_minus
    w_up = math.exp(-gamma) * ch.triple.p_plus
    w = q.copy()
    lost = 0.0
    for _ in range(n):
        lost += w_down * w[0] + w_up * w[-1]
        out = ch.triple.p_zero * w
        out[:-1] += w_down * w[1:]
        out[1:] += w_up * w[:-1]
        w = out
    total = float(np.sum(w))
    if lost > 1e-12 * total:
        raise WindowError(
            f"deformed weights leaked {lost:.3e} past the x-window "
            f"(total {total:.3e}); enlarge the window for n = {n}"
        )

    W2 = free_dressing_weights(n, params, window, table) if dressing is None else dressing
    # the dressing diagonal sum_z e^{eta (z-x)} |V_{xz}|^2 is restricted to the
    # band where |V|^2 sits above the matmul noise floor; the true kernel
    # decays superexponentially so the omitted tail is far below it
    band = max(20, min(80, int(25.0 / max(abs(eta), 0.25))))
    offsets = xs[None, :] - xs[:, None]
    mask = np.abs(offsets) <= band
    qdiag = np.sum(np.where(mask, W2 * np.exp(eta * offsets), 0.0), axis=1)

    value = math.log(float(np.dot(w, qdiag)))
    return PositionCgf(value=value, rate_limit=scgf(eta, params))
