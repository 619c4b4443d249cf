"""The reduced particle dynamics and its exponential deformations.

One interaction reduces, after tracing out the atom, to a three-term
Kraus map: shift the state down one eigenbasis index with weight p_minus,
leave it with weight p_0 = 1 - p, shift it up with weight p_plus.  The
alpha-deformed version reweights the two shifts by e^{+-alpha beta E};
its trace growth rate theta(alpha) is the kernel of all the counting
statistics downstream.  Every closed-form step here is cross-checkable
against `channel_oracle`, which evaluates the defining partial trace with
the single-atom propagator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import TOL
from .errors import WindowError
from .params import ModelParams, derive_params
from .singleatom import AtomGibbs, JointDensityMatrix, propagate_oracle
from .state import LatticeWindow, ParticleDensityMatrix, free_evolve, require_interior


@dataclass(frozen=True)
class KrausTriple:
    """Jump weights of one reduced interaction: (down, stay, up)."""

    p_minus: float
    p_zero: float
    p_plus: float

    def as_array(self) -> np.ndarray:
        return np.array([self.p_minus, self.p_zero, self.p_plus])


def kraus_weights(params: ModelParams) -> KrausTriple:
    """Jump weights p_-, p_0, p_+ with p_+- = p e^{-+beta E/2} / (2 cosh(beta E/2))."""
    d = derive_params(params)
    g = math.exp(-params.beta * params.E)
    return KrausTriple(p_minus=d.p * g / (1.0 + g),
                       p_zero=1.0 - d.p,
                       p_plus=d.p / (1.0 + g))


def theta(alpha: float, params: ModelParams) -> float:
    """Trace growth rate of the deformed map.

    theta(alpha) = (1 - p) + p cosh((1/2 - alpha) beta E) / cosh(beta E / 2),
    evaluated through cosh directly so that the identity
    theta(alpha) = e^{alpha beta E} p_- + p_0 + e^{-alpha beta E} p_+
    remains a genuine cross-check against kraus_weights.
    """
    d = derive_params(params)
    be = params.beta * params.E
    return (1.0 - d.p) + d.p * math.cosh((0.5 - alpha) * be) / math.cosh(0.5 * be)


def _shift(coeffs: np.ndarray, direction: int) -> np.ndarray:
    """Conjugation by the translation: both indices move by `direction`."""
    out = np.zeros_like(coeffs)
    if direction == 1:
        out[1:, 1:] = coeffs[:-1, :-1]
    else:
        out[:-1, :-1] = coeffs[1:, 1:]
    return out


def _deformed_weights(gamma: float, triple: KrausTriple) -> tuple[float, float, float]:
    """(down, stay, up) weights of the deformation with exponent gamma = alpha beta E."""
    return (math.exp(gamma) * triple.p_minus,
            triple.p_zero,
            math.exp(-gamma) * triple.p_plus)


@dataclass(frozen=True)
class DeformedChannel:
    """The deformed reduced map for a fixed alpha, with precomputed weights."""

    params: ModelParams
    alpha: float
    triple: KrausTriple
    w_down: float
    w_stay: float
    w_up: float

    @classmethod
    def build(cls, params: ModelParams, alpha: float) -> "DeformedChannel":
        triple = kraus_weights(params)
        gamma = alpha * params.beta * params.E
        w_down, w_stay, w_up = _deformed_weights(gamma, triple)
        return cls(params, alpha, triple, w_down, w_stay, w_up)

    def theta(self) -> float:
        return theta(self.alpha, self.params)

    def apply_interaction_array(self, coeffs: np.ndarray) -> np.ndarray:
        return (self.w_down * _shift(coeffs, -1)
                + self.w_stay * coeffs
                + self.w_up * _shift(coeffs, +1))

    def adjoint_interaction_array(self, coeffs: np.ndarray) -> np.ndarray:
        return (self.w_down * _shift(coeffs, +1)
                + self.w_stay * coeffs
                + self.w_up * _shift(coeffs, -1))

    def step_diagonal(self, weights: np.ndarray) -> np.ndarray:
        """Action on a diagonal (classical) weight vector; exact positive arithmetic."""
        w = np.asarray(weights, dtype=float)
        out = self.w_stay * w
        out[:-1] += self.w_down * w[1:]
        out[1:] += self.w_up * w[:-1]
        return out


def apply_deformed(dm: ParticleDensityMatrix, alpha: float,
                   params: ModelParams) -> ParticleDensityMatrix:
    """One deformed interaction-picture step (no free evolution).

    Refuses with WindowError when support touches the boundary: mass is
    never silently truncated.
    """
    require_interior(dm, band=1)
    ch = DeformedChannel.build(params, alpha)
    return ParticleDensityMatrix(dm.window, ch.apply_interaction_array(dm.coeffs))


def apply_channel(dm: ParticleDensityMatrix, alpha: float,
                  params: ModelParams) -> ParticleDensityMatrix:
    """One full reduced step: free evolution over tau, then the deformed kicks."""
    return apply_deformed(free_evolve(dm, params.tau, params), alpha, params)


def channel_oracle(dm: ParticleDensityMatrix, alpha: float,
                   params: ModelParams) -> ParticleDensityMatrix:
    """The defining partial-trace evaluation of the deformed reduced map.

    Builds rho (x) rho_beta^{1-alpha}, conjugates with the sector-block
    propagator over one interaction, multiplies by I (x) rho_beta^{alpha}
    and traces out the atom.  Entirely independent of the Kraus route.
    """
    gibbs = AtomGibbs.from_params(params)
    joint = JointDensityMatrix.product(dm, gibbs.power(1.0 - alpha))
    evolved = propagate_oracle(joint, params.tau, params)
    weighted = JointDensityMatrix(
        dm.window, np.kron(gibbs.power(alpha), np.eye(dm.window.n_k)) @ evolved.coeffs)
    return weighted.partial_trace_atom()


def adjoint_apply(B: np.ndarray, window: LatticeWindow, alpha: float,
                  params: ModelParams) -> np.ndarray:
    """Heisenberg-picture counterpart: adjoint Kraus step, then inverse free phases.

    On interior entries the identity observable satisfies
    adjoint(I) = theta(alpha) I exactly.
    """
    ch = DeformedChannel.build(params, alpha)
    out = ch.adjoint_interaction_array(np.asarray(B, dtype=complex))
    u = np.exp(1j * params.tau * params.F * window.k_values)
    return u.conj()[:, None] * out * u[None, :]


def time_reversal_conjugate(A: np.ndarray) -> np.ndarray:
    """Entrywise complex conjugation in the position basis.

    The eigenfunctions are real in the position representation, so the
    induced antilinear map conjugates eigenbasis coefficients entrywise.
    """
    return np.conj(np.asarray(A))


def master_step(pmf: np.ndarray, params: ModelParams) -> np.ndarray:
    """Classical Markov step on eigenbasis-diagonal states.

    p_k -> p_+ p_{k-1} + p_0 p_k + p_- p_{k+1}; coincides exactly with the
    diagonal of apply_channel on the matching diagonal density matrix.
    """
    pmf = np.asarray(pmf, dtype=float)
    edge = max(abs(pmf[0]), abs(pmf[-1]))
    if edge > TOL.boundary:
        raise WindowError(f"pmf occupies the window edge (mass {edge:.3e})")
    return DeformedChannel.build(params, 0.0).step_diagonal(pmf)
