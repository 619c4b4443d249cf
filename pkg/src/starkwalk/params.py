"""Physical inputs and the scalar constants derived from them."""
from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class ModelParams:
    """The five inputs of the model.

    E    -- Bohr frequency of the two-level atoms (energy, >= 0)
    F    -- static tilt force on the lattice (energy, > 0)
    lam  -- particle-atom coupling constant (energy, real)
    tau  -- duration of one interaction (inverse energy, > 0)
    beta -- inverse temperature of the atoms (inverse energy, >= 0)
    """

    E: float
    F: float
    lam: float
    tau: float
    beta: float

    def __post_init__(self):
        if not self.F > 0.0:
            raise ValueError(
                "F must be > 0: the untilted (F=0) band has continuous "
                "spectrum and is outside the scope of this package"
            )
        if not self.tau > 0.0:
            raise ValueError("tau must be > 0")
        if self.E < 0.0:
            raise ValueError("E must be >= 0")
        if self.beta < 0.0:
            raise ValueError("beta must be >= 0")


@dataclass(frozen=True)
class DerivedParams:
    """Scalars derived from ModelParams.

    omega0        -- Rabi frequency sqrt((E-F)^2 + 4 lam^2)
    p             -- jump probability per interaction, in [0, 1]
    cos2theta     -- (E-F)/omega0 (mixing angle), 1 when omega0 == 0
    sin2theta     -- 2 lam/omega0, 0 when omega0 == 0
    zbeta         -- atomic partition function 1 + exp(-beta E)
    gibbs_excited -- thermal weight of the excited atom state
    bloch_freq    -- Bloch frequency of the free oscillation (= F)
    resonant      -- True when p == 0 (lam == 0 or omega0 tau in 2 pi Z)
    """

    omega0: float
    p: float
    cos2theta: float
    sin2theta: float
    zbeta: float
    gibbs_excited: float
    bloch_freq: float
    resonant: bool

    @property
    def gibbs_ground(self) -> float:
        return 1.0 / self.zbeta


def derive_params(raw: ModelParams) -> DerivedParams:
    """Evaluate all derived scalars for a valid ModelParams."""
    delta = raw.E - raw.F
    omega0 = math.hypot(delta, 2.0 * raw.lam)
    if omega0 > 0.0:
        cos2 = delta / omega0
        sin2 = 2.0 * raw.lam / omega0
        # p = (4 lam^2/omega0^2) sin^2(omega0 tau/2); this grouping keeps p <= 1 exactly
        p = (sin2 * math.sin(0.5 * omega0 * raw.tau)) ** 2
    else:
        # lam == 0 and E == F: the coupling vanishes and H is diagonal
        cos2, sin2, p = 1.0, 0.0, 0.0
    zbeta = 1.0 + math.exp(-raw.beta * raw.E)
    return DerivedParams(
        omega0=omega0,
        p=p,
        cos2theta=cos2,
        sin2theta=sin2,
        zbeta=zbeta,
        gibbs_excited=math.exp(-raw.beta * raw.E) / zbeta,
        bloch_freq=raw.F,
        resonant=(p == 0.0),
    )
