"""Model constants, state layout and the prescribed mechanical stimulus.

Units are fixed throughout the toolkit: time in hours, lengths in
micrometres, substance in mol. Cell densities are per square micrometre
(the simulations are two-dimensional), concentrations and the matrix
density in mol per square micrometre.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

# Order of the five state components everywhere (solvers, CSV columns).
STATE_FIELDS = ("c1", "c2", "chi", "h", "tau")
CHI_INDEX = STATE_FIELDS.index("chi")

# Provenance labels used in config echo output.
PROV_PAPER = "paper-default"
PROV_ASSUMED = "assumed"
PROV_USER = "user"

# Parameters whose published value does not exist; their defaults are
# working assumptions and are flagged as such in every config echo.
ASSUMED_PARAMS = ("chi_c",)
OPTIONAL_PARAMS = ("k_minus", "lambda11")


@dataclass(frozen=True)
class ParameterSet:
    """All model constants; defaults are the benchmark values.

    ``chi_c`` has no published value. The default 5e-4 mol/um^2 places the
    Hill midpoint of the medium response at half the typical initial medium
    concentration so that both differentiation regimes are exercised; it is
    an assumption, not a reference value. ``k_minus`` and ``lambda11`` are
    likewise unpublished and default to None; they are only required when
    the full taxis mobility is requested.
    """

    beta: float = 0.5 / 3        # hMSC growth rate, 1/h
    s1: float = 30.0             # hMSC speed, um/h
    s2: float = 12.0             # chondrocyte speed, um/h
    omega1: float = 30.0         # velocity weight of hMSCs (only the ratio enters)
    omega2: float = 12.0         # velocity weight of chondrocytes
    delta1: float = 3.3          # ECM uptake rate by hMSCs, 1/h
    delta2: float = 330.0        # ECM production rate by chondrocytes, mol/h
    S_min: float = 1.0           # lower stimulus threshold, dimensionless
    S_max: float = 3.0           # upper stimulus threshold, dimensionless
    alpha1_min: float = 0.025    # differentiation rate floor, 1/h
    alpha1_max: float = 0.05     # differentiation rate plateau, 1/h
    alpha2_max: float = 0.05     # dedifferentiation rate cap, 1/h
    a_chi: float = 3.18          # medium uptake rate, 1/h
    gamma1: float = 3.3          # hyaluron uptake rate by hMSCs, 1/h
    gamma2: float = 1.0          # hyaluron uptake rate by chondrocytes, 1/h
    gamma3: float = 3.307e-3     # hyaluron expression rate, 1/h
    D_chi: float = 1e6           # medium diffusivity, um^2/h
    k1p_over_H: float = 5.0      # hyaluron attachment rate over reference density, um^2/(h mol)
    k2p_over_K: float = 1.0      # ECM attachment rate over reference density, um^2/h
    C1_star: float = 3.024e-3    # hMSC carrying capacity, 1/um^2
    C2_star: float = 3.024e-3    # chondrocyte carrying capacity, 1/um^2
    lambda10: float = 9e-4       # hMSC turning rate, 1/h
    lambda2: float = 1.44e-4     # chondrocyte turning rate, 1/h
    chi_c: float = 5e-4          # Hill midpoint of the medium response, mol/um^2 (assumed)
    k_minus: float | None = None   # detachment rate, 1/h (no published value)
    lambda11: float | None = None  # taxis turning rate, 1/h (no published value)

    def __post_init__(self):
        # Strictly positive: anything that appears in a denominator or scales
        # a tensor. Zero is permitted for additive rate constants (beta = 0 is
        # a documented test mode for the conversion-conservation property).
        positive = ("s1", "s2", "omega1", "omega2", "alpha1_max", "alpha2_max",
                    "C1_star", "C2_star", "lambda10", "lambda2", "chi_c", "S_min")
        nonneg = ("beta", "delta1", "delta2", "alpha1_min", "a_chi",
                  "gamma1", "gamma2", "gamma3", "D_chi", "k1p_over_H", "k2p_over_K")
        for name in positive:
            if not getattr(self, name) > 0.0:
                raise ValueError(f"parameter {name} must be > 0, got {getattr(self, name)}")
        for name in nonneg:
            if not getattr(self, name) >= 0.0:
                raise ValueError(f"parameter {name} must be >= 0, got {getattr(self, name)}")
        if not self.S_min < self.S_max:
            raise ValueError(f"S_min must be < S_max, got {self.S_min} >= {self.S_max}")
        if not self.alpha1_min < self.alpha1_max:
            raise ValueError("alpha1_min must be < alpha1_max")
        if self.k_minus is not None and self.k_minus < 0.0:
            raise ValueError("k_minus must be >= 0 when given")
        if self.lambda11 is not None and not self.lambda11 > 0.0:
            raise ValueError("lambda11 must be > 0 when given")

    @property
    def S_d(self) -> float:
        """Half-width of the cubic stimulus ramps, (S_max - S_min)/10. Always recomputed."""
        return (self.S_max - self.S_min) / 10.0

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class OdeState:
    """The five pointwise state variables at one time.

    All components are nonnegative in exact arithmetic; trajectories may
    undershoot by no more than the solver tolerance.
    """

    c1: float    # hMSC density, 1/um^2
    c2: float    # chondrocyte density, 1/um^2
    chi: float   # differentiation medium concentration, mol/um^2
    h: float     # hyaluron concentration, mol/um^2
    tau: float   # ECM density, mol/um^2

    def to_array(self) -> np.ndarray:
        return np.array([self.c1, self.c2, self.chi, self.h, self.tau], dtype=float)

    @classmethod
    def from_array(cls, y) -> "OdeState":
        c1, c2, chi, h, tau = (float(v) for v in y)
        return cls(c1, c2, chi, h, tau)


# Benchmark initial state of the well-mixed experiment.
DEFAULT_INITIAL_STATE = OdeState(c1=0.001, c2=0.0, chi=0.001, h=1000.0, tau=0.0)


@dataclass(frozen=True)
class StimulusSignal:
    """Prescribed dimensionless stimulus offset + amplitude*cos(t/period).

    ``period`` is the time constant of the cosine argument (hours); the
    default signal is 0.5 + cos(t/10). Deterministic and defined for all t.
    """

    offset: float = 0.5
    amplitude: float = 1.0
    period: float = 10.0

    def __post_init__(self):
        if not self.period > 0.0:
            raise ValueError("stimulus period must be > 0")

    def __call__(self, t: float) -> float:
        return self.offset + self.amplitude * math.cos(t / self.period)

    @classmethod
    def constant(cls, value: float) -> "StimulusSignal":
        return cls(offset=value, amplitude=0.0, period=1.0)
