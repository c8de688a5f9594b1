"""Ergodic capacities of the primary and cognitive links.

All capacities are in bits per complex dimension. Interference from the other
transmitter is treated as additional Gaussian noise whose variance equals the
interferer's average received power (unit-second-moment cross gains).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .specfun import DomainError, exp_integral_e1_scaled

LOG2E = 1.0 / math.log(2.0)


class Fading(str, enum.Enum):
    """Distribution of the link amplitude gain ``|h|``."""

    RAYLEIGH_UNIT = "rayleigh_unit"
    DETERMINISTIC_UNIT = "deterministic_unit"

    def sample_power_gain(self, rng: np.random.Generator, size) -> np.ndarray:
        """Draw ``|h|^2`` samples; both kinds have unit second moment."""
        if self is Fading.RAYLEIGH_UNIT:
            # |h| ~ Rayleigh with E|h|^2 = 1  <=>  |h|^2 ~ Exp(1)
            return rng.standard_exponential(size)
        return np.ones(size)


@dataclass(frozen=True)
class SystemParams:
    """Scenario: PU idle probability ``p``, transmit powers and noise variance."""

    p: float
    power_pu: float
    power_cr: float
    noise_var: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise DomainError(f"occupancy p must lie in [0, 1], got {self.p}")
        if self.power_pu < 0 or self.power_cr < 0:
            raise DomainError("powers must be nonnegative")
        if not self.noise_var > 0:
            raise DomainError("noise variance must be positive")

    @classmethod
    def from_db(cls, p: float, pu_snr_db: float, rs_db: float,
                noise_var: float = 1.0) -> "SystemParams":
        """Build from the PU SNR ``P_p/noise`` and ``RS = 10 log10(P_p/P_c)``."""
        power_pu = noise_var * 10.0 ** (pu_snr_db / 10.0)
        return cls(p, power_pu, power_pu / 10.0 ** (rs_db / 10.0), noise_var)

    @property
    def rs_db(self) -> float:
        if self.power_cr == 0:
            return math.inf
        if self.power_pu == 0:
            return -math.inf
        return 10.0 * math.log10(self.power_pu / self.power_cr)

    @property
    def pu_snr_db(self) -> float:
        if self.power_pu == 0:
            return -math.inf
        return 10.0 * math.log10(self.power_pu / self.noise_var)

    def with_p(self, p: float) -> "SystemParams":
        return SystemParams(p, self.power_pu, self.power_cr, self.noise_var)


@dataclass(frozen=True)
class CapacityConstants:
    """Link capacities with (``b_*``) and without (``a_*``) cross interference."""

    a_p: float
    b_p: float
    a_c: float
    b_c: float
    c_p_ideal: float
    c_c_ideal: float

    @property
    def interference_excess(self) -> float:
        """``A_p - B_p - B_c``: PU loss minus CR gain in a collision slot."""
        return self.a_p - self.b_p - self.b_c

    @classmethod
    def from_values(cls, a_p, b_p, a_c, b_c) -> "CapacityConstants":
        """Constants given directly; the ideal capacities equal ``a_p``, ``a_c``."""
        return cls(a_p, b_p, a_c, b_c, a_p, a_c)


def ergodic_capacity(signal_power: float, interference_power: float,
                     noise_var: float,
                     fading: Fading = Fading.RAYLEIGH_UNIT) -> float:
    """Average of ``log2(1 + |h|^2 S / (I + N))`` over the fading law.

    For unit Rayleigh fading the closed form is
    ``log2(e) * exp(1/g) * E1(1/g)`` with ``g = S / (I + N)``.
    """
    if not noise_var > 0:
        raise DomainError(f"noise variance must be positive, got {noise_var}")
    if signal_power < 0 or interference_power < 0:
        raise DomainError("powers must be nonnegative")
    if signal_power == 0:
        return 0.0
    snr = signal_power / (interference_power + noise_var)
    if fading is Fading.DETERMINISTIC_UNIT:
        return math.log2(1.0 + snr)
    return LOG2E * exp_integral_e1_scaled(1.0 / snr)


def ergodic_capacity_mc(signal_power: float, interference_power: float,
                        noise_var: float, fading: Fading = Fading.RAYLEIGH_UNIT,
                        n_samples: int = 1_000_000,
                        seed: int = 0) -> tuple[float, float]:
    """Monte Carlo estimate of :func:`ergodic_capacity` with its standard error."""
    if not noise_var > 0:
        raise DomainError(f"noise variance must be positive, got {noise_var}")
    rng = np.random.default_rng(seed)
    gain = fading.sample_power_gain(rng, n_samples)
    rates = np.log2(1.0 + gain * signal_power / (interference_power + noise_var))
    return float(rates.mean()), float(rates.std(ddof=1) / math.sqrt(n_samples))


def capacity_constants(params: SystemParams,
                       fading: Fading = Fading.RAYLEIGH_UNIT) -> CapacityConstants:
    """The four link capacities of the interweave model.

    The CR rate in a collision slot uses the CR power in the numerator and
    the PU power as interference.
    """
    pp, pc, n = params.power_pu, params.power_cr, params.noise_var
    a_p = ergodic_capacity(pp, 0.0, n, fading)
    b_p = ergodic_capacity(pp, pc, n, fading)
    a_c = ergodic_capacity(pc, 0.0, n, fading)
    b_c = ergodic_capacity(pc, pp, n, fading)
    return CapacityConstants(a_p, b_p, a_c, b_c, a_p, a_c)
