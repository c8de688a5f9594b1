"""Slot-level Monte Carlo of the interweave system.

Each slot draws the PU state, the sensing decision and the fading gains, then
credits the instantaneous Shannon rate to whoever transmits. Slots are
processed in fixed-size blocks; block ``b`` draws from a generator seeded by
``(seed, b)``, so results are bit-identical for any number of workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .channel import Fading, SystemParams, capacity_constants
from .ratemodel import DetectionErrorPair, nonideal_capacities
from .specfun import DomainError

BLOCK_SLOTS = 1 << 16


@dataclass(frozen=True)
class SimulationConfig:
    params: SystemParams
    err: DetectionErrorPair
    fading: Fading = Fading.RAYLEIGH_UNIT
    n_slots: int = 1_000_000
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "fading", Fading(self.fading))
        if self.n_slots < 1:
            raise DomainError("n_slots must be >= 1")
        if self.seed < 0:
            raise DomainError("seed must be nonnegative")

    def to_dict(self) -> dict:
        return {
            "params": asdict(self.params),
            "err": asdict(self.err),
            "fading": self.fading.value,
            "n_slots": self.n_slots,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float

    def z_score(self, reference: float) -> float:
        diff = self.mean - reference
        if self.stderr == 0.0:
            return 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
        return diff / self.stderr


@dataclass(frozen=True)
class SimulationResult:
    config: SimulationConfig
    empirical_cp: Estimate
    empirical_cc: Estimate
    empirical_eta_hat: Optional[Estimate]  # None when p == 1
    q_counts: tuple[int, int, int, int]
    interference_power: Optional[Estimate]  # mean |h_pc|^2 P_p over collision slots

    @property
    def q_frequencies(self) -> tuple[float, ...]:
        n = self.config.n_slots
        return tuple(c / n for c in self.q_counts)

    def to_dict(self) -> dict:
        def est(e):
            return None if e is None else {"mean": e.mean, "stderr": e.stderr}
        return {
            "config": self.config.to_dict(),
            "seed": self.config.seed,
            "empirical_cp": est(self.empirical_cp),
            "empirical_cc": est(self.empirical_cc),
            "empirical_eta_hat": est(self.empirical_eta_hat),
            "q_counts": list(self.q_counts),
            "interference_power": est(self.interference_power),
        }


def _block_sums(config: SimulationConfig, block: int) -> np.ndarray:
    start = block * BLOCK_SLOTS
    n = min(BLOCK_SLOTS, config.n_slots - start)
    rng = np.random.default_rng([config.seed, block])
    prm, err = config.params, config.err

    free = rng.random(n) < prm.p
    u = rng.random(n)
    sensed_free = np.where(free, u >= err.p_md, u < err.p_fa)
    g_p = config.fading.sample_power_gain(rng, n)
    g_c = config.fading.sample_power_gain(rng, n)
    g_pc = config.fading.sample_power_gain(rng, n)
    # drawn for symmetry of the slot model; rates use the averaged interference
    config.fading.sample_power_gain(rng, n)

    q1 = free & sensed_free
    q2 = ~free & sensed_free
    q3 = free & ~sensed_free
    q4 = ~free & ~sensed_free

    sigma2, pp, pc = prm.noise_var, prm.power_pu, prm.power_cr
    pu = np.zeros(n)
    cr = np.zeros(n)
    cr[q1] = np.log2(1.0 + g_c[q1] * pc / sigma2)
    pu[q2] = np.log2(1.0 + g_p[q2] * pp / (pc + sigma2))
    cr[q2] = np.log2(1.0 + g_c[q2] * pc / (pp + sigma2))
    pu[q4] = np.log2(1.0 + g_p[q4] * pp / sigma2)
    tot = pu + cr
    interf = g_pc[q2] * pp

    return np.array([
        pu.sum(), (pu * pu).sum(), cr.sum(), (cr * cr).sum(), tot.sum(), (tot * tot).sum(),
        q1.sum(), q2.sum(), q3.sum(), q4.sum(), interf.sum(), (interf * interf).sum(),
    ])


def _estimate(total: float, total_sq: float, n: int) -> Estimate:
    mean = float(total) / n
    if n < 2:
        return Estimate(mean, math.inf)
    var = max(float(total_sq) / n - mean * mean, 0.0) * n / (n - 1)
    return Estimate(mean, math.sqrt(var / n))


def run(config: SimulationConfig, workers: int = 1) -> SimulationResult:
    """Simulate ``config.n_slots`` slots and average the per-slot rates.

    The spectral efficiency estimate divides the empirical sum rate by the
    analytic stand-alone PU capacity ``(1 - p) A_p``.
    """
    n_blocks = -(-config.n_slots // BLOCK_SLOTS)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(lambda b: _block_sums(config, b), range(n_blocks)))
    else:
        partials = [_block_sums(config, b) for b in range(n_blocks)]
    sums = np.zeros(12)
    for part in partials:  # fixed order keeps the reduction bit-identical
        sums += part

    n = config.n_slots
    cp = _estimate(sums[0], sums[1], n)
    cc = _estimate(sums[2], sums[3], n)
    q_counts = tuple(int(c) for c in sums[6:10])

    eta = None
    p = config.params.p
    if p < 1.0:
        a_p = capacity_constants(config.params, config.fading).a_p
        tot = _estimate(sums[4], sums[5], n)
        den = (1.0 - p) * a_p
        if den > 0:
            eta = Estimate(tot.mean / den, tot.stderr / den)

    interf = None
    if q_counts[1] > 0:
        interf = _estimate(sums[10], sums[11], q_counts[1])
    return SimulationResult(config, cp, cc, eta, q_counts, interf)


@dataclass(frozen=True)
class InterferenceCheck:
    skipped: bool
    mean: Optional[float] = None
    stderr: Optional[float] = None
    expected: Optional[float] = None
    z: Optional[float] = None
    passed: Optional[bool] = None


def check_interference(result: SimulationResult, z_limit: float = 4.0) -> InterferenceCheck:
    """Compare the collision-slot interference power of a finished run to ``P_p``."""
    if result.interference_power is None:
        return InterferenceCheck(skipped=True)
    est = result.interference_power
    expected = result.config.params.power_pu
    # floor the error so exact (deterministic-gain) runs are not judged on rounding
    stderr = max(est.stderr, 1e-12 * abs(expected))
    z = 0.0 if stderr == 0.0 else (est.mean - expected) / stderr
    return InterferenceCheck(False, est.mean, est.stderr, expected, z, bool(abs(z) <= z_limit))


def interference_power_check(config: SimulationConfig, n_slots: Optional[int] = None,
                             z_limit: float = 4.0) -> InterferenceCheck:
    """Check that the cross-link interference averages to the interferer's power.

    Skipped when the run produces no collision slots.
    """
    if n_slots is not None:
        config = SimulationConfig(config.params, config.err, config.fading, n_slots, config.seed)
    return check_interference(run(config), z_limit)


def compare_with_analytic(result: SimulationResult) -> list[dict]:
    """Side-by-side analytic values and z-scores for the three estimates."""
    cfg = result.config
    consts = capacity_constants(cfg.params, cfg.fading)
    analytic = nonideal_capacities(consts, cfg.params.p, cfg.err)
    rows = [
        ("c_p_prime", result.empirical_cp, analytic.c_p_prime),
        ("c_c_prime", result.empirical_cc, analytic.c_c_prime),
    ]
    if result.empirical_eta_hat is not None and analytic.eta_hat is not None:
        rows.append(("eta_hat", result.empirical_eta_hat, analytic.eta_hat))
    return [
        {"quantity": name, "empirical": e.mean, "stderr": e.stderr,
         "analytic": ref, "z": e.z_score(ref)}
        for name, e, ref in rows
    ]
