"""Weak and strong admissibility of sensing operating points.

A pair ``(p_fa, p_md)`` is weakly admissible when sharing does not lower the
total throughput (``eta_hat >= 1``), and strongly admissible with loss factor
``gamma`` when the PU keeps at least a fraction ``gamma`` of its stand-alone
rate.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channel import CapacityConstants
from .ratemodel import DetectionErrorPair, eta_hat, nonideal_capacities
from .specfun import DomainError
from .tables import OutputTable


class DegenerateConstantsWarning(UserWarning):
    """Interference does not reduce the PU capacity (``A_p <= B_p``)."""


@dataclass(frozen=True)
class AdmissibilityVerdict:
    weakly_admissible: bool
    strongly_admissible: bool
    strong_with_gamma: bool
    boundary_pmd: Optional[float]  # None: no p_md is admissible at this p_fa


def _check_gamma(gamma: float) -> None:
    if not 0.0 < gamma <= 1.0:
        raise DomainError(f"loss factor must lie in (0, 1], got {gamma}")


def weak_boundary_raw(consts: CapacityConstants, p: float, p_fa: float) -> float:
    """Largest weakly admissible ``p_md`` at ``p_fa``, before clamping."""
    if not 0.0 < p <= 1.0:
        raise DomainError(f"weak boundary needs 0 < p <= 1, got {p}")
    if not consts.a_c > 0:
        raise DomainError("weak boundary needs a positive CR capacity")
    return 1.0 - ((1.0 - p) / p) * (consts.interference_excess / consts.a_c) * p_fa


def weak_boundary(consts: CapacityConstants, p: float, p_fa: float) -> float:
    """Weak-admissibility boundary clamped to [0, 1].

    A result of 0 can mean either "only p_md = 0" or "nothing admissible";
    use :func:`weak_boundary_raw` (negative means nothing) to tell them apart.
    """
    return min(1.0, max(0.0, weak_boundary_raw(consts, p, p_fa)))


def _weak(consts: CapacityConstants, p: float, err: DetectionErrorPair) -> bool:
    # eta_hat >= 1 rearranged so that p = 0 and p = 1 need no division
    lhs = (1.0 - p) * consts.interference_excess * err.p_fa
    return lhs <= p * consts.a_c * (1.0 - err.p_md)


def _keeps_fraction(consts: CapacityConstants, p_fa: float, gamma: float) -> bool:
    return (1.0 - p_fa) * consts.a_p + p_fa * consts.b_p >= gamma * consts.a_p


def verdict(consts: CapacityConstants, p: float, err: DetectionErrorPair,
            gamma: float = 1.0) -> AdmissibilityVerdict:
    _check_gamma(gamma)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"occupancy p must lie in [0, 1], got {p}")
    boundary = None
    if p > 0 and consts.a_c > 0:
        raw = weak_boundary_raw(consts, p, err.p_fa)
        boundary = None if raw < 0 else min(1.0, raw)
    return AdmissibilityVerdict(
        weakly_admissible=_weak(consts, p, err),
        # no loss at all needs p_fa = 0 unless collisions cost the PU nothing
        strongly_admissible=err.p_fa == 0.0 or consts.a_p <= consts.b_p,
        strong_with_gamma=_keeps_fraction(consts, err.p_fa, gamma),
        boundary_pmd=boundary,
    )


def strong_pfa_bound(consts: CapacityConstants, gamma: float) -> float:
    """Largest ``p_fa`` that keeps the PU loss factor at or above ``gamma``.

    Does not depend on the occupancy. Every ``p_fa`` qualifies once
    ``gamma <= B_p / A_p`` (the full admissible point).
    """
    _check_gamma(gamma)
    a_p, b_p = consts.a_p, consts.b_p
    if a_p <= b_p:
        warnings.warn("A_p <= B_p: interference costs the PU nothing, every p_fa qualifies",
                      DegenerateConstantsWarning, stacklevel=2)
        return 1.0
    if gamma <= b_p / a_p:
        return 1.0
    return min(1.0, a_p * (1.0 - gamma) / (a_p - b_p))


def full_admissible_point(consts: CapacityConstants) -> float:
    return consts.b_p / consts.a_p


@dataclass(frozen=True)
class AdmissibilityGrid:
    """Verdict lattice over ``p_fa`` (columns) and ``p_md`` (rows)."""

    p: float
    gamma: float
    p_fa: np.ndarray
    p_md: np.ndarray
    weak: np.ndarray
    strong: np.ndarray
    strong_gamma: np.ndarray
    eta_hat: np.ndarray

    @property
    def weak_fraction(self) -> float:
        return float(self.weak.mean())

    def verdict_at(self, i_md: int, j_fa: int) -> AdmissibilityVerdict:
        return AdmissibilityVerdict(bool(self.weak[i_md, j_fa]), bool(self.strong[i_md, j_fa]),
                                    bool(self.strong_gamma[i_md, j_fa]), None)

    def rows(self):
        """``(p_fa, p_md, eta_hat, weak, strong_gamma)`` in row-major order."""
        for i, pmd in enumerate(self.p_md):
            for j, pfa in enumerate(self.p_fa):
                yield (float(pfa), float(pmd), float(self.eta_hat[i, j]),
                       bool(self.weak[i, j]), bool(self.strong_gamma[i, j]))

    def to_table(self, provenance=None) -> OutputTable:
        table = OutputTable(["p_fa", "p_md", "weak", "strong_gamma", "eta_hat"],
                            provenance=provenance or {})
        for pfa, pmd, eta, weak, strong in self.rows():
            table.add(pfa, pmd, weak, strong, eta)
        return table

    def write_csv(self, path, provenance=None) -> None:
        self.to_table(provenance).write(path)


def region_grid(consts: CapacityConstants, p: float, gamma: float = 1.0,
                n: int = 101) -> AdmissibilityGrid:
    """Evaluate the verdicts on an ``n x n`` lattice of the unit square."""
    if n < 2:
        raise DomainError("grid resolution must be >= 2")
    _check_gamma(gamma)
    axis = np.linspace(0.0, 1.0, n)
    weak = np.zeros((n, n), dtype=bool)
    strong = np.zeros((n, n), dtype=bool)
    strong_g = np.zeros((n, n), dtype=bool)
    eta = np.full((n, n), math.inf)
    for i, pmd in enumerate(axis):
        for j, pfa in enumerate(axis):
            err = DetectionErrorPair(float(pfa), float(pmd))
            v = verdict(consts, p, err, gamma)
            weak[i, j] = v.weakly_admissible
            strong[i, j] = v.strongly_admissible
            strong_g[i, j] = v.strong_with_gamma
            if p < 1.0:
                eta[i, j] = eta_hat(consts, p, err)
    return AdmissibilityGrid(p, gamma, axis, axis.copy(), weak, strong, strong_g, eta)


def loss_factor(consts: CapacityConstants, p: float, err: DetectionErrorPair) -> float:
    """Fraction of its stand-alone capacity the PU keeps at this operating point."""
    if p >= 1.0:
        raise DomainError("loss factor undefined at p = 1")
    return nonideal_capacities(consts, p, err).c_p_prime / ((1.0 - p) * consts.c_p_ideal)
