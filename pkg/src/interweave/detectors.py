"""ROC models of three spectrum sensors and their admissible arcs.

Each model maps a false-alarm probability to the matching missed-detection
probability at a fixed received SNR, in the usual detection-theory sense
(false alarm: signal declared present when absent). The resulting curves are
then checked against the weak-admissibility boundary of a scenario.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Iterable, Optional

import numpy as np

from .admissibility import weak_boundary_raw
from .channel import CapacityConstants
from .specfun import (DomainError, gamma_p_inverse, msc_cdf,
                      noncentral_chi2_cdf, q_function, q_inverse)
from .tables import OutputTable

DEFAULT_ROC_POINTS = 200
DEFAULT_PFA_RANGE = (1e-4, 1.0 - 1e-4)


class DetectorKind(str, enum.Enum):
    ENERGY = "energy"
    MATCHED_FILTER = "matched_filter"
    MSC = "msc"


@dataclass(frozen=True)
class DetectorParams:
    """Sensor configuration; only the fields used by ``kind`` are checked.

    ``ed_delta_scale`` multiplies the energy detector's non-centrality
    ``M L P_p / noise``; 0.5 gives the halved reading of that parameter.
    """

    kind: DetectorKind
    l_segments: int = 1
    m_per_segment: int = 1
    signal_energy: float = 0.0
    noise_var: float = 1.0
    power_pu: float = 0.0
    true_msc: float = 0.0
    ed_delta_scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", DetectorKind(self.kind))
        if not self.noise_var > 0:
            raise DomainError("noise_var must be positive")
        if self.kind is DetectorKind.ENERGY:
            if self.l_segments < 1 or self.m_per_segment < 1:
                raise DomainError("energy detector needs l_segments, m_per_segment >= 1")
            if self.power_pu < 0 or self.ed_delta_scale < 0:
                raise DomainError("energy detector needs power_pu, ed_delta_scale >= 0")
        elif self.kind is DetectorKind.MATCHED_FILTER:
            if self.signal_energy < 0:
                raise DomainError("matched filter needs signal_energy >= 0")
        else:
            if self.l_segments < 2:
                raise DomainError("coherence detector needs l_segments >= 2")
            if not 0.0 <= self.true_msc < 1.0:
                raise DomainError("true_msc must lie in [0, 1)")

    @property
    def noncentrality(self) -> float:
        return (self.ed_delta_scale * self.m_per_segment * self.l_segments
                * self.power_pu / self.noise_var)


def _check_pfa(p_fa: float) -> None:
    if not 0.0 < p_fa < 1.0:
        raise DomainError(f"p_fa must lie in (0, 1), got {p_fa}")


def roc_energy(p_fa: float, params: DetectorParams) -> float:
    """Energy detector: central chi-square threshold, non-central miss law."""
    _check_pfa(p_fa)
    L = params.l_segments
    threshold = 2.0 * gamma_p_inverse(L, 1.0 - p_fa)
    return noncentral_chi2_cdf(threshold, 2.0 * L, params.noncentrality)


def roc_matched_filter(p_fa: float, params: DetectorParams) -> float:
    """Coherent detector: ``1 - Q(Q^-1(p_fa) - sqrt(E)/sigma)``."""
    _check_pfa(p_fa)
    d = math.sqrt(params.signal_energy / params.noise_var)
    # 1 - Q(z) == Q(-z), which keeps precision when p_md is tiny
    return q_function(d - q_inverse(p_fa))


def roc_msc(p_fa: float, params: DetectorParams) -> float:
    """Magnitude-squared-coherence detector thresholded for ``p_fa`` under H0."""
    _check_pfa(p_fa)
    L = params.l_segments
    threshold = -math.expm1(math.log(p_fa) / (L - 1))
    return msc_cdf(threshold, L, params.true_msc)


_ROC = {
    DetectorKind.ENERGY: roc_energy,
    DetectorKind.MATCHED_FILTER: roc_matched_filter,
    DetectorKind.MSC: roc_msc,
}


def roc(p_fa: float, params: DetectorParams) -> float:
    return _ROC[params.kind](p_fa, params)


def logit_grid(n: int = DEFAULT_ROC_POINTS, lo: float = DEFAULT_PFA_RANGE[0],
               hi: float = DEFAULT_PFA_RANGE[1]) -> np.ndarray:
    """``n`` points in ``(lo, hi)``, evenly spaced in log-odds."""
    if n < 2 or not 0.0 < lo < hi < 1.0:
        raise DomainError("need n >= 2 and 0 < lo < hi < 1")
    t = np.linspace(math.log(lo / (1.0 - lo)), math.log(hi / (1.0 - hi)), n)
    return 1.0 / (1.0 + np.exp(-t))


@dataclass(frozen=True)
class RocCurve:
    kind: DetectorKind
    p_fa: np.ndarray
    p_md: np.ndarray
    admissible_mask: Optional[np.ndarray] = None

    def __post_init__(self):
        if len(self.p_fa) != len(self.p_md):
            raise ValueError("p_fa and p_md differ in length")
        if np.any(np.diff(self.p_fa) <= 0):
            raise ValueError("p_fa must be strictly increasing")
        if np.any(np.diff(self.p_md) > 1e-12):
            raise ValueError("p_md must be nonincreasing in p_fa")

    @property
    def admissible_fraction(self) -> float:
        if self.admissible_mask is None:
            raise ValueError("curve has no admissibility mask yet")
        return float(np.mean(self.admissible_mask))


def roc_curve(params: DetectorParams, p_fa: Optional[Iterable[float]] = None) -> RocCurve:
    grid = logit_grid() if p_fa is None else np.asarray(list(p_fa), dtype=float)
    fn = _ROC[params.kind]
    p_md = np.array([fn(float(x), params) for x in grid])
    return RocCurve(params.kind, grid, p_md)


def admissible_arc(curve: RocCurve, consts: CapacityConstants, p: float) -> RocCurve:
    """Mark the curve points lying on or below the weak-admissibility boundary."""
    mask = np.array([pmd <= weak_boundary_raw(consts, p, float(pfa))
                     for pfa, pmd in zip(curve.p_fa, curve.p_md)], dtype=bool)
    return replace(curve, admissible_mask=mask)


def detectors_for_snr(snr_db: float, l_segments: int = 4, m_per_segment: int = 64,
                      noise_var: float = 1.0,
                      ed_delta_scale: float = 1.0) -> list[DetectorParams]:
    """Energy, coherence and matched-filter sensors at one received SNR.

    The matched filter integrates all ``N = L M`` samples
    (``E = N * P_p``) and the coherence detector sees a clean reference,
    so its true coherence is ``snr / (1 + snr)``.
    """
    power = noise_var * 10.0 ** (snr_db / 10.0)
    snr = power / noise_var
    n = l_segments * m_per_segment
    return [
        DetectorParams(DetectorKind.MATCHED_FILTER, l_segments, m_per_segment,
                       signal_energy=n * power, noise_var=noise_var, power_pu=power),
        DetectorParams(DetectorKind.MSC, l_segments, m_per_segment, noise_var=noise_var,
                       power_pu=power, true_msc=snr / (1.0 + snr)),
        DetectorParams(DetectorKind.ENERGY, l_segments, m_per_segment, noise_var=noise_var,
                       power_pu=power, ed_delta_scale=ed_delta_scale),
    ]


def roc_table(curves: Iterable[RocCurve], provenance=None) -> OutputTable:
    table = OutputTable(["detector", "p_fa", "p_md", "admissible"], provenance=provenance or {})
    for c in curves:
        mask = c.admissible_mask if c.admissible_mask is not None else [None] * len(c.p_fa)
        for pfa, pmd, ok in zip(c.p_fa, c.p_md, mask):
            table.add(c.kind.value, float(pfa), float(pmd), None if ok is None else bool(ok))
    return table


def write_roc_csv(curves: Iterable[RocCurve], path, provenance=None) -> None:
    roc_table(curves, provenance).write(path)
