"""Rate regions, sum capacity and spectral efficiency of interweave sharing.

Conventions: ``p`` is the probability that the PU is *idle*. ``p_fa`` is the
probability that the CR declares the channel free while the PU is active
(a collision), ``p_md`` the probability that it declares the channel busy
while it is free (a lost opportunity).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .channel import CapacityConstants
from .specfun import DomainError

TIE_EPS = 1e-12


def _check_probability(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise DomainError(f"{name} must lie in [0, 1], got {value}")


@dataclass(frozen=True)
class DetectionErrorPair:
    """Operating point ``(p_fa, p_md)`` of the CR's spectrum sensor."""

    p_fa: float
    p_md: float

    def __post_init__(self):
        _check_probability("p_fa", self.p_fa)
        _check_probability("p_md", self.p_md)


PERFECT = DetectionErrorPair(0.0, 0.0)


@dataclass(frozen=True)
class QDistribution:
    """Slot-type probabilities.

    q1: free and sensed free (CR alone), q2: busy but sensed free (collision),
    q3: free but sensed busy (wasted), q4: busy and sensed busy (PU alone).
    """

    q1: float
    q2: float
    q3: float
    q4: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.q1, self.q2, self.q3, self.q4)


class RegionKind(str, enum.Enum):
    IDEAL = "ideal"
    NON_IDEAL = "non_ideal"


def _dedupe(vertices):
    out = []
    for v in vertices:
        if not out or v != out[-1]:
            out.append(v)
    while len(out) > 1 and out[0] == out[-1]:
        out.pop()
    return tuple(out)


@dataclass(frozen=True)
class RateRegionPolygon:
    """Convex achievable region in the ``(R_c, R_p)`` plane.

    Vertices run counterclockwise from the origin; consecutive duplicates are
    removed so a collapsed region shows up as a segment or a point.
    """

    vertices: tuple[tuple[float, float], ...]
    kind: RegionKind

    @property
    def area(self) -> float:
        pts = self.vertices
        s = 0.0
        for (x0, y0), (x1, y1) in zip(pts, pts[1:] + pts[:1]):
            s += x0 * y1 - x1 * y0
        return 0.5 * s

    @property
    def degenerate(self) -> bool:
        return len(self.vertices) < 3 or self.area == 0.0

    @property
    def rc_extent(self) -> float:
        return max(v[0] for v in self.vertices)

    @property
    def rp_extent(self) -> float:
        return max(v[1] for v in self.vertices)

    def contains(self, point: tuple[float, float], tol: float = 1e-12) -> bool:
        """Point-in-convex-polygon test, boundary included up to ``tol``."""
        x, y = point
        xs = [v[0] for v in self.vertices]
        ys = [v[1] for v in self.vertices]
        if not (min(xs) - tol <= x <= max(xs) + tol and min(ys) - tol <= y <= max(ys) + tol):
            return False
        pts = self.vertices
        for (x0, y0), (x1, y1) in zip(pts, pts[1:] + pts[:1]):
            ex, ey = x1 - x0, y1 - y0
            length = math.hypot(ex, ey)
            if length == 0.0:
                continue
            # signed distance of the point to the left of the edge
            if (ex * (y - y0) - ey * (x - x0)) / length < -tol:
                return False
        return True

    def contains_polygon(self, other: "RateRegionPolygon", tol: float = 1e-12) -> bool:
        return all(self.contains(v, tol) for v in other.vertices)


@dataclass(frozen=True)
class CapacityBreakdown:
    c_p_prime: float
    c_c_prime: float
    sum: float
    eta_hat: Optional[float]  # None when p == 1


@dataclass(frozen=True)
class OccupancyOptimum:
    """Maximiser of the sum capacity over ``p``; ``p_star`` is None for a tie."""

    p_star: Optional[float]
    m_value: float

    @property
    def any_p(self) -> bool:
        return self.p_star is None


@dataclass(frozen=True)
class EtaHatPartials:
    d_dp: float
    d_dpmd: float
    d_dpfa: float


def q_distribution(p: float, err: DetectionErrorPair) -> QDistribution:
    _check_probability("p", p)
    return QDistribution(
        p * (1.0 - err.p_md),
        (1.0 - p) * err.p_fa,
        p * err.p_md,
        (1.0 - p) * (1.0 - err.p_fa),
    )


def ideal_rate_region(consts: CapacityConstants, p: float) -> RateRegionPolygon:
    """Triangle with axis cuts ``p*C_c`` (CR) and ``(1-p)*C_p`` (PU)."""
    _check_probability("p", p)
    verts = [(0.0, 0.0), (p * consts.c_c_ideal, 0.0), (0.0, (1.0 - p) * consts.c_p_ideal)]
    return RateRegionPolygon(_dedupe(verts), RegionKind.IDEAL)


def ideal_capacity_region(consts: CapacityConstants) -> RateRegionPolygon:
    """Union of the ideal regions over all occupancies: cuts ``C_c`` and ``C_p``."""
    verts = [(0.0, 0.0), (consts.c_c_ideal, 0.0), (0.0, consts.c_p_ideal)]
    return RateRegionPolygon(_dedupe(verts), RegionKind.IDEAL)


def _check_eta_domain(consts: CapacityConstants, p: float) -> None:
    _check_probability("p", p)
    if p == 1.0:
        raise DomainError("spectral efficiency is unbounded at p = 1")
    if not consts.c_p_ideal > 0:
        raise DomainError("spectral efficiency needs a positive PU capacity")


def eta_ideal(consts: CapacityConstants, p: float) -> float:
    """Spectral efficiency factor with perfect sensing, ``1 + p C_c / ((1-p) C_p)``."""
    _check_eta_domain(consts, p)
    return 1.0 + (p * consts.c_c_ideal) / ((1.0 - p) * consts.c_p_ideal)


def eta_ideal_slope(consts: CapacityConstants, p: float) -> float:
    _check_eta_domain(consts, p)
    return consts.c_c_ideal / (consts.c_p_ideal * (1.0 - p) ** 2)


def eta_ideal_or_inf(consts: CapacityConstants, p: float) -> tuple[float, bool]:
    """Sweep-friendly variant: ``(inf, True)`` at ``p == 1`` instead of raising."""
    if p == 1.0:
        return math.inf, True
    return eta_ideal(consts, p), False


def _capacities(consts: CapacityConstants, p: float, err: DetectionErrorPair):
    c_p = (1.0 - p) * ((1.0 - err.p_fa) * consts.a_p + err.p_fa * consts.b_p)
    c_c = p * (1.0 - err.p_md) * consts.a_c + (1.0 - p) * err.p_fa * consts.b_c
    return c_p, c_c


def _eta_hat(consts, p, c_p, c_c):
    # Kept as two ratios so the perfect-sensing case reproduces eta_ideal bit for bit.
    den = (1.0 - p) * consts.c_p_ideal
    return c_p / den + c_c / den


def nonideal_capacities(consts: CapacityConstants, p: float,
                        err: DetectionErrorPair) -> CapacityBreakdown:
    """Average PU and CR capacities under imperfect sensing.

    ``eta_hat`` is None at ``p == 1`` (the PU never transmits).
    """
    _check_probability("p", p)
    c_p, c_c = _capacities(consts, p, err)
    eta = None
    if p < 1.0 and consts.c_p_ideal > 0:
        eta = _eta_hat(consts, p, c_p, c_c)
    return CapacityBreakdown(c_p, c_c, c_p + c_c, eta)


def nonideal_rate_region(consts: CapacityConstants, p: float,
                         err: DetectionErrorPair) -> RateRegionPolygon:
    """Trapezoid of rates achievable with imperfect sensing.

    PU cut ``(1-p) C2(p_fa)``; CR extent ``(1-p) C1'(p_fa) + p C1(p_md)``. The
    PU rate is flat while ``R_c`` stays below the collision-slot CR rate
    ``(1-p) C1'(p_fa)``, then trades off linearly.
    """
    _check_probability("p", p)
    c1 = (1.0 - err.p_md) * consts.a_c
    c1_prime = err.p_fa * consts.b_c
    c2 = (1.0 - err.p_fa) * consts.a_p + err.p_fa * consts.b_p
    flat = (1.0 - p) * c1_prime
    top = (1.0 - p) * c2
    verts = [(0.0, 0.0), (flat + p * c1, 0.0), (flat, top), (0.0, top)]
    return RateRegionPolygon(_dedupe(verts), RegionKind.NON_IDEAL)


def sum_capacity(consts: CapacityConstants, p: float, err: DetectionErrorPair) -> float:
    """PU plus CR capacity, written as the ideal sum minus the two sensing penalties."""
    _check_probability("p", p)
    a_c, a_p = consts.a_c, consts.a_p
    return (-a_c * p * err.p_md
            - (1.0 - p) * consts.interference_excess * err.p_fa
            + p * a_c + (1.0 - p) * a_p)


def optimal_occupancy(consts: CapacityConstants, err: DetectionErrorPair,
                      tie_eps: float = TIE_EPS) -> OccupancyOptimum:
    """Occupancy maximising the sum capacity for a fixed sensor.

    The sum capacity is affine in ``p`` with slope ``M``; the optimum is an
    endpoint unless ``|M| <= tie_eps``.
    """
    m = (consts.interference_excess * err.p_fa - consts.a_c * err.p_md
         + consts.a_c - consts.a_p)
    if abs(m) <= tie_eps:
        return OccupancyOptimum(None, m)
    return OccupancyOptimum(1.0 if m > 0 else 0.0, m)


def eta_hat(consts: CapacityConstants, p: float, err: DetectionErrorPair) -> float:
    _check_eta_domain(consts, p)
    c_p, c_c = _capacities(consts, p, err)
    return _eta_hat(consts, p, c_p, c_c)


def eta_hat_partials(consts: CapacityConstants, p: float,
                     err: DetectionErrorPair) -> EtaHatPartials:
    """Partial derivatives of ``eta_hat`` in ``p``, ``p_md`` and ``p_fa``."""
    _check_eta_domain(consts, p)
    a_p, a_c = consts.a_p, consts.a_c
    return EtaHatPartials(
        d_dp=(1.0 / (1.0 - p) ** 2) * (a_c * (1.0 - err.p_md) / a_p),
        d_dpmd=-p * a_c / ((1.0 - p) * a_p),
        d_dpfa=-consts.interference_excess / a_p,
    )


def polygon_rows(polygons: Sequence[tuple[str, RateRegionPolygon]]):
    """Flatten labelled polygons into ``(label, kind, index, R_c, R_p)`` rows."""
    for label, poly in polygons:
        for i, (rc, rp) in enumerate(poly.vertices):
            yield label, poly.kind.value, i, rc, rp
