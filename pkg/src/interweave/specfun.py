"""Scalar special functions used by the capacity and detector models.

Everything here is pure and deterministic (the Monte Carlo helper takes an
explicit seed). Probabilities are clamped to [0, 1] on the way out, but a
drift of more than ``CLAMP_SLACK`` outside that range raises instead of being
silently hidden.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

EULER_GAMMA = 0.57721566490153286061
FPMIN = 1e-300
EPS = 2.220446049250313e-16
CLAMP_SLACK = 1e-9

_STD_NORMAL = NormalDist()


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of a function."""


class NumericalDriftError(ArithmeticError):
    """A computed probability drifted too far outside [0, 1] to clamp."""


@dataclass(frozen=True)
class Tolerance:
    """Convergence control shared by the iterative routines."""

    abs_tol: float = 1e-300
    rel_tol: float = EPS
    max_iter: int = 10_000

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("tolerances must be positive")
        if self.max_iter < 1:
            raise DomainError("max_iter must be >= 1")


DEFAULT_TOL = Tolerance()


def clamp_probability(value: float) -> float:
    """Clamp ``value`` into [0, 1], refusing drift beyond ``CLAMP_SLACK``."""
    if not (-CLAMP_SLACK <= value <= 1.0 + CLAMP_SLACK):
        raise NumericalDriftError(f"probability {value!r} outside [0, 1]")
    return min(1.0, max(0.0, value))


# ---------------------------------------------------------------------------
# Exponential integral
# ---------------------------------------------------------------------------

def _e1_series(x: float, tol: Tolerance) -> float:
    # E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
    total = 0.0
    term = 1.0
    for k in range(1, tol.max_iter + 1):
        term *= -x / k
        contrib = term / k
        total += contrib
        if abs(contrib) <= tol.rel_tol * abs(total):
            break
    return -EULER_GAMMA - math.log(x) - total


def _e1_cf_scaled(x: float, tol: Tolerance) -> float:
    # Modified Lentz evaluation of e^x E1(x); valid for x >= 1.
    b = x + 1.0
    c = 1.0 / FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, tol.max_iter + 1):
        an = -float(i * i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) <= tol.rel_tol:
            return h
    raise ArithmeticError(f"E1 continued fraction did not converge for x={x}")


def exp_integral_e1(x: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """Exponential integral ``E1(x) = int_x^inf exp(-t)/t dt`` for ``x > 0``.

    Uses the power series below 1 and a continued fraction above it.
    Underflows gracefully to tiny subnormal values near ``x = 745``.
    """
    if not x > 0:
        raise DomainError(f"E1 requires x > 0, got {x}")
    if x < 1.0:
        return _e1_series(x, tol)
    return _e1_cf_scaled(x, tol) * math.exp(-x)


def exp_integral_e1_scaled(x: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """Return ``exp(x) * E1(x)`` without overflowing for large ``x``."""
    if not x > 0:
        raise DomainError(f"E1 requires x > 0, got {x}")
    if x < 1.0:
        return math.exp(x) * _e1_series(x, tol)
    return _e1_cf_scaled(x, tol)


# ---------------------------------------------------------------------------
# Gaussian tail
# ---------------------------------------------------------------------------

def q_function(x: float) -> float:
    """Standard Gaussian tail probability ``P[N(0,1) > x]``."""
    if not math.isfinite(x):
        raise DomainError("q_function requires a finite argument")
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def q_inverse(q: float) -> float:
    """Inverse of :func:`q_function` on the open unit interval."""
    if not 0.0 < q < 1.0:
        raise DomainError(f"q_inverse requires 0 < q < 1, got {q}")
    if q == 0.5:
        return 0.0
    # Work on the smaller tail so tiny probabilities keep their precision.
    lower = min(q, 1.0 - q)
    x = -_STD_NORMAL.inv_cdf(lower)
    # One Newton polish against the erfc-based tail.
    pdf = math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
    if pdf > 0:
        x += (q_function(x) - lower) / pdf
    return x if q < 0.5 else -x


# ---------------------------------------------------------------------------
# Regularized incomplete gamma
# ---------------------------------------------------------------------------

def _gamma_series(a: float, x: float, tol: Tolerance) -> float:
    ap = a
    term = 1.0 / a
    total = term
    for _ in range(tol.max_iter):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * tol.rel_tol:
            break
    else:
        raise ArithmeticError(f"gamma series did not converge (a={a}, x={x})")
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_cf(a: float, x: float, tol: Tolerance) -> float:
    # Upper regularized Q(a, x) by Lentz's method; x >= a + 1.
    b = x + 1.0 - a
    c = 1.0 / FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, tol.max_iter + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < FPMIN:
            d = FPMIN
        c = b + an / c
        if abs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) <= tol.rel_tol:
            break
    else:
        raise ArithmeticError(f"gamma continued fraction did not converge (a={a}, x={x})")
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def gamma_p(a: float, x: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """Regularized lower incomplete gamma ``P(a, x)``."""
    if not a > 0:
        raise DomainError(f"gamma_p requires a > 0, got {a}")
    if x < 0:
        raise DomainError(f"gamma_p requires x >= 0, got {x}")
    if x == 0:
        return 0.0
    if x < a + 1.0:
        return clamp_probability(_gamma_series(a, x, tol))
    return clamp_probability(1.0 - _gamma_cf(a, x, tol))


def gamma_q(a: float, x: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """Regularized upper incomplete gamma ``Q(a, x) = 1 - P(a, x)``."""
    if not a > 0:
        raise DomainError(f"gamma_q requires a > 0, got {a}")
    if x < 0:
        raise DomainError(f"gamma_q requires x >= 0, got {x}")
    if x == 0:
        return 1.0
    if x < a + 1.0:
        return clamp_probability(1.0 - _gamma_series(a, x, tol))
    return clamp_probability(_gamma_cf(a, x, tol))


def gamma_p_inverse(a: float, q: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """Solve ``P(a, x) = q`` for ``x``.

    Initial guess from the Wilson-Hilferty approximation (a > 1) or the
    small-a power law, then Halley iterations on the forward function.
    """
    if not a > 0:
        raise DomainError(f"gamma_p_inverse requires a > 0, got {a}")
    if not 0.0 <= q < 1.0:
        raise DomainError(f"gamma_p_inverse requires 0 <= q < 1, got {q}")
    if q == 0.0:
        return 0.0

    a1 = a - 1.0
    gln = math.lgamma(a)
    if a > 1.0:
        lna1 = math.log(a1)
        afac = math.exp(a1 * (lna1 - 1.0) - gln)
        pp = q if q < 0.5 else 1.0 - q
        t = math.sqrt(-2.0 * math.log(pp))
        x = (2.30753 + t * 0.27061) / (1.0 + t * (0.99229 + t * 0.04481)) - t
        if q < 0.5:
            x = -x
        x = max(1e-3, a * (1.0 - 1.0 / (9.0 * a) - x / (3.0 * math.sqrt(a))) ** 3)
    else:
        t = 1.0 - a * (0.253 + a * 0.12)
        if q < t:
            x = (q / t) ** (1.0 / a)
        else:
            x = 1.0 - math.log(1.0 - (q - t) / (1.0 - t))

    for _ in range(min(tol.max_iter, 100)):
        if x <= 0.0:
            return 0.0
        err = gamma_p(a, x, tol) - q
        if a > 1.0:
            dens = afac * math.exp(-(x - a1) + a1 * (math.log(x) - lna1))
        else:
            dens = math.exp(-x + a1 * math.log(x) - gln)
        if dens == 0.0:
            break
        u = err / dens
        step = u / (1.0 - 0.5 * min(1.0, u * (a1 / x - 1.0)))
        x -= step
        if x <= 0.0:
            x = 0.5 * (x + step)
        if abs(step) < max(tol.rel_tol * 10 * x, tol.abs_tol):
            break
    return x


# ---------------------------------------------------------------------------
# Non-central chi-square
# ---------------------------------------------------------------------------

def noncentral_chi2_cdf(x: float, v: float, delta: float,
                        tol: Tolerance = DEFAULT_TOL) -> float:
    """CDF of the non-central chi-square law with ``v`` degrees of freedom.

    Poisson mixture of central chi-square CDFs, summed outward from the
    Poisson mode so that large non-centralities stay well conditioned.
    """
    if x < 0 or not v > 0 or delta < 0:
        raise DomainError(f"invalid arguments x={x}, v={v}, delta={delta}")
    if x == 0:
        return 0.0
    half_v, y, lam = 0.5 * v, 0.5 * x, 0.5 * delta
    if lam == 0:
        return gamma_p(half_v, y, tol)

    mode = int(lam)
    log_w_mode = -lam + mode * math.log(lam) - math.lgamma(mode + 1.0)
    w_mode = math.exp(log_w_mode)
    total = w_mode * gamma_p(half_v + mode, y, tol)

    w = w_mode
    for j in range(mode + 1, mode + tol.max_iter):
        w *= lam / j
        term = w * gamma_p(half_v + j, y, tol)
        total += term
        # past the mode both factors shrink, so a negligible term ends the tail
        if term <= 1e-16 * total or w < 1e-300:
            break

    w = w_mode
    for j in range(mode, 0, -1):
        w *= j / lam
        term = w * gamma_p(half_v + j - 1, y, tol)
        total += term
        # below the mode each term is bounded by its weight
        if w <= 1e-16 * total:
            break
    return clamp_probability(total)


# ---------------------------------------------------------------------------
# Sample magnitude-squared coherence
# ---------------------------------------------------------------------------

def _check_msc_args(x, l_segments, true_msc):
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"msc argument must lie in [0, 1], got {x}")
    if int(l_segments) != l_segments or l_segments < 2:
        raise DomainError(f"need an integer number of segments >= 2, got {l_segments}")
    if not 0.0 <= true_msc < 1.0:
        raise DomainError(f"true coherence must lie in [0, 1), got {true_msc}")


def msc_cdf(x: float, l_segments: int, true_msc: float) -> float:
    """CDF of the sample magnitude-squared coherence.

    Closed form of Carter, Knapp and Nuttall for an estimate averaged over
    ``l_segments`` independent segment pairs whose true coherence is
    ``true_msc``::

        P(x) = x ((1-C)/(1-Cx))^L  sum_{k=0}^{L-2} ((1-x)/(1-Cx))^k  F_k
        F_k  = 2F1(-k, 1-L; 1; Cx) = sum_j binom(k, j) binom(L-1, j) (Cx)^j

    Every term is positive, so the sum is evaluated in log space. If that
    ever produces a non-finite value the Monte Carlo estimator is used.
    """
    _check_msc_args(x, l_segments, true_msc)
    L = int(l_segments)
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    if true_msc == 0.0:
        # Beta(1, L-1) law of the sample coherence under independence
        return clamp_probability(-math.expm1((L - 1) * math.log1p(-x)))

    value = _msc_cdf_closed_form(x, L, true_msc)
    if not math.isfinite(value):
        value, _ = msc_cdf_monte_carlo(x, L, true_msc, n_trials=200_000, seed=0)
    return clamp_probability(value)


def _msc_cdf_closed_form(x: float, L: int, c: float) -> float:
    log_fact = np.concatenate(([0.0], np.cumsum(np.log(np.arange(1, L + 1)))))
    k = np.arange(L - 1)[:, None]
    j = np.arange(L - 1)[None, :]
    valid = j <= k
    kk = np.where(valid, k, j)  # keeps log_fact indices legal where masked
    log_binom_k = log_fact[kk] - log_fact[j] - log_fact[kk - j]
    log_binom_l = log_fact[L - 1] - log_fact[j] - log_fact[L - 1 - j]
    log_terms = log_binom_k + log_binom_l + j * math.log(c * x)
    log_terms = np.where(valid, log_terms, -np.inf)
    peak = log_terms.max(axis=1)
    log_f = peak + np.log(np.exp(log_terms - peak[:, None]).sum(axis=1))

    one_minus_cx = 1.0 - c * x
    log_outer = (
        math.log(x)
        + L * (math.log1p(-c) - math.log(one_minus_cx))
        + np.arange(L - 1) * (math.log1p(-x) - math.log(one_minus_cx))
        + log_f
    )
    top = log_outer.max()
    return float(math.exp(top) * np.exp(log_outer - top).sum())


def sample_msc(l_segments: int, true_msc: float, n_trials: int,
               rng: np.random.Generator, chunk: int = 50_000) -> np.ndarray:
    """Draw sample-MSC estimates from circular complex Gaussian segment pairs.

    Each trial averages ``l_segments`` pairs ``(X, Y)`` with
    ``Y = sqrt(C) X + sqrt(1-C) W``, so the true coherence is exactly ``C``.
    """
    L = int(l_segments)
    out = np.empty(n_trials)
    a, b = math.sqrt(true_msc), math.sqrt(1.0 - true_msc)
    for start in range(0, n_trials, chunk):
        n = min(chunk, n_trials - start)
        xs = rng.standard_normal((n, L)) + 1j * rng.standard_normal((n, L))
        ws = rng.standard_normal((n, L)) + 1j * rng.standard_normal((n, L))
        ys = a * xs + b * ws
        cross = np.abs(np.sum(xs * ys.conj(), axis=1)) ** 2
        auto = np.sum(np.abs(xs) ** 2, axis=1) * np.sum(np.abs(ys) ** 2, axis=1)
        out[start:start + n] = cross / auto
    return out


def msc_cdf_monte_carlo(x: float, l_segments: int, true_msc: float,
                        n_trials: int = 1_000_000, seed: int = 0) -> tuple[float, float]:
    """Monte Carlo estimate of :func:`msc_cdf` and its standard error."""
    _check_msc_args(x, l_segments, true_msc)
    rng = np.random.default_rng(seed)
    hits = np.count_nonzero(sample_msc(l_segments, true_msc, n_trials, rng) <= x)
    est = hits / n_trials
    return est, math.sqrt(max(est * (1.0 - est), 1.0 / n_trials) / n_trials)
