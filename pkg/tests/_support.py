"""Helpers shared by the test modules."""

import numpy as np

from interweave.channel import SystemParams, capacity_constants


def random_scenario(rng, p_range=(0.05, 0.95), snr_range=(-10.0, 40.0), rs_range=(0.0, 30.0)):
    p = float(rng.uniform(*p_range))
    return SystemParams.from_db(p, float(rng.uniform(*snr_range)), float(rng.uniform(*rs_range)))


def random_constants(rng, **kw):
    return capacity_constants(random_scenario(rng, **kw))


def central_diff(f, x, h):
    return (f(x + h) - f(x - h)) / (2.0 * h)


def rel_err(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def binomial_se(est, n):
    return np.sqrt(max(est * (1.0 - est), 1.0 / n) / n)
