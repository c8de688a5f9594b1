import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from interweave.admissibility import weak_boundary_raw
from interweave.channel import CapacityConstants, SystemParams, capacity_constants
from interweave.detectors import (DetectorKind, DetectorParams, RocCurve, admissible_arc,
                                  detectors_for_snr, logit_grid, roc, roc_curve, roc_energy,
                                  roc_matched_filter, roc_msc, roc_table)
from interweave.specfun import DomainError, gamma_p_inverse

ED = DetectorKind.ENERGY
MF = DetectorKind.MATCHED_FILTER
MSC = DetectorKind.MSC


def energy(l=4, m=64, snr_db=-24.0, scale=1.0):
    return DetectorParams(ED, l, m, power_pu=10 ** (snr_db / 10), ed_delta_scale=scale)


def test_params_validation():
    with pytest.raises(DomainError):
        DetectorParams(ED, 0, 4, power_pu=1.0)
    with pytest.raises(DomainError):
        DetectorParams(MF, signal_energy=-1.0)
    with pytest.raises(DomainError):
        DetectorParams(MSC, 1, true_msc=0.1)
    with pytest.raises(DomainError):
        DetectorParams(MSC, 4, true_msc=1.0)
    with pytest.raises(DomainError):
        DetectorParams(MF, noise_var=0.0)
    with pytest.raises(ValueError):
        DetectorParams("cyclostationary")


@pytest.mark.parametrize("p_fa", [0.0, 1.0, -0.1])
def test_open_interval(p_fa):
    for prm in (energy(), DetectorParams(MF, signal_energy=1.0), DetectorParams(MSC, 4, true_msc=0.2)):
        with pytest.raises(DomainError):
            roc(p_fa, prm)


# --- energy detector --------------------------------------------------------

def test_energy_limits():
    assert roc_energy(1 - 1e-12, energy(snr_db=0.0)) < 1e-9
    prm = DetectorParams(ED, 4, 64, power_pu=0.0)
    for p_fa in np.linspace(0.01, 0.99, 50):
        assert abs(roc_energy(float(p_fa), prm) - (1 - p_fa)) < 1e-9


def test_energy_monte_carlo():
    # statistic: squared norm of a 2L-dimensional real Gaussian with total
    # squared mean delta, thresholded at its H0 (1 - p_fa) quantile
    prm = energy()
    L, delta, p_fa = 4, prm.noncentrality, 0.1
    threshold = 2 * gamma_p_inverse(L, 1 - p_fa)
    rng = np.random.default_rng(21)
    n = 1_000_000
    z = rng.standard_normal((n, 2 * L)) + math.sqrt(delta / (2 * L))
    est = np.mean(np.sum(z * z, axis=1) <= threshold)
    se = math.sqrt(est * (1 - est) / n)
    assert abs(roc_energy(p_fa, prm) - est) < 3 * se


def test_energy_delta_scale():
    assert energy(scale=0.5).noncentrality == pytest.approx(0.5 * energy().noncentrality)
    assert roc_energy(0.1, energy(scale=0.5)) > roc_energy(0.1, energy())


# --- matched filter ---------------------------------------------------------

def test_matched_filter_examples():
    prm = DetectorParams(MF, signal_energy=0.0)
    for p_fa in np.linspace(0.001, 0.999, 100):
        assert abs(roc_matched_filter(float(p_fa), prm) - (1 - p_fa)) < 1e-9
    assert roc_matched_filter(0.5, DetectorParams(MF, signal_energy=1.0)) == pytest.approx(0.158655, abs=1e-6)
    assert roc_matched_filter(0.01, DetectorParams(MF, signal_energy=1e4)) < 1e-100


@given(st.floats(0.001, 0.999), st.floats(0, 50), st.floats(0, 50))
def test_matched_filter_decreasing_in_energy(p_fa, e1, e2):
    lo, hi = sorted((e1, e2))
    assert roc_matched_filter(p_fa, DetectorParams(MF, signal_energy=hi)) <= \
        roc_matched_filter(p_fa, DetectorParams(MF, signal_energy=lo)) + 1e-15


# --- coherence detector -----------------------------------------------------

def mc_msc_detector(L, c, p_fa, n, seed):
    """Fraction of sample coherences below the H0 threshold, simulated directly."""
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, L)) + 1j * rng.normal(size=(n, L))
    w = rng.normal(size=(n, L)) + 1j * rng.normal(size=(n, L))
    y = math.sqrt(c) * x + math.sqrt(1 - c) * w
    msc = np.abs(np.sum(x * y.conj(), 1)) ** 2 / (np.sum(abs(x) ** 2, 1) * np.sum(abs(y) ** 2, 1))
    return np.mean(msc <= 1 - p_fa ** (1 / (L - 1)))


@pytest.mark.parametrize("L", [2, 8])
def test_msc_chance_diagonal(L):
    prm = DetectorParams(MSC, L, true_msc=0.0)
    n = 300_000
    for p_fa in (0.05, 0.3, 0.7):
        assert abs(roc_msc(p_fa, prm) - (1 - p_fa)) < 1e-12
        est = mc_msc_detector(L, 0.0, p_fa, n, seed=L)
        assert abs(est - (1 - p_fa)) < 3 * math.sqrt(p_fa * (1 - p_fa) / n)


def test_msc_monte_carlo():
    n = 400_000
    est = mc_msc_detector(32, 0.3, 0.05, n, seed=99)
    se = math.sqrt(est * (1 - est) / n)
    assert abs(roc_msc(0.05, DetectorParams(MSC, 32, true_msc=0.3)) - est) < 3 * se


def test_msc_limit():
    assert roc_msc(1 - 1e-12, DetectorParams(MSC, 4, true_msc=0.5)) < 1e-6


# --- curves -----------------------------------------------------------------

def test_logit_grid():
    g = logit_grid(200)
    assert len(g) == 200 and np.all(np.diff(g) > 0)
    assert g[0] == pytest.approx(1e-4) and g[-1] == pytest.approx(1 - 1e-4)
    with pytest.raises(DomainError):
        logit_grid(1)


@pytest.mark.parametrize("prm", [energy(), energy(l=16, m=8, snr_db=-5.0),
                                 DetectorParams(MF, signal_energy=3.0),
                                 DetectorParams(MSC, 4, true_msc=0.2),
                                 DetectorParams(MSC, 32, true_msc=0.05)])
def test_curves_nonincreasing(prm):
    c = roc_curve(prm, np.linspace(0.005, 0.995, 100))
    assert np.all(np.diff(c.p_md) <= 1e-12)
    assert np.all((c.p_md >= 0) & (c.p_md <= 1))


def test_curve_validation():
    with pytest.raises(ValueError):
        RocCurve(MF, np.array([0.1, 0.1]), np.array([0.5, 0.4]))
    with pytest.raises(ValueError):
        RocCurve(MF, np.array([0.1, 0.2]), np.array([0.4, 0.5]))
    with pytest.raises(ValueError):
        RocCurve(MF, np.array([0.1]), np.array([0.4])).admissible_fraction


def test_matched_filter_dominates_energy_at_low_snr():
    mf, msc, ed = detectors_for_snr(-24.0)
    grid = logit_grid()
    a = roc_curve(mf, grid)
    b = roc_curve(ed, grid)
    assert np.all(a.p_md <= b.p_md)


def test_standard_detector_set():
    mf, msc, ed = detectors_for_snr(-24.0)
    snr = 10 ** -2.4
    assert mf.signal_energy == pytest.approx(256 * snr)
    assert msc.true_msc == pytest.approx(snr / (1 + snr))
    assert ed.noncentrality == pytest.approx(256 * snr)


def test_admissible_arc_all_true_when_boundary_saturates():
    k = capacity_constants(SystemParams(0.2, 1.0, 1.0))  # negative interference excess
    c = admissible_arc(roc_curve(energy()), k, 0.2)
    assert c.admissible_fraction == 1.0


def test_admissible_arc_mask_matches_boundary():
    k = capacity_constants(SystemParams.from_db(0.2, 10.0, 20.0))
    c = admissible_arc(roc_curve(energy(snr_db=-10.0)), k, 0.2)
    expected = [pmd <= weak_boundary_raw(k, 0.2, pfa) for pfa, pmd in zip(c.p_fa, c.p_md)]
    assert list(c.admissible_mask) == expected
    assert 0.0 < c.admissible_fraction < 1.0


def test_admissible_arc_at_zero_false_alarm():
    k = CapacityConstants.from_values(5.0, 1.0, 1.0, 0.2)
    curve = RocCurve(MF, np.array([0.0]), np.array([1.0]))
    assert admissible_arc(curve, k, 0.2).admissible_mask.all()


def test_roc_table(tmp_path):
    k = capacity_constants(SystemParams(0.2, 1.0, 1.0))
    curves = [admissible_arc(roc_curve(p, logit_grid(5)), k, 0.2) for p in detectors_for_snr(-24.0)]
    t = roc_table(curves, {"seed": 0})
    assert t.columns == ["detector", "p_fa", "p_md", "admissible"]
    assert len(t.rows) == 15
    assert {r[0] for r in t.rows} == {"energy", "matched_filter", "msc"}
    bare = roc_table([roc_curve(energy(), logit_grid(3))])
    assert bare.rows[0][3] is None
