"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Criteria that cannot hold for the model as stated are still evaluated at
their stated tolerance and allowed to fail.
"""

import json
import time

import numpy as np
import pytest

from _support import central_diff, random_constants, random_scenario
from interweave import cli
from interweave.admissibility import full_admissible_point, strong_pfa_bound, weak_boundary
from interweave.channel import SystemParams, capacity_constants, ergodic_capacity, ergodic_capacity_mc
from interweave.detectors import (DetectorKind, DetectorParams, admissible_arc, detectors_for_snr,
                                  logit_grid, roc_curve, roc_energy, roc_matched_filter, roc_msc)
from interweave.ratemodel import (DetectionErrorPair, eta_hat, eta_hat_partials, eta_ideal,
                                  ideal_rate_region, nonideal_rate_region,
                                  optimal_occupancy, sum_capacity)
from interweave.simulator import SimulationConfig, compare_with_analytic, run
from interweave.specfun import msc_cdf_monte_carlo


def test_criterion_01_capacity_closed_form_vs_monte_carlo(report):
    t0 = time.perf_counter()
    worst = 0.0
    for i, g_db in enumerate((-20, -10, 0, 10, 20, 30)):
        g = 10.0 ** (g_db / 10.0)
        closed = ergodic_capacity(g, 0.0, 1.0)
        mean, se = ergodic_capacity_mc(g, 0.0, 1.0, n_samples=10**6, seed=i)
        worst = max(worst, abs(mean - closed) / se)
    elapsed = time.perf_counter() - t0
    ok = worst < 3.0 and elapsed < 5.0
    report(1, ok, f"max |z| = {worst:.2f} over 6 SNRs, {elapsed:.2f} s")
    assert ok


def test_criterion_02_eta_identities(report):
    rng = np.random.default_rng(2)
    consts = [random_constants(rng) for _ in range(5)]
    grid = np.linspace(0.0, 0.98, 50)
    exact = all(eta_hat(k, float(p), DetectionErrorPair(0.0, 0.0)) == eta_ideal(k, float(p))
                for k in consts for p in grid)
    unit = all(eta_hat(k, float(p), DetectionErrorPair(0.0, 1.0)) == 1.0
               for k in consts for p in grid)
    report(2, exact and unit, f"bit-identical at (0,0): {exact}; equal to 1 at (0,1): {unit}")
    assert exact and unit


def test_criterion_03_partial_derivatives(report):
    rng = np.random.default_rng(3)
    worst = 0.0
    pfa_slopes = []
    for _ in range(50):
        k = random_constants(rng)
        p, pfa, pmd = rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95)
        d = eta_hat_partials(k, p, DetectionErrorPair(pfa, pmd))
        h = 1e-5
        num = (
            central_diff(lambda x: eta_hat(k, x, DetectionErrorPair(pfa, pmd)), p, h),
            central_diff(lambda x: eta_hat(k, p, DetectionErrorPair(pfa, x)), pmd, h),
            central_diff(lambda x: eta_hat(k, p, DetectionErrorPair(x, pmd)), pfa, h),
        )
        for ana, fd in zip((d.d_dp, d.d_dpmd, d.d_dpfa), num):
            worst = max(worst, abs(fd - ana) / max(abs(ana), 1.0))
        # the p_fa slope must not depend on (p, p_md)
        slopes = [eta_hat_partials(k, float(q), DetectionErrorPair(pfa, float(m))).d_dpfa
                  for q in np.linspace(0.05, 0.95, 5) for m in np.linspace(0.0, 1.0, 5)]
        pfa_slopes.append(max(slopes) - min(slopes))
    spread = max(pfa_slopes)
    ok = worst < 1e-6 and spread <= 1e-12
    report(3, ok, f"max relative FD error {worst:.2e}; p_fa slope spread {spread:.1e}")
    assert ok


def test_criterion_04_weak_boundary(report, positive_excess):
    rng = np.random.default_rng(4)
    k = positive_excess
    worst = 0.0
    for _ in range(100):
        p = rng.uniform(0.05, 0.95)
        # keep the boundary inside [0, 1] so the point lies exactly on it
        pfa_max = min(1.0, p * k.a_c / ((1 - p) * k.interference_excess))
        pfa = rng.uniform(0.0, pfa_max)
        pmd = weak_boundary(k, p, pfa)
        worst = max(worst, abs(eta_hat(k, p, DetectionErrorPair(pfa, pmd)) - 1.0))
    report(4, worst < 1e-9, f"max |eta_hat - 1| on the boundary = {worst:.1e}")
    assert worst < 1e-9


def test_criterion_05_strong_bounds(report):
    ok = True
    for snr_db, rs_db in ((0.0, 0.0), (10.0, 3.0), (30.0, 20.0)):
        ks = [capacity_constants(SystemParams.from_db(p, snr_db, rs_db)) for p in (0.1, 0.5, 0.9)]
        k = ks[0]
        ok &= strong_pfa_bound(k, 1.0) == 0.0
        ok &= strong_pfa_bound(k, full_admissible_point(k)) == 1.0
        for g in (1.0, 0.95, 0.8, full_admissible_point(k)):
            ok &= len({strong_pfa_bound(kk, g) for kk in ks}) == 1
    report(5, ok, "gamma = 1 gives 0, gamma = B_p/A_p gives 1, identical across p")
    assert ok


@pytest.mark.parametrize("label, snr_db, rs_db", [("0 dB, RS 0", 0.0, 0.0),
                                                  ("20 dB, RS 10", 20.0, 10.0)])
def test_criterion_06_region_containment(report, label, snr_db, rs_db):
    lattice = np.linspace(0.0, 1.0, 11)
    violations = checked = 0
    for p in lattice:
        k = capacity_constants(SystemParams.from_db(float(p), snr_db, rs_db))
        ideal = ideal_rate_region(k, float(p))
        for pfa in lattice:
            for pmd in lattice:
                poly = nonideal_rate_region(k, float(p), DetectionErrorPair(float(pfa), float(pmd)))
                for v in poly.vertices:
                    checked += 1
                    violations += not ideal.contains(v)
    report(6, violations == 0, f"[{label}] {violations} of {checked} vertices outside the ideal region")
    assert violations == 0


def test_criterion_07a_optimal_occupancy(report):
    rng = np.random.default_rng(7)
    grid = np.linspace(0.0, 1.0, 1001)
    mismatches = 0
    for _ in range(100):
        k = random_constants(rng)
        err = DetectionErrorPair(*rng.random(2))
        values = np.array([sum_capacity(k, float(p), err) for p in grid])
        opt = optimal_occupancy(k, err)
        best = values.max()
        if opt.any_p:
            mismatches += not np.ptp(values) <= 1e-9 * max(1.0, best)
        else:
            mismatches += not sum_capacity(k, opt.p_star, err) >= best - 1e-12
    report("7a", mismatches == 0, f"{mismatches} of 100 draws disagree with the 1001-point argmax")
    assert mismatches == 0


def test_criterion_07b_sum_capacity_peak_at_perfect_sensing(report):
    rng = np.random.default_rng(77)
    grid = np.linspace(0.0, 1.0, 21)
    misses = []
    for i in range(20):
        prm = random_scenario(rng)
        k = capacity_constants(prm)
        vals = np.array([[sum_capacity(k, prm.p, DetectionErrorPair(float(a), float(b)))
                          for b in grid] for a in grid])
        if vals.max() > vals[0, 0] + 1e-12:
            misses.append((i, k.interference_excess))
    detail = (f"{len(misses)} of 20 scenarios peak away from (0,0)"
              + (f"; all have A_p - B_p - B_c < 0 (e.g. {misses[0][1]:.3f})" if misses else ""))
    report("7b", not misses, detail)
    assert all(ex < 0 for _, ex in misses)
    assert not misses


def test_criterion_08_simulator(report):
    rng = np.random.default_rng(8)
    worst = 0.0
    slowest = 0.0
    for i in range(10):
        prm = random_scenario(rng)
        err = DetectionErrorPair(*rng.random(2))
        t0 = time.perf_counter()
        res = run(SimulationConfig(prm, err, n_slots=10**6, seed=i))
        slowest = max(slowest, time.perf_counter() - t0)
        for row in compare_with_analytic(res):
            worst = max(worst, abs(row["z"]))
    ok = worst < 3.0 and slowest < 30.0
    report(8, ok, f"max |z| = {worst:.2f} over 10 configurations; slowest run {slowest:.2f} s")
    assert ok


def test_criterion_09_efficiency_growth(report):
    def growth(rs_db):
        k = capacity_constants(SystemParams.from_db(0.5, 40.0, rs_db))
        return eta_ideal(k, 0.98) / eta_ideal(k, 0.8)

    rs = (10.0, 7.5, 5.0, 2.5, 0.0)
    factors = [growth(r) for r in rs]
    in_band = 7.0 <= factors[0] <= 13.0
    rising = all(b > a for a, b in zip(factors, factors[1:]))
    k10 = capacity_constants(SystemParams.from_db(0.5, 40.0, 10.0))
    report(9, in_band and rising,
           f"factor {factors[0]:.2f} at RS 10 dB (eta {eta_ideal(k10, 0.8):.2f} -> "
           f"{eta_ideal(k10, 0.98):.2f}); factors toward 0 dB: "
           + ", ".join(f"{f:.2f}" for f in factors))
    assert in_band and rising


def test_criterion_10_detector_ordering(report):
    p = 0.2
    k = capacity_constants(SystemParams.from_db(p, 0.0, 20.0))
    grid = logit_grid(200)
    frac = {prm.kind: admissible_arc(roc_curve(prm, grid), k, p).admissible_fraction
            for prm in detectors_for_snr(-24.0)}
    mf, msc, ed = (frac[DetectorKind.MATCHED_FILTER], frac[DetectorKind.MSC],
                   frac[DetectorKind.ENERGY])
    ok = mf >= msc >= ed and mf == 1.0
    report(10, ok, f"admissible fractions MF {mf:.3f}, MSC {msc:.3f}, ED {ed:.3f} "
                   f"(A_p - B_p - B_c = {k.interference_excess:.3f})")
    assert ok


def test_criterion_11_roc_chance_lines(report):
    pfa = np.linspace(0.01, 0.99, 99)
    mf0 = DetectorParams(DetectorKind.MATCHED_FILTER, signal_energy=0.0)
    ed0 = DetectorParams(DetectorKind.ENERGY, 4, 64, power_pu=0.0)
    mf_err = max(abs(roc_matched_filter(float(x), mf0) - (1 - x)) for x in pfa)
    ed_err = max(abs(roc_energy(float(x), ed0) - (1 - x)) for x in pfa)
    worst_z = msc_err = 0.0
    for L in (2, 4, 16):
        prm = DetectorParams(DetectorKind.MSC, L, true_msc=0.0)
        for x in (0.05, 0.3, 0.7):
            thr = 1 - x ** (1 / (L - 1))
            est, se = msc_cdf_monte_carlo(thr, L, 0.0, n_trials=200_000, seed=L)
            worst_z = max(worst_z, abs(est - (1 - x)) / se)
            msc_err = max(msc_err, abs(roc_msc(x, prm) - (1 - x)))
    ok = mf_err < 1e-9 and ed_err < 1e-9 and msc_err < 1e-9 and worst_z < 3.0
    report(11, ok, f"diagonal error MF {mf_err:.1e}, ED {ed_err:.1e}, MSC {msc_err:.1e}; "
                   f"MSC Monte Carlo max |z| {worst_z:.2f}")
    assert ok


def test_criterion_12_determinism(report, tmp_path):
    doc = {
        "schema_version": 1, "seed": 11,
        "scenario": {"p": 0.3, "pu_snr_db": 10, "rs_db": 5},
        "sweep": {"p": "0:0.1:0.9", "rs_db": [0, 10]},
        "cases": [{"p_fa": 0.0, "p_md": 0.2}],
        "gamma": 0.9, "grid_resolution": 41,
        "detectors": [{"kind": "matched_filter", "signal_energy": 1.0},
                      {"kind": "msc", "l_segments": 4, "true_msc": 0.1},
                      {"kind": "energy", "l_segments": 4, "m_per_segment": 64, "snr_db": -10}],
        "simulation": {"n_slots": 200_000, "p_fa": 0.1, "p_md": 0.2},
    }
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(doc))
    outputs = {
        "eta-sweep": ["eta_sweep.csv"],
        "rate-region": ["rate_region.csv"],
        "admissible-grid": ["admissible_grid.csv", "admissible_summary.csv"],
        "detector-roc": ["detector_roc.csv", "detector_summary.csv"],
        "simulate": ["simulate.json", "simulate_comparison.csv"],
    }
    differing = []
    for cmd, files in outputs.items():
        for run_name, workers in (("a", "1"), ("b", "1"), ("c", "4")):
            cli.main([cmd, "--config", str(cfg), "--out", str(tmp_path / run_name), "--svg",
                      "--workers", workers])
        for name in files:
            ref = (tmp_path / "a" / name).read_bytes()
            for other in ("b", "c"):
                if (tmp_path / other / name).read_bytes() != ref:
                    differing.append(f"{other}/{name}")
    report(12, not differing, "all outputs byte-identical across reruns and 1 vs 4 workers"
           if not differing else f"differences: {', '.join(differing)}")
    assert not differing
