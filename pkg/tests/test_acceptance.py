"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` (the lines are printed even
when output capture is on) or directly with ``python tests/test_acceptance.py``.
Reference values are the published data points of the reference experiments.
"""
import math
import os
import time

import numpy as np
import pytest

from signfem.harness import (
    CountRule,
    ManufacturedCase,
    Scenario,
    generalized_spectrum_small,
    min_generalized_singular,
    predicted_spectrum,
    run_sweep,
    scenario_mesh,
    solve,
    solve_dense,
    solver_deviation,
)
from signfem.spectral import REFERENCE_HCRIT, REFERENCE_RY, MeshConfig, PhysicalConfig, s_crit
from signfem.stability import critical_meshes, solve_ry_for_rational_s
from signfem.verification import identity_suite

# pinned tolerances
IDENTITY_RUNTIME = 1.0
RECOVERY_TOL = 1e-12
SPECTRUM_TOL = 1e-9
SPECTRUM_RUNTIME = 10.0
L2_REL_TOL = 1e-3
H1_REL_TOL = 2e-2
EOC_TOL = 0.15
SWEEP_RUNTIME = 300.0
UNSTABLE_FLOOR = 1e3
MAGNITUDE_FACTOR = 1e2
DIP_CEILING = 1e-2
CRITICAL_SV_CEILING = 1e-8
FLIPPED_SV_FLOOR = 0.1
SV_SLACK = 1e-6
SOLVER_TOL = 1e-9

REFERENCE = PhysicalConfig(-1.0, 1.2)
WORKERS = min(4, os.cpu_count() or 1)

FLIPPED_L2 = {1: 0.277064085892543, 2: 0.0708605177807353, 5: 0.0114064608363246,
              26: 0.000439036068923166, 197: 7.35607723089434e-06}
FLIPPED_H1 = {1: 0.665894540363034, 2: 0.339341555077619, 5: 0.136443379672831,
              26: 0.0267788896655613, 197: 0.00346643277184047}
NEAR_L2 = {1: 0.125633414048247, 197: 7.37461952198657e-06}
CRITICAL_L2 = {1: 286245228391.311, 2: 30501296361.8988, 3: 351882224.993559, 4: 1262890933.61168,
               5: 338210013.39803, 6: 6353453.28178043, 7: 2013259.57623923, 8: 879421.61492825}
EOC_M = (114, 137, 164, 197)


def report(capsys, label, ok, detail):
    with capsys.disabled():
        print(f"\n{'PASS' if ok else 'FAIL'} {label}: {detail}")
    assert ok, f"{label}: {detail}"


def rel(a, b):
    return abs(a - b) / abs(b)


@pytest.fixture(scope="session")
def flipped_records():
    start = time.perf_counter()
    ms = sorted(set(FLIPPED_L2) | set(EOC_M))
    records = run_sweep(Scenario.Flipped, REFERENCE, ms, workers=WORKERS, count_rule=CountRule.Floor)
    return {r.m: r for r in records}, time.perf_counter() - start


def test_criterion_1_identity_suite(capsys):
    start = time.perf_counter()
    results = identity_suite(1000, seed=0)
    elapsed = time.perf_counter() - start
    worst = max(results, key=lambda r: r.max_error / r.tol)
    ok = all(r.passed for r in results) and elapsed < IDENTITY_RUNTIME
    report(capsys, "criterion 1 identity suite", ok,
           f"{len(results)} identities, worst {worst.name} {worst.max_error:.2e} (tol {worst.tol:g}), {elapsed:.2f}s")


def test_criterion_2_configuration_recovery(capsys):
    start = time.perf_counter()
    ry = solve_ry_for_rational_s(-1.2, 0.5, 1, 2)
    s = s_crit(-1.2, 0.5, 2 / math.sqrt(11))
    widths = [h for _, h in critical_meshes(-1.2, 0.5, 2 / math.sqrt(11), 10)]
    expected = [math.sqrt(11) * math.pi / (4 * m) for m in range(1, 11)]
    err = max(abs(ry - 2 / math.sqrt(11)), abs(s - math.pi / 2),
              max(abs(h - e) for h, e in zip(widths, expected)))
    elapsed = time.perf_counter() - start
    ok = err < RECOVERY_TOL and len(widths) == 10 and elapsed < IDENTITY_RUNTIME
    report(capsys, "criterion 2 configuration recovery", ok, f"max error {err:.2e}, {elapsed:.2f}s")


def oracle_grid():
    """Meshes with N_minus in {1,2,3}, M in {2,4,8} and r in {0.5,1,2}."""
    for n in (1, 2, 3):
        for big_m in (2, 4, 8):
            for r in (0.5, 1.0, 2.0):
                counts = {0.5: (n, 2 * n), 1.0: (n, n), 2.0: (2 * n, n)}[r]
                yield MeshConfig.from_counts(*counts, big_m, REFERENCE_HCRIT)


def test_criterion_3_block_diagonal_spectrum(capsys):
    phys = PhysicalConfig(-1.0, 1.2, REFERENCE_HCRIT)
    start = time.perf_counter()
    worst, count = 0.0, 0
    for mesh in oracle_grid():
        dev = np.max(np.abs(generalized_spectrum_small(phys, mesh) - predicted_spectrum(phys, mesh)))
        worst, count = max(worst, dev), count + 1
    elapsed = time.perf_counter() - start
    ok = worst < SPECTRUM_TOL and elapsed < SPECTRUM_RUNTIME
    report(capsys, "criterion 3 spectrum oracle", ok, f"{count} meshes, max deviation {worst:.2e}, {elapsed:.2f}s")


def test_criterion_4_flipped_sweep(capsys, flipped_records):
    records, elapsed = flipped_records
    l2_err = max(rel(records[m].rel_l2, v) for m, v in FLIPPED_L2.items())
    h1_err = max(rel(records[m].rel_h1, v) for m, v in FLIPPED_H1.items())
    eoc_l2, eoc_h1 = [], []
    for a, b in zip(EOC_M, EOC_M[1:]):
        scale = math.log(b / a)
        eoc_l2.append(math.log(records[a].rel_l2 / records[b].rel_l2) / scale)
        eoc_h1.append(math.log(records[a].rel_h1 / records[b].rel_h1) / scale)
    ok_l2 = l2_err < L2_REL_TOL
    ok_eoc = all(abs(e - 2) <= EOC_TOL for e in eoc_l2) and all(abs(e - 1) <= EOC_TOL for e in eoc_h1)
    ok_h1 = h1_err < H1_REL_TOL
    ok = ok_l2 and ok_eoc and ok_h1 and elapsed < SWEEP_RUNTIME
    report(capsys, "criterion 4 flipped sweep", ok,
           f"L2 rel dev {l2_err:.2e}, H1 rel dev {h1_err:.2e}, "
           f"EOC L2 {min(eoc_l2):.3f}..{max(eoc_l2):.3f}, EOC H1 {min(eoc_h1):.3f}..{max(eoc_h1):.3f}, {elapsed:.1f}s")


def test_criterion_5_near_critical_sweep(capsys):
    records = run_sweep(Scenario.NearCritical, REFERENCE, sorted(NEAR_L2), workers=WORKERS,
                        count_rule=CountRule.Floor)
    err = max(rel(r.rel_l2, NEAR_L2[r.m]) for r in records)
    report(capsys, "criterion 5 near-critical sweep", err < L2_REL_TOL, f"L2 rel dev {err:.2e}")


def test_criterion_6_critical_instability(capsys):
    ms = sorted(CRITICAL_L2) + [15, 22]
    records = {r.m: r for r in run_sweep(Scenario.Critical, REFERENCE, ms, workers=WORKERS,
                                         count_rule=CountRule.Floor)}
    large = all(records[m].rel_l2 > UNSTABLE_FLOOR for m in CRITICAL_L2)
    factors = [records[m].rel_l2 / v for m, v in CRITICAL_L2.items()]
    magnitude = all(1 / MAGNITUDE_FACTOR <= f <= MAGNITUDE_FACTOR for f in factors)
    dip = records[15].rel_l2 < DIP_CEILING and records[22].rel_l2 > UNSTABLE_FLOOR
    report(capsys, "criterion 6 critical instability", large and magnitude and dip,
           f"min L2 (m<=8) {min(records[m].rel_l2 for m in CRITICAL_L2):.2e}, ratio to reference "
           f"{min(factors):.2f}..{max(factors):.2f}, m=15 {records[15].rel_l2:.3e}, m=22 {records[22].rel_l2:.3e}")


def test_criterion_7_blow_up_indicator(capsys):
    critical = [min_generalized_singular(REFERENCE, scenario_mesh(Scenario.Critical, m, REFERENCE), "analytic")
                for m in range(1, 11)]
    flipped = [min_generalized_singular(REFERENCE, scenario_mesh(Scenario.Flipped, m, REFERENCE), "analytic")
               for m in range(1, 11)]
    decreasing = all(b < a for a, b in zip(critical, critical[1:]))
    small = all(v < CRITICAL_SV_CEILING for v in critical)
    bounded = min(flipped) >= FLIPPED_SV_FLOOR * abs(REFERENCE.sigma_minus) - SV_SLACK
    report(capsys, "criterion 7 blow-up indicator", decreasing and small and bounded,
           f"critical {critical[0]:.2e}..{critical[-1]:.2e} strictly decreasing={decreasing}, "
           f"below {CRITICAL_SV_CEILING:g}={small}, flipped min {min(flipped):.6f}")


def test_criterion_8_solver_cross_validation(capsys):
    phys = PhysicalConfig(-1.0, 1.2, REFERENCE_HCRIT)
    case = ManufacturedCase.reference(phys)
    worst, count = 0.0, 0
    for mesh in oracle_grid():
        worst = max(worst, solver_deviation(solve(phys, mesh, case).values, solve_dense(phys, mesh, case)))
        count += 1
    report(capsys, "criterion 8 solver cross-validation", worst < SOLVER_TOL,
           f"{count} meshes, max relative deviation {worst:.2e}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
