"""Acceptance criteria at full scale, one PASS/FAIL line each.

The lines are printed as each test runs and repeated in the pytest terminal
summary.  Running this file directly prints them without pytest.
Criterion 2 and the Monte-Carlo criteria take a few minutes together.
"""

import filecmp
import os
import sys

import numpy as np
import pytest

from coherence_lab import checks
from coherence_lab.cli import run
from coherence_lab.diagsdp import DiagSdpSolver, Sense

sys.path.insert(0, os.path.dirname(__file__))
import sdp_oracle  # noqa: E402

WORKERS = min(8, os.cpu_count() or 1)
LINES: list[str] = []


def report(number, title, results):
    ok = all(r.passed for r in results)
    detail = "; ".join(f"{r.name}: {r.detail}" for r in results)
    line = f"{'PASS' if ok else 'FAIL'} [{number:>2}] {title} | {detail}"
    LINES.append(line)
    print(line)
    return ok


@pytest.fixture(scope="module")
def fig2_results():
    return checks.fig2(n=1_000_000, spot_n=10_000_000, workers=WORKERS)


def test_01_theorem_maxima_attained():
    assert report(1, "theorem maxima attained at the optimal unitary", checks.theorem_attainment(trials=200))


@pytest.mark.slow
def test_02_theorem_maxima_dominate_haar_samples():
    assert report(2, "no Haar sample exceeds the theorem maxima", checks.theorem_dominance(n=10_000))


def test_03_o_bound_pinned_values():
    assert report(3, "O_d pinned values", checks.o_pinned(tol=1e-6))


def test_04_r_dominates_b_with_gap_identity():
    assert report(4, "R_d >= B_d and gap identity", checks.appendix_d(n=10_000))


def test_05_qutrit_contradiagonal_saturates_b():
    assert report(5, "qutrit contradiagonal reaches B_3", checks.qutrit_saturation(n=1000, tol=1e-9))


def test_06_fig1_unit_modulus_points():
    assert report(6, "fig1 unit-modulus points", checks.fig1(steps=10_000))


@pytest.mark.slow
def test_07_fig2_exceedance(fig2_results):
    rows = [r for r in fig2_results if r.name.startswith("exceedance")]
    assert report(7, "fig2 exceedance over O_d at n=1e6", rows)


@pytest.mark.slow
def test_08_fig2_deviation(fig2_results):
    rows = [r for r in fig2_results if r.name.startswith("fig2_deviation")]
    assert report(8, "fig2 relative deviation <= 0.05 and nonincreasing in n", rows)


@pytest.mark.slow
def test_09_rank2_stays_below_b():
    assert report(9, "rank-2 state stays below B_4", checks.rank2(n=1_000_000, workers=WORKERS))


def _oracle_instances(seed=2024, count=1000):
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((count, 2, 2)) + 1j * rng.standard_normal((count, 2, 2))
    qubit = g @ np.swapaxes(g.conj(), 1, 2)
    qubit /= np.trace(qubit, axis1=1, axis2=2).real[:, None, None]
    h = rng.standard_normal((count, 3, 3))
    real3 = h @ np.swapaxes(h, 1, 2)
    real3 /= np.trace(real3, axis1=1, axis2=2)[:, None, None]
    return qubit, real3


def test_10_sdp_matches_bruteforce_oracle():
    qubit, real3 = _oracle_instances()
    solver = DiagSdpSolver()
    cases = [
        ("2x2 dominating", qubit, Sense.DOMINATING, sdp_oracle.qubit_dominating),
        ("2x2 dominated", qubit, Sense.DOMINATED, sdp_oracle.qubit_dominated),
        ("3x3 dominating", real3, Sense.DOMINATING, sdp_oracle.real3_dominating),
        ("3x3 dominated", real3, Sense.DOMINATED, sdp_oracle.real3_dominated),
    ]
    results = []
    for name, states, sense, oracle in cases:
        got = np.array([s.objective for s in solver.solve_batch(states.astype(complex), sense)])
        err = float(np.max(np.abs(got - oracle(states).astype(float))))
        results.append(checks.CheckResult(name, err <= 1e-6, f"max |solver - oracle| {err:.2e} over {len(states)}"))
    assert report(10, "SDP solver vs brute-force oracle", results)


REPRO_RUNS = {
    "fig1": ["--steps", "10000"],
    "fig2": ["--n", "20000", "--p-grid", "0.2,0.4"],
    "rank2": ["--n", "20000"],
    "appendix": ["--trials", "50"],
}


def test_11_repro_is_byte_deterministic(tmp_path):
    results = []
    for exp, extra in REPRO_RUNS.items():
        dirs = [tmp_path / f"{exp}_{k}" for k in (1, 2)]
        threads = ["1", str(WORKERS)]
        codes = [run(["--threads", t, "repro", exp, "--seed", "11", "--out", str(d)] + extra) for t, d in zip(threads, dirs)]
        csvs = sorted(p.name for p in dirs[0].glob("*.csv"))
        match, mismatch, errors = filecmp.cmpfiles(dirs[0], dirs[1], csvs, shallow=False)
        ok = codes == [0, 0] and bool(csvs) and not mismatch and not errors
        results.append(checks.CheckResult(exp, ok, f"{len(match)}/{len(csvs)} CSV files identical"))
    assert report(11, "repro CSVs byte-identical across repeats", results)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
