import numpy as np
import pytest

import sdp_oracle
from coherence_lab.bases import fourier_mub
from coherence_lab.diagsdp import DiagSdpProblem, DiagSdpSolution, DiagSdpSolver, Sense, solve, verify
from coherence_lab.errors import SolverFailure
from coherence_lab.haar import random_spectrum, random_state
from coherence_lab.hermlin import DensityMatrix, density_from_spectrum

SYM = DensityMatrix(np.array([[0.5, 0.25], [0.25, 0.5]], dtype=complex))


def problem(rho, sense, tol=1e-7):
    return DiagSdpProblem(rho if isinstance(rho, DensityMatrix) else DensityMatrix(rho), sense, tol)


def test_diagonal_state_dominating_is_itself():
    p = problem(density_from_spectrum([0.2, 0.3, 0.5]), "dominating")
    sol = solve(p)
    np.testing.assert_allclose(sol.x, [0.2, 0.3, 0.5], atol=1e-6)
    assert sol.objective == pytest.approx(1.0, abs=1e-7)


@pytest.mark.parametrize("sense, x", [("dominating", 0.75), ("dominated", 0.25)])
def test_hand_checked_qubit(sense, x):
    p = problem(SYM, sense)
    sol = solve(p)
    np.testing.assert_allclose(sol.x, [x, x], atol=1e-6)
    assert sol.objective == pytest.approx(2 * x, abs=1e-7)
    assert sol.gap <= 1e-7
    assert sol.certificate >= -1e-7
    assert verify(sol, p)


def test_verify_rejects_perturbed_solution():
    p = problem(SYM, "dominating")
    sol = solve(p)
    bad_x = sol.x - 10 * p.tol
    bad = DiagSdpSolution(bad_x, float(bad_x.sum()), sol.gap, sol.iterations, sol.certificate)
    assert not verify(bad, p)


def test_problem_requires_positive_tol():
    with pytest.raises(ValueError):
        DiagSdpProblem(SYM, Sense.DOMINATING, 0.0)


def test_iteration_budget_raises_with_best_point():
    rho = DensityMatrix(random_state(np.random.default_rng(0), 5))
    with pytest.raises(SolverFailure) as e:
        DiagSdpSolver(max_newton=3).solve(problem(rho, "dominating"))
    assert e.value.best_x is not None


@pytest.mark.parametrize("d", range(2, 8))
def test_contradiagonal_matches_closed_forms(d):
    lam = random_spectrum(np.random.default_rng(100 + d), d)
    h = fourier_mub(d).vectors
    rho = (h * lam) @ h.conj().T
    up = solve(problem(rho, "dominating"))
    down = solve(problem(rho, "dominated"))
    assert up.objective - 1 == pytest.approx(d * lam.max() - 1, abs=1e-5)
    assert 1 - down.objective == pytest.approx(1 - d * lam.min(), abs=1e-5)


def test_rank_deficient_contradiagonal_dominated_is_zero():
    h = fourier_mub(4).vectors
    rho = (h * np.array([0.5, 0.3, 0.2, 0.0])) @ h.conj().T
    sol = solve(problem(rho, "dominated"))
    assert sol.objective == pytest.approx(0.0, abs=1e-7)


def test_dephasing_path_is_monotone():
    rho = random_state(np.random.default_rng(3), 4)
    dephased = np.diag(np.diag(rho))
    up, down = [], []
    for t in (0, 0.25, 0.5, 0.75, 1):
        m = DensityMatrix((1 - t) * rho + t * dephased)
        up.append(solve(problem(m, "dominating")).objective)
        down.append(solve(problem(m, "dominated")).objective)
    assert np.all(np.diff(up) <= 1e-6)
    assert np.all(np.diff(down) >= -1e-6)


def test_batch_agrees_with_single():
    rng = np.random.default_rng(4)
    states = np.array([random_state(rng, 3) for _ in range(6)])
    solver = DiagSdpSolver()
    for sense in Sense:
        batch = solver.solve_batch(states, sense)
        for s, sol in zip(states, batch):
            assert sol.objective == pytest.approx(solver.solve(problem(s, sense)).objective, abs=1e-7)


def _qubit_states(rng, n):
    g = rng.standard_normal((n, 2, 2)) + 1j * rng.standard_normal((n, 2, 2))
    m = g @ np.swapaxes(g.conj(), 1, 2)
    return m / np.trace(m, axis1=1, axis2=2).real[:, None, None]


def test_reported_gap_bounds_true_error():
    rng = np.random.default_rng(6)
    states = _qubit_states(rng, 100)
    solver = DiagSdpSolver()
    for sense, oracle in [("dominating", sdp_oracle.qubit_dominating), ("dominated", sdp_oracle.qubit_dominated)]:
        truth = oracle(states).astype(float)
        for sol, exact in zip(solver.solve_batch(states, sense), truth):
            assert abs(sol.objective - exact) <= sol.gap + 1e-12


def test_oracle_agreement_small_sample():
    rng = np.random.default_rng(8)
    g = rng.standard_normal((50, 3, 3))
    real3 = g @ np.swapaxes(g, 1, 2)
    real3 /= np.trace(real3, axis1=1, axis2=2)[:, None, None]
    solver = DiagSdpSolver()
    for sense, oracle in [("dominating", sdp_oracle.real3_dominating), ("dominated", sdp_oracle.real3_dominated)]:
        got = [s.objective for s in solver.solve_batch(real3.astype(complex), sense)]
        np.testing.assert_allclose(got, oracle(real3).astype(float), atol=1e-6)
