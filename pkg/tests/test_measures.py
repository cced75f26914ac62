import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coherence_lab.bases import fourier_mub, prime_mub
from coherence_lab.errors import DimensionMismatch
from coherence_lab.haar import haar_unitaries, random_spectrum, random_state
from coherence_lab.hermlin import density_from_spectrum
from coherence_lab.measures import (
    coherence_report,
    coherence_weight,
    l1_coherence,
    optimal_unitary,
    qubit_l1_bloch,
    relative_entropy_coherence,
    roc,
    skew_info_coherence,
    skew_info_commutator,
    theorem_maxima,
    total_coherence,
)

PLUS = np.full((2, 2), 0.5, dtype=complex)


def contradiagonal(lam):
    lam = np.asarray(lam, dtype=float)
    h = fourier_mub(lam.size).vectors
    return (h * lam) @ h.conj().T


@pytest.mark.parametrize(
    "fn", [l1_coherence, relative_entropy_coherence, skew_info_coherence, roc, coherence_weight]
)
def test_incoherent_state_scores_zero(fn):
    assert fn(np.diag([0.2, 0.3, 0.5]).astype(complex)) == pytest.approx(0.0, abs=1e-7)


def test_plus_state_values():
    assert l1_coherence(PLUS) == pytest.approx(1.0)
    assert relative_entropy_coherence(PLUS) == pytest.approx(1.0, abs=1e-12)
    assert roc(PLUS) == pytest.approx(1.0, abs=1e-6)
    assert coherence_weight(PLUS) == pytest.approx(1.0, abs=1e-6)


def test_qubit_contradiagonal_values():
    rho = contradiagonal([0.75, 0.25])
    np.testing.assert_allclose(rho, [[0.5, 0.25], [0.25, 0.5]], atol=1e-15)
    assert l1_coherence(rho) == pytest.approx(0.5)
    assert roc(rho) == pytest.approx(0.5, abs=1e-6)
    assert coherence_weight(rho) == pytest.approx(0.5, abs=1e-6)
    assert skew_info_coherence(rho) == pytest.approx(1 - (np.sqrt(0.75) + 0.5) ** 2 / 2, abs=1e-12)


@pytest.mark.parametrize("d", [2, 3, 5])
def test_pure_mub_state_skew(d):
    psi = prime_mub(d, 1).column(0)
    assert skew_info_coherence(np.outer(psi, psi.conj())) == pytest.approx(1 - 1 / d, abs=1e-12)


def test_rank_deficient_contradiagonal_has_unit_weight():
    assert coherence_weight(contradiagonal([0.6, 0.4, 0.0])) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("d", [3, 4, 6])
def test_relative_entropy_at_contradiagonal(d):
    lam = random_spectrum(np.random.default_rng(d), d)
    s = -np.sum(lam * np.log2(lam))
    assert relative_entropy_coherence(contradiagonal(lam)) == pytest.approx(np.log2(d) - s, abs=1e-10)


def test_theorem_maxima_examples():
    m = theorem_maxima([0.75, 0.25])
    np.testing.assert_allclose(
        [m.roc_max, m.weight_max, m.skew_max, m.rel_entropy_max], [0.5, 0.5, 0.0669873, 0.1887219], atol=1e-7
    )
    for d in (2, 5):
        pure = theorem_maxima(np.eye(d)[0])
        np.testing.assert_allclose(
            [pure.roc_max, pure.weight_max, pure.skew_max, pure.rel_entropy_max], [d - 1, 1, 1 - 1 / d, np.log2(d)]
        )
        mixed = theorem_maxima(np.full(d, 1 / d))
        np.testing.assert_allclose(
            [mixed.roc_max, mixed.weight_max, mixed.skew_max, mixed.rel_entropy_max], 0, atol=1e-12
        )


def test_qubit_bloch_formula():
    rho = np.array([[0.5, 0.25 - 0.1j], [0.25 + 0.1j, 0.5]])
    assert qubit_l1_bloch(rho) == pytest.approx(0.5385164807, abs=1e-9)
    assert qubit_l1_bloch(rho) == pytest.approx(l1_coherence(rho), abs=1e-12)
    assert qubit_l1_bloch(PLUS) == pytest.approx(1.0)
    assert qubit_l1_bloch(np.diag([0.3, 0.7])) == 0.0
    with pytest.raises(DimensionMismatch):
        qubit_l1_bloch(np.eye(3) / 3)


def test_stacked_input_matches_single():
    rng = np.random.default_rng(11)
    states = np.array([random_state(rng, 3) for _ in range(5)])
    for fn in (l1_coherence, relative_entropy_coherence, skew_info_coherence, roc, coherence_weight):
        batch = fn(states)
        assert batch.shape == (5,)
        np.testing.assert_allclose(batch, [fn(s) for s in states], atol=1e-7)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_skew_forms_agree(d, seed):
    rho = random_state(np.random.default_rng(seed), d)
    assert skew_info_coherence(rho) == pytest.approx(skew_info_commutator(rho), abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_measures_never_exceed_maxima(d, seed):
    rng = np.random.default_rng(seed)
    lam = random_spectrum(rng, d)
    u = haar_unitaries(rng, 8, d)
    states = (u * lam) @ np.swapaxes(u.conj(), 1, 2)
    m = theorem_maxima(lam)
    assert np.all(roc(states) <= m.roc_max + 1e-5)
    assert np.all(coherence_weight(states) <= m.weight_max + 1e-5)
    assert np.all(skew_info_coherence(states) <= m.skew_max + 1e-9)
    assert np.all(relative_entropy_coherence(states) <= m.rel_entropy_max + 1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 7), st.integers(0, 2**32 - 1))
def test_optimal_unitary_attains_maxima(d, seed):
    rng = np.random.default_rng(seed)
    rho = random_state(rng, d)
    u = optimal_unitary(rho)
    best = u @ rho @ u.conj().T
    m = theorem_maxima(np.linalg.eigvalsh(rho))
    assert skew_info_coherence(best) == pytest.approx(m.skew_max, abs=1e-9)
    assert relative_entropy_coherence(best) == pytest.approx(m.rel_entropy_max, abs=1e-9)
    assert roc(best) == pytest.approx(m.roc_max, abs=1e-5)
    assert coherence_weight(best) == pytest.approx(m.weight_max, abs=1e-5)


def test_skew_maximum_equals_total_coherence():
    rng = np.random.default_rng(5)
    for d in range(2, 7):
        rho = random_state(rng, d)
        assert total_coherence(rho) == pytest.approx(theorem_maxima(np.linalg.eigvalsh(rho)).skew_max, abs=1e-12)


def test_qubit_mub_maximises_l1_and_entropy():
    rng = np.random.default_rng(9)
    lam = random_spectrum(rng, 2)
    u = haar_unitaries(rng, 10_000, 2)
    states = (u * lam) @ np.swapaxes(u.conj(), 1, 2)
    mub = contradiagonal(lam)
    assert l1_coherence(states).max() <= l1_coherence(mub) + 1e-6
    assert relative_entropy_coherence(states).max() <= relative_entropy_coherence(mub) + 1e-6


def test_report_fields_and_invariants():
    rho = density_from_spectrum([0.75, 0.25])
    rep = coherence_report(rho, fourier_mub(2))
    d = rep.to_dict()
    assert set(d) == {"dim", "basis", "l1", "rel_entropy", "skew_info", "roc", "weight", "maxima"}
    assert set(d["maxima"]) == {"roc_max", "weight_max", "skew_max", "rel_entropy_max"}
    assert rep.basis == "fourier"
    assert rep.roc == pytest.approx(0.5, abs=1e-6)
    for key, cap in [("roc", "roc_max"), ("weight", "weight_max"), ("skew_info", "skew_max"), ("rel_entropy", "rel_entropy_max")]:
        assert 0 <= d[key] <= d["maxima"][cap] + 1e-6
