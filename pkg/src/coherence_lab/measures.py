"""Coherence measures in the computational basis and their basis-optimal
closed-form maxima.

Every measure accepts a :class:`DensityMatrix`, a plain ``(d, d)`` array, or
a stack ``(..., d, d)`` of matrices; stacked input returns an array of
values.  Entropies are in bits.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .bases import BasisFamily, computational
from .diagsdp import DiagSdpProblem, DiagSdpSolver, Sense
from .errors import DimensionMismatch
from .hermlin import DensityMatrix, Spectrum, as_array, dagger, jacobi_eigh, matrix_sqrt, spectral_decompose

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def _scalar(v):
    return float(v) if np.ndim(v) == 0 else v


def _diag(a):
    return np.real(np.diagonal(a, axis1=-2, axis2=-1))


def shannon_bits(p) -> np.ndarray:
    """-sum p log2 p along the last axis, with 0 log 0 = 0."""
    p = np.clip(np.asarray(p, dtype=float), 0.0, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, -p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return terms.sum(-1)


def von_neumann_entropy(rho):
    return _scalar(shannon_bits(jacobi_eigh(as_array(rho))[0]))


def l1_coherence(rho):
    """Sum of moduli of the off-diagonal entries."""
    a = as_array(rho)
    total = np.abs(a).sum(axis=(-2, -1)) - np.abs(np.diagonal(a, axis1=-2, axis2=-1)).sum(-1)
    return _scalar(total)


def relative_entropy_coherence(rho):
    """S(diag rho) - S(rho) in bits."""
    a = as_array(rho)
    val = shannon_bits(_diag(a)) - shannon_bits(jacobi_eigh(a)[0])
    return _scalar(np.maximum(val, 0.0))


def skew_info_coherence(rho):
    """1 - sum_k <k|sqrt(rho)|k>^2."""
    root = matrix_sqrt(as_array(rho))
    return _scalar(1.0 - np.sum(_diag(root) ** 2, axis=-1))


def skew_information(rho, k) -> float:
    """Wigner-Yanase skew information -1/2 tr([sqrt(rho), K]^2)."""
    root = matrix_sqrt(as_array(rho))
    k = as_array(k)
    comm = root @ k - k @ root
    return float(-0.5 * np.trace(comm @ comm).real)


def skew_info_commutator(rho) -> float:
    """The same measure summed term by term over the projectors |k><k|."""
    a = as_array(rho)
    d = a.shape[-1]
    total = 0.0
    for k in range(d):
        proj = np.zeros((d, d), dtype=complex)
        proj[k, k] = 1.0
        total += skew_information(a, proj)
    return total


def total_coherence(rho) -> float:
    """1 - (tr sqrt(rho))^2 / d, evaluated from the matrix square root."""
    root = matrix_sqrt(as_array(rho))
    d = root.shape[-1]
    return _scalar(1.0 - np.real(np.trace(root, axis1=-2, axis2=-1)) ** 2 / d)


def _solve(rho, sense, solver):
    solver = solver or DiagSdpSolver()
    a = as_array(rho)
    if a.ndim == 2:
        rho = rho if isinstance(rho, DensityMatrix) else DensityMatrix(a)
        return solver.solve(DiagSdpProblem(rho, sense, solver.tol)).objective
    flat = a.reshape((-1,) + a.shape[-2:])
    sols = solver.solve_batch(flat, sense)
    return np.array([s.objective for s in sols]).reshape(a.shape[:-2])


def roc(rho, solver: DiagSdpSolver | None = None):
    """Robustness of coherence: min tr(D) - 1 over diagonal D >= rho."""
    val = np.asarray(_solve(rho, Sense.DOMINATING, solver)) - 1.0
    return _scalar(np.maximum(val, 0.0))


def coherence_weight(rho, solver: DiagSdpSolver | None = None):
    """1 - max tr(D) over diagonal 0 <= D <= rho."""
    val = 1.0 - np.asarray(_solve(rho, Sense.DOMINATED, solver))
    return _scalar(np.clip(val, 0.0, 1.0))


def qubit_l1_bloch(rho) -> float:
    """l1 coherence of a qubit as the transverse Bloch radius sqrt(r1^2 + r2^2)."""
    a = as_array(rho)
    if a.shape != (2, 2):
        raise DimensionMismatch(f"qubit formula needs a 2 x 2 state, got {a.shape}")
    r1 = np.trace(a @ PAULI[0]).real
    r2 = np.trace(a @ PAULI[1]).real
    return float(np.hypot(r1, r2))


@dataclass(frozen=True)
class TheoremMaxima:
    roc_max: float
    weight_max: float
    skew_max: float
    rel_entropy_max: float


def theorem_maxima(spectrum) -> TheoremMaxima:
    """Largest value of each measure over all reference bases.

    Accepts a :class:`Spectrum` or a bare eigenvalue array.
    """
    lam = spectrum.eigenvalues if isinstance(spectrum, Spectrum) else np.asarray(spectrum, dtype=float)
    lam = np.clip(lam, 0.0, None)
    d = lam.size
    return TheoremMaxima(
        roc_max=float(d * lam.max() - 1.0),
        weight_max=float(1.0 - d * lam.min()),
        skew_max=float(1.0 - np.sqrt(lam).sum() ** 2 / d),
        rel_entropy_max=float(np.log2(d) - shannon_bits(lam)),
    )


def optimal_unitary(rho, chm=None) -> np.ndarray:
    """H_d V^dag, with H_d the rescaled Fourier matrix unless ``chm`` is given."""
    spec = spectral_decompose(rho)
    d = spec.dim
    if chm is None:
        from .bases import fourier_mub

        h = fourier_mub(d).vectors
    else:
        h = as_array(chm)
    return h @ dagger(spec.eigenvectors)


def in_basis(rho, basis: BasisFamily) -> np.ndarray:
    """Matrix elements <b_m|rho|b_n> of the state in the given basis."""
    b = basis.vectors
    return dagger(b) @ as_array(rho) @ b


@dataclass(frozen=True)
class CoherenceReport:
    dim: int
    basis: str
    l1: float
    rel_entropy: float
    skew_info: float
    roc: float
    weight: float
    maxima: dict

    def to_dict(self) -> dict:
        return asdict(self)


def coherence_report(rho, basis: BasisFamily | None = None, solver: DiagSdpSolver | None = None) -> CoherenceReport:
    a = as_array(rho)
    basis = basis or computational(a.shape[0])
    m = in_basis(a, basis)
    m = DensityMatrix(0.5 * (m + dagger(m)))
    maxima = theorem_maxima(spectral_decompose(a))
    return CoherenceReport(
        dim=a.shape[0],
        basis=basis.label,
        l1=float(l1_coherence(m)),
        rel_entropy=float(relative_entropy_coherence(m)),
        skew_info=float(skew_info_coherence(m)),
        roc=float(roc(m, solver)),
        weight=float(coherence_weight(m, solver)),
        maxima=asdict(maxima),
    )
