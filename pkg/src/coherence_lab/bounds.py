"""Upper bounds on the l1 coherence reachable by unitary rotation, the
generalised Gell-Mann Bloch vector, and the maximally coherent mixed states
that saturate the purity bound."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from .errors import InvalidDimension, NotPSD
from .hermlin import DensityMatrix, Spectrum, as_array, jacobi_eigh, spectral_decompose


@lru_cache(maxsize=None)
def _generators(d: int) -> tuple:
    gens = []
    pairs = list(combinations(range(d), 2))
    for i, j in pairs:
        g = np.zeros((d, d), dtype=complex)
        g[i, j] = g[j, i] = 1.0
        gens.append(g)
    for i, j in pairs:
        g = np.zeros((d, d), dtype=complex)
        g[i, j] = -1j
        g[j, i] = 1j
        gens.append(g)
    for k in range(1, d):
        diag = np.zeros(d)
        diag[:k] = 1.0
        diag[k] = -k
        gens.append(np.diag(diag * np.sqrt(2.0 / (k * (k + 1)))).astype(complex))
    for g in gens:
        g.setflags(write=False)
    return tuple(gens)


def su_generators(d: int) -> list[np.ndarray]:
    """Generalised Gell-Mann matrices normalised to tr(X_i X_j) = 2 delta_ij.

    Order: symmetric pairs (i<j, lexicographic), antisymmetric pairs, then
    the d-1 diagonal matrices.
    """
    if d < 2:
        raise InvalidDimension(f"dimension must be at least 2, got {d}")
    return list(_generators(d))


@dataclass(frozen=True, eq=False)
class BlochVector:
    dim: int
    components: np.ndarray
    norm: float


def bloch_vector(rho) -> BlochVector:
    a = as_array(rho)
    d = a.shape[0]
    gens = np.array(su_generators(d))
    comps = np.real(np.einsum("ij,kji->k", a, gens))
    return BlochVector(d, comps, float(np.linalg.norm(comps)))


def purity(rho):
    a = as_array(rho)
    return np.real(np.einsum("...ij,...ji->...", a, a))


def bloch_norm_from_purity(p, d):
    return np.sqrt(np.maximum(2.0 * (p - 1.0 / d), 0.0))


def bound_b(rho):
    """sqrt((d^2 - d)/2) |x|, with |x| fixed by the purity."""
    a = as_array(rho)
    d = a.shape[-1]
    val = np.sqrt((d * d - d) / 2.0) * bloch_norm_from_purity(purity(a), d)
    return float(val) if np.ndim(val) == 0 else val


def _eigs(spectrum) -> np.ndarray:
    if isinstance(spectrum, Spectrum):
        return np.asarray(spectrum.eigenvalues, dtype=float)
    lam = np.asarray(spectrum, dtype=float)
    return np.sort(lam)[::-1]


def bound_b_from_spectrum(spectrum) -> float:
    lam = _eigs(spectrum)
    d = lam.size
    return float(np.sqrt((d * d - d) / 2.0) * bloch_norm_from_purity(np.sum(lam**2), d))


def bound_o(spectrum) -> float:
    """sum_{n=1}^{d-1} sqrt(sum_{k,l} lam_k lam_l cos(2 pi n (k-l)/d)).

    The value depends on how the eigenvalues are indexed; they are taken in
    descending order.
    """
    lam = _eigs(spectrum)
    d = lam.size
    k = np.arange(d)
    diff = k[:, None] - k[None, :]
    total = 0.0
    for n in range(1, d):
        inner = lam @ np.cos(2 * np.pi * n * diff / d) @ lam
        total += np.sqrt(max(inner, 0.0))
    return float(total)


def bound_r(spectrum) -> float:
    """(d - 1)(d lam_max - 1)."""
    lam = _eigs(spectrum)
    d = lam.size
    return float((d - 1) * (d * lam[0] - 1.0))


def gap_pair_sum(spectrum) -> float:
    """sum_{1<=i<j<=d-1} (lam_0 - lam_i)(lam_0 - lam_j), lam descending."""
    e = _eigs(spectrum)
    e = e[0] - e[1:]
    return float(0.5 * (e.sum() ** 2 - np.sum(e**2)))


def appendix_d_gap(spectrum) -> float:
    """R_d^2 - B_d^2 from the eigenvalues alone.

    Equals d(d-1)[(d-1)(d-2) lam_0^2 - 2(d-2) lam_0 sum_j lam_j
    + 2 sum_{i<j} lam_i lam_j] = 2 d(d-1) gap_pair_sum; nonnegative because
    every factor of the pair sum is.
    """
    d = _eigs(spectrum).size
    return float(2 * d * (d - 1) * gap_pair_sum(spectrum))


def mixedness(p, d):
    """Linear-entropy mixedness d(1 - tr rho^2)/(d - 1)."""
    return d * (1.0 - p) / (d - 1)


@dataclass(frozen=True)
class BoundSet:
    b_d: float
    o_d: float
    r_d: float
    mixedness: float
    purity: float
    entangled_capable: bool

    def to_dict(self) -> dict:
        return asdict(self)


def bound_set(rho) -> BoundSet:
    a = as_array(rho)
    d = a.shape[0]
    spec = spectral_decompose(a)
    p = float(purity(a))
    return BoundSet(
        b_d=bound_b(a),
        o_d=bound_o(spec),
        r_d=bound_r(spec),
        mixedness=float(mixedness(p, d)),
        purity=p,
        # d = 2 gives threshold 1: only pure states
        entangled_capable=bool(p >= 1.0 / (d - 1) - 1e-12),
    )


def mcms_pairs(d: int) -> list[tuple[int, int]]:
    return list(combinations(range(d), 2))


def mcms_state(d: int, r: float, phases=None, tol: float = 1e-10) -> DensityMatrix:
    """I/d + (r/2) sum_{i<j} (e^{i phi_ij}|i><j| + h.c.).

    ``phases`` follows :func:`mcms_pairs` order; ``None`` means all zero.
    Raises NotPSD when the combination is not a valid state.
    """
    if d < 2:
        raise InvalidDimension(f"dimension must be at least 2, got {d}")
    if not 0 < r <= 2.0 / d + 1e-15:
        raise InvalidDimension(f"r must lie in (0, 2/d] = (0, {2.0 / d:.6g}], got {r}")
    pairs = mcms_pairs(d)
    phi = np.zeros(len(pairs)) if phases is None else np.asarray(phases, dtype=float)
    if phi.shape != (len(pairs),):
        raise InvalidDimension(f"expected {len(pairs)} phases, got {phi.size}")
    m = np.eye(d, dtype=complex) / d
    for (i, j), ph in zip(pairs, phi):
        m[i, j] = 0.5 * r * np.exp(1j * ph)
        m[j, i] = np.conj(m[i, j])
    w = jacobi_eigh(m)[0]
    if w[0] < -tol:
        raise NotPSD(f"phases and r give a negative eigenvalue {w[0]:.6g}", -w[0])
    m.setflags(write=False)
    return DensityMatrix(m)


def mcms_radius(mix: float, d: int) -> float:
    """r = 2 sqrt(1 - M) / d for linear mixedness M."""
    return 2.0 * np.sqrt(max(1.0 - mix, 0.0)) / d
