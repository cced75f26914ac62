"""Reference bases: Fourier and prime-dimension MUBs, complex Hadamard
matrices and diagonal (incoherent) unitaries."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidDimension, NotPrime, ValidationError
from .hermlin import UnitaryMatrix, as_array, read_matrix

KINDS = ("computational", "fourier", "prime", "custom")


@dataclass(frozen=True, eq=False)
class BasisFamily:
    """An orthonormal basis stored as the columns of a unitary matrix."""

    dim: int
    kind: str
    vectors: np.ndarray
    l: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown basis kind {self.kind!r}")
        v = np.array(self.vectors, dtype=complex)
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    @property
    def label(self) -> str:
        if self.kind == "prime":
            return f"prime:{self.l}"
        return self.kind

    def column(self, m: int) -> np.ndarray:
        return self.vectors[:, m]


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    k = 2
    while k * k <= n:
        if n % k == 0:
            return False
        k += 1
    return True


def _unit_phases(k, d):
    # k is an integer array; reduce mod d first so the angle stays in [0, 2pi)
    return np.exp(2j * np.pi * (np.asarray(k) % d) / d)


def computational(d: int) -> BasisFamily:
    return BasisFamily(d, "computational", np.eye(d, dtype=complex))


def fourier_mub(d: int) -> BasisFamily:
    """Column m has entries exp(2 pi i m n / d) / sqrt(d), n = 0..d-1."""
    if d < 2:
        raise InvalidDimension(f"dimension must be at least 2, got {d}")
    n = np.arange(d)
    vecs = _unit_phases(np.outer(n, n), d) / np.sqrt(d)
    return BasisFamily(d, "fourier", vecs)


def prime_mub(d: int, l: int) -> BasisFamily:
    """Column m has entries exp(2 pi i l (m + n)^2 / d) / sqrt(d)."""
    if not is_prime(d):
        raise NotPrime(f"prime MUB family needs a prime dimension, got {d}")
    if not 1 <= l <= d - 1:
        raise InvalidDimension(f"family index l must lie in 1..{d - 1}, got {l}")
    n = np.arange(d)
    if d == 2:
        # the quadratic phase collapses both columns onto one ray at d = 2;
        # use the half-phase variant exp(i pi (2mn + l n^2) / 2), i.e. (1, +-i)/sqrt(2)
        vecs = np.exp(0.5j * np.pi * ((2 * np.outer(n, n) + l * n[:, None] ** 2) % 4)) / np.sqrt(2)
        return BasisFamily(d, "prime", vecs, l=l)
    m_plus_n = n[:, None] + n[None, :]  # rows n, columns m
    vecs = _unit_phases(l * m_plus_n**2, d) / np.sqrt(d)
    return BasisFamily(d, "prime", vecs, l=l)


def all_mubs(d: int) -> list[BasisFamily]:
    """Computational, Fourier and, for prime d, the d-1 quadratic families."""
    fams = [computational(d), fourier_mub(d)]
    if is_prime(d):
        fams += [prime_mub(d, l) for l in range(1, d)]
    return fams


def u_mub(family: BasisFamily) -> UnitaryMatrix:
    """sum_m |phi_m><m|, i.e. the matrix whose columns are the basis vectors."""
    return UnitaryMatrix(np.array(family.vectors))


def is_chm(h, tol=1e-10) -> bool:
    h = as_array(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        return False
    d = h.shape[0]
    if np.abs(np.abs(h) - 1.0).max() > tol:
        return False
    return bool(np.abs(h @ h.conj().T - d * np.eye(d)).max() <= tol * d)


def rescaled_chm(h) -> UnitaryMatrix:
    """H / sqrt(d) for a complex Hadamard matrix H."""
    h = as_array(h)
    if not is_chm(h):
        raise ValidationError("matrix is not a complex Hadamard matrix")
    return UnitaryMatrix(h / np.sqrt(h.shape[0]))


def custom_family(h) -> BasisFamily:
    u = rescaled_chm(h)
    return BasisFamily(u.dim, "custom", u.matrix)


def dephase_unitary(phases) -> UnitaryMatrix:
    """diag(exp(-i gamma_n))."""
    g = np.asarray(phases, dtype=float)
    return UnitaryMatrix(np.diag(np.exp(-1j * g)))


def quadratic_dephasing(d: int, l: int) -> UnitaryMatrix:
    """The incoherent unitary sum_n exp(-2 pi i l n^2 / d) |n><n|.

    Built as diag(conj(sqrt(d) phi_0)) from column 0 of the prime family, so
    that U^dag maps the all-ones vector onto that column (also at d = 2).
    """
    col0 = prime_mub(d, l).column(0) * np.sqrt(d)
    return UnitaryMatrix(np.diag(np.conj(col0)))


def overlap_table(a: BasisFamily, b: BasisFamily) -> np.ndarray:
    """|<a_m|b_n>|^2 for all m, n."""
    return np.abs(a.vectors.conj().T @ b.vectors) ** 2


def basis_from_spec(spec: str, d: int) -> BasisFamily:
    """Parse ``computational``, ``fourier``, ``prime:L`` or ``file:PATH``."""
    if spec in ("computational", "identity"):
        return computational(d)
    if spec == "fourier":
        return fourier_mub(d)
    if spec.startswith("prime:"):
        return prime_mub(d, int(spec.split(":", 1)[1]))
    if spec.startswith("file:"):
        fam = custom_family(read_matrix(Path(spec.split(":", 1)[1])))
        if fam.dim != d:
            raise ValidationError(f"basis file is {fam.dim}-dimensional, state is {d}-dimensional")
        return fam
    raise ValueError(f"unrecognised basis {spec!r}")
