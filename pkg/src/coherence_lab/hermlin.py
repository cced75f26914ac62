"""Dense complex Hermitian linear algebra for small density matrices.

The eigensolver is a cyclic complex Jacobi method.  It works on a single
``(d, d)`` matrix or on a stack ``(..., d, d)``; in the stacked case each
rotation is applied to every matrix of the stack at once, which keeps
Monte-Carlo workloads vectorised.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    ConvergenceFailure,
    DimensionMismatch,
    NotHermitian,
    NotPSD,
    NotUnitTrace,
    ParseError,
)

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10


def _readonly(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Validated d x d state.  Build through :func:`validate_density`."""

    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


@dataclass(frozen=True, eq=False)
class UnitaryMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = self.matrix
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatch(f"unitary must be square, got shape {m.shape}")
        err = np.abs(m @ m.conj().T - np.eye(m.shape[0])).max()
        if err > DEFAULT_TOL:
            raise ValueError(f"matrix is not unitary (max |UU^dag - I| = {err:.3e})")
        object.__setattr__(self, "matrix", _readonly(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues in descending order and the unitary whose columns are the
    matching eigenvectors, so that ``V^dag rho V = diag(eigenvalues)``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def lambda_min(self) -> float:
        return float(self.eigenvalues[-1])


def as_array(x) -> np.ndarray:
    """Raw complex array behind a DensityMatrix, UnitaryMatrix or array-like."""
    if isinstance(x, (DensityMatrix, UnitaryMatrix)):
        return x.matrix
    return np.asarray(x, dtype=complex)


def dagger(a):
    return np.conj(np.swapaxes(a, -1, -2))


# --------------------------------------------------------------------------
# Jacobi eigensolver


def jacobi_eigh(a, tol=1e-15, max_sweeps=60):
    """Eigen-decomposition of Hermitian matrices by cyclic complex Jacobi.

    Returns ``(w, v)`` with eigenvalues ascending along the last axis and
    ``a = v @ diag(w) @ v^dag``.  Only the Hermitian part of ``a`` is used.
    """
    a = np.array(a, dtype=complex)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise DimensionMismatch(f"expected square matrices, got shape {a.shape}")
    single = a.ndim == 2
    if single:
        a = a[None]
    batch_shape = a.shape[:-2]
    d = a.shape[-1]
    a = a.reshape(-1, d, d)
    a = 0.5 * (a + dagger(a))
    v = np.broadcast_to(np.eye(d, dtype=complex), a.shape).copy()

    scale = np.sqrt(np.sum(np.abs(a) ** 2, axis=(1, 2)))
    thresh = tol * np.where(scale > 0, scale, 1.0)
    offmask = ~np.eye(d, dtype=bool)

    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.abs(a[:, offmask]) ** 2, axis=1))
        if np.all(off <= thresh):
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[:, p, q]
                mag = np.abs(apq)
                rot = mag > 1e-300
                if not rot.any():
                    continue
                safe = np.where(rot, mag, 1.0)
                phase = np.where(rot, apq / safe, 1.0)  # e^{i phi}
                app = a[:, p, p].real
                aqq = a[:, q, q].real
                tau = (aqq - app) / (2.0 * safe)
                t = np.sign(tau) / (np.abs(tau) + np.hypot(1.0, tau))
                t = np.where(tau == 0, 1.0, t)
                t = np.where(rot, t, 0.0)
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                ph = np.conj(phase)  # e^{-i phi}

                # columns: A <- A J with J_pp=c, J_pq=s, J_qp=-s e^{-i phi}, J_qq=c e^{-i phi}
                cp = a[:, :, p].copy()
                cq = a[:, :, q]
                a[:, :, p] = c[:, None] * cp - (s * ph)[:, None] * cq
                a[:, :, q] = s[:, None] * cp + (c * ph)[:, None] * cq
                # rows: A <- J^dag A
                rp = a[:, p, :].copy()
                rq = a[:, q, :]
                a[:, p, :] = c[:, None] * rp - (s * phase)[:, None] * rq
                a[:, q, :] = s[:, None] * rp + (c * phase)[:, None] * rq
                a[:, p, q] = 0.0
                a[:, q, p] = 0.0
                a[:, p, p] = a[:, p, p].real
                a[:, q, q] = a[:, q, q].real

                vp = v[:, :, p].copy()
                vq = v[:, :, q]
                v[:, :, p] = c[:, None] * vp - (s * ph)[:, None] * vq
                v[:, :, q] = s[:, None] * vp + (c * ph)[:, None] * vq
    else:
        off = np.sqrt(np.sum(np.abs(a[:, offmask]) ** 2, axis=1))
        if not np.all(off <= thresh):
            raise ConvergenceFailure(
                f"Jacobi did not converge in {max_sweeps} sweeps "
                f"(residual off-diagonal norm {off.max():.3e})"
            )

    w = np.diagonal(a, axis1=1, axis2=2).real.copy()
    order = np.argsort(w, axis=1, kind="stable")
    w = np.take_along_axis(w, order, axis=1)
    v = np.take_along_axis(v, order[:, None, :], axis=2)
    w = w.reshape(batch_shape + (d,))
    v = v.reshape(batch_shape + (d, d))
    if single:
        return w[0], v[0]
    return w, v


def eigvalsh(a):
    return jacobi_eigh(a)[0]


def min_eigenvalue(a) -> float:
    return float(eigvalsh(a)[..., 0].min())


# --------------------------------------------------------------------------
# states


def validate_density(m, tol=DEFAULT_TOL) -> DensityMatrix:
    """Check Hermiticity, unit trace and positivity; clamp tiny negatives.

    Eigenvalues in ``(-tol, 0)`` are set to zero and the spectrum is
    renormalised.  Each clamp is logged.
    """
    m = np.array(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"density matrix must be square, got shape {m.shape}")
    herm = np.abs(m - m.conj().T).max()
    if herm > tol:
        raise NotHermitian(f"matrix is not Hermitian: max |A_ij - conj(A_ji)| = {herm:.3e}", herm)
    tr = np.trace(m)
    terr = abs(tr - 1.0)
    if terr > tol:
        raise NotUnitTrace(f"trace is {tr.real:.12g}, off by {terr:.3e}", terr)
    m = 0.5 * (m + m.conj().T)
    w, v = jacobi_eigh(m)
    if w[0] < -tol:
        raise NotPSD(f"smallest eigenvalue {w[0]:.6g} is negative", -w[0])
    if w[0] < 0:
        log.info("clamping %d eigenvalue(s) down to %.3e to zero", int((w < 0).sum()), w[0])
        w = np.clip(w, 0.0, None)
        w = w / w.sum()
        m = (v * w) @ v.conj().T
        m = 0.5 * (m + m.conj().T)
    return DensityMatrix(_readonly(m))


def density_from_spectrum(eigenvalues, basis=None) -> DensityMatrix:
    """``basis @ diag(eigenvalues) @ basis^dag`` (the identity basis by default)."""
    lam = np.asarray(eigenvalues, dtype=float)
    if basis is None:
        return validate_density(np.diag(lam).astype(complex))
    u = as_array(basis)
    return validate_density((u * lam) @ u.conj().T)


def spectral_decompose(rho) -> Spectrum:
    a = as_array(rho)
    w, v = jacobi_eigh(a)
    w = np.clip(w[::-1], 0.0, 1.0)
    v = v[:, ::-1]
    w.setflags(write=False)
    return Spectrum(w, _readonly(v))


def matrix_sqrt(rho) -> np.ndarray:
    """Principal square root of positive semidefinite matrices (stack aware)."""
    a = as_array(rho)
    w, v = jacobi_eigh(a)
    # eigenvalues below the solver's resolution are zero; their roots would be ~1e-8 noise
    floor = 4 * a.shape[-1] * np.finfo(float).eps * np.abs(w).max(axis=-1, keepdims=True)
    root = np.sqrt(np.where(w > floor, w, 0.0))
    return (v * root[..., None, :]) @ dagger(v)


def conjugate(rho, u):
    """``U rho U^dag``.  Returns a DensityMatrix when given one."""
    a = as_array(rho)
    um = as_array(u)
    if a.shape[-1] != um.shape[-1]:
        raise DimensionMismatch(f"state is {a.shape[-1]}-dimensional, unitary is {um.shape[-1]}")
    out = um @ a @ dagger(um)
    out = 0.5 * (out + dagger(out))
    if isinstance(rho, DensityMatrix):
        return DensityMatrix(_readonly(out))
    return out


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt inner product tr(a^dag b)."""
    return complex(np.trace(dagger(as_array(a)) @ as_array(b)))


# --------------------------------------------------------------------------
# text format: first line d, then d rows of d entries like ``0.5``, ``1-2i``

_IMAG = re.compile(r"[ij]$")


def _parse_entry(tok: str) -> complex:
    t = tok.strip().replace("I", "i").replace("J", "j")
    if _IMAG.search(t):
        t = t[:-1] + "j"
        if t in ("j", "+j", "-j"):
            t = t.replace("j", "1j")
        elif t[-2] in "+-":
            t = t[:-1] + "1j"
    return complex(t)


def parse_matrix_text(text: str) -> np.ndarray:
    """Parse a dimension line followed by one row per line.

    Blank lines and ``#`` comments are skipped; reported line numbers refer
    to the original text.
    """
    raw = text.splitlines()
    lines = [(k + 1, ln) for k, ln in enumerate(raw) if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ParseError("empty matrix text", line=1)
    first_no, first = lines[0]
    try:
        d = int(first.split()[0])
    except ValueError:
        raise ParseError(f"first line must be the dimension, got {first!r}", line=first_no, column=1)
    if d < 1:
        raise ParseError(f"dimension must be positive, got {d}", line=first_no, column=1)
    rows = lines[1:]
    if len(rows) < d:
        # point at where the first missing row should have been
        raise ParseError(f"expected {d} matrix rows, found {len(rows)}", line=len(raw) + 1)
    if len(rows) > d:
        raise ParseError(f"expected {d} matrix rows, found {len(rows)}", line=rows[d][0])
    out = np.zeros((d, d), dtype=complex)
    for i, (line_no, ln) in enumerate(rows):
        toks = ln.split()
        if len(toks) != d:
            raise ParseError(f"expected {d} entries, found {len(toks)}", line=line_no)
        for j, tok in enumerate(toks):
            try:
                out[i, j] = _parse_entry(tok)
            except ValueError:
                raise ParseError(f"cannot parse complex entry {tok!r}", line=line_no, column=j + 1)
    return out


def read_matrix(path) -> np.ndarray:
    return parse_matrix_text(Path(path).read_text(encoding="utf-8"))


def format_complex(z) -> str:
    z = complex(z)
    return f"{z.real!r}{'+' if z.imag >= 0 or np.isnan(z.imag) else '-'}{abs(z.imag)!r}i"


def format_matrix_text(m) -> str:
    m = as_array(m)
    rows = [" ".join(format_complex(z) for z in row) for row in m]
    return f"{m.shape[0]}\n" + "\n".join(rows) + "\n"
