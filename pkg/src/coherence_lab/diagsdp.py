"""Barrier-Newton solver for the two diagonal-shift semidefinite programs
behind the robustness of coherence and the coherence weight.

``dominating``: minimise sum(x) subject to diag(x) - rho >= 0.
``dominated``:  maximise sum(x) subject to rho - diag(x) >= 0, x >= 0.

Both are instances of the LMI ``S(x) = A0 + sigma * sum_i x_i a_i a_i^dag``
with rank-one directions ``a_i``; the core below is written for that form
and vectorised over a leading batch axis.  For the dominated problem with a
singular ``rho`` the LMI is restricted to the range of ``rho``, where a
strictly feasible point exists.

The reported gap is the distance to a dual-feasible point built from the
central-path multiplier ``mu * S^-1`` (rescaled onto the dual constraint),
so it always bounds the true optimality error from above.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleStart, SolverFailure
from .hermlin import DensityMatrix, as_array, dagger, jacobi_eigh


class Sense(str, enum.Enum):
    DOMINATING = "dominating"
    DOMINATED = "dominated"


@dataclass(frozen=True, eq=False)
class DiagSdpProblem:
    rho: DensityMatrix
    sense: Sense
    tol: float = 1e-7

    def __post_init__(self):
        object.__setattr__(self, "sense", Sense(self.sense))
        if not self.tol > 0:
            raise ValueError(f"tolerance must be positive, got {self.tol}")


@dataclass(frozen=True, eq=False)
class DiagSdpSolution:
    x: np.ndarray
    objective: float
    gap: float
    iterations: int
    certificate: float
    bound: float = field(default=np.nan)  # dual bound the gap was measured against


def constraint_matrix(rho, x, sense) -> np.ndarray:
    rho = as_array(rho)
    x = np.asarray(x, dtype=float)
    if Sense(sense) is Sense.DOMINATING:
        return np.diag(x).astype(complex) - rho
    return rho - np.diag(x)


def _barrier_newton(A0, A, sigma, nonneg, x0, tol, mu0, shrink, newton_tol, max_newton):
    """Path-following on ``c.x / mu - log det S(x) [- sum log x]``.

    ``sigma = +1`` minimises sum(x); ``sigma = -1`` maximises it.  Returns
    ``(x, gap, bound, iterations)`` per problem, or raises SolverFailure.
    """
    B, r, n = A.shape
    cost = float(sigma)
    Ah = dagger(A)
    x = x0.astype(float).copy()
    mu = np.full(B, float(mu0))
    iters = np.zeros(B, dtype=int)
    gap = np.full(B, np.inf)
    bound = np.full(B, np.nan)
    best_x = x.copy()
    best_gap = np.full(B, np.inf)
    active = np.ones(B, dtype=bool)

    def smat(xs, idx):
        return A0[idx] + sigma * (A[idx] * xs[:, None, :]) @ Ah[idx]

    def barrier(xs, idx, ref):
        # barrier value relative to the point ``ref``; keeps the linear term small at tiny mu
        w = np.linalg.eigvalsh(smat(xs, idx))
        ok = w[:, 0] > 0
        if nonneg:
            ok &= np.all(xs > 0, axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            f = cost * (xs - ref).sum(1) / mu[idx] - np.log(np.where(ok[:, None], w, 1.0)).sum(1)
            if nonneg:
                f -= np.log(np.where(ok[:, None], xs, 1.0)).sum(1)
        return np.where(ok, f, np.inf), ok

    _, ok0 = barrier(x, np.arange(B), x)
    if not ok0.all():
        raise InfeasibleStart("initial point is not strictly feasible", best_x=x0)

    while active.any():
        # centring for the current mu of every active problem
        todo = active.copy()
        for _ in range(100):
            idx = np.flatnonzero(todo)
            if idx.size == 0:
                break
            xi = x[idx]
            S = smat(xi, idx)
            Sinv = np.linalg.inv(S)
            M = Ah[idx] @ Sinv @ A[idx]
            g = cost / mu[idx, None] - sigma * np.real(np.diagonal(M, axis1=1, axis2=2))
            H = np.abs(M) ** 2
            if nonneg:
                g = g - 1.0 / xi
                H = H + np.einsum("bi,ij->bij", 1.0 / xi**2, np.eye(n))
            dx = -np.linalg.solve(H, g[..., None])[..., 0]
            dec2 = -(g * dx).sum(1)
            iters[idx] += 1

            centred = dec2 / 2 <= newton_tol
            if centred.any():
                # one last full step squares the residual the dual estimate is built from
                sel = np.flatnonzero(centred)
                cand = xi[sel] + dx[sel]
                _, ok = barrier(cand, idx[sel], xi[sel])
                xi[sel[ok]] = cand[ok]
            f, _ = barrier(xi, idx, xi)
            step = np.ones(idx.size)
            accepted = centred.copy()
            for _ in range(60):
                pend = ~accepted
                if not pend.any():
                    break
                cand = xi[pend] + step[pend, None] * dx[pend]
                fc, ok = barrier(cand, idx[pend], xi[pend])
                armijo = fc <= f[pend] - 0.25 * step[pend] * dec2[pend]
                good = ok & (armijo | (dec2[pend] < 1e-6))
                sel = np.flatnonzero(pend)
                xi[sel[good]] = cand[good]
                accepted[sel[good]] = True
                step[sel[~good]] *= 0.5
            x[idx] = xi
            todo[idx[centred | (step < 1e-15)]] = False
            over = iters > max_newton
            if over.any():
                worst = np.flatnonzero(over)[0]
                raise SolverFailure(
                    f"Newton budget of {max_newton} steps exhausted",
                    best_x=best_x[worst].copy(),
                    best_gap=float(best_gap[worst]),
                )

        # dual bound from Z = mu S^-1
        idx = np.flatnonzero(active)
        xi = x[idx]
        Z = mu[idx, None, None] * np.linalg.inv(smat(xi, idx))
        q = np.real(np.diagonal(Ah[idx] @ Z @ A[idx], axis1=1, axis2=2))
        if sigma > 0:
            # diag(Z') = 1 exactly after symmetric diagonal scaling (A = I here)
            scale = 1.0 / np.sqrt(q)
            Zs = Z * scale[:, :, None] * scale[:, None, :]
            lower = np.real(np.einsum("bij,bji->b", Zs, -A0[idx]))
            bnd = lower
            gi = xi.sum(1) - lower
        else:
            kappa = np.maximum(1.0, 1.0 / q.min(1))
            upper = kappa * np.real(np.einsum("bij,bji->b", Z, A0[idx]))
            bnd = upper
            gi = upper - xi.sum(1)
        gap[idx] = gi
        bound[idx] = bnd
        better = gi < best_gap[idx]
        best_gap[idx[better]] = gi[better]
        best_x[idx[better]] = xi[better]
        done = gi <= tol
        active[idx[done]] = False
        mu[idx[~done]] *= shrink
        # below ~1e-13 the dual estimate is dominated by rounding in S^-1
        stuck = active & (mu < 1e-13)
        if stuck.any():
            worst = np.flatnonzero(stuck)[0]
            raise SolverFailure(
                f"duality gap stalled at {best_gap[worst]:.3e} above tolerance {tol:.1e}",
                best_x=best_x[worst].copy(),
                best_gap=float(best_gap[worst]),
            )
    return x, gap, bound, iters


@dataclass
class DiagSdpSolver:
    """Settings for the barrier method; one instance may solve many problems."""

    tol: float = 1e-7
    mu0: float = 1.0
    shrink: float = 0.2
    newton_tol: float = 1e-10
    max_newton: int = 500
    rank_tol: float = 1e-12

    def _run(self, A0, A, sigma, nonneg, x0, tol):
        return _barrier_newton(
            A0, A, sigma, nonneg, x0, tol, self.mu0, self.shrink, self.newton_tol, self.max_newton
        )

    def solve(self, problem: DiagSdpProblem) -> DiagSdpSolution:
        rho = as_array(problem.rho)
        d = rho.shape[0]
        tol = problem.tol
        if problem.sense is Sense.DOMINATING:
            lam_max = np.linalg.eigvalsh(rho)[-1]
            x0 = np.full((1, d), lam_max + 1.0)
            x, gap, bnd, it = self._run(-rho[None], np.eye(d, dtype=complex)[None], +1, False, x0, tol)
            x = x[0]
        else:
            x, gap, bnd, it = self._dominated(rho, tol)
            x = x[0]
        cert = float(np.linalg.eigvalsh(constraint_matrix(rho, x, problem.sense))[0])
        return DiagSdpSolution(x, float(x.sum()), float(gap[0]), int(it[0]), cert, float(bnd[0]))

    def _dominated(self, rho, tol):
        d = rho.shape[0]
        w, v = np.linalg.eigh(rho)
        if w[0] > self.rank_tol:
            x0 = np.full((1, d), w[0] / 2)
            return self._run(rho[None], np.eye(d, dtype=complex)[None], -1, True, x0, tol)
        # singular rho: x_i > 0 is only possible where e_i lies in range(rho)
        keep = w > self.rank_tol
        W = v[:, keep]
        kernel_weight = 1.0 - np.sum(np.abs(W) ** 2, axis=1)
        support = np.flatnonzero(kernel_weight <= 1e-10)
        x = np.zeros((1, d))
        if support.size == 0:
            return x, np.zeros(1), np.zeros(1), np.zeros(1, dtype=int)
        A0 = np.diag(w[keep]).astype(complex)[None]
        A = W[support, :].conj().T[None]
        x0 = np.full((1, support.size), w[keep].min() / 2)
        xs, gap, bnd, it = self._run(A0, A, -1, True, x0, tol)
        x[0, support] = xs[0]
        return x, gap, bnd, it

    def solve_batch(self, rhos, sense, tol=None) -> list[DiagSdpSolution]:
        """Solve many problems of the same dimension in one vectorised run."""
        rhos = np.asarray(as_array(rhos), dtype=complex)
        sense = Sense(sense)
        tol = self.tol if tol is None else tol
        B, d, _ = rhos.shape
        w = np.linalg.eigvalsh(rhos)
        eye = np.broadcast_to(np.eye(d, dtype=complex), (B, d, d))
        out: list[DiagSdpSolution | None] = [None] * B
        if sense is Sense.DOMINATING:
            x0 = np.repeat(w[:, -1:] + 1.0, d, axis=1)
            xs, gap, bnd, it = self._run(-rhos, eye, +1, False, x0, tol)
            batch = np.arange(B)
        else:
            batch = np.flatnonzero(w[:, 0] > self.rank_tol)
            for k in np.flatnonzero(w[:, 0] <= self.rank_tol):
                out[k] = self.solve(DiagSdpProblem(DensityMatrix(rhos[k]), sense, tol))
            if batch.size:
                x0 = np.repeat(w[batch, :1] / 2, d, axis=1)
                xs, gap, bnd, it = self._run(rhos[batch], eye[batch], -1, True, x0, tol)
        if batch.size:
            S = rhos[batch] - xs[:, None, :] * np.eye(d)
            if sense is Sense.DOMINATING:
                S = -S
            cert = np.linalg.eigvalsh(S)[:, 0]
            for j, k in enumerate(batch):
                out[k] = DiagSdpSolution(
                    xs[j], float(xs[j].sum()), float(gap[j]), int(it[j]), float(cert[j]), float(bnd[j])
                )
        return out


def solve(problem: DiagSdpProblem, solver: DiagSdpSolver | None = None) -> DiagSdpSolution:
    return (solver or DiagSdpSolver()).solve(problem)


def verify(solution: DiagSdpSolution, problem: DiagSdpProblem) -> bool:
    """Independent feasibility re-check with the Jacobi eigensolver."""
    x = np.asarray(solution.x, dtype=float)
    tol = 2 * problem.tol
    if problem.sense is Sense.DOMINATED and np.any(x < -tol):
        return False
    smin = jacobi_eigh(constraint_matrix(problem.rho, x, problem.sense))[0][0]
    if smin < -tol:
        return False
    return bool(abs(x.sum() - solution.objective) <= tol)
