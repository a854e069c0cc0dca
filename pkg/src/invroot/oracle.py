"""Double-precision ground truth: Jacobi eigensolver and closed-form inverse roots.

The eigensolver is the cyclic Jacobi method with round-robin ("parallel")
ordering: each round applies ``n/2`` disjoint plane rotations at once, and
``n - 1`` rounds visit every off-diagonal pair exactly once per sweep.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .matrix import as_matrix


class NotSPDError(InvalidInputError):
    pass


@dataclass
class EigenDecomposition:
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray  # column i pairs with eigenvalues[i]
    sweeps: int = 0


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(a, b), max(a, b)) for a, b in pairs if a < n and b < n]
        if pairs:
            p, q = np.array(pairs).T
            rounds.append((p, q))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def jacobi_eigen(A, tol: float = 1e-15, max_sweeps: int = 100, sym_tol: float = 1e-12) -> EigenDecomposition:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps until the off-diagonal Frobenius norm is at most ``tol * ||A||_F``.

    Raises:
        InvalidInputError: if ``A`` is not symmetric to within ``sym_tol``
            (relative to its largest entry), or does not converge.
    """
    A = as_matrix(A)
    n = A.shape[0]
    scale = np.abs(A).max() if A.size else 0.0
    if np.abs(A - A.T).max(initial=0.0) > sym_tol * scale:
        raise InvalidInputError("jacobi_eigen needs a symmetric matrix")
    A = (A + A.T) / 2
    V = np.eye(n)
    target = tol * np.linalg.norm(A)
    rounds = _round_robin(n)
    for sweep in range(max_sweeps + 1):
        off = A - np.diag(np.diag(A))
        if np.linalg.norm(off) <= target:
            break
        if sweep == max_sweeps:
            raise InvalidInputError(f"Jacobi did not converge in {max_sweeps} sweeps")
        for p, q in rounds:
            apq = A[p, q]
            app = A[p, p]
            aqq = A[q, q]
            nz = apq != 0.0
            safe = np.where(nz, apq, 1.0)
            tau = (aqq - app) / (2.0 * safe)
            t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.hypot(1.0, tau))
            t = np.where(nz, t, 0.0)
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            # A <- J^T A J, J = product of the disjoint (p, q) rotations
            rp, rq = A[p, :], A[q, :]
            A[p, :], A[q, :] = c[:, None] * rp - s[:, None] * rq, s[:, None] * rp + c[:, None] * rq
            cp, cq = A[:, p], A[:, q]
            A[:, p], A[:, q] = cp * c - cq * s, cp * s + cq * c
            A[p, q] = 0.0
            A[q, p] = 0.0
            vp, vq = V[:, p], V[:, q]
            V[:, p], V[:, q] = vp * c - vq * s, vp * s + vq * c
    w = np.diag(A).copy()
    order = np.argsort(w, kind="stable")
    return EigenDecomposition(w[order], V[:, order], sweeps=sweep)


def reference_inv_proot(A, p: int, tol: float = 1e-15) -> np.ndarray:
    """``A**(-1/p)`` for symmetric positive definite ``A`` via ``V diag(l**(-1/p)) V^T``.

    Raises:
        NotSPDError: if any eigenvalue is not strictly positive.
    """
    if p < 1:
        raise ValueError("p must be a positive integer")
    eig = jacobi_eigen(A, tol=tol)
    if eig.eigenvalues[0] <= 0.0:
        raise NotSPDError(f"smallest eigenvalue {eig.eigenvalues[0]:.3e} is not positive")
    V = eig.eigenvectors
    C = (V * eig.eigenvalues ** (-1.0 / p)) @ V.T
    return (C + C.T) / 2
