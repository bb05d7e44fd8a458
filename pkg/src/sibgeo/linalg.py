"""Cyclic Jacobi eigensolver for small symmetric matrices."""

from __future__ import annotations

import numpy as np


def jacobi_eigh(A, tol: float = 1e-13, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Returns ``(w, V)`` with eigenvalues sorted in descending order and the
    eigenvectors as the columns of ``V``.  Each eigenvector's sign is fixed so
    that its largest-magnitude entry is positive, which makes the output
    deterministic for golden tests.  Sweeps stop once the off-diagonal
    Frobenius norm falls below ``tol * (1 + ||A||)``.
    """
    a = np.array(A, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    scale = 1.0 + np.linalg.norm(a)

    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta != 0 else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # A <- J^T A J with J the (p, q) rotation
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        raise RuntimeError("Jacobi iteration did not converge")

    w = np.diag(a).copy()
    order = np.argsort(-w, kind="stable")
    w = w[order]
    v = v[:, order]
    for k in range(n):
        col = v[:, k]
        if col[np.argmax(np.abs(col))] < 0:
            v[:, k] = -col
    return w, v


def signature(A, tol: float = 0.0) -> tuple[int, int, int]:
    """(positive, negative, zero) eigenvalue counts of a symmetric matrix."""
    w, _ = jacobi_eigh(A)
    pos = int(np.sum(w > tol))
    neg = int(np.sum(w < -tol))
    return pos, neg, len(w) - pos - neg
