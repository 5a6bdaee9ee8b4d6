"""Symmetric eigendecomposition (cyclic Jacobi) and pairwise distances."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from cmfs.dataset import Dataset
from cmfs.errors import ConvergenceError

__all__ = ["EigenDecomposition", "eigen_symmetric", "pairwise_sq_distances"]

MAX_SWEEPS = 100
REL_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    """Eigenvalues sorted descending; ``eigenvectors[:, k]`` pairs with ``eigenvalues[k]``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int = 0


def _off_norm(a: np.ndarray) -> float:
    upper = np.triu(a, 1)
    return math.sqrt(2.0 * float(np.sum(upper * upper)))


def eigen_symmetric(a, max_sweeps: int = MAX_SWEEPS) -> EigenDecomposition:
    """Eigendecomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Sweeps over all (p, q) pairs in row order until the off-diagonal
    Frobenius norm drops to ``1e-12 * ||A||_F``. Each eigenvector is signed
    so that its largest-magnitude entry (first one on ties) is positive.

    Raises
    ------
    ValueError
        If ``a`` is not square or not symmetric within 1e-10.
    ConvergenceError
        If ``max_sweeps`` sweeps do not reach the threshold.
    """
    a = np.array(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(a))))
    if np.max(np.abs(a - a.T)) > 1e-10 * scale:
        raise ValueError("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    d = a.shape[0]
    v = np.eye(d)
    threshold = REL_TOL * float(np.linalg.norm(a))

    sweeps = 0
    off = _off_norm(a)
    while off > threshold:
        if sweeps >= max_sweeps:
            raise ConvergenceError(
                f"Jacobi did not converge in {max_sweeps} sweeps (off-diagonal norm {off:.3e})", off
            )
        sweeps += 1
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                with np.errstate(over="ignore"):
                    tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(tau) > 1e150:
                    t = 0.5 / tau
                else:
                    t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                col_p = a[:, p].copy()
                col_q = a[:, q]
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :]
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q]
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
        off = _off_norm(a)

    w = np.diag(a).copy()
    order = np.argsort(-w, kind="stable")
    w = w[order]
    v = v[:, order]
    lead = np.argmax(np.abs(v), axis=0)
    signs = np.where(v[lead, np.arange(d)] < 0, -1.0, 1.0)
    return EigenDecomposition(eigenvalues=w, eigenvectors=v * signs, sweeps=sweeps)


def pairwise_sq_distances(data, block: int = 256) -> np.ndarray:
    """Squared Euclidean distances between all rows.

    Computed from explicit differences (not the Gram expansion), so the
    result is exactly symmetric with an exactly zero diagonal.
    """
    x = data.features if isinstance(data, Dataset) else np.asarray(data, dtype=np.float64)
    x = np.ascontiguousarray(x)
    n = x.shape[0]
    out = np.empty((n, n))
    for start in range(0, n, block):
        stop = min(n, start + block)
        diff = x[start:stop, None, :] - x[None, :, :]
        out[start:stop] = np.einsum("ijk,ijk->ij", diff, diff)
    return out
