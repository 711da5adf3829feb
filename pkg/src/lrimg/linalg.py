"""Dense SVD kernel: one-sided Jacobi decomposition, truncation, residual queries.

The decomposition is computed in-repo (no library SVD call) so that the
numerical behavior is fully deterministic: identical input bytes produce
identical factor bytes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, InvalidInputError, InvalidRankError

# Pairwise rotation threshold: a column pair (p, q) is rotated while
# |w_p . w_q| > JACOBI_EPS * ||w_p|| * ||w_q||, which bounds the final
# orthogonality residual of u by JACOBI_EPS.
JACOBI_EPS = 1e-12
MAX_SWEEPS = 100


def as_matrix(a) -> np.ndarray:
    """Validate and return `a` as a dense 2-D float64 array.

    Raises InvalidInputError for empty dimensions or non-finite entries.
    """
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise InvalidInputError(f"expected a 2-D matrix, got ndim={m.ndim}")
    if m.shape[0] == 0 or m.shape[1] == 0:
        raise InvalidInputError(f"matrix dimensions must be positive, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidInputError("matrix contains non-finite entries")
    return m


@dataclass(frozen=True)
class SvdFactors:
    """Reduced SVD factors: u (m x r), sigma (r, descending), vt (r x n)."""

    u: np.ndarray
    sigma: np.ndarray
    vt: np.ndarray

    @property
    def rank(self) -> int:
        return len(self.sigma)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.u.shape[0], self.vt.shape[1])


def frobenius_norm(a) -> float:
    """sqrt of the sum of squared entries."""
    a = as_matrix(a)
    return float(np.sqrt(np.sum(a * a)))


def _complete_orthonormal(u: np.ndarray, cols: np.ndarray) -> None:
    """Fill the given zero columns of u with unit vectors orthogonal to the rest.

    Candidates are canonical basis vectors, tried in index order; two rounds of
    Gram-Schmidt keep the completion orthogonal to working precision.
    """
    m = u.shape[0]
    filled = [j for j in range(u.shape[1]) if j not in set(cols)]
    for j in cols:
        best = None
        best_norm = -1.0
        for i in range(m):
            cand = np.zeros(m)
            cand[i] = 1.0
            for _ in range(2):
                for f in filled:
                    cand -= np.dot(u[:, f], cand) * u[:, f]
            nrm = float(np.sqrt(np.dot(cand, cand)))
            if nrm > best_norm:
                best_norm = nrm
                best = cand
            if nrm > 0.5:
                break
        u[:, j] = best / best_norm
        filled.append(j)


def _jacobi(a: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One-sided Jacobi SVD of a with m >= n. Returns (u, sigma, vt), unsorted signs."""
    m, n = a.shape
    w = a.copy()
    v = np.eye(n)
    fro = float(np.sqrt(np.sum(w * w)))
    if fro == 0.0:
        u = np.zeros((m, n))
        _complete_orthonormal(u, np.arange(n))
        return u, np.zeros(n), v.T

    # Columns whose norm falls to rounding-noise level are excluded from
    # rotations: they carry no signal and would never satisfy the relative
    # threshold against each other.
    dead_floor = (fro * 1e-14) ** 2
    for _ in range(MAX_SWEEPS):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                wp = w[:, p]
                wq = w[:, q]
                alpha = float(np.dot(wp, wp))
                beta = float(np.dot(wq, wq))
                if alpha <= dead_floor or beta <= dead_floor:
                    continue
                gamma = float(np.dot(wp, wq))
                if abs(gamma) <= JACOBI_EPS * np.sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                # zeta == 0 (equal norms) still needs a 45-degree rotation
                t = (1.0 if zeta >= 0 else -1.0) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                w[:, p], w[:, q] = c * wp - s * wq, s * wp + c * wq
                vp = v[:, p].copy()
                v[:, p] = c * vp - s * v[:, q]
                v[:, q] = s * vp + c * v[:, q]
        if not rotated:
            break
    else:
        raise ConvergenceError(
            f"one-sided Jacobi did not converge within {MAX_SWEEPS} sweeps"
        )

    norms = np.sqrt(np.sum(w * w, axis=0))
    order = np.argsort(-norms, kind="stable")
    sigma = norms[order]
    w = w[:, order]
    v = v[:, order]

    u = np.zeros((m, n))
    # Columns at or below the noise floor are treated as exact zeros so that
    # rank-deficient inputs report clean zero singular values.
    floor = fro * 1e-14
    dead = []
    for j in range(n):
        if sigma[j] > floor:
            u[:, j] = w[:, j] / sigma[j]
        else:
            sigma[j] = 0.0
            dead.append(j)
    if dead:
        _complete_orthonormal(u, np.array(dead))
    return u, sigma, v.T


def _fix_signs(u: np.ndarray, vt: np.ndarray) -> None:
    """Make the largest-magnitude entry of each u column positive (ties: lowest row)."""
    for j in range(u.shape[1]):
        i = int(np.argmax(np.abs(u[:, j])))
        if u[i, j] < 0:
            u[:, j] = -u[:, j]
            vt[j, :] = -vt[j, :]


def svd(a) -> SvdFactors:
    """Reduced SVD with r = min(m, n) singular triplets, sigma descending."""
    a = as_matrix(a)
    m, n = a.shape
    if m >= n:
        u, sigma, vt = _jacobi(a)
    else:
        # A = U S Vt  <=>  At = V S Ut
        ut, sigma, vtt = _jacobi(a.T.copy())
        u = vtt.T.copy()
        vt = ut.T.copy()
    _fix_signs(u, vt)
    return SvdFactors(u=u, sigma=sigma, vt=vt)


def truncate(f: SvdFactors, k: int) -> SvdFactors:
    """Keep the first k singular triplets."""
    if not (1 <= k <= f.rank):
        raise InvalidRankError(f"rank {k} outside [1, {f.rank}]")
    return SvdFactors(
        u=f.u[:, :k].copy(), sigma=f.sigma[:k].copy(), vt=f.vt[:k, :].copy()
    )


def reconstruct(f: SvdFactors) -> np.ndarray:
    """Sum of the rank-1 outer products sigma_i * u_i * vt_i."""
    return (f.u * f.sigma) @ f.vt


def _check_sigma(sigma: np.ndarray) -> np.ndarray:
    sigma = np.asarray(sigma, dtype=np.float64)
    if sigma.ndim != 1:
        raise InvalidInputError("sigma must be a 1-D vector")
    if np.any(sigma < 0):
        raise InvalidInputError("sigma contains negative values")
    if np.any(np.diff(sigma) > 0):
        raise InvalidInputError("sigma is not sorted in non-increasing order")
    return sigma


def residual_from_sigma(sigma, k: int) -> float:
    """Frobenius error of the rank-k truncation: sqrt(sum of discarded sigma^2)."""
    sigma = _check_sigma(sigma)
    if not (0 <= k <= len(sigma)):
        raise InvalidInputError(f"k={k} outside [0, {len(sigma)}]")
    tail = sigma[k:]
    return float(np.sqrt(np.sum(tail * tail)))
