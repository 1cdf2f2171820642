"""Full eigendecomposition of real symmetric tridiagonal matrices.

Implicit-shift QL iteration with Wilkinson shifts and deflation, accumulating
eigenvectors, compiled with numba.  Matrices with exactly palindromic bands
(the LMG Hamiltonian is one: index reflection m -> -m commutes with H) are
first split into their even/odd reflection sectors; each half is solved
independently.  That halves the bandwidth of near-degeneracies the iteration
has to resolve, quarters the work, and makes every eigenvector carry an exact
reflection parity by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .dicke import TridiagonalOperator, reflection_parity

__all__ = ["EigenSystem", "ConvergenceError", "eigh_tridiagonal", "doublet"]

_EPS = float(np.finfo(np.float64).eps)

# Numerically degenerate eigenvalue clusters (relative to the largest matrix
# entry) are re-orthogonalized and rotated to definite reflection parity.
DEGENERACY_TOL = 1e-13

MAX_SWEEPS = 50


class ConvergenceError(RuntimeError):
    """QL iteration exceeded its sweep budget on one subblock."""

    def __init__(self, subblock: int, sector: str = ""):
        self.subblock = subblock
        self.sector = sector
        where = f"{sector} sector, " if sector else ""
        super().__init__(
            f"tridiagonal QL failed to converge ({where}subblock index {subblock})"
        )


@dataclass(frozen=True)
class EigenSystem:
    """Sorted spectrum of a real symmetric tridiagonal operator.

    values   -- eigenvalues ascending (rad/s for Hamiltonians)
    vectors  -- orthonormal real matrix, column k is the eigenvector of values[k]
    parities -- per-state reflection parity: +1, -1, or 0 (unclassified)
    """

    values: np.ndarray
    vectors: np.ndarray
    parities: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.values)

    def orthonormality_defect(self) -> float:
        g = self.vectors.T @ self.vectors
        return float(np.max(np.abs(g - np.eye(self.dim))))

    def residual(self, op: TridiagonalOperator) -> float:
        """max_k ||T v_k - lambda_k v_k||_inf, not yet scaled by ||T||."""
        tv = op.diagonal[:, None] * self.vectors
        tv[1:] += op.off_diagonal[:, None] * self.vectors[:-1]
        tv[:-1] += op.off_diagonal[:, None] * self.vectors[1:]
        return float(np.max(np.abs(tv - self.vectors * self.values[None, :])))


@njit(cache=True, nogil=True)
def _ql_implicit(d, e, zt, max_sweeps):
    """In-place QL iteration with implicit Wilkinson shifts.

    d: diagonal (n,), e: off-diagonal padded to length n (e[n-1] is scratch),
    zt: (n, n) with ROWS accumulating the eigenvectors.  Returns -1 on
    success, else the subblock index that failed to converge.
    """
    n = d.shape[0]
    for l in range(n):
        nsweep = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= _EPS * dd:
                    break
                m += 1
            if m == l:
                break
            nsweep += 1
            if nsweep > max_sweeps:
                return l
            # Wilkinson shift from the 2x2 at the low end of the block.
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = np.hypot(g, 1.0)
            if g >= 0.0:
                g = d[m] - d[l] + e[l] / (g + r)
            else:
                g = d[m] - d[l] + e[l] / (g - r)
            s = 1.0
            c = 1.0
            p = 0.0
            i = m - 1
            underflow = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = np.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                # Accumulate the rotation on eigenvector rows i, i+1.
                for k in range(n):
                    f2 = zt[i + 1, k]
                    zt[i + 1, k] = s * zt[i, k] + c * f2
                    zt[i, k] = c * zt[i, k] - s * f2
                i -= 1
            if underflow and i >= l:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return -1


def _solve_bands(diag, off, max_sweeps, sector=""):
    """Run the QL kernel on copies of the bands; rows of zt are eigenvectors."""
    n = len(diag)
    d = np.array(diag, dtype=np.float64)
    e = np.zeros(n, dtype=np.float64)
    if n > 1:
        e[: n - 1] = off
    zt = np.eye(n)
    fail = _ql_implicit(d, e, zt, max_sweeps)
    if fail >= 0:
        raise ConvergenceError(int(fail), sector)
    return d, zt


def _is_palindromic(op: TridiagonalOperator) -> bool:
    d, e = op.diagonal, op.off_diagonal
    return bool(np.array_equal(d, d[::-1]) and np.array_equal(e, e[::-1]))


def _fold_bands(diag, off):
    """Split palindromic bands into even/odd reflection-sector bands."""
    n = len(diag)
    c = n // 2
    if n % 2:
        d_even = np.concatenate([diag[:c], diag[c : c + 1]])
        e_even = np.concatenate([off[: c - 1], [np.sqrt(2.0) * off[c - 1]]])
        d_odd = diag[:c].copy()
        e_odd = off[: c - 1].copy()
    else:
        d_even = diag[:c].copy()
        d_even[c - 1] += off[c - 1]
        e_even = off[: c - 1].copy()
        d_odd = diag[:c].copy()
        d_odd[c - 1] -= off[c - 1]
        e_odd = off[: c - 1].copy()
    return (d_even, e_even), (d_odd, e_odd)


def _embed_sector(zt_half, n, parity):
    """Map half-space eigenvector rows back to the full space."""
    nhalf, c = zt_half.shape[0], n // 2
    out = np.zeros((nhalf, n))
    inv = 1.0 / np.sqrt(2.0)
    if n % 2:
        if parity > 0:
            out[:, :c] = zt_half[:, :c] * inv
            out[:, c] = zt_half[:, c]
            out[:, c + 1 :] = zt_half[:, :c][:, ::-1] * inv
        else:
            out[:, :c] = zt_half * inv
            out[:, c + 1 :] = -zt_half[:, ::-1] * inv
    else:
        out[:, :c] = zt_half * inv
        out[:, c:] = parity * zt_half[:, ::-1] * inv
    return out


def _fix_signs(vectors):
    """Largest-magnitude coefficient of each column positive (first index on ties)."""
    idx = np.argmax(np.abs(vectors), axis=0)
    flip = vectors[idx, np.arange(vectors.shape[1])] < 0
    vectors[:, flip] *= -1.0
    return vectors


def _resolve_degenerate_clusters(values, vectors, parities, scale):
    """Re-orthogonalize numerically degenerate clusters and give them definite parity."""
    n = len(values)
    tol = DEGENERACY_TOL * scale
    i = 0
    while i < n - 1:
        j = i + 1
        while j < n and values[j] - values[j - 1] <= tol:
            j += 1
        if j - i >= 2:
            block = vectors[:, i:j]
            # modified Gram-Schmidt within the cluster
            for a in range(block.shape[1]):
                for b in range(a):
                    block[:, a] -= (block[:, b] @ block[:, a]) * block[:, b]
                block[:, a] /= np.linalg.norm(block[:, a])
            refl = block[::-1, :]
            m = block.T @ refl
            m = 0.5 * (m + m.T)
            if np.max(np.abs(m - np.diag(np.diag(m)))) > 1e-8:
                _, w = np.linalg.eigh(m)
                block = block @ w
            vectors[:, i:j] = block
            for k in range(i, j):
                parities[k] = reflection_parity(vectors[:, k])
        i = j
    return vectors, parities


def eigh_tridiagonal(op: TridiagonalOperator, max_sweeps: int = MAX_SWEEPS) -> EigenSystem:
    """Full spectrum and orthonormal eigenvectors of a symmetric tridiagonal operator.

    Eigenvalues ascend; eigenvector signs follow the positive-leading-coefficient
    convention.  Raises ConvergenceError (with the offending subblock index) if
    any eigenvalue needs more than max_sweeps QL sweeps.
    """
    n = op.dim
    if n == 1:
        return EigenSystem(
            values=op.diagonal.astype(np.float64).copy(),
            vectors=np.ones((1, 1)),
            parities=np.array([1], dtype=np.int8),
        )

    if _is_palindromic(op):
        (de, ee), (do, eo) = _fold_bands(op.diagonal, op.off_diagonal)
        we, zte = _solve_bands(de, ee, max_sweeps, "even")
        wo, zto = _solve_bands(do, eo, max_sweeps, "odd")
        values = np.concatenate([we, wo])
        parities = np.concatenate(
            [np.ones(len(we), dtype=np.int8), -np.ones(len(wo), dtype=np.int8)]
        )
        full = np.vstack([_embed_sector(zte, n, +1), _embed_sector(zto, n, -1)])
        order = np.argsort(values, kind="stable")
        vectors = np.ascontiguousarray(full[order].T)
        values = values[order]
        parities = parities[order]
    else:
        d, zt = _solve_bands(op.diagonal, op.off_diagonal, max_sweeps)
        order = np.argsort(d, kind="stable")
        values = d[order]
        vectors = np.ascontiguousarray(zt[order].T)
        parities = np.array(
            [reflection_parity(vectors[:, k]) for k in range(n)], dtype=np.int8
        )
        vectors, parities = _resolve_degenerate_clusters(
            values, vectors, parities, op.norm()
        )

    _fix_signs(vectors)
    return EigenSystem(values=values, vectors=vectors, parities=parities)


def doublet(eig: EigenSystem):
    """Two lowest eigenvectors and their gap, sign-fixed so that J01 >= 0.

    Returns (v0, v1, delta_e); v1 is flipped when needed so the Jz matrix
    element sum_m m v0[m] v1[m] between them is non-negative.
    """
    if eig.dim < 2:
        raise ValueError("doublet requires at least two states")
    v0 = eig.vectors[:, 0].copy()
    v1 = eig.vectors[:, 1].copy()
    delta_e = float(eig.values[1] - eig.values[0])
    m = np.arange(eig.dim) - (eig.dim - 1) / 2.0
    if np.sum(m * v0 * v1) < 0.0:
        v1 = -v1
    return v0, v1, delta_e
