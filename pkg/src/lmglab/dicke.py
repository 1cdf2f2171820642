"""LMG Hamiltonian and reflection structure in the symmetric Dicke sector.

The collective Hamiltonian H = -(2J/N) Jz^2 - 2 Gamma Jx, restricted to the
maximal-spin sector J_t = N/2, is real symmetric tridiagonal over the magnetic
quantum number m = -J_t ... +J_t.  Couplings J and Gamma are angular
frequencies (rad/s, hbar = 1), so eigenvalues and the tunnel splitting carry
rad/s as well.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ModelParams",
    "DickeBasis",
    "TridiagonalOperator",
    "build_hamiltonian",
    "jz_diagonal",
    "reflection_parity",
]


@dataclass(frozen=True)
class ModelParams:
    """Physical inputs of a run.

    n_spins   -- particle number N (>= 2)
    coupling  -- ferromagnetic coupling J in rad/s (> 0)
    field     -- transverse field Gamma in rad/s (>= 0)
    dephasing -- collective dephasing rate gamma_phi in 1/s (>= 0)

    The mean-field order parameter m* = sqrt(1 - (Gamma/J)^2) is derived at
    construction; it is exactly 0 at and beyond the critical point.
    """

    n_spins: int
    coupling: float
    field: float
    dephasing: float = 0.0
    order_parameter: float = field(init=False)

    def __post_init__(self):
        if int(self.n_spins) != self.n_spins or self.n_spins < 2:
            raise ValueError(f"n_spins must be an integer >= 2, got {self.n_spins}")
        if not self.coupling > 0:
            raise ValueError(f"coupling must be > 0, got {self.coupling}")
        if self.field < 0:
            raise ValueError(f"field must be >= 0, got {self.field}")
        if self.dephasing < 0:
            raise ValueError(f"dephasing must be >= 0, got {self.dephasing}")
        if self.n_spins % 2:
            # Reflection still squares to the identity for odd N, so parity
            # labels stay well defined; the reference tables use even N.
            warnings.warn(
                f"odd n_spins={self.n_spins}: outside the even-N tabulation",
                stacklevel=3,
            )
        g = self.field / self.coupling
        mstar = np.sqrt(1.0 - g * g) if g < 1.0 else 0.0
        object.__setattr__(self, "order_parameter", float(mstar))

    @property
    def gamma_over_j(self) -> float:
        return self.field / self.coupling

    @property
    def ordered(self) -> bool:
        """True strictly inside the symmetry-broken phase (Gamma < J)."""
        return self.field < self.coupling


@dataclass(frozen=True)
class DickeBasis:
    """Symmetric sector |J_t, m> with J_t = N/2 and m ascending in unit steps."""

    j_total: float
    m_values: np.ndarray

    @classmethod
    def for_n(cls, n_spins: int) -> "DickeBasis":
        # m built from the integer 2m to keep half-integer values exact.
        two_m = 2 * np.arange(n_spins + 1, dtype=np.int64) - n_spins
        return cls(j_total=n_spins / 2.0, m_values=two_m / 2.0)

    def __len__(self) -> int:
        return len(self.m_values)


@dataclass(frozen=True)
class TridiagonalOperator:
    """Real symmetric tridiagonal operator: diagonal (N+1,) and one off-diagonal (N,)."""

    diagonal: np.ndarray
    off_diagonal: np.ndarray

    def __post_init__(self):
        if self.diagonal.ndim != 1 or self.off_diagonal.ndim != 1:
            raise ValueError("bands must be one-dimensional")
        if len(self.off_diagonal) != len(self.diagonal) - 1:
            raise ValueError("off_diagonal must be one shorter than diagonal")

    @property
    def dim(self) -> int:
        return len(self.diagonal)

    def norm(self) -> float:
        """Largest absolute matrix entry, used to scale residual tolerances."""
        top = float(np.max(np.abs(self.diagonal)))
        if len(self.off_diagonal):
            top = max(top, float(np.max(np.abs(self.off_diagonal))))
        return top

    def to_dense(self) -> np.ndarray:
        a = np.diag(self.diagonal)
        idx = np.arange(self.dim - 1)
        a[idx, idx + 1] = self.off_diagonal
        a[idx + 1, idx] = self.off_diagonal
        return a

    def matvec(self, v: np.ndarray) -> np.ndarray:
        out = self.diagonal * v
        out[1:] += self.off_diagonal * v[:-1]
        out[:-1] += self.off_diagonal * v[1:]
        return out


def build_hamiltonian(params: ModelParams) -> TridiagonalOperator:
    """Tridiagonal LMG Hamiltonian over the Dicke index.

    diagonal[i]     = -2 J m_i^2 / N
    off_diagonal[i] = -Gamma sqrt(J_t (J_t+1) - m_i (m_i+1))
    """
    basis = DickeBasis.for_n(params.n_spins)
    m = basis.m_values
    jt = basis.j_total
    diag = -2.0 * params.coupling * m * m / params.n_spins
    mlo = m[:-1]
    off = -params.field * np.sqrt(jt * (jt + 1.0) - mlo * (mlo + 1.0))
    return TridiagonalOperator(diagonal=diag, off_diagonal=off)


def jz_diagonal(basis: DickeBasis) -> np.ndarray:
    """Jz in the Dicke basis: diagonal action, eigenvalue m per basis state."""
    return basis.m_values


def reflection_parity(vector: np.ndarray, tol: float = 1e-8) -> int:
    """Classify a normalized real vector under the index reflection m -> -m.

    Returns +1 if c_m = c_{-m} within tol, -1 if c_m = -c_{-m}, and 0
    (unclassified) if neither holds; an unclassified state signals degeneracy
    mixing and is reportable, not an error.
    """
    rev = vector[::-1]
    even_defect = float(np.max(np.abs(vector - rev)))
    odd_defect = float(np.max(np.abs(vector + rev)))
    if even_defect <= tol and odd_defect <= tol:
        return 0
    if even_defect <= tol:
        return 1
    if odd_defect <= tol:
        return -1
    return 0
