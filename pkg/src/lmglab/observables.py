"""Matrix elements, geometric dephasing factors, and their decompositions.

All quantities derive from Jz matrix elements between exact eigenstates.  The
two headline factors are the mean-field one, G_loc = (N m*)^2 / 2, and the
eigenstate one, G_01 = (<E0|Jz^2|E0> + <E1|Jz^2|E1>) / 2; dephasing rates are
gamma_phi times these.  Mean-field-referenced fields are None outside the
ordered phase (Gamma >= J makes m* = 0, so ratios against it are undefined
rather than infinite).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dicke import ModelParams
from .eigensolver import EigenSystem, doublet

__all__ = [
    "GeometricFactors",
    "jz_element",
    "jz2_expectation",
    "gamma_ab",
    "geometric_factors",
    "bogoliubov_report",
    "secular_parameter",
]


def _m_axis(dim: int) -> np.ndarray:
    return np.arange(dim) - (dim - 1) / 2.0


def jz_element(va: np.ndarray, vb: np.ndarray) -> float:
    """<a|Jz|b> = sum_m m va[m] vb[m] for real vectors over the Dicke index."""
    if va.shape != vb.shape:
        raise ValueError("vectors must share a basis")
    return float(np.dot(_m_axis(len(va)) * va, vb))


def jz2_expectation(v: np.ndarray) -> float:
    """<v|Jz^2|v> = sum_m m^2 v[m]^2 for a normalized real vector."""
    m = _m_axis(len(v))
    return float(np.dot(m * m, v * v))


def gamma_ab(va: np.ndarray, vb: np.ndarray, gamma_phi: float) -> float:
    """Diagonal Redfield coefficient of the coherence between |a> and |b>, 1/s.

    (gamma_phi/2) [<a|Jz^2|a> + <b|Jz^2|b> - 2 <a|Jz|a><b|Jz|b>]; exact for
    the collective-dephasing dissipator, no secular approximation involved.
    """
    return 0.5 * gamma_phi * (
        jz2_expectation(va)
        + jz2_expectation(vb)
        - 2.0 * jz_element(va, va) * jz_element(vb, vb)
    )


@dataclass(frozen=True)
class GeometricFactors:
    """Full rate-factor record for one (N, Gamma/J) point.

    Mean-field-referenced fields (g_loc, eta_mf, eta_quantum, delta_g_total,
    delta_zp) are None when Gamma >= J.  eta_exact only needs the doublet and
    stays defined everywhere.
    """

    delta_e: float
    g_loc: float
    g_01: float
    j01: float
    leakage_0: float
    leakage_1: float
    gap_ratio: float
    eta_mf: float | None
    eta_exact: float
    eta_quantum: float | None
    delta_g_total: float | None
    delta_zp: float | None
    overlap_s: float
    instanton_action: float

    @property
    def leakage_avg(self) -> float:
        return 0.5 * (self.leakage_0 + self.leakage_1)


def geometric_factors(params: ModelParams, eig: EigenSystem) -> GeometricFactors:
    """All geometric factors of the ground doublet of build_hamiltonian(params).

    Leakage out of the doublet is computed through completeness:
    leakage_i = <Ei|Jz^2|Ei> - sum_{k in {0,1}} <Ei|Jz|Ek>^2.
    """
    if eig.dim != params.n_spins + 1:
        raise ValueError("eigensystem dimension does not match n_spins")
    v0, v1, delta_e = doublet(eig)
    j01 = jz_element(v0, v1)
    jz2_0 = jz2_expectation(v0)
    jz2_1 = jz2_expectation(v1)
    g01 = 0.5 * (jz2_0 + jz2_1)
    leak0 = jz2_0 - (jz_element(v0, v0) ** 2 + j01**2)
    leak1 = jz2_1 - (jz_element(v1, v1) ** 2 + j01**2)
    gap_ratio = float((eig.values[2] - eig.values[0]) / delta_e) if delta_e > 0 else np.inf

    n = params.n_spins
    mstar = params.order_parameter
    g = params.gamma_over_j
    half_moment = (n * mstar / 2.0) ** 2
    if params.ordered:
        g_loc = (n * mstar) ** 2 / 2.0
        eta_mf = g_loc / g01
        eta_quantum = half_moment / g01
        delta_g_total = half_moment - g01
        delta_zp = n * mstar / 2.0 - j01
        s_inst = float(np.arctanh(mstar) - mstar) if g > 0 else np.inf
    else:
        g_loc = 0.0
        eta_mf = eta_quantum = delta_g_total = delta_zp = None
        s_inst = 0.0

    return GeometricFactors(
        delta_e=delta_e,
        g_loc=g_loc,
        g_01=g01,
        j01=j01,
        leakage_0=leak0,
        leakage_1=leak1,
        gap_ratio=gap_ratio,
        eta_mf=eta_mf,
        eta_exact=1.0 + j01**2 / g01,
        eta_quantum=eta_quantum,
        delta_g_total=delta_g_total,
        delta_zp=delta_zp,
        overlap_s=float(g**n),
        instanton_action=s_inst,
    )


def bogoliubov_report(params: ModelParams, eig: EigenSystem) -> dict:
    """Zero-point depletion ledger of the pointer magnetisation.

    delta_zp    = N m*/2 - J01
    delta_g_bog = (N m*/2)^2 - J01^2
    delta_g_total = (N m*/2)^2 - G01, and identically delta_g_bog - leakage_avg.
    """
    if not params.ordered:
        raise ValueError("Bogoliubov depletion is defined in the ordered phase only")
    f = geometric_factors(params, eig)
    half = params.n_spins * params.order_parameter / 2.0
    return {
        "delta_zp": f.delta_zp,
        "delta_g_bog": half**2 - f.j01**2,
        "leakage_avg": f.leakage_avg,
        "delta_g_total": f.delta_g_total,
    }


def secular_parameter(factors: GeometricFactors, gamma_phi: float) -> float:
    """2 dE T2 with T2 = 1/(gamma_phi G01); dimensionless secular-validity measure."""
    if gamma_phi <= 0:
        raise ValueError("gamma_phi must be > 0")
    if factors.g_01 <= 0:
        raise ValueError("g_01 must be > 0")
    return 2.0 * factors.delta_e / (gamma_phi * factors.g_01)
