"""Closed-form dynamics of the ground doublet and the two-channel projection.

Two analytic reductions of the full Lindblad generator serve as oracles for
the integrator: the degenerate-doublet dissipator (jump operator J01 sigma_x,
spectrum {0, 0, -2 gamma_phi J01^2, -2 gamma_phi J01^2}) and the localized
two-channel system whose roots solve
lambda^2 + gamma_phi G_loc lambda + dE^2 = 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dicke import ModelParams
from .observables import GeometricFactors, secular_parameter

__all__ = [
    "DoubletSpectrum",
    "TwoChannelRoots",
    "doublet_spectrum",
    "doublet_closed_form",
    "two_channel_roots",
    "three_regime_label",
]

# "Gap ratio of order 3" boundary for the small-N regime; the tabulated
# N=100 point sits at 3.00008, so the literal value 3 would misclassify it.
GAP_RATIO_SMALL_N = 3.1
NM_STAR_SMALL_N = 30.0
SECULAR_WINDOW_MIN = 10.0
SECULAR_DEGENERATE_MAX = 1.0


@dataclass(frozen=True)
class DoubletSpectrum:
    """Four Lindblad eigenvalues of the degenerate doublet, with mode labels."""

    eigenvalues: tuple
    modes: dict

    @property
    def decay_rate(self) -> float:
        """Magnitude of the doubly degenerate nonzero eigenvalue, 1/s."""
        return -min(self.eigenvalues)


@dataclass(frozen=True)
class TwoChannelRoots:
    """Roots of the coupled Im(rho_PR) / population-difference channel."""

    lambda_plus: complex
    lambda_minus: complex
    regime: str
    envelope_rate: float | None


def doublet_spectrum(j01: float, gamma_phi: float) -> DoubletSpectrum:
    """Spectrum of the doublet-restricted Lindblad superoperator.

    Two conserved modes (trace, Re rho01 alias the pointer population
    difference) and two modes decaying at 2 gamma_phi J01^2 (eigenstate
    population difference, Im rho01).
    """
    if gamma_phi < 0:
        raise ValueError("gamma_phi must be >= 0")
    rate = -2.0 * gamma_phi * j01 * j01
    return DoubletSpectrum(
        eigenvalues=(0.0, 0.0, rate, rate),
        modes={
            "trace": 0.0,
            "re_rho01": 0.0,
            "pop_diff_eigen": rate,
            "im_rho01": rate,
        },
    )


def doublet_closed_form(
    rho0: np.ndarray, j01: float, gamma_phi: float, t: float
) -> np.ndarray:
    """Evolve a 2x2 doublet density matrix under the degenerate dissipator.

    Trace and rho01 + rho10 are conserved; rho00 - rho11 and rho01 - rho10
    decay by exp(-2 gamma_phi J01^2 t).
    """
    rho0 = np.asarray(rho0, dtype=np.complex128)
    if rho0.shape != (2, 2):
        raise ValueError("doublet state must be 2x2")
    if np.max(np.abs(rho0 - rho0.conj().T)) > 1e-9:
        raise ValueError("doublet state must be Hermitian")
    if abs(np.trace(rho0).real - 1.0) > 1e-9:
        raise ValueError("doublet state must have unit trace")
    decay = np.exp(-2.0 * gamma_phi * j01 * j01 * t)
    s = rho0[0, 0] + rho0[1, 1]
    d = (rho0[0, 0] - rho0[1, 1]) * decay
    csum = rho0[0, 1] + rho0[1, 0]
    cdiff = (rho0[0, 1] - rho0[1, 0]) * decay
    return 0.5 * np.array([[s + d, csum + cdiff], [csum - cdiff, s - d]])


def two_channel_roots(gamma_phi: float, g_loc: float, delta_e: float) -> TwoChannelRoots:
    """Roots of lambda^2 + gamma_phi G_loc lambda + dE^2 = 0 with regime label.

    Overdamped (quantum Zeno) when gamma_phi G_loc > 2 dE, underdamped
    (secular) when smaller; the underdamped envelope decays at
    gamma_phi G_loc / 2.
    """
    if gamma_phi < 0 or g_loc < 0 or delta_e < 0:
        raise ValueError("inputs must be >= 0")
    a = 0.5 * gamma_phi * g_loc
    disc = a * a - delta_e * delta_e
    if disc > 0:
        root = np.sqrt(disc)
        return TwoChannelRoots(
            lambda_plus=complex(-a + root),
            lambda_minus=complex(-a - root),
            regime="overdamped",
            envelope_rate=None,
        )
    if disc < 0:
        osc = np.sqrt(-disc)
        return TwoChannelRoots(
            lambda_plus=complex(-a, osc),
            lambda_minus=complex(-a, -osc),
            regime="underdamped",
            envelope_rate=a,
        )
    return TwoChannelRoots(
        lambda_plus=complex(-a),
        lambda_minus=complex(-a),
        regime="critical",
        envelope_rate=None,
    )


def three_regime_label(
    params: ModelParams, factors: GeometricFactors, gamma_phi: float
) -> str:
    """Classify a parameter point into the three-regime structure.

    regime_1: double well not established (N m* <= 30 or gap ratio <~ 3);
    regime_3_proxy: secular parameter < 1 (degenerate-limit behaviour);
    regime_2: secular parameter >= 10 with an isolated doublet;
    anything between is transitional.  Priority: 1 > 3 > 2.
    """
    nm = params.n_spins * params.order_parameter
    if nm <= NM_STAR_SMALL_N or factors.gap_ratio <= GAP_RATIO_SMALL_N:
        return "regime_1"
    sec = np.inf if gamma_phi == 0 else secular_parameter(factors, gamma_phi)
    if sec < SECULAR_DEGENERATE_MAX:
        return "regime_3_proxy"
    if sec >= SECULAR_WINDOW_MIN:
        return "regime_2"
    return "transitional"
