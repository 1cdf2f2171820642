"""Full Lindblad evolution of the collective-dephasing master equation.

rho_dot = -i [H, rho] + gamma_phi (Jz rho Jz - 1/2 {Jz^2, rho})

Jz is diagonal in the Dicke basis, so the dissipator acts elementwise with
rates -(gamma_phi/2)(m - m')^2; together with the tridiagonal commutator one
right-hand side costs O(N^2).  Integration is fixed-step RK4 (the generator
is time independent, so runs are bit-reproducible); the step follows
h = (2 pi / omega_span) / 40 with omega_span the spectral width of H plus the
gamma_phi (N/2)^2 damping scale, certified once at setup by a halve-and-compare
probe.  The generator preserves Hermiticity exactly, so the kernels update
only the upper triangle.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .dicke import DickeBasis, ModelParams, TridiagonalOperator, build_hamiltonian
from .eigensolver import EigenSystem, doublet, eigh_tridiagonal

__all__ = [
    "CoherenceTrace",
    "DecayFit",
    "StepSizeError",
    "TraceDriftError",
    "dephasing_rates_elementwise",
    "check_density_matrix",
    "initial_state",
    "evolve",
    "evolve_doublet",
    "fit_decay",
    "fit_frequency",
]

TRACE_DRIFT_TOL = 1e-9
LOCAL_ERROR_TOL = 1e-4
STEP_SAFETY_DIVISIONS = 40


class StepSizeError(RuntimeError):
    """Halve-and-compare probe found an unacceptable local error."""


class TraceDriftError(RuntimeError):
    """Trace conservation broke beyond tolerance during integration."""


def dephasing_rates_elementwise(n_spins: int, gamma_phi: float) -> np.ndarray:
    """Elementwise dissipator rates over the Dicke basis.

    Entry (m, m') is -(gamma_phi/2)(m - m')^2; applied as an elementwise
    multiplier this reproduces the Jz rho Jz - 1/2 {Jz^2, rho} dissipator
    exactly, because Jz is diagonal here.  Populations (m = m') get rate 0.
    """
    m = DickeBasis.for_n(n_spins).m_values
    diff = m[:, None] - m[None, :]
    return -0.5 * gamma_phi * diff * diff


def check_density_matrix(rho: np.ndarray, dim: int | None = None) -> None:
    """Validate Hermiticity (1e-12), unit trace (1e-9), positivity (diag >= -1e-10)."""
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density matrix must be square")
    if dim is not None and rho.shape[0] != dim:
        raise ValueError(f"density matrix must be {dim}x{dim}, got {rho.shape}")
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    if herm > 1e-12:
        raise ValueError(f"density matrix not Hermitian (defect {herm:.3e})")
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > 1e-9:
        raise ValueError(f"density matrix trace {tr} is not 1")
    mindiag = float(np.min(rho.diagonal().real))
    if mindiag < -1e-10:
        raise ValueError(f"negative population {mindiag:.3e}")


def initial_state(
    kind: str,
    eig: EigenSystem,
    *,
    index: int | None = None,
    m_value: float | None = None,
    w: float = 0.0,
    u: float = 0.0,
    v: float = 0.0,
) -> np.ndarray:
    """Density matrix embedded in the full Dicke space.

    kind = "pointer"            -> |P><P| with |P> = (|E0> + |E1>)/sqrt(2)
    kind = "eigenstate"         -> |E_index><E_index|
    kind = "dicke"              -> |J_t, m_value><J_t, m_value|
    kind = "mixture"            -> doublet state with pointer-basis coordinates
                                   w = rho_PP - rho_RR, u + i v = rho_PR
    """
    dim = eig.dim
    if kind == "pointer":
        v0, v1, _ = doublet(eig)
        p = (v0 + v1) / np.sqrt(2.0)
        return np.outer(p, p).astype(np.complex128)
    if kind == "eigenstate":
        if index is None or not 0 <= index < dim:
            raise ValueError(f"eigenstate index {index} out of range [0, {dim})")
        vk = eig.vectors[:, index]
        return np.outer(vk, vk).astype(np.complex128)
    if kind == "dicke":
        m = np.arange(dim) - (dim - 1) / 2.0
        hits = np.nonzero(m == m_value)[0]
        if len(hits) != 1:
            raise ValueError(f"m = {m_value} is not in the basis")
        rho = np.zeros((dim, dim), dtype=np.complex128)
        rho[hits[0], hits[0]] = 1.0
        return rho
    if kind == "mixture":
        if w * w + 4.0 * (u * u + v * v) > 1.0 + 1e-12:
            raise ValueError("mixture (w, u, v) is not positive semidefinite")
        v0, v1, _ = doublet(eig)
        p = (v0 + v1) / np.sqrt(2.0)
        r = (v0 - v1) / np.sqrt(2.0)
        rho = (
            0.5 * (1.0 + w) * np.outer(p, p).astype(np.complex128)
            + 0.5 * (1.0 - w) * np.outer(r, r).astype(np.complex128)
        )
        rho += (u + 1j * v) * np.outer(p, r) + (u - 1j * v) * np.outer(r, p)
        return rho
    raise ValueError(f"unknown initial state kind {kind!r}")


@dataclass
class CoherenceTrace:
    """Sampled coherences and populations of one evolution.

    rho01 = <E0|rho|E1>, rho_pr = <P|rho|R>; the pointer quantities are
    extracted independently of the eigen ones, so the exact identity
    rho_pr = pop_diff_eigen/2 - i Im(rho01) doubles as an extraction check.
    """

    times: np.ndarray
    rho01: np.ndarray
    rho_pr: np.ndarray
    pop_diff_eigen: np.ndarray
    pop_diff_pointer: np.ndarray
    diagnostics: dict = field(default_factory=dict)
    rho_final: np.ndarray | None = None

    def to_csv(self, target) -> None:
        """Write the trace; column names are part of the file contract."""
        close = False
        if isinstance(target, (str, bytes)) or hasattr(target, "__fspath__"):
            target = open(target, "w", newline="")
            close = True
        try:
            target.write(
                "t,re_rho01,im_rho01,re_rho_pr,im_rho_pr,"
                "pop_diff_eigen,pop_diff_pointer\n"
            )
            for k in range(len(self.times)):
                row = (
                    self.times[k],
                    self.rho01[k].real,
                    self.rho01[k].imag,
                    self.rho_pr[k].real,
                    self.rho_pr[k].imag,
                    self.pop_diff_eigen[k],
                    self.pop_diff_pointer[k],
                )
                target.write(",".join(f"{x:.10g}" for x in row) + "\n")
        finally:
            if close:
                target.close()

    def to_csv_string(self) -> str:
        buf = io.StringIO()
        self.to_csv(buf)
        return buf.getvalue()


@njit(cache=True, nogil=True)
def _rhs(d, e, damp, rho, out):
    # -i[H, rho] + damp * rho for tridiagonal H; upper triangle + mirror.
    n = rho.shape[0]
    for i in range(n):
        for j in range(i, n):
            acc = (d[i] - d[j]) * rho[i, j]
            if i > 0:
                acc += e[i - 1] * rho[i - 1, j]
            if i < n - 1:
                acc += e[i] * rho[i + 1, j]
            if j > 0:
                acc -= rho[i, j - 1] * e[j - 1]
            if j < n - 1:
                acc -= rho[i, j + 1] * e[j]
            val = -1j * acc + damp[i, j] * rho[i, j]
            out[i, j] = val
            out[j, i] = val.conjugate()


@njit(cache=True, nogil=True)
def _rk4_advance(d, e, damp, rho, h, nsteps, k1, k2, k3, k4, tmp):
    n = rho.shape[0]
    for _ in range(nsteps):
        _rhs(d, e, damp, rho, k1)
        for i in range(n):
            for j in range(n):
                tmp[i, j] = rho[i, j] + (0.5 * h) * k1[i, j]
        _rhs(d, e, damp, tmp, k2)
        for i in range(n):
            for j in range(n):
                tmp[i, j] = rho[i, j] + (0.5 * h) * k2[i, j]
        _rhs(d, e, damp, tmp, k3)
        for i in range(n):
            for j in range(n):
                tmp[i, j] = rho[i, j] + h * k3[i, j]
        _rhs(d, e, damp, tmp, k4)
        c = h / 6.0
        for i in range(n):
            for j in range(n):
                rho[i, j] += c * (k1[i, j] + 2.0 * (k2[i, j] + k3[i, j]) + k4[i, j])


@njit(cache=True, nogil=True)
def _extract(rho, v0, v1, p, r):
    # (rho01, rho_pr, p00, p11, ppp, prr, trace, herm_defect, min_diag)
    n = rho.shape[0]
    r01 = 0.0 + 0.0j
    rpr = 0.0 + 0.0j
    p00 = 0.0
    p11 = 0.0
    ppp = 0.0
    prr = 0.0
    tr = 0.0
    herm = 0.0
    mind = 1.0e300
    for i in range(n):
        a0 = 0.0 + 0.0j
        a1 = 0.0 + 0.0j
        ap = 0.0 + 0.0j
        ar = 0.0 + 0.0j
        for j in range(n):
            x = rho[i, j]
            a0 += x * v0[j]
            a1 += x * v1[j]
            ap += x * p[j]
            ar += x * r[j]
            if j >= i:
                dev = abs(x - rho[j, i].conjugate())
                if dev > herm:
                    herm = dev
        r01 += v0[i] * a1
        rpr += p[i] * ar
        p00 += (v0[i] * a0).real
        p11 += (v1[i] * a1).real
        ppp += (p[i] * ap).real
        prr += (r[i] * ar).real
        di = rho[i, i].real
        tr += di
        if di < mind:
            mind = di
    return r01, rpr, p00, p11, ppp, prr, tr, herm, mind


def _hamiltonian_span(values: np.ndarray) -> float:
    return float(values[-1] - values[0])


def evolve(
    params: ModelParams,
    rho0: np.ndarray,
    t_final: float,
    n_samples: int,
    *,
    _step_scale: float = 1.0,
) -> CoherenceTrace:
    """Integrate the master equation and sample both coherences.

    Samples lie at n_samples uniform times including t = 0.  Aborts with
    TraceDriftError if trace conservation degrades beyond 1e-9, and with
    StepSizeError if the setup halve-and-compare probe reports a local error
    above tolerance.  _step_scale (> 1 coarsens the step) exists for tests.
    """
    if t_final <= 0:
        raise ValueError("t_final must be > 0")
    if n_samples < 2:
        raise ValueError("need at least two samples")
    op = build_hamiltonian(params)
    check_density_matrix(rho0, op.dim)
    eig = eigh_tridiagonal(op)
    v0, v1, _ = doublet(eig)
    p = (v0 + v1) / np.sqrt(2.0)
    r = (v0 - v1) / np.sqrt(2.0)
    gamma_phi = params.dephasing
    damp = dephasing_rates_elementwise(params.n_spins, gamma_phi)

    omega_span = _hamiltonian_span(eig.values) + gamma_phi * (params.n_spins / 2.0) ** 2
    h_rule = (2.0 * np.pi / omega_span) / STEP_SAFETY_DIVISIONS * _step_scale
    nseg = n_samples - 1
    seg_dt = t_final / nseg
    nsub = max(1, int(np.ceil(seg_dt / h_rule - 1e-12)))
    h = seg_dt / nsub

    d = np.ascontiguousarray(op.diagonal)
    e = np.ascontiguousarray(op.off_diagonal)
    n = op.dim
    k1 = np.empty((n, n), np.complex128)
    k2 = np.empty_like(k1)
    k3 = np.empty_like(k1)
    k4 = np.empty_like(k1)
    tmp = np.empty_like(k1)

    # One-off local-error certificate: one step of h against two of h/2.
    probe_a = np.array(rho0, dtype=np.complex128)
    probe_b = np.array(rho0, dtype=np.complex128)
    _rk4_advance(d, e, damp, probe_a, h, 1, k1, k2, k3, k4, tmp)
    _rk4_advance(d, e, damp, probe_b, 0.5 * h, 2, k1, k2, k3, k4, tmp)
    local_error = float(np.max(np.abs(probe_a - probe_b)))
    if not np.isfinite(local_error) or local_error > LOCAL_ERROR_TOL:
        raise StepSizeError(
            f"local error estimate {local_error:.3e} exceeds {LOCAL_ERROR_TOL:.0e} "
            f"at h = {h:.3e} s (omega_span = {omega_span:.3e} rad/s)"
        )

    rho = np.array(rho0, dtype=np.complex128)
    out01 = np.empty(n_samples, np.complex128)
    outpr = np.empty(n_samples, np.complex128)
    pop_eig = np.empty(n_samples, np.float64)
    pop_ptr = np.empty(n_samples, np.float64)
    worst_drift = 0.0
    worst_herm = 0.0
    worst_mind = np.inf
    for seg in range(n_samples):
        r01, rpr, p00, p11, ppp, prr, tr, herm, mind = _extract(rho, v0, v1, p, r)
        out01[seg] = r01
        outpr[seg] = rpr
        pop_eig[seg] = p00 - p11
        pop_ptr[seg] = ppp - prr
        worst_drift = max(worst_drift, abs(tr - 1.0))
        worst_herm = max(worst_herm, herm)
        worst_mind = min(worst_mind, mind)
        if not np.isfinite(tr) or abs(tr - 1.0) > TRACE_DRIFT_TOL:
            raise TraceDriftError(
                f"trace drift {abs(tr - 1.0):.3e} > {TRACE_DRIFT_TOL:.0e} at "
                f"t = {seg * seg_dt:.6e} s (h = {h:.3e} s, {nsub} steps/sample)"
            )
        if seg < nseg:
            _rk4_advance(d, e, damp, rho, h, nsub, k1, k2, k3, k4, tmp)

    return CoherenceTrace(
        times=np.linspace(0.0, t_final, n_samples),
        rho01=out01,
        rho_pr=outpr,
        pop_diff_eigen=pop_eig,
        pop_diff_pointer=pop_ptr,
        rho_final=rho,
        diagnostics={
            "step_size": h,
            "steps_total": nsub * nseg,
            "local_error": local_error,
            "trace_drift": worst_drift,
            "hermiticity_defect": worst_herm,
            "min_population": worst_mind,
            "omega_span": omega_span,
        },
    )


def evolve_doublet(
    j01: float,
    delta_e: float,
    gamma_phi: float,
    rho0: np.ndarray,
    t_final: float,
    n_samples: int,
) -> np.ndarray:
    """RK4 on the doublet-restricted generator; returns (n_samples, 2, 2).

    Jump operator restricted to the doublet is J01 sigma_x and the
    Hamiltonian is diag(-dE/2, +dE/2); passing delta_e = 0 is the test hook
    that isolates the degenerate dissipator against the closed form.
    """
    rho0 = np.asarray(rho0, dtype=np.complex128)
    if rho0.shape != (2, 2):
        raise ValueError("doublet state must be 2x2")
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])
    hd = np.array([[-0.5 * delta_e, 0.0], [0.0, 0.5 * delta_e]])
    rate = gamma_phi * j01 * j01

    def rhs(rho):
        return -1j * (hd @ rho - rho @ hd) + rate * (sx @ rho @ sx - rho)

    omega = delta_e + 4.0 * rate
    h_rule = (2.0 * np.pi / omega) / STEP_SAFETY_DIVISIONS if omega > 0 else t_final
    nseg = n_samples - 1
    seg_dt = t_final / nseg
    nsub = max(1, int(np.ceil(seg_dt / h_rule - 1e-12)))
    h = seg_dt / nsub
    out = np.empty((n_samples, 2, 2), np.complex128)
    rho = rho0.copy()
    for seg in range(n_samples):
        out[seg] = rho
        if seg == nseg:
            break
        for _ in range(nsub):
            k1 = rhs(rho)
            k2 = rhs(rho + 0.5 * h * k1)
            k3 = rhs(rho + 0.5 * h * k2)
            k4 = rhs(rho + h * k3)
            rho = rho + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
    return out


_DECAY_CHANNELS = {
    "abs_rho01": lambda tr: np.abs(tr.rho01),
    "re_rho_pr": lambda tr: np.real(tr.rho_pr),
    "pop_diff_eigen": lambda tr: tr.pop_diff_eigen,
}

_FREQ_CHANNELS = {
    "im_rho_pr": lambda tr: np.imag(tr.rho_pr),
    "im_rho01": lambda tr: np.imag(tr.rho01),
}


@dataclass(frozen=True)
class DecayFit:
    """Log-linear decay fit; flagged marks r_squared < 0.98."""

    rate: float
    r_squared: float
    flagged: bool
    n_points: int


def fit_decay(trace: CoherenceTrace, channel: str, window) -> DecayFit:
    """Least-squares exponential rate of a trace channel over window = (t_lo, t_hi).

    The absolute value of the channel is log-fitted; samples at or below zero
    (sign changes) are excluded.  Raises on fewer than 10 usable samples or an
    identically zero channel.
    """
    if channel not in _DECAY_CHANNELS:
        raise ValueError(f"unknown decay channel {channel!r}")
    t_lo, t_hi = window
    y = _DECAY_CHANNELS[channel](trace)
    mask = (trace.times >= t_lo) & (trace.times <= t_hi)
    if np.max(np.abs(y[mask]), initial=0.0) == 0.0:
        raise ValueError(f"channel {channel} is identically zero in the window")
    ya = np.abs(y[mask])
    tt = trace.times[mask]
    keep = ya > 0.0
    ya, tt = ya[keep], tt[keep]
    if len(tt) < 10:
        raise ValueError(f"only {len(tt)} usable samples in window, need >= 10")
    logy = np.log(ya)
    slope, intercept = np.polyfit(tt, logy, 1)
    pred = slope * tt + intercept
    ss_res = float(np.sum((logy - pred) ** 2))
    ss_tot = float(np.sum((logy - logy.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return DecayFit(rate=-float(slope), r_squared=r2, flagged=r2 < 0.98, n_points=len(tt))


def fit_frequency(trace: CoherenceTrace, channel: str) -> float:
    """Dominant angular frequency from zero-crossing spacing, rad/s.

    Crossing times come from linear interpolation; the frequency is pi over
    the mean of successive half-periods.  Raises on fewer than 3 crossings.
    """
    if channel not in _FREQ_CHANNELS:
        raise ValueError(f"unknown frequency channel {channel!r}")
    y = _FREQ_CHANNELS[channel](trace)
    t = trace.times
    idx = np.nonzero(y[:-1] * y[1:] < 0.0)[0]
    if len(idx) < 3:
        raise ValueError(f"only {len(idx)} zero crossings, need >= 3")
    t_cross = t[idx] - y[idx] * (t[idx + 1] - t[idx]) / (y[idx + 1] - y[idx])
    half_periods = np.diff(t_cross)
    return float(np.pi / np.mean(half_periods))
