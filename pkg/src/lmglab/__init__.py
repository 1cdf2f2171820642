"""Exact-diagonalization laboratory for basis-dependent dephasing in the LMG model."""

from .dicke import (
    DickeBasis,
    ModelParams,
    TridiagonalOperator,
    build_hamiltonian,
    jz_diagonal,
    reflection_parity,
)
from .doublet import (
    DoubletSpectrum,
    TwoChannelRoots,
    doublet_closed_form,
    doublet_spectrum,
    three_regime_label,
    two_channel_roots,
)
from .dynamics import (
    CoherenceTrace,
    DecayFit,
    StepSizeError,
    TraceDriftError,
    check_density_matrix,
    dephasing_rates_elementwise,
    evolve,
    evolve_doublet,
    fit_decay,
    fit_frequency,
    initial_state,
)
from .eigensolver import ConvergenceError, EigenSystem, doublet, eigh_tridiagonal
from .observables import (
    GeometricFactors,
    bogoliubov_report,
    gamma_ab,
    geometric_factors,
    jz2_expectation,
    jz_element,
    secular_parameter,
)
from .sweeps import (
    AsymptoteFit,
    SweepRecord,
    VerificationReport,
    calibrate_coupling,
    default_coupling,
    eigensystem_for,
    factors_for,
    fit_asymptote,
    normalized_rates,
    run_verification,
    sweep_gamma,
    sweep_n,
    write_records_csv,
    write_records_json,
)

__version__ = "0.1.0"
