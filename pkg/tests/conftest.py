import numpy as np
import pytest

from lmglab import ModelParams, default_coupling, factors_for


@pytest.fixture(scope="session")
def coupling():
    return default_coupling()


@pytest.fixture(scope="session")
def bench370(coupling):
    """Benchmark point N=370, Gamma/J=0.95, gamma_phi=0.05, calibrated J."""
    params = ModelParams(
        n_spins=370, coupling=coupling, field=0.95 * coupling, dephasing=0.05
    )
    eig, factors = factors_for(params)
    return params, eig, factors


def dense_lmg(n, gamma_over_j, coupling=1.0):
    """Dense LMG Hamiltonian built from full Jz/Jx matrices (oracle path)."""
    jt = n / 2.0
    m = np.arange(n + 1) - jt
    jz = np.diag(m)
    ladder = np.sqrt(jt * (jt + 1.0) - m[:-1] * (m[:-1] + 1.0))
    jplus = np.zeros((n + 1, n + 1))
    jplus[np.arange(1, n + 1), np.arange(n)] = ladder
    jx = 0.5 * (jplus + jplus.T)
    return (
        -2.0 * coupling / n * (jz @ jz) - 2.0 * gamma_over_j * coupling * jx,
        m,
        jz,
        jx,
    )
