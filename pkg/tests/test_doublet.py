import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st

from lmglab import (
    ModelParams,
    doublet_closed_form,
    doublet_spectrum,
    factors_for,
    three_regime_label,
    two_channel_roots,
)

SX = np.array([[0.0, 1.0], [1.0, 0.0]])


def dissipator_superop(j01, gphi):
    """Row-major vectorization of gphi J01^2 (sx . sx - id)."""
    return gphi * j01**2 * (np.kron(SX, SX) - np.eye(4))


def random_doublet_state(rng):
    a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


class TestDoubletSpectrum:
    def test_zero_element_means_no_decay(self):
        assert doublet_spectrum(0.0, 2.0).eigenvalues == (0.0, 0.0, -0.0, -0.0)

    def test_benchmark_rate(self, bench370):
        _, _, f = bench370
        spec = doublet_spectrum(f.j01, 0.05)
        assert spec.decay_rate == pytest.approx(245.1, abs=0.2)
        assert spec.modes["trace"] == 0.0
        assert spec.modes["re_rho01"] == 0.0
        assert spec.modes["pop_diff_eigen"] == -spec.decay_rate
        assert spec.modes["im_rho01"] == -spec.decay_rate

    @pytest.mark.parametrize("j01,gphi", [(13.0, 0.75), (49.51, 0.05), (0.3, 2.0)])
    def test_matches_brute_force_superoperator(self, j01, gphi):
        brute = np.sort(np.linalg.eigvals(dissipator_superop(j01, gphi)).real)
        analytic = np.sort(doublet_spectrum(j01, gphi).eigenvalues)
        scale = max(abs(analytic[0]), 1.0)
        assert np.max(np.abs(brute - analytic)) <= 1e-12 * scale

    def test_rejects_negative_rate(self):
        with pytest.raises(ValueError):
            doublet_spectrum(1.0, -0.1)


class TestClosedForm:
    def test_t_zero_is_identity(self):
        rho = np.array([[0.7, 0.1 + 0.2j], [0.1 - 0.2j, 0.3]])
        assert np.allclose(doublet_closed_form(rho, 3.0, 0.1, 0.0), rho, atol=0)

    def test_pointer_state_real_coherence_steady(self):
        rho = 0.5 * np.ones((2, 2), dtype=complex)  # |P><P| in eigen coordinates
        for t in (0.0, 0.3, 2.0):
            out = doublet_closed_form(rho, 5.0, 0.4, t)
            assert out[0, 1].real == pytest.approx(0.5, rel=1e-14)
            assert np.trace(out).real == pytest.approx(1.0, rel=1e-14)

    def test_matches_superoperator_exponential(self):
        rng = np.random.default_rng(7)
        j01, gphi = 13.0, 0.8
        sop = dissipator_superop(j01, gphi)
        for _ in range(20):
            rho0 = random_doublet_state(rng)
            t = float(rng.uniform(0.0, 3.0 / (gphi * j01**2)))
            expected = (sla.expm(sop * t) @ rho0.reshape(4)).reshape(2, 2)
            out = doublet_closed_form(rho0, j01, gphi, t)
            assert np.max(np.abs(out - expected)) <= 1e-12

    def test_validates_input(self):
        with pytest.raises(ValueError):
            doublet_closed_form(np.eye(3), 1.0, 1.0, 0.1)
        with pytest.raises(ValueError):
            doublet_closed_form(np.array([[1.0, 0.5], [0.0, 0.0]]), 1.0, 1.0, 0.1)
        with pytest.raises(ValueError):
            doublet_closed_form(0.8 * np.eye(2), 1.0, 1.0, 0.1)


class TestTwoChannelRoots:
    def test_degenerate_limit(self):
        roots = two_channel_roots(0.1, 50.0, 0.0)
        assert roots.regime == "overdamped"
        vals = sorted([roots.lambda_plus.real, roots.lambda_minus.real])
        assert vals == pytest.approx([-5.0, 0.0], abs=1e-14)

    def test_benchmark_underdamped(self):
        # Table values: gphi G_loc = 0.05 * 6673.875, dE = 1310 rad/s
        roots = two_channel_roots(0.05, 6673.875, 1310.0)
        assert roots.regime == "underdamped"
        assert roots.lambda_plus.real == pytest.approx(-166.85, abs=0.01)
        assert abs(roots.lambda_plus.imag) == pytest.approx(1299.3, abs=0.05)
        assert roots.envelope_rate == pytest.approx(166.85, abs=0.01)

    def test_envelope_to_secular_ratio(self, bench370):
        _, _, f = bench370
        roots = two_channel_roots(0.05, f.g_loc, f.delta_e)
        ratio = roots.envelope_rate / (0.05 * f.g_01)
        assert ratio == pytest.approx(f.eta_mf / 2.0, rel=1e-12)
        assert ratio == pytest.approx(1.175, abs=0.002)

    @given(
        gphi=st.floats(min_value=1e-6, max_value=1e3),
        gloc=st.floats(min_value=1e-6, max_value=1e6),
        de=st.floats(min_value=0.0, max_value=1e6),
    )
    @settings(max_examples=150, deadline=None)
    def test_vieta(self, gphi, gloc, de):
        roots = two_channel_roots(gphi, gloc, de)
        s = roots.lambda_plus + roots.lambda_minus
        p = roots.lambda_plus * roots.lambda_minus
        assert abs(s + gphi * gloc) <= 1e-12 * gphi * gloc
        assert abs(p - de**2) <= 1e-12 * max(de**2, (gphi * gloc) ** 2)
        assert roots.lambda_plus.real <= 0 and roots.lambda_minus.real <= 0

    @pytest.mark.parametrize("gphi,gloc,de", [(0.05, 6673.875, 1310.0), (2.0, 40.0, 3.0)])
    def test_roots_match_coupling_matrix(self, gphi, gloc, de):
        # asymmetric couplings -dE/2 and +2 dE of the (Im rho_PR, pop diff) system
        m = np.array([[-gphi * gloc, -de / 2.0], [2.0 * de, 0.0]])
        brute = np.sort_complex(np.linalg.eigvals(m))
        roots = np.sort_complex([two_channel_roots(gphi, gloc, de).lambda_plus,
                                 two_channel_roots(gphi, gloc, de).lambda_minus])
        assert np.max(np.abs(brute - roots)) <= 1e-10 * max(gphi * gloc, de)

    @pytest.mark.parametrize("ratio", [20.0, 100.0, 1000.0])
    def test_zeno_slow_root_asymptote(self, ratio):
        de = 1.0
        gphi_gloc = ratio * 2 * de
        roots = two_channel_roots(1.0, gphi_gloc, de)
        slow = max(roots.lambda_plus.real, roots.lambda_minus.real)
        assert slow == pytest.approx(-(de**2) / gphi_gloc, rel=0.01)


class TestRegimes:
    @pytest.mark.parametrize(
        "n,expected",
        [(100, "regime_1"), (370, "regime_2"), (500, "transitional"), (2000, "regime_3_proxy")],
    )
    def test_table_points(self, coupling, n, expected):
        params = ModelParams(n, coupling, 0.95 * coupling, 0.05)
        _, f = factors_for(params)
        assert three_regime_label(params, f, 0.05) == expected

    def test_small_n_by_order_parameter(self, coupling):
        params = ModelParams(40, coupling, 0.95 * coupling, 0.05)
        _, f = factors_for(params)
        assert params.n_spins * params.order_parameter <= 30
        assert three_regime_label(params, f, 0.05) == "regime_1"
