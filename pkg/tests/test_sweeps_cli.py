import io
import json

import numpy as np
import pytest

import lmglab.observables
from lmglab import (
    SweepRecord,
    calibrate_coupling,
    fit_asymptote,
    normalized_rates,
    run_verification,
    sweep_gamma,
    sweep_n,
    write_records_csv,
    write_records_json,
)
from lmglab.cli import main
from lmglab.sweeps import RECORD_FIELDS, _unit_eigensystem


class TestCalibration:
    def test_hits_target_splitting(self):
        j = calibrate_coupling(1310.0, 370, 0.95)
        unit = _unit_eigensystem(370, 0.95)
        de = (unit.values[1] - unit.values[0]) * j
        assert de == pytest.approx(1310.0, rel=1e-12)

    def test_linearity(self):
        j1 = calibrate_coupling(1310.0)
        j2 = calibrate_coupling(2620.0)
        assert j2 == pytest.approx(2 * j1, rel=1e-12)

    def test_degenerate_reference_rejected(self):
        with pytest.raises(ValueError, match="degenerate"):
            calibrate_coupling(1310.0, 10, 0.0)

    def test_positive_target_required(self):
        with pytest.raises(ValueError):
            calibrate_coupling(-5.0)


class TestSweeps:
    def test_records_ordered_and_complete(self):
        recs = sweep_n(0.95, [200, 50, 100], gamma_phi=0.05)
        assert [r.n_spins for r in recs] == [50, 100, 200]
        for r in recs:
            assert isinstance(r, SweepRecord)
            assert r.gamma_over_j == 0.95
            assert r.eta_mf > 0 and r.g_01 > 0

    def test_concurrent_equals_sequential(self):
        seq = sweep_n(0.95, [20, 50, 100, 150], max_workers=1)
        par = sweep_n(0.95, [20, 50, 100, 150], max_workers=4)
        assert seq == par

    def test_rejects_disordered_phase(self):
        with pytest.raises(ValueError):
            sweep_n(1.0, [50])
        with pytest.raises(ValueError):
            sweep_gamma(50, [0.5, 1.05])

    def test_point_failure_warns_and_continues(self):
        with pytest.warns(UserWarning, match="failed"):
            recs = sweep_n(0.95, [1, 50])
        assert [r.n_spins for r in recs] == [50]

    def test_gamma_sweep_ordering(self):
        recs = sweep_gamma(50, [0.9, 0.3, 0.6])
        assert [r.gamma_over_j for r in recs] == [0.3, 0.6, 0.9]

    def test_normalized_rates_field_free(self):
        rows = normalized_rates([10, 20], 0.0)
        for row in rows:
            assert row["mean_field_factor"] == 2.0
            assert row["doublet_decay_factor"] == pytest.approx(2.0, rel=1e-12)
            assert row["eigenstate_factor"] == pytest.approx(1.0, rel=1e-12)

    def test_normalized_rates_published_points(self):
        rows = {r["n_spins"]: r for r in normalized_rates([370, 2000], 0.95)}
        assert rows[370]["doublet_decay_factor"] == pytest.approx(1.4692, abs=0.0005)
        assert rows[370]["eigenstate_factor"] == pytest.approx(0.8508, abs=0.0005)
        assert rows[2000]["doublet_decay_factor"] == pytest.approx(1.9222, abs=0.0005)
        assert rows[2000]["eigenstate_factor"] == pytest.approx(0.9766, abs=0.0005)


class TestAsymptote:
    def test_synthetic_recovers_coefficient(self):
        recs = [
            SweepRecord(
                n_spins=n, gamma_over_j=0.95, delta_e_ratio=1.0, g_loc=1.0,
                g_01=1.0, j01=1.0, eta_mf=2.0 + 50.0 / n, eta_exact=1.5,
                eta_quantum=1.0, gap_ratio=10.0, secular_param=20.0,
                leakage_0=0.0, leakage_1=0.0, regime="regime_2",
            )
            for n in (100, 500, 1000)
        ]
        fit = fit_asymptote(recs)
        assert all(c == pytest.approx(50.0, rel=1e-12) for c in fit.c_at_n.values())

    def test_rejects_disordered_records(self):
        rec = SweepRecord(
            n_spins=10, gamma_over_j=1.2, delta_e_ratio=1.0, g_loc=0.0,
            g_01=1.0, j01=1.0, eta_mf=None, eta_exact=1.5, eta_quantum=None,
            gap_ratio=10.0, secular_param=20.0, leakage_0=0.0, leakage_1=0.0,
            regime="regime_1",
        )
        with pytest.raises(ValueError):
            fit_asymptote([rec])


class TestRecordIO:
    def test_csv_schema(self):
        recs = sweep_n(0.95, [50, 100])
        buf = io.StringIO()
        write_records_csv(recs, buf)
        lines = buf.getvalue().strip().split("\n")
        assert lines[0] == ",".join(RECORD_FIELDS)
        assert lines[0].startswith("n_spins,gamma_over_j,delta_e_ratio,g_loc,g_01,j01")
        assert len(lines) == 3
        first = lines[1].split(",")
        assert first[0] == "50" and first[-1] in (
            "regime_1", "regime_2", "regime_3_proxy", "transitional",
        )

    def test_json_mirrors_csv_fields(self):
        recs = sweep_n(0.95, [50])
        buf = io.StringIO()
        write_records_json(recs, buf)
        payload = json.loads(buf.getvalue())
        assert list(payload[0].keys()) == list(RECORD_FIELDS)

    def test_byte_identical_reruns(self):
        def render():
            buf = io.StringIO()
            write_records_csv(sweep_n(0.95, [20, 60, 100]), buf)
            return buf.getvalue()

        assert render() == render()


class TestVerification:
    def test_default_grid_passes(self):
        report = run_verification(n_values=(20, 50, 100), gamma_over_j_values=(0.5, 0.95))
        assert report.passed, report.to_json()
        names = [c.name for c in report.checks]
        for expected in (
            "parity_diagonal_jz",
            "jz_completeness",
            "opposite_parity_jz2",
            "j01_pointer_identity",
            "doublet_spectrum_oracle",
            "two_channel_vieta",
            "bogoliubov_ledger",
        ):
            assert expected in names
        payload = json.loads(report.to_json())
        assert payload["passed"] is True

    def test_injected_sign_fault_fails_parity(self, monkeypatch):
        true_jz = lmglab.observables.jz_element

        def faulty(va, vb):
            # sign fault: the negative-m half of the axis loses its sign
            m = np.abs(np.arange(len(va)) - (len(va) - 1) / 2.0)
            return float(np.dot(m * va, vb))

        monkeypatch.setattr(lmglab.observables, "jz_element", faulty)
        report = run_verification(n_values=(20, 50), gamma_over_j_values=(0.95,))
        monkeypatch.setattr(lmglab.observables, "jz_element", true_jz)
        assert not report.passed
        failed = {c.name for c in report.checks if not c.passed}
        assert "parity_diagonal_jz" in failed


class TestCli:
    def test_spectrum_csv(self, capsys):
        assert main(["spectrum", "--n", "10", "--gamma-over-j", "0.5"]) == 0
        out = capsys.readouterr().out
        lines = out.strip().split("\n")
        assert lines[0] == "index,energy_rads,parity"
        assert len(lines) == 12

    def test_rates_json(self, capsys):
        assert main(["rates", "--n", "50", "--format", "json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload[0]["n_spins"] == 50
        assert list(payload[0].keys()) == list(RECORD_FIELDS)

    def test_sweep_n_to_file(self, tmp_path, capsys):
        out = tmp_path / "sweep.csv"
        assert main([
            "sweep-n", "--n", "50", "100", "--gamma-over-j", "0.95",
            "--out", str(out),
        ]) == 0
        lines = out.read_text().strip().split("\n")
        assert len(lines) == 3

    def test_sweep_gamma_stdout(self, capsys):
        assert main(["sweep-gamma", "--n", "50", "--gamma-over-j", "0.3", "0.6"]) == 0
        assert len(capsys.readouterr().out.strip().split("\n")) == 3

    def test_evolve_trace_csv(self, tmp_path):
        out = tmp_path / "trace.csv"
        code = main([
            "evolve", "--n", "10", "--coupling-rads", "1.0", "--dephasing", "0.01",
            "--t-final", "0.5", "--samples", "11", "--initial", "pointer",
            "--out", str(out),
        ])
        assert code == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0].startswith("t,re_rho01,im_rho01")
        assert len(lines) == 12

    def test_evolve_mixture_initial(self, capsys):
        code = main([
            "evolve", "--n", "10", "--coupling-rads", "1.0", "--dephasing", "0.01",
            "--t-final", "0.2", "--samples", "5", "--initial", "mixture:0.5,0.25,0",
        ])
        assert code == 0

    def test_doublet_json(self, capsys):
        assert main(["doublet", "--n", "50", "--format", "json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["two_channel_regime"] in ("underdamped", "overdamped", "critical")

    def test_calibrate(self, capsys):
        assert main(["calibrate", "--format", "json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["coupling_rads"] == pytest.approx(37195.4, abs=0.1)

    def test_verify_exit_code(self, capsys):
        assert main(["verify", "--n", "20", "50", "--gamma-over-j", "0.95"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["passed"] is True

    def test_invalid_value_exit_2(self, capsys):
        assert main(["sweep-n", "--n", "50", "--gamma-over-j", "1.5"]) == 2
        assert "error" in capsys.readouterr().err

    def test_invalid_flag_exit_2(self):
        with pytest.raises(SystemExit) as err:
            main(["rates", "--n", "50", "--format", "yaml"])
        assert err.value.code == 2

    def test_bad_initial_spec(self, capsys):
        code = main([
            "evolve", "--n", "10", "--coupling-rads", "1.0",
            "--t-final", "0.1", "--initial", "mixture:1",
        ])
        assert code == 2

    def test_reproduce_writes_report(self, tmp_path, capsys, monkeypatch):
        # shrink the grids so the full report path stays fast
        import lmglab.sweeps as sweeps

        monkeypatch.setattr(sweeps, "TABLE1_N_GRID", (50, 100))
        monkeypatch.setattr(sweeps, "FIG_N_GRID", (20, 50, 100, 500))
        monkeypatch.setattr(sweeps, "FIG3_N_GRID", (20, 50, 100))
        monkeypatch.setattr(sweeps, "FIG_GAMMA_GRID", (0.5, 0.9, 0.95))
        monkeypatch.setattr(sweeps, "ASYMPTOTE_N_GRID", (500,))
        outdir = tmp_path / "rep"
        assert main(["reproduce", "--out", str(outdir)]) == 0
        expected = [
            "table1.csv",
            "fig_eta_vs_n.csv", "fig_eta_vs_n.png",
            "fig_eta_vs_gamma.csv", "fig_eta_vs_gamma.png",
            "fig_normalized_rates.csv", "fig_normalized_rates.png",
            "asymptote_fit.csv",
        ]
        for name in expected:
            assert (outdir / name).exists(), name
            assert (outdir / name).stat().st_size > 0
        header = (outdir / "fig_eta_vs_n.csv").read_text().splitlines()[0]
        assert header == "n_spins,eta_mf"
