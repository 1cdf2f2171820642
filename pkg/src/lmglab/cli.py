"""Command-line front end: sweeps, calibration, dynamics, verification, reproduction.

Exit codes: 0 success, 1 verification failure, 2 invalid arguments.  All
numeric output uses the dot decimal separator regardless of locale.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import sys
from pathlib import Path

import numpy as np

from . import sweeps
from .dicke import ModelParams, build_hamiltonian
from .doublet import doublet_spectrum, three_regime_label, two_channel_roots
from .dynamics import evolve, initial_state
from .eigensolver import eigh_tridiagonal
from .observables import secular_parameter


@contextlib.contextmanager
def _open_out(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.10g}"


def _write_kv(pairs, fmt, out) -> None:
    if fmt == "json":
        payload = {
            k: (v if isinstance(v, (str, int, type(None))) else sweeps._jsonable(v))
            for k, v in pairs
        }
        json.dump(payload, out, indent=2)
        out.write("\n")
    else:
        out.write("key,value\n")
        for k, v in pairs:
            out.write(f"{k},{v if isinstance(v, str) else _fmt(v)}\n")


def _params(args, n=None) -> ModelParams:
    coupling = args.coupling_rads
    if coupling is None:
        coupling = sweeps.default_coupling()
    return ModelParams(
        n_spins=n if n is not None else args.n,
        coupling=coupling,
        field=args.gamma_over_j * coupling,
        dephasing=args.dephasing,
    )


def _parse_initial(spec: str):
    if spec == "pointer":
        return "pointer", {}
    if spec in ("e0", "e1"):
        return "eigenstate", {"index": int(spec[1])}
    if spec.startswith("mixture:"):
        parts = spec.split(":", 1)[1].split(",")
        if len(parts) != 3:
            raise ValueError("mixture takes three values: mixture:w,u,v")
        w, u, v = (float(x) for x in parts)
        return "mixture", {"w": w, "u": u, "v": v}
    raise ValueError(f"unknown initial state {spec!r}")


def _cmd_spectrum(args) -> int:
    params = _params(args)
    eig = sweeps.eigensystem_for(params)
    with _open_out(args.out) as out:
        if args.format == "json":
            json.dump(
                {
                    "n_spins": params.n_spins,
                    "gamma_over_j": args.gamma_over_j,
                    "coupling_rads": params.coupling,
                    "energies_rads": [float(x) for x in eig.values],
                    "parities": [int(p) for p in eig.parities],
                },
                out,
                indent=2,
            )
            out.write("\n")
        else:
            out.write("index,energy_rads,parity\n")
            for k in range(eig.dim):
                out.write(f"{k},{_fmt(eig.values[k])},{int(eig.parities[k])}\n")
    return 0


def _cmd_rates(args) -> int:
    params = _params(args)
    recs = sweeps.sweep_n(
        params.gamma_over_j, [params.n_spins], args.dephasing, params.coupling
    )
    with _open_out(args.out) as out:
        if args.format == "json":
            sweeps.write_records_json(recs, out)
        else:
            sweeps.write_records_csv(recs, out)
    return 0


def _cmd_sweep_n(args) -> int:
    recs = sweeps.sweep_n(args.gamma_over_j, args.n, args.dephasing, args.coupling_rads)
    with _open_out(args.out) as out:
        (sweeps.write_records_json if args.format == "json" else sweeps.write_records_csv)(recs, out)
    return 0


def _cmd_sweep_gamma(args) -> int:
    recs = sweeps.sweep_gamma(args.n, args.gamma_over_j, args.dephasing, args.coupling_rads)
    with _open_out(args.out) as out:
        (sweeps.write_records_json if args.format == "json" else sweeps.write_records_csv)(recs, out)
    return 0


def _cmd_evolve(args) -> int:
    params = _params(args)
    eig = sweeps.eigensystem_for(params)
    kind, kwargs = _parse_initial(args.initial)
    rho0 = initial_state(kind, eig, **kwargs)
    trace = evolve(params, rho0, args.t_final, args.samples)
    with _open_out(args.out) as out:
        if args.format == "json":
            json.dump(
                {
                    "t": trace.times.tolist(),
                    "re_rho01": trace.rho01.real.tolist(),
                    "im_rho01": trace.rho01.imag.tolist(),
                    "re_rho_pr": trace.rho_pr.real.tolist(),
                    "im_rho_pr": trace.rho_pr.imag.tolist(),
                    "pop_diff_eigen": trace.pop_diff_eigen.tolist(),
                    "pop_diff_pointer": trace.pop_diff_pointer.tolist(),
                    "diagnostics": {
                        k: sweeps._jsonable(v) for k, v in trace.diagnostics.items()
                    },
                },
                out,
                indent=2,
            )
            out.write("\n")
        else:
            trace.to_csv(out)
    return 0


def _cmd_doublet(args) -> int:
    params = _params(args)
    eig, f = sweeps.factors_for(params)
    spec = doublet_spectrum(f.j01, args.dephasing)
    roots = two_channel_roots(args.dephasing, f.g_loc, f.delta_e)
    pairs = [
        ("n_spins", params.n_spins),
        ("gamma_over_j", args.gamma_over_j),
        ("j01", f.j01),
        ("delta_e_rads", f.delta_e),
        ("doublet_decay_rate", spec.decay_rate),
        ("lambda_plus_re", roots.lambda_plus.real),
        ("lambda_plus_im", roots.lambda_plus.imag),
        ("lambda_minus_re", roots.lambda_minus.real),
        ("lambda_minus_im", roots.lambda_minus.imag),
        ("two_channel_regime", roots.regime),
        ("envelope_rate", roots.envelope_rate if roots.envelope_rate is not None else float("nan")),
        ("secular_param", secular_parameter(f, args.dephasing)),
        ("regime", three_regime_label(params, f, args.dephasing)),
    ]
    with _open_out(args.out) as out:
        _write_kv(pairs, args.format, out)
    return 0


def _cmd_calibrate(args) -> int:
    coupling = sweeps.calibrate_coupling(args.target_delta_e, args.n, args.gamma_over_j)
    pairs = [
        ("coupling_rads", coupling),
        ("target_delta_e_rads", args.target_delta_e),
        ("n_ref", args.n),
        ("gamma_over_j_ref", args.gamma_over_j),
    ]
    with _open_out(args.out) as out:
        _write_kv(pairs, args.format, out)
    return 0


def _cmd_verify(args) -> int:
    kwargs = {}
    if args.n:
        kwargs["n_values"] = tuple(args.n)
    if args.gamma_over_j:
        kwargs["gamma_over_j_values"] = tuple(args.gamma_over_j)
    report = sweeps.run_verification(coupling=args.coupling_rads, **kwargs)
    with _open_out(args.out) as out:
        out.write(report.to_json())
        out.write("\n")
    return 0 if report.passed else 1


def _cmd_reproduce(args) -> int:
    from . import figures

    outdir = Path(args.out if args.out not in (None, "-") else "reproduction")
    outdir.mkdir(parents=True, exist_ok=True)
    gamma_phi = args.dephasing
    coupling = args.coupling_rads
    written = []

    table = sweeps.sweep_n(0.95, sweeps.TABLE1_N_GRID, gamma_phi, coupling)
    sweeps.write_records_csv(table, outdir / "table1.csv")
    written.append("table1.csv")

    fig1 = sweeps.sweep_n(0.95, sweeps.FIG_N_GRID, gamma_phi, coupling)
    with open(outdir / "fig_eta_vs_n.csv", "w") as fh:
        fh.write("n_spins,eta_mf\n")
        for r in fig1:
            fh.write(f"{r.n_spins},{_fmt(r.eta_mf)}\n")
    figures.render_eta_vs_n(fig1, outdir / "fig_eta_vs_n.png")
    written += ["fig_eta_vs_n.csv", "fig_eta_vs_n.png"]

    fig2 = sweeps.sweep_gamma(370, sweeps.FIG_GAMMA_GRID, gamma_phi, coupling)
    with open(outdir / "fig_eta_vs_gamma.csv", "w") as fh:
        fh.write("gamma_over_j,eta_mf\n")
        for r in fig2:
            fh.write(f"{_fmt(r.gamma_over_j)},{_fmt(r.eta_mf)}\n")
    figures.render_eta_vs_gamma(fig2, outdir / "fig_eta_vs_gamma.png")
    written += ["fig_eta_vs_gamma.csv", "fig_eta_vs_gamma.png"]

    fig3 = sweeps.normalized_rates(sweeps.FIG3_N_GRID, 0.95, coupling)
    with open(outdir / "fig_normalized_rates.csv", "w") as fh:
        fh.write("n_spins,mean_field_factor,doublet_decay_factor,eigenstate_factor\n")
        for row in fig3:
            fh.write(
                f"{row['n_spins']},{_fmt(row['mean_field_factor'])},"
                f"{_fmt(row['doublet_decay_factor'])},{_fmt(row['eigenstate_factor'])}\n"
            )
    figures.render_normalized_rates(fig3, outdir / "fig_normalized_rates.png")
    written += ["fig_normalized_rates.csv", "fig_normalized_rates.png"]

    fit = sweeps.fit_asymptote(
        [r for r in fig1 if r.n_spins in sweeps.ASYMPTOTE_N_GRID]
    )
    with open(outdir / "asymptote_fit.csv", "w") as fh:
        fh.write("n_spins,c\n")
        for n in sorted(fit.c_at_n):
            fh.write(f"{n},{_fmt(fit.c_at_n[n])}\n")
    written.append("asymptote_fit.csv")

    for name in written:
        print(outdir / name)
    return 0


def _add_common(p, *, n_default=None, multi_n=False, multi_gamma=False):
    if multi_n:
        p.add_argument("--n", type=int, nargs="+", required=True, help="spin numbers N")
    else:
        p.add_argument("--n", type=int, default=n_default, required=n_default is None,
                       help="spin number N")
    if multi_gamma:
        p.add_argument("--gamma-over-j", type=float, nargs="+", required=True,
                       help="transverse field ratios Gamma/J")
    else:
        p.add_argument("--gamma-over-j", type=float, default=0.95,
                       help="transverse field ratio Gamma/J (default 0.95)")
    p.add_argument("--coupling-rads", type=float, default=None,
                   help="coupling J in rad/s (default: calibrated so dE(370, 0.95) = 1310)")
    p.add_argument("--dephasing", type=float, default=sweeps.DEFAULT_DEPHASING,
                   help="collective dephasing rate gamma_phi in 1/s (default 0.05)")
    p.add_argument("--out", default="-", help="output path, '-' for stdout")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lmglab",
        description="Basis-dependent dephasing rates of the LMG model by exact diagonalization",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="eigenvalues and parities of one point")
    _add_common(p)
    p.set_defaults(fn=_cmd_spectrum)

    p = sub.add_parser("rates", help="geometric factors of one point")
    _add_common(p)
    p.set_defaults(fn=_cmd_rates)

    p = sub.add_parser("sweep-n", help="sweep over N at fixed Gamma/J")
    _add_common(p, multi_n=True)
    p.set_defaults(fn=_cmd_sweep_n)

    p = sub.add_parser("sweep-gamma", help="sweep over Gamma/J at fixed N")
    _add_common(p, multi_gamma=True)
    p.set_defaults(fn=_cmd_sweep_gamma)

    p = sub.add_parser("evolve", help="integrate the master equation, write the trace")
    _add_common(p)
    p.add_argument("--t-final", type=float, required=True, help="final time in s")
    p.add_argument("--samples", type=int, default=2001, help="number of samples incl. t=0")
    p.add_argument("--initial", default="pointer",
                   help="pointer | e0 | e1 | mixture:w,u,v (default pointer)")
    p.set_defaults(fn=_cmd_evolve)

    p = sub.add_parser("doublet", help="closed-form doublet spectrum and two-channel roots")
    _add_common(p)
    p.set_defaults(fn=_cmd_doublet)

    p = sub.add_parser("calibrate", help="coupling J that fixes the reference splitting")
    _add_common(p, n_default=sweeps.CALIBRATION_N)
    p.add_argument("--target-delta-e", type=float, default=sweeps.CALIBRATION_DELTA_E,
                   help="target splitting in rad/s (default 1310)")
    p.set_defaults(fn=_cmd_calibrate)

    p = sub.add_parser("verify", help="run the invariant suite; exit 1 on failure")
    p.add_argument("--n", type=int, nargs="+", default=None)
    p.add_argument("--gamma-over-j", type=float, nargs="+", default=None)
    p.add_argument("--coupling-rads", type=float, default=None)
    p.add_argument("--out", default="-")
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("reproduce", help="emit the benchmark table, figure data, and figures")
    p.add_argument("--out", default="reproduction", help="output directory")
    p.add_argument("--coupling-rads", type=float, default=None)
    p.add_argument("--dephasing", type=float, default=sweeps.DEFAULT_DEPHASING)
    p.set_defaults(fn=_cmd_reproduce)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
