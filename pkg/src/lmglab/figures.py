"""Figure rendering for the reproduction report path (headless, file output)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

__all__ = ["render_eta_vs_n", "render_eta_vs_gamma", "render_normalized_rates"]

_FIGSIZE = (6.5, 4.2)
_DPI = 150


def _new_axes(xlabel, ylabel):
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    return fig, ax


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def render_eta_vs_n(records, path) -> None:
    """Mean-field to eigenstate rate ratio versus N at fixed Gamma/J."""
    fig, ax = _new_axes("N", r"$\eta_{\rm MF} = G_{\rm loc} / G_{01}$")
    n = [r.n_spins for r in records]
    ax.semilogx(n, [r.eta_mf for r in records], "o-", ms=4, label="exact diagonalization")
    ax.axhline(2.0, ls=":", color="gray", label=r"$N\to\infty$ limit")
    g = records[0].gamma_over_j if records else None
    if g is not None:
        ax.set_title(rf"$\Gamma/J = {g:g}$")
    ax.legend()
    _save(fig, path)


def render_eta_vs_gamma(records, path) -> None:
    """Rate ratio versus Gamma/J at fixed N."""
    fig, ax = _new_axes(r"$\Gamma/J$", r"$\eta_{\rm MF} = G_{\rm loc} / G_{01}$")
    g = [r.gamma_over_j for r in records]
    ax.plot(g, [r.eta_mf for r in records], "s-", ms=4, label="exact diagonalization")
    ax.axhline(2.0, ls=":", color="gray", label=r"$N\to\infty$ limit")
    if records:
        ax.set_title(f"N = {records[0].n_spins}")
    ax.legend()
    _save(fig, path)


def render_normalized_rates(rows, path) -> None:
    """Three decoherence rate factors normalized by (N m*/2)^2, versus N."""
    fig, ax = _new_axes("N", r"rate factor / $(N m_*/2)^2$")
    n = [r["n_spins"] for r in rows]
    ax.semilogx(n, [r["mean_field_factor"] for r in rows], ":", color="tab:red",
                label=r"$G_{\rm loc}$ (mean field) $= 2$")
    ax.semilogx(n, [r["doublet_decay_factor"] for r in rows], "o-", ms=4,
                color="tab:blue", label=r"$2 J_{01}^2$ (restricted doublet)")
    ax.semilogx(n, [r["eigenstate_factor"] for r in rows], "s--", ms=4,
                color="tab:orange", label=r"$G_{01}$ (secular)")
    ax.axhline(1.0, ls=":", color="gray", lw=0.8)
    ax.legend()
    _save(fig, path)
