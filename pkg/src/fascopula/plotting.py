"""Figure rendering for the command-line reports.

Every report subcommand writes delimited data first and then, unless
figures are disabled, renders a PNG companion through these helpers.
matplotlib is imported lazily with the Agg backend so library users who
never render anything do not pay for (or require) a display stack.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "save_scatter_grid",
    "save_pdf_cdf",
    "save_outage_curves",
    "save_validation_report",
    "save_corr_table",
]


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def save_scatter_grid(path, panels, suptitle=None, max_points=2000):
    """2x2 scatter panels of port-2 versus port-1 envelopes.

    ``panels`` is a list of (title, envelopes) with envelopes of shape
    (K, 2); only the first ``max_points`` samples are drawn.
    """
    plt = _pyplot()
    fig, axes = plt.subplots(2, 2, figsize=(8, 7.5), sharex=True, sharey=True)
    for ax, (title, env) in zip(axes.ravel(), panels):
        pts = np.asarray(env)[:max_points]
        ax.scatter(pts[:, 0], pts[:, 1], s=3, alpha=0.35, linewidths=0)
        ax.set_title(title, fontsize=10)
        ax.set_xlabel("port 1 envelope")
        ax.set_ylabel("port 2 envelope")
    for ax in axes.ravel()[len(panels):]:
        ax.set_visible(False)
    if suptitle:
        fig.suptitle(suptitle)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_pdf_cdf(path, r, columns, suptitle=None):
    """Side-by-side density and log-scale CDF panels.

    ``columns`` maps labels like "mc"/"coeff"/"enve" to (pdf, cdf) arrays
    aligned with ``r``.
    """
    plt = _pyplot()
    fig, (ax_pdf, ax_cdf) = plt.subplots(1, 2, figsize=(10, 4))
    for label, (pdf_vals, cdf_vals) in columns.items():
        ax_pdf.plot(r, pdf_vals, label=label)
        ax_cdf.semilogy(r, np.maximum(np.asarray(cdf_vals, dtype=float), 1e-12), label=label)
    ax_pdf.set_xlabel("envelope r")
    ax_pdf.set_ylabel("density")
    ax_cdf.set_xlabel("envelope r")
    ax_cdf.set_ylabel("CDF")
    ax_cdf.set_ylim(1e-6, 1.5)
    for ax in (ax_pdf, ax_cdf):
        ax.legend(fontsize=8)
        ax.grid(True, alpha=0.3)
    if suptitle:
        fig.suptitle(suptitle)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_outage_curves(path, axis_name, series, suptitle=None):
    """Log-scale outage curves over a shared sweep axis.

    ``series`` is a list of (label, x, op, stderr_or_None); Monte Carlo
    entries get 3-sigma error bars.
    """
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    for label, x, op, stderr in series:
        op = np.maximum(np.asarray(op, dtype=float), 1e-12)
        if stderr is not None:
            ax.errorbar(
                x, op, yerr=3.0 * np.asarray(stderr), fmt="o", ms=3.5,
                capsize=2, label=label,
            )
        else:
            ax.plot(x, op, label=label)
    ax.set_yscale("log")
    ax.set_xlabel(axis_name)
    ax.set_ylabel("outage probability")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    if suptitle:
        ax.set_title(suptitle, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_validation_report(path, report):
    """Bar chart of per-m marginal RMSEs and correlation gaps with thresholds."""
    plt = _pyplot()
    per_m = report["per_m"]
    ms = sorted(per_m, key=float)
    x = np.arange(len(ms))
    width = 0.27
    fig, ax = plt.subplots(figsize=(6.5, 4))
    ax.bar(x - width, [per_m[k]["pdf_rmse"] for k in ms], width, label="pdf rmse")
    ax.bar(x, [per_m[k]["cdf_rmse"] for k in ms], width, label="cdf rmse")
    ax.bar(x + width, [per_m[k]["corr_max_abs_diff"] for k in ms], width,
           label="max corr gap")
    ax.axhline(1e-3, color="k", ls="--", lw=0.8, label="rmse threshold")
    ax.axhline(1e-2, color="r", ls=":", lw=0.8, label="corr threshold")
    ax.set_yscale("log")
    ax.set_xticks(x, [f"m={k}" for k in ms])
    ax.set_ylabel("error")
    ax.legend(fontsize=8)
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_corr_table(path, title, labels, sim, coeff, enve):
    """Grouped bars comparing empirical correlations from the three generators."""
    plt = _pyplot()
    x = np.arange(len(labels))
    width = 0.27
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(x - width, sim, width, label="physical")
    ax.bar(x, coeff, width, label="copula coefficient")
    ax.bar(x + width, enve, width, label="copula envelope")
    ax.axhline(0.0, color="k", lw=0.8)
    ax.set_xticks(x, labels, rotation=45, fontsize=8)
    ax.set_ylabel("empirical envelope correlation")
    ax.set_title(title, fontsize=10)
    ax.legend(fontsize=8)
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
