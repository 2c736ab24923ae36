"""Static SVG figures for forecast bands and the inequality validation."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["save_forecast_plot", "save_validation_plot"]


def _svg_metadata(provenance):
    if not provenance:
        return None
    pairs = " ".join(f"{k}={v}" for k, v in sorted(provenance.items()))
    return {"Description": pairs}


def save_forecast_plot(path, positions, table, truth=None, title=None,
                       provenance=None):
    """Quantile band plot over pixel positions.

    table maps each of min/q25/q50/q75/max to an array aligned with
    positions; truth, when given, is overlaid as a dashed line.
    """
    positions = np.asarray(positions, dtype=float)
    fig, ax = plt.subplots(figsize=(9, 4))
    ax.fill_between(positions, table["min"], table["max"],
                    color="#c6dbef", label="min-max")
    ax.fill_between(positions, table["q25"], table["q75"],
                    color="#6baed6", label="interquartile")
    ax.plot(positions, table["q50"], color="#08519c", lw=1.2, label="median")
    if truth is not None:
        ax.plot(positions, truth, color="#d62728", lw=1.0, ls="--",
                label="held-out value")
    ax.set_xlabel("pixel position")
    ax.set_ylabel("forecast")
    if title:
        ax.set_title(title)
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=_svg_metadata(provenance))
    plt.close(fig)
    return path


def save_validation_plot(path, rows, title=None, provenance=None):
    """Laplace-transform estimates with 3-stderr whiskers against the bound."""
    fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharey=True)
    for ax, side in zip(axes, ("plus", "minus")):
        subset = [r for r in rows if r["side"] == side]
        s = np.array([r["s"] for r in subset])
        lhs = np.array([r["lhs"] for r in subset])
        se = np.array([r["lhs_stderr"] for r in subset])
        rhs = np.array([r["rhs"] for r in subset])
        ax.errorbar(s, lhs, yerr=3 * se, fmt="o", ms=3, capsize=2,
                    color="#08519c", label="estimate +/- 3 stderr")
        ax.plot(s, rhs, color="#d62728", lw=1.2, label="bound")
        ax.set_yscale("log")
        ax.set_xlabel("s")
        ax.set_title(f"{side} direction")
        ax.legend(fontsize=8)
    axes[0].set_ylabel("Laplace transform")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=_svg_metadata(provenance))
    plt.close(fig)
    return path
