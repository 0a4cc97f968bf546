"""File-rendered matplotlib figures for the CLI report paths.

Every function writes one PNG next to the delimited output it illustrates
and returns the path.  Rendering uses the Agg backend so the CLI stays
headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_gram_figure(gram, path) -> str:
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    im = ax.imshow(gram.entries, cmap="RdBu_r", vmin=-1.0, vmax=1.0)
    fig.colorbar(im, ax=ax, label="inner product")
    ax.set_title(f"word Gram matrix, n={gram.n}, q={gram.q:g}")
    ax.set_xlabel("ordering index")
    ax.set_ylabel("ordering index")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def save_class_weight_figure(n, weights, path) -> str:
    """Bar chart of symmetry-class weights keyed by partition label."""
    labels = list(weights.keys())
    values = [weights[k] for k in labels]
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    ax.bar(range(len(values)), values, color="#4878d0")
    ax.set_xticks(range(len(values)))
    ax.set_xticklabels(labels)
    ax.set_xlabel("partition")
    ax.set_ylabel("weight")
    ax.set_title(f"symmetry-class weights, n={n}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def save_catalog_figure(catalog, path) -> str:
    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    allowed = catalog.allowed_lines()
    forbidden = [l for l in catalog.forbidden_lines() if l.strength > 0]
    ax.vlines(
        [l.position for l in allowed],
        0.0,
        [l.strength for l in allowed],
        color="#2a6fbb",
        label="allowed",
    )
    if forbidden:
        ax.vlines(
            [l.position for l in forbidden],
            0.0,
            [l.strength for l in forbidden],
            color="#d1495b",
            label=f"forbidden (beta2_half={catalog.beta2_half:g})",
        )
    ax.set_xlabel("wavenumber (cm$^{-1}$)")
    ax.set_ylabel("relative strength")
    ax.set_title(catalog.molecule.name)
    ax.legend(loc="upper left")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def save_spectrum_figure(spectrum, path) -> str:
    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    ax.plot(spectrum.grid, spectrum.absorbance, lw=0.6, color="#333333")
    ax.set_xlabel("wavenumber (cm$^{-1}$)")
    ax.set_ylabel("absorbance")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def save_fit_figure(spectrum, model, scan, path) -> str:
    """Data/model overlay plus residuals with forbidden positions marked."""
    predicted = model.predict(spectrum.grid)
    fig, (ax1, ax2) = plt.subplots(
        2, 1, figsize=(7.0, 5.5), sharex=True, height_ratios=[2, 1]
    )
    ax1.plot(spectrum.grid, spectrum.absorbance, lw=0.5, color="#888888", label="data")
    ax1.plot(spectrum.grid, predicted, lw=0.8, color="#2a6fbb", label="allowed-line model")
    ax1.set_ylabel("absorbance")
    ax1.legend(loc="upper right")
    ax2.plot(spectrum.grid, model.residuals, lw=0.5, color="#333333")
    for est in scan:
        color = "#999999" if est.blended else "#d1495b"
        ax2.axvline(est.line.position, color=color, lw=0.6, ls="--")
    ax2.set_xlabel("wavenumber (cm$^{-1}$)")
    ax2.set_ylabel("residual")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def save_calibration_figure(coverage_report, path) -> str:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    limits = np.asarray(coverage_report.upper_limits)
    ax.hist(limits, bins=30, color="#4878d0", alpha=0.85)
    ax.axvline(
        coverage_report.median_upper_limit,
        color="#333333",
        ls="--",
        label=f"median {coverage_report.median_upper_limit:.2e}",
    )
    if coverage_report.true_beta2_half > 0:
        ax.axvline(
            coverage_report.true_beta2_half,
            color="#d1495b",
            label=f"true {coverage_report.true_beta2_half:.2e}",
        )
    ax.set_xlabel("upper limit on beta2_half")
    ax.set_ylabel("trials")
    ax.set_title(
        f"coverage {coverage_report.coverage:.3f} over {coverage_report.n_trials} trials"
    )
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)
