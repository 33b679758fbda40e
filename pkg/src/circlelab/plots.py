"""Figure rendering for the report path: one or two PNGs per experiment,
written next to the CSV/JSON artifacts."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _save(fig, out_dir, name):
    path = os.path.join(out_dir, name)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def _measure_axes(ax, measure, label=None, color="tab:blue"):
    ax.fill_between(measure.bin_centers, 0.0, measure.mass * measure.bins, step="mid",
                    alpha=0.6, color=color, label=label)
    ax.set_xlabel(r"$\theta$")
    ax.set_ylabel("density")
    ax.set_xlim(0, 1)


def plot_lyapunov(data, out_dir):
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.2))
    ax1.hist(data["per_path"], bins=30, color="tab:blue", alpha=0.8)
    r = data["results"]
    ax1.axvline(r["value"], color="k", lw=1.2, label=f"mean {r['value']:.4f}")
    ax1.axvline(r["formula_value"], color="tab:red", ls="--", lw=1.2,
                label=f"formula {r['formula_value']:.4f}")
    ax1.set_xlabel(r"per-path $L_n/n$")
    ax1.set_ylabel("count")
    ax1.legend(fontsize=8)
    _measure_axes(ax2, data["stationary"], label="stationary")
    ax2.legend(fontsize=8)
    return [_save(fig, out_dir, "lyapunov.png")]


def plot_stationary(data, out_dir):
    fig, ax = plt.subplots(figsize=(6, 3.2))
    _measure_axes(ax, data["stationary"], label="stationary")
    ax.legend(fontsize=8)
    return [_save(fig, out_dir, "stationary.png")]


def plot_dichotomy(data, out_dir):
    verdict = data["verdict"]
    fig, ax = plt.subplots(figsize=(6, 3.2))
    if data["measure"] is not None:
        _measure_axes(ax, data["measure"], label="candidate measure")
        ax.legend(fontsize=8)
    ax.set_title(f"verdict: {verdict.verdict}", fontsize=10)
    return [_save(fig, out_dir, "dichotomy.png")]


def plot_contract(data, out_dir):
    certs = data["certs"]
    fig, ax = plt.subplots(figsize=(6.5, 3.6))
    shown = 0
    for c in certs:
        if shown >= 15:
            break
        d = np.asarray(c.diameters)
        pos = d > 0
        n = np.arange(d.size)[pos]
        ax.plot(n, np.log(d[pos]), lw=0.6,
                color="tab:blue" if c.valid else "tab:red", alpha=0.5)
        shown += 1
    c0 = certs[0]
    n = np.arange(c0.diameters.size)
    if np.isfinite(c0.C):
        ax.plot(n, np.log(c0.C) - data["alpha"] * n + np.log(c0.diameters[0]),
                "k--", lw=1.2, label=r"certificate bound")
        ax.legend(fontsize=8)
    ax.set_xlabel("n")
    ax.set_ylabel(r"$\log |F_n(J)|$")
    return [_save(fig, out_dir, "contract.png")]


def plot_basin(data, out_dir):
    est = data["estimate"]
    fig, ax = plt.subplots(figsize=(5, 3.2))
    xs = np.arange(len(est.attractors))
    p = est.probabilities
    err = np.vstack([p - est.ci_low, est.ci_high - p])
    ax.bar(xs, p, yerr=np.abs(err), capsize=4, color="tab:blue", alpha=0.8)
    ax.bar([len(xs)], [est.unresolved], color="tab:gray", alpha=0.8)
    ax.set_xticks(list(xs) + [len(xs)])
    ax.set_xticklabels([f"{a:.3f}" for a in est.attractors] + ["unresolved"], fontsize=8)
    ax.set_ylabel("probability")
    return [_save(fig, out_dir, "basin.png")]


def plot_hyperbolic(data, out_dir):
    rows = data["rows"]
    sample = data["sample"]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.2))
    ks = [r["kappa"] for r in rows]
    vals = [r["value"] for r in rows]
    errs = [3 * r["std_error"] for r in rows]
    ax1.errorbar(ks, vals, yerr=errs, fmt="o", capsize=4, label=r"estimate $\pm 3$SE")
    grid = np.linspace(min(ks), max(ks), 50)
    ax1.plot(grid, grid - 1.0, "k--", lw=1, label=r"$\kappa - 1$")
    ax1.set_xlabel(r"$\kappa$")
    ax1.set_ylabel("exponent")
    ax1.legend(fontsize=8)
    with np.errstate(over="ignore", invalid="ignore"):
        y = sample.y
    finite = np.isfinite(sample.x) & np.isfinite(y)
    ax2.plot(sample.x[finite], y[finite], lw=0.5)
    ax2.set_xlabel("x")
    ax2.set_ylabel("y")
    ax2.set_yscale("log")
    return [_save(fig, out_dir, "hyperbolic.png")]


def plot_xi(data, out_dir):
    rep = data["report"]
    fig, ax = plt.subplots(figsize=(6, 3.2))
    if rep.mode == "stationary":
        width = rep.bin_centers[1] - rep.bin_centers[0]
        ax.bar(rep.bin_centers, rep.histogram / width, width=width, alpha=0.6,
               label="empirical")
        ax.plot(rep.bin_centers, rep.density / width, "k-", lw=1.2, label="stationary density")
        ax.set_xlabel(r"$\xi$")
        ax.set_ylabel("density")
        ax.legend(fontsize=8)
    else:
        finite = rep.exit_times[np.isfinite(rep.exit_times)]
        if finite.size:
            ax.hist(finite, bins=20, color="tab:red", alpha=0.8)
        ax.set_xlabel(f"first exit time above |xi| = {rep.escape_threshold}")
        ax.set_ylabel("count")
    return [_save(fig, out_dir, "xi.png")]


def plot_lln(data, out_dir):
    rec = data["record"]
    fig, ax = plt.subplots(figsize=(6, 3.2))
    n = np.arange(1, rec.n + 1)
    ax.plot(n, rec.ratios, lw=0.8, label=r"$K_n/n$")
    ax.axhline(data["c"], color="tab:red", ls="--", lw=1.2, label="Monte Carlo c")
    final = data["results"]["final_ratio"]
    hw = data["results"]["band_halfwidth"]
    ax.axhspan(final - hw, final + hw, color="tab:gray", alpha=0.25, label="band")
    ax.set_xlabel("n")
    ax.set_ylabel(r"$K_n/n$")
    ax.legend(fontsize=8)
    return [_save(fig, out_dir, "lln.png")]


PLOTTERS = {
    "lyapunov": plot_lyapunov,
    "stationary": plot_stationary,
    "dichotomy": plot_dichotomy,
    "contract": plot_contract,
    "basin": plot_basin,
    "hyperbolic": plot_hyperbolic,
    "xi": plot_xi,
    "lln": plot_lln,
}
