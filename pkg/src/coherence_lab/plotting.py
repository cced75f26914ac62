"""PNG renderings of experiment records (matplotlib, Agg backend)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _col(records, key):
    return np.array([r.parameters[key] if key in r.parameters else r.values[key] for r in records])


def plot_fig1(records, path):
    a = _col(records, "a")
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(a, _col(records, "abs_rhs_same"), color="black", label="same sign")
    ax.plot(a, _col(records, "abs_rhs_diff"), color="red", label="different sign")
    ax.axhline(1.0, ls="--", color="grey", lw=0.8)
    ax.set_xlabel("a")
    ax.set_ylabel("|rhs|")
    ax.set_ylim(0, 3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def plot_fig2(records, path):
    rows = [r for r in records if r.experiment_id == "fig2"]
    hist = [r for r in records if r.experiment_id == "fig2_hist"]
    fams = sorted({r.parameters["family"] for r in rows})
    fig, axes = plt.subplots(2, len(fams), figsize=(4 * len(fams), 6), squeeze=False)
    for j, fam in enumerate(fams):
        sub = [r for r in rows if r.parameters["family"] == fam]
        p = _col(sub, "p")
        ax = axes[0, j]
        ax.plot(p, _col(sub, "b_d"), label="B_d")
        ax.plot(p, _col(sub, "o_d"), label="O_d")
        ax.plot(p, _col(sub, "c_l1_max"), "o", ms=3, label="MC max")
        ax.set_title(fam)
        ax.set_xlabel("p")
        ax.legend(fontsize=7)
        hs = [r for r in hist if r.parameters["family"] == fam]
        ax = axes[1, j]
        if hs:
            left = _col(hs, "bin_left")
            width = _col(hs, "bin_right") - left
            ax.bar(left, _col(hs, "count"), width=width, align="edge")
            o = [r.values["o_d"] for r in sub if np.isclose(r.parameters["p"], 0.4)]
            if o:
                ax.axvline(o[0], color="red", lw=0.8)
            ax.set_xlabel("l1 coherence at p = 0.4")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def plot_rank2(records, path):
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.semilogy(_col(records, "lambda0"), _col(records, "deviation"), "o-", ms=3)
    ax.set_xlabel("lambda_0")
    ax.set_ylabel("(B_d - max) / B_d")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


PLOTTERS = {"fig1": plot_fig1, "fig2": plot_fig2, "rank2": plot_rank2}


def plot_experiment(experiment, records, out_dir) -> Path | None:
    fn = PLOTTERS.get(experiment)
    if fn is None:
        return None
    if experiment == "fig1":
        records = [r for r in records if r.experiment_id == "fig1"]
    return fn(records, Path(out_dir) / f"{experiment}.png")
