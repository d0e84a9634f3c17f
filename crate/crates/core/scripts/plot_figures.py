"""Plot the CSV artifacts written by `ssh-hoti reproduce <id>`.

    python scripts/plot_figures.py out/fig1 out/fig2 out/fig4 out/entanglement
"""

import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def bands(root: Path):
    regimes = sorted(p for p in root.iterdir() if (p / "bands.csv").exists())
    fig, axes = plt.subplots(1, len(regimes), figsize=(4 * len(regimes), 3.5), sharey=True)
    for ax, reg in zip(axes, regimes):
        df = pd.read_csv(reg / "bands.csv")
        for col in ["E1", "E2", "E3", "E4"]:
            ax.plot(df["distance"], df[col], color="k", lw=1)
        ax.set_title(reg.name)
        ax.set_xlabel("path length")
    axes[0].set_ylabel("E (1/mm)")
    return fig


def spectral_flow(root: Path):
    df = pd.read_csv(root / "spectral_flow.csv")
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for col in ["E_c1", "E_c2", "E_c3", "E_c4"]:
        ax.plot(df["ratio"], df[col], ".", ms=3, color="tab:red")
    ax.set_xlabel("t_a / t_b")
    ax.set_ylabel("corner-state energy")
    return fig


def finite_gap(root: Path):
    df = pd.read_csv(root / "finite_gap.csv")
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for i in range(1, 5):
        ax.plot(df["ratio"], df[f"share_{i}"], "o-", label=f"corner {i}")
    ax.axhline(0.25, color="gray", ls="--")
    ax.set_xlabel("t_a / t_b")
    ax.set_ylabel("corner share at best z")
    ax.legend()
    return fig


def entanglement(root: Path):
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.5))
    for sub in sorted(p for p in root.iterdir() if (p / "entanglement.csv").exists()):
        df = pd.read_csv(sub / "entanglement.csv")
        for name, g in df.groupby("scenario"):
            axes[0].plot(g["z"], g["concurrence"], "o-", label=f"{sub.name}: {name}")
            axes[1].plot(g["z"], g["purity"], "o-")
    axes[0].set_ylabel("concurrence")
    axes[1].set_ylabel("purity")
    for ax in axes:
        ax.set_xlabel("z (mm)")
    axes[0].legend(fontsize=6)
    return fig


PLOTS = {
    "band_inversion.csv": bands,
    "spectral_flow.csv": spectral_flow,
    "finite_gap.csv": finite_gap,
    "identity": entanglement,
}


def main(dirs):
    for d in map(Path, dirs):
        for marker, plot in PLOTS.items():
            if (d / marker).exists():
                fig = plot(d)
                out = d / f"{plot.__name__}.png"
                fig.tight_layout()
                fig.savefig(out, dpi=150)
                print(out)


if __name__ == "__main__":
    main(sys.argv[1:])
