"""Plot the CSVs of one lattice-lab run directory.

    python docs/plot_run.py runs/evolve-<hash> [--save out.png]

Needs pandas and matplotlib; the lattice-lab binaries themselves do not.
"""

import argparse
from pathlib import Path

import matplotlib.pyplot as plt
import pandas as pd


def plot_trajectory(ax, df):
    ax.plot(df["t"], df["m2"], label="<p^2>")
    ax.set_xlabel("t")
    ax.set_ylabel("<p^2>")
    if df["l1_to_w0"].notna().any():
        twin = ax.twinx()
        twin.semilogy(df["t"], df["l1_to_w0"], color="tab:red", label="L1 to w0")
        twin.set_ylabel("L1 to w0")


def plot_field(ax, df):
    ax.semilogy(df["p"], df[df.columns[1]].clip(lower=1e-300))
    ax.set_xlabel("p")
    ax.set_ylabel(df.columns[1])


def plot_decay(ax, df):
    for col in ["abs_A0", "abs_A1", "abs_A2"]:
        ax.loglog(df["p"], df[col], marker="o", label=col)
    ax.set_xlabel("p")
    ax.legend()


def plot_flow(ax, df):
    for p0, orbit in df.groupby("p0"):
        ax.plot(orbit["p"], orbit["w"], marker=".", label=f"p0={p0}")
    ax.set_xlabel("p")
    ax.set_ylabel("w")
    ax.legend()


def plot_residuals(ax, df):
    for col in ["rel_dev_A0", "rel_dev_A1", "rel_dev_A11", "rel_dev_A2"]:
        if df[col].notna().any():
            ax.semilogy(df["p"], df[col].clip(lower=1e-18), ".", label=col)
    ax.set_xlabel("p")
    ax.set_ylabel("relative deviation")
    ax.legend()


PLOTTERS = {
    "trajectory.csv": plot_trajectory,
    "final_field.csv": plot_field,
    "stationary.csv": plot_field,
    "decay.csv": plot_decay,
    "flow.csv": plot_flow,
    "residuals.csv": plot_residuals,
}


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("run_dir", type=Path)
    parser.add_argument("--save", type=Path)
    args = parser.parse_args()

    files = [f for f in sorted(args.run_dir.glob("*.csv")) if f.name in PLOTTERS or "scan" in f.name]
    if not files:
        raise SystemExit(f"no known CSVs in {args.run_dir}")
    fig, axes = plt.subplots(len(files), 1, figsize=(7, 3.5 * len(files)), squeeze=False)
    for ax, f in zip(axes[:, 0], files):
        plotter = PLOTTERS.get(f.name, plot_decay)
        plotter(ax, pd.read_csv(f))
        ax.set_title(f.name)
    fig.tight_layout()
    if args.save:
        fig.savefig(args.save, dpi=150)
    else:
        plt.show()


if __name__ == "__main__":
    main()
