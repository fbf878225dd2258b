"""Plot one or more `mkbell sweep` CSV files, one panel per channel.

usage: python3 scripts/plot_sweep.py OUT.png FILE.csv [FILE.csv ...]
"""
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def main(out, paths):
    df = pd.concat(pd.read_csv(p) for p in paths)
    channels = sorted(df.channel.unique())
    fig, axes = plt.subplots(1, len(channels), figsize=(4 * len(channels), 3.5), sharey=True, squeeze=False)
    for ax, channel in zip(axes[0], channels):
        for n, g in df[df.channel == channel].groupby("n"):
            g = g.sort_values("p")
            ax.plot(g.p, g.max_bell, marker=".", label=f"n={n}")
        ax.axhline(1.0, color="k", lw=0.8, ls="--")
        ax.set(title=channel, xlabel="p")
        ax.legend()
    axes[0][0].set_ylabel("max Bell value")
    fig.tight_layout()
    fig.savefig(out, dpi=150)


if __name__ == "__main__":
    if len(sys.argv) < 3:
        sys.exit(__doc__)
    main(sys.argv[1], sys.argv[2:])
