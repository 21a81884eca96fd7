#!/usr/bin/env python3
"""Per-class mean +/- 1 std time-series envelopes, one panel per index."""

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from schemas import SchemaError, load_separability_csv

CLASS_COLORS = {
    "maize": "tab:orange",
    "cassava": "tab:green",
    "common_bean": "tab:purple",
}


def render(table, out_path, dpi):
    indices = sorted(table)
    fig, axes = plt.subplots(
        1, len(indices), figsize=(4.0 * len(indices), 3.2), squeeze=False, sharex=True
    )
    for ax, index in zip(axes[0], indices):
        for cls, entries in sorted(table[index].items()):
            dates = [e[0] for e in entries]
            means = [e[1] for e in entries]
            stds = [e[2] for e in entries]
            color = CLASS_COLORS.get(cls)
            ax.plot(dates, means, label=cls, color=color)
            ax.fill_between(
                dates,
                [m - s for m, s in zip(means, stds)],
                [m + s for m, s in zip(means, stds)],
                alpha=0.2,
                color=color,
            )
        ax.set_title(index)
        ax.set_xlabel("date index")
    axes[0][0].set_ylabel("value")
    axes[0][0].legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=dpi)
    plt.close(fig)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--in", dest="input", required=True, help="separability CSV")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--dpi", type=int, default=150)
    args = parser.parse_args(argv)
    try:
        table = load_separability_csv(args.input)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    render(table, args.out, args.dpi)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
