#!/usr/bin/env python3
"""Overall and per-class accuracy versus number of included classes."""

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from schemas import SchemaError, load_summary_csv


def render(class_cols, rows, out_path, dpi):
    rows = sorted(rows, key=lambda r: r["n_classes"])
    x = [r["n_classes"] for r in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(x, [r["OA"] for r in rows], marker="o", linewidth=2, color="black",
            label="overall")
    for cls in class_cols:
        points = [(r["n_classes"], r["acc"][cls]) for r in rows if r["acc"][cls] is not None]
        if points:
            ax.plot([p[0] for p in points], [p[1] for p in points],
                    marker=".", alpha=0.7, label=cls)
    ax.set_xlabel("number of classes")
    ax.set_ylabel("accuracy")
    ax.set_ylim(0, 1.02)
    ax.set_xticks(x)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(out_path, dpi=dpi)
    plt.close(fig)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--in", dest="input", required=True, help="summary CSV")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--dpi", type=int, default=150)
    args = parser.parse_args(argv)
    try:
        class_cols, rows = load_summary_csv(args.input)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    render(class_cols, rows, args.out, args.dpi)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
