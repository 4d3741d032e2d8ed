#!/usr/bin/env python3
"""Render the four equivocation surfaces from a ``aaakey sweep`` CSV.

    aaakey sweep --seed 0 --out surface.csv
    python scripts/plot_surfaces.py surface.csv -o surfaces.png

Needs the ``plot`` extra (matplotlib). The library and CLI never import it.
"""

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

PANELS = [
    ("eps2", r"$\varepsilon_2$"),
    ("eps3", r"$\varepsilon_3$"),
    ("r21", r"$\varepsilon_2/\varepsilon_1$"),
    ("r32", r"$\varepsilon_3/\varepsilon_2$"),
]


def load_grid(path):
    data = np.genfromtxt(path, delimiter=",", names=True)
    alphas = np.unique(data["alpha"])
    mus = np.unique(data["mu"])
    ia = np.searchsorted(alphas, data["alpha"])
    im = np.searchsorted(mus, data["mu"])
    grids = {}
    for key, _ in PANELS:
        z = np.full((len(alphas), len(mus)), np.nan)
        z[ia, im] = data[key]
        grids[key] = z
    return alphas, mus, grids


def plot(alphas, mus, grids, out, dpi=150):
    A, M = np.meshgrid(alphas, mus, indexing="ij")
    fig = plt.figure(figsize=(10, 8))
    for k, (key, label) in enumerate(PANELS):
        ax = fig.add_subplot(2, 2, k + 1, projection="3d")
        ax.plot_surface(A, M, np.ma.masked_invalid(grids[key]), cmap="viridis", linewidth=0, antialiased=True)
        ax.set_xlabel(r"$\alpha$")
        ax.set_ylabel(r"$\mu$")
        ax.set_title(label)
        if key == "r32":
            # ratio below one marks where a third packet lowers equivocation
            ax.contour(A, M, np.ma.masked_invalid(grids[key]), levels=[1.0], colors="r", offset=np.nanmin(grids[key]))
    fig.tight_layout()
    fig.savefig(out, dpi=dpi)
    plt.close(fig)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("csv", help="sweep output (alpha,mu,eps2,eps3,r21,r32)")
    ap.add_argument("-o", "--out", default="surfaces.png")
    ap.add_argument("--dpi", type=int, default=150)
    args = ap.parse_args(argv)
    alphas, mus, grids = load_grid(args.csv)
    plot(alphas, mus, grids, args.out, args.dpi)
    print(f"wrote {args.out} ({len(alphas)}x{len(mus)} grid)")


if __name__ == "__main__":
    main()
