"""Matplotlib renderers for the tables the CLI writes.

Each function takes the same columns that go into the CSV and writes one
figure file. The Agg backend is forced so rendering works headless.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed metadata keeps repeated renders byte-stable for PNG output
_SAVE = {"dpi": 120, "metadata": {"Software": None}}


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, **_SAVE)
    plt.close(fig)


def plot_ratio_grid(k, lam, ratio, path):
    """Surface of ``T*/T_DC`` over ``(k, lambda)``, drawn as a filled contour."""
    k, lam, ratio = map(np.asarray, (k, lam, ratio))
    ks, ls = np.unique(k), np.unique(lam)
    z = ratio.reshape(len(ks), len(ls))
    fig, ax = plt.subplots(figsize=(5, 4))
    cs = ax.contourf(ls, ks, z, levels=30, cmap="viridis")
    ax.contour(ls, ks, z, levels=[1.0], colors="w", linewidths=1.2)
    fig.colorbar(cs, ax=ax, label=r"$T_*/T_{DC}$")
    ax.set_xlabel(r"$\lambda$")
    ax.set_ylabel(r"$k = \mathcal{E}/\mathcal{A}$")
    _finish(fig, path)


def plot_curves(x, curves, path, xlabel, ylabel, logx=False, logy=False, hline=None):
    """Overlay several named curves sharing one x axis."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for label, y in curves.items():
        y = np.asarray(y, dtype=float)
        ax.plot(x, np.where(np.isfinite(y), y, np.nan), label=label)
    if hline is not None:
        ax.axhline(hline, color="k", lw=0.8, ls=":")
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if len(curves) > 1:
        ax.legend(frameon=False)
    _finish(fig, path)
