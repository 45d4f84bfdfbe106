"""Figures for the CLI reports. Rendered off-screen straight to files."""

from __future__ import annotations

import math
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLES = {math.inf: "-", 10.0: "-.", 5.0: "--"}
MARKERS = {math.inf: None, 10.0: "+", 5.0: "o"}


def _finish(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_rate_curve(rows: list[dict], path):
    """Rate versus half-channel loss, one panel per lattice and amplification mode."""
    panels = sorted({(r["lattice"], r["amp"]) for r in rows})
    fig, axes = plt.subplots(len(panels), 1, figsize=(6.4, 3.4 * len(panels)), squeeze=False)
    cmap = plt.get_cmap("viridis")
    n_max = max(r["N"] for r in rows)
    for ax, (lattice, amp) in zip(axes[:, 0], panels):
        curves = defaultdict(list)
        bound = {}
        for r in rows:
            if (r["lattice"], r["amp"]) != (lattice, amp):
                continue
            curves[(r["N"], r["squeezing_db"])].append((r["half_loss_db"], r["rate"]))
            bound[r["half_loss_db"]] = r["capacity_q2"]
        for (n, sq), pts in sorted(curves.items()):
            pts.sort()
            x, y = zip(*pts)
            ax.plot(
                x,
                y,
                STYLES.get(sq, ":"),
                marker=MARKERS.get(sq),
                markevery=max(1, len(x) // 8),
                color=cmap(n / (n_max + 1)),
                label=f"N={n}" if sq == math.inf or len(curves) <= 10 else None,
            )
        bx = sorted(k for k in bound if k > 0)
        ax.plot(bx, [bound[k] for k in bx], ":", color="black", label="$-\\log_2(1-\\sqrt{\\eta})$")
        ax.set_xlabel("half-channel loss [dB]")
        ax.set_ylabel("ebits / channel use")
        ax.set_title(f"{lattice} lattice, {amp} amplification")
        ax.set_ylim(0, n_max + 1)
        ax.legend(fontsize=7, ncol=2)
    return _finish(fig, path)


def plot_asymptote(rows: list[dict], path):
    fig, ax = plt.subplots(figsize=(6.4, 4))
    colors = {"sq": "tab:red", "hex": "tab:blue"}
    for lattice in sorted({r["lattice"] for r in rows}):
        sel = sorted((r for r in rows if r["lattice"] == lattice), key=lambda r: r["eps"])
        eps = [r["eps"] for r in sel]
        ax.semilogx(eps, [r["i_lb"] for r in sel], color=colors.get(lattice), label=f"asymptote ({lattice})")
        ax.semilogx(eps, [r["rate_pow2"] for r in sel], "o", ms=3, color=colors.get(lattice), label=f"exact rate, d=2^N ({lattice})")
    sel = sorted(rows, key=lambda r: r["eps"])
    ax.semilogx([r["eps"] for r in sel], [r["q2"] for r in sel], ":", color="black", label="$Q_2(\\sqrt{\\eta})$")
    ax.set_xlabel("$\\varepsilon = 1-\\sqrt{\\eta}$")
    ax.set_ylabel("ebits / channel use")
    ax.invert_xaxis()
    ax.legend(fontsize=7)
    return _finish(fig, path)


def plot_csum(rows: list[dict], path):
    fig, ax = plt.subplots(figsize=(6.4, 4))
    groups = defaultdict(list)
    for r in rows:
        groups[(r["N"], r["zeta"])].append((r["C"], r["fidelity"]))
    for (n, zeta), pts in sorted(groups.items()):
        pts.sort()
        x, y = zip(*pts)
        ax.semilogx(x, y, marker="o", ms=3, label=f"N={n}, zeta={zeta:g}")
    ax.set_xlabel("cooperativity C")
    ax.set_ylabel("gate fidelity")
    ax.set_ylim(0, 1.02)
    ax.legend(fontsize=7)
    return _finish(fig, path)


def plot_swap_mc(rows: list[dict], path):
    keys = sorted({(r["lattice"], r["N"], r["sigma2_eff"]) for r in rows})
    fig, axes = plt.subplots(len(keys), 1, figsize=(6.4, 2.6 * len(keys)), squeeze=False)
    for ax, key in zip(axes[:, 0], keys):
        sel = [r for r in rows if (r["lattice"], r["N"], r["sigma2_eff"]) == key and r["axis"] == "x"]
        ks = [r["k"] for r in sel]
        ax.bar(ks, [r["empirical"] for r in sel], color="tab:gray", label="Monte Carlo")
        ax.plot(ks, [r["analytic"] for r in sel], "o", color="tab:red", label="analytic")
        ax.set_yscale("log")
        ax.set_xlabel("logical shift k")
        ax.set_title(f"{key[0]}, N={key[1]}, sigma2={key[2]:g}", fontsize=9)
        ax.legend(fontsize=7)
    return _finish(fig, path)
