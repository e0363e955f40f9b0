"""Publication-style figures from harness outputs.

All figures are pure functions of their input files: fixed layouts, fixed
seeds, deterministic SVG output (fixed hash salt, no embedded dates), so a
rerender is byte-stable.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .io import read_eigenvalues, read_farfield, read_grid, read_run_records

matplotlib.rcParams["svg.hashsalt"] = "helmddm"
matplotlib.rcParams["figure.dpi"] = 110

KINDS = ("eigenvalues", "pade-sweep", "subdomain-scaling", "near-field",
         "iteration-heatmap", "far-field")


@dataclass
class PlotSpec:
    kind: str
    inputs: list
    output: str
    title: str = ""
    cluster_radius: float = 0.15

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; known: {KINDS}")


def _save(fig, output):
    root, ext = os.path.splitext(output)
    written = []
    for suffix in ((ext,) if ext else (".svg", ".png")):
        path = root + suffix
        if suffix == ".svg":
            fig.savefig(path, metadata={"Date": None})
        else:
            fig.savefig(path)
        written.append(path)
    plt.close(fig)
    return written


def plot_eigenvalues(spec):
    lam = read_eigenvalues(spec.inputs[0])
    inside = np.abs(lam - 1.0) < spec.cluster_radius
    fig, ax = plt.subplots(figsize=(5.2, 4.2))
    ax.scatter(lam[~inside].real, lam[~inside].imag, s=8, c="#c44e52",
               label="outliers", zorder=3)
    ax.scatter(lam[inside].real, lam[inside].imag, s=8, c="#4c72b0",
               label=f"|$\\lambda$-1|<{spec.cluster_radius:g} "
                     f"({100 * inside.mean():.0f}%)", zorder=2)
    ax.plot([1.0], [0.0], "k+", markersize=10, zorder=4)
    th = np.linspace(0, 2 * np.pi, 181)
    ax.plot(1 + spec.cluster_radius * np.cos(th),
            spec.cluster_radius * np.sin(th), "k--", linewidth=0.8)
    ax.set_xlabel("Re $\\lambda$")
    ax.set_ylabel("Im $\\lambda$")
    ax.set_title(spec.title or "iteration-operator spectrum")
    ax.legend(loc="best", fontsize=8)
    ax.set_aspect("equal")
    fig.tight_layout()
    return _save(fig, spec.output)


def plot_pade_sweep(spec):
    rows = read_run_records(spec.inputs[0])
    orders, counts, baseline = [], [], None
    for r in rows:
        if r["case"] == "baseline":
            baseline = r["iterations"]
        elif r["case"].startswith("p"):
            orders.append(int(r["case"][1:]))
            counts.append(r["iterations"])
    order = np.argsort(orders)
    fig, ax = plt.subplots(figsize=(5.2, 3.8))
    ax.semilogx(np.array(orders)[order], np.array(counts)[order], "o-",
                base=2, label="rational square-root operator")
    if baseline is not None:
        ax.axhline(baseline, color="#c44e52", linestyle="--",
                   label=f"multiplier baseline ({baseline})")
    ax.set_xlabel("rational order p")
    ax.set_ylabel("GMRES iterations")
    ax.set_title(spec.title or "iterations vs rational order")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, spec.output)


def plot_subdomain_scaling(spec):
    rows = read_run_records(spec.inputs[0])
    series = {}
    for r in rows:
        tag = r["extra"].split("=")[-1] if r["extra"] else "?"
        series.setdefault(r["family"], []).append((int(tag), r["iterations"]))
    fig, ax = plt.subplots(figsize=(5.2, 3.8))
    for fam, pts in sorted(series.items()):
        pts = sorted(pts)
        ax.plot([p[0] for p in pts], [p[1] for p in pts], "o-", label=fam)
    ax.set_xlabel("subdomains")
    ax.set_ylabel("GMRES iterations")
    ax.set_title(spec.title or "iteration growth with subdomain count")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, spec.output)


def plot_near_field(spec):
    grid, window = read_grid(spec.inputs[0])
    fig, ax = plt.subplots(figsize=(5.0, 4.4))
    masked = np.ma.masked_invalid(np.real(grid))
    cmap = plt.get_cmap("RdBu_r").copy()
    cmap.set_bad("#f0f0f0")                      # masked shell rendered as gap
    vmax = float(np.nanmax(np.abs(masked)))
    im = ax.imshow(masked, origin="lower", extent=window, cmap=cmap,
                   vmin=-vmax, vmax=vmax)
    fig.colorbar(im, ax=ax, shrink=0.85, label="Re(total field)")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(spec.title or "near field")
    fig.tight_layout()
    return _save(fig, spec.output)


def plot_iteration_heatmap(spec):
    rows = read_run_records(spec.inputs[0])
    cases = sorted({r["case"] for r in rows})
    solvers = sorted({(r["solver"], r["family"]) for r in rows})
    data = np.full((len(solvers), len(cases)), np.nan)
    for r in rows:
        i = solvers.index((r["solver"], r["family"]))
        j = cases.index(r["case"])
        data[i, j] = r["iterations"]
    fig, ax = plt.subplots(figsize=(6.0, 0.6 * len(solvers) + 1.6))
    im = ax.imshow(np.log10(data), cmap="viridis", aspect="auto")
    ax.set_xticks(range(len(cases)), cases, rotation=45, ha="right", fontsize=7)
    ax.set_yticks(range(len(solvers)),
                  [f"{s}:{f}" if s == "ddm" else s for s, f in solvers], fontsize=7)
    for i in range(len(solvers)):
        for j in range(len(cases)):
            if np.isfinite(data[i, j]):
                ax.text(j, i, int(data[i, j]), ha="center", va="center",
                        fontsize=6, color="w")
    fig.colorbar(im, ax=ax, shrink=0.8, label="log10 iterations")
    ax.set_title(spec.title or "iteration counts")
    fig.tight_layout()
    return _save(fig, spec.output)


def plot_far_field(spec):
    angles, values = read_farfield(spec.inputs[0])
    fig, ax = plt.subplots(figsize=(4.6, 4.6),
                           subplot_kw={"projection": "polar"})
    ax.plot(angles, np.abs(values), linewidth=1.0)
    ax.set_title(spec.title or "far-field magnitude")
    fig.tight_layout()
    return _save(fig, spec.output)


RENDERERS = {
    "eigenvalues": plot_eigenvalues,
    "pade-sweep": plot_pade_sweep,
    "subdomain-scaling": plot_subdomain_scaling,
    "near-field": plot_near_field,
    "iteration-heatmap": plot_iteration_heatmap,
    "far-field": plot_far_field,
}


def plot(spec):
    """Render one figure; returns the written file paths."""
    for path in spec.inputs:
        if not os.path.exists(path):
            raise FileNotFoundError(path)
    return RENDERERS[spec.kind](spec)
