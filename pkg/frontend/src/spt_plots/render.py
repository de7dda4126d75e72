"""Deterministic figure rendering (PNG + SVG side by side)."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Tuple

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .spec import DEFAULT_LABELS, FigureSpec, SpecError, read_table

FIGSIZE = (6.4, 4.2)
DPI = 150

# fixed salt and path-embedded fonts keep the SVG byte-stable across runs
matplotlib.rcParams["svg.hashsalt"] = "spt-plots"
matplotlib.rcParams["svg.fonttype"] = "path"


def _axes(spec: FigureSpec):
    fig, ax = plt.subplots(figsize=FIGSIZE)
    xdef, ydef = DEFAULT_LABELS[spec.kind]
    ax.set_xlabel(spec.xlabel or xdef)
    ax.set_ylabel(spec.ylabel or ydef)
    if spec.title:
        ax.set_title(spec.title)
    return fig, ax


def _draw_dispersion(ax, table):
    lam = np.asarray(table["lam"])
    for i, style in ((0, "-"), (1, "-")):
        ax.plot(lam, table[f"coulomb_re_{i}"], style, color="tab:blue",
                lw=2.0, label="Coulomb" if i == 0 else None)
    for i in (0, 1):
        ax.plot(lam, table[f"dipole_re_{i}"], "--", color="tab:orange",
                lw=1.2, label="dipole" if i == 0 else None)
    ax.legend(loc="upper left")


def _draw_phase_diagram(ax, table):
    n_vals = sorted(set(table["n_atoms"]))
    g_vals = sorted(set(table["g"]))
    grid = np.full((len(n_vals), len(g_vals)), np.nan)
    for n, g, pd in zip(table["n_atoms"], table["g"], table["photon_density"]):
        grid[n_vals.index(n), g_vals.index(g)] = pd
    if np.isnan(grid).any():
        raise SpecError("phase-diagram needs one row per (n_atoms, g) pair")
    mesh = ax.pcolormesh(np.asarray(g_vals), np.asarray(n_vals), grid,
                         shading="nearest", cmap="viridis")
    ax.figure.colorbar(mesh, ax=ax, label="photon density per atom")


def _draw_pole_map(ax, table):
    re = np.asarray(table["re_omega"])
    im = np.asarray(table["im_omega"])
    span_re = max(1.0, np.abs(re).max() * 1.5) if re.size else 1.0
    span_im = max(1.0, im.max() * 1.5) if im.size else 1.0
    ax.axhspan(0.0, span_im, color="tab:red", alpha=0.08,
               label="upper half plane")
    ax.axhline(0.0, color="black", lw=0.8)
    ax.plot(re, im, "x", color="tab:red", ms=9, mew=2, label="poles")
    ax.set_xlim(-span_re, span_re)
    ax.set_ylim(-0.2 * span_im, span_im)
    ax.annotate(f"winding = {len(re)}", xy=(0.03, 0.94),
                xycoords="axes fraction")
    ax.legend(loc="lower right")


def _draw_residuals(ax, table):
    idx = np.asarray(table["field_index"])
    for name, marker in (("residual_decomposition", "o"),
                         ("orthogonality_rel", "s"),
                         ("parseval_rel", "^")):
        ax.semilogy(idx, np.maximum(table[name], 1e-300), marker, ms=4,
                    label=name)
    ax.axhline(1e-10, color="black", lw=0.8, ls=":", label="bound 1e-10")
    ax.legend(loc="upper right", fontsize=8)


_DRAWERS = {
    "dispersion": _draw_dispersion,
    "phase-diagram": _draw_phase_diagram,
    "pole-map": _draw_pole_map,
    "residuals": _draw_residuals,
}


def output_paths(spec: FigureSpec) -> Tuple[Path, Path]:
    base = Path(spec.output_image)
    if base.suffix.lower() in (".png", ".svg"):
        base = base.with_suffix("")
    return base.with_suffix(".png"), base.with_suffix(".svg")


def render(spec: FigureSpec) -> Tuple[Path, Path]:
    """Render one figure; emits PNG and SVG side by side.

    The input CSV is validated before any file is written, so a schema
    mismatch or empty body leaves no partial output behind.
    """
    table = read_table(spec)
    fig, ax = _axes(spec)
    try:
        _DRAWERS[spec.kind](ax, table)
        png, svg = output_paths(spec)
        png.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(png, dpi=DPI)
        fig.savefig(svg, metadata={"Date": None})
    finally:
        plt.close(fig)
    return png, svg


@dataclass(frozen=True)
class BatchResult:
    rendered: List[Tuple[Path, Path]]
    failures: List[Tuple[FigureSpec, str]]

    @property
    def ok(self) -> bool:
        return not self.failures


def batch(specs: Iterable[FigureSpec], fail_fast: bool = False) -> BatchResult:
    """Render every spec in order; per-spec errors are collected."""
    rendered: List[Tuple[Path, Path]] = []
    failures: List[Tuple[FigureSpec, str]] = []
    for spec in specs:
        try:
            rendered.append(render(spec))
        except SpecError as exc:
            failures.append((spec, str(exc)))
            if fail_fast:
                break
    return BatchResult(rendered=rendered, failures=failures)
