"""Panel builders: one matplotlib figure per panel of each study figure.

Every builder consumes Dataset objects validated against the requested
figure (the CSV metadata must name the matching experiment) and performs no
numerics beyond axis transforms. Rendering is deterministic: fixed figure
geometry, a fixed SVG hash salt, and no date metadata in the output files.
"""

from __future__ import annotations

import glob
import os
from dataclasses import dataclass
from typing import Callable, Iterator

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .csvio import Dataset, SchemaError, read_dataset

__all__ = ["PlotSpec", "FIGURES", "build_panels", "render"]

plt.rcParams["svg.hashsalt"] = "kpo-plot"
plt.rcParams["figure.figsize"] = (4.8, 3.6)

_DIVERGING = "RdBu_r"


@dataclass(frozen=True)
class PlotSpec:
    figure: str
    experiment: str
    patterns: tuple[str, ...]
    builder: Callable


def _load(spec: PlotSpec, in_dir: str) -> list[Dataset]:
    paths: list[str] = []
    for pattern in spec.patterns:
        hits = sorted(glob.glob(os.path.join(in_dir, pattern)))
        if not hits:
            raise SchemaError(f"{spec.figure}: no dataset matches {pattern!r} in {in_dir}")
        paths.extend(hits)
    sets = [read_dataset(p) for p in paths]
    for ds in sets:
        got = ds.meta.get("experiment")
        if got != spec.experiment:
            raise SchemaError(
                f"{ds.path}: metadata says experiment {got!r}, figure needs {spec.experiment!r}"
            )
    return sets


def _line_panel(ds: Dataset, xcol: str, ycols: list[str], labels: list[str], title: str,
                xlabel: str, ylabel: str, yscale: str = "linear", xscale: str = "linear"):
    fig, ax = plt.subplots()
    x = ds.col(xcol)
    for ycol, label in zip(ycols, labels):
        ax.plot(x, ds.col(ycol), label=label)
    ax.set_xscale(xscale)
    ax.set_yscale(yscale)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    if len(ycols) > 1:
        ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def _heat_panel(x, y, z, title, xlabel, ylabel, cmap="viridis", symmetric=False):
    fig, ax = plt.subplots()
    nx, ny = len(np.unique(x)), len(np.unique(y))
    xs = np.unique(x)
    ys = np.unique(y)
    grid = z.reshape(ny, nx) if z.size == nx * ny else None
    if grid is None:
        raise SchemaError(f"panel {title!r}: values do not form a {ny}x{nx} grid")
    kw = {}
    if symmetric:
        lim = float(np.max(np.abs(grid))) or 1.0
        kw = dict(vmin=-lim, vmax=lim)
    pm = ax.pcolormesh(xs, ys, grid, cmap=cmap, shading="auto", **kw)
    fig.colorbar(pm, ax=ax)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    fig.tight_layout()
    return fig


# ---------------------------------------------------------------------------
# builders (each yields (panel_name, figure))


def _build_ramp_relaxation(sets) -> Iterator:
    (ds,) = sets
    yield "infidelity", _line_panel(
        ds, "t", ["infidelity"], [""], "relaxation infidelity", "t [1/K]",
        "1 - F", yscale="log",
    )
    yield "populations", _line_panel(
        ds, "t", ["pop00", "pop11"], ["level 0", "level 1"], "diagonal elements",
        "t [1/K]", "population",
    )
    yield "offdiagonal", _line_panel(
        ds, "t", ["offdiag_abs"], [""], "off-diagonal element", "t [1/K]", "|rho01|",
    )


def _build_gamma_maps(sets) -> Iterator:
    for ds in sets:
        tag = "rho00=0" if "rho0" in os.path.basename(ds.path) else "rho00=1"
        for part, cmap in (("re_gamma", _DIVERGING), ("im_gamma", _DIVERGING)):
            yield f"{part}_{tag.replace('=', '')}", _heat_panel(
                ds.col("omega_in"), ds.col("p"), ds.col(part),
                f"{part} ({tag})", "omega_in [K]", "p [K]", cmap=cmap, symmetric=True,
            )


def _build_gamma_complex_plane(sets) -> Iterator:
    for ds in sets:
        name = os.path.basename(ds.path).replace("gamma_complex_plane_", "").replace(".csv", "")
        fig, ax = plt.subplots(figsize=(4.2, 4.2))
        key = "rho00" if "sweep" in name else "domega"
        for val in np.unique(ds.col(key)):
            sel = ds.col(key) == val
            re, im = ds.col("re_gamma")[sel], ds.col("im_gamma")[sel]
            if "sweep" in name:
                ax.plot(re, im, label=f"{key}={val:g}")
            else:
                ax.plot(re, im, "o-", ms=4, label=f"{key}={val:g}")
        ax.set_xlabel("Re Gamma")
        ax.set_ylabel("Im Gamma")
        ax.set_title(name)
        ax.set_aspect("equal", adjustable="datalim")
        ax.legend(fontsize=7)
        fig.tight_layout()
        yield name, fig


def _build_sensitivity_vs_win(sets) -> Iterator:
    for ds in sets:
        name = os.path.basename(ds.path).replace(".csv", "")
        fig, ax = plt.subplots()
        for kex in np.unique(ds.col("kappa_ex")):
            sel = ds.col("kappa_ex") == kex
            ax.plot(ds.col("omega_in")[sel], ds.col("sensitivity")[sel], label=f"kex={kex:g}")
        ax.set_xlabel("omega_in [K]")
        ax.set_ylabel("|Gamma(1) - Gamma(0)|")
        ax.set_title(name)
        ax.legend(fontsize=8)
        fig.tight_layout()
        yield name.replace("sensitivity_vs_win_", ""), fig


def _build_sensitivity_vs_p(sets) -> Iterator:
    for ds in sets:
        name = os.path.basename(ds.path).replace(".csv", "").replace("sensitivity_vs_p_", "")
        fig = _line_panel(
            ds, "p", ["sens_w20", "sens_w31"], ["0 -> 2", "1 -> 3"],
            name, "p [K]", "|Gamma(1) - Gamma(0)|",
        )
        kex = float(ds.param("kappa_ex"))
        kint = float(ds.param("kappa_int"))
        fig.axes[0].axhline(2 * kex / (kex + kint), ls="--", lw=1, color="k")
        yield name, fig


def _build_sensitivity_vs_omega(sets) -> Iterator:
    (ds,) = sets
    yield "sensitivity", _line_panel(
        ds, "omega", ["sens_w20", "sens_w31"], ["0 -> 2", "1 -> 3"],
        "sensitivity vs drive", "Omega [K]", "|Gamma(1) - Gamma(0)|",
    )


def _build_tomo_fidelity(sets) -> Iterator:
    (ds,) = sets
    yield "fidelity", _line_panel(
        ds, "kappa_ex", ["avg_fidelity"], [""], "tomography fidelity",
        "kappa_ex [K]", "average fidelity", xscale="log",
    )


def _build_wigner(sets) -> Iterator:
    for ds in sets:
        name = os.path.basename(ds.path).replace("wigner_", "").replace(".csv", "")
        yield name, _heat_panel(
            ds.col("x"), ds.col("y"), ds.col("w"), name, "Re z", "Im z",
            cmap=_DIVERGING, symmetric=True,
        )


def _build_dtheta(sets) -> Iterator:
    (ds,) = sets
    yield "fidelity", _line_panel(
        ds, "dtheta_over_pi", ["avg_fidelity"], [""],
        "robustness to readout angle error", "dtheta / pi", "average fidelity",
    )


def _build_offdiag(sets) -> Iterator:
    (ds,) = sets
    yield "gamma_w20", _line_panel(
        ds, "p", ["abs_gamma_offdiag_w20", "abs_gamma_diag_w20"],
        ["with off-diagonals", "diagonal"], "probe at 0 -> 2", "p [K]", "|Gamma|",
    )
    yield "gamma_w31", _line_panel(
        ds, "p", ["abs_gamma_offdiag_w31", "abs_gamma_diag_w31"],
        ["with off-diagonals", "diagonal"], "probe at 1 -> 3", "p [K]", "|Gamma|",
    )
    yield "matrix_elements", _line_panel(
        ds, "p", ["abs_x12", "abs_x03"], ["|X12|", "|X03|"],
        "cross-well matrix elements", "p [K]", "|X|", yscale="log",
    )


def _build_overlaps(sets) -> Iterator:
    for ds in sets:
        sweep = "p" if "vs_p" in ds.path else "omega"
        yield f"vs_{sweep}", _line_panel(
            ds, sweep,
            ["overlap_psi0", "overlap_psi1", "overlap_psi2", "overlap_psi3"],
            ["psi0", "psi1", "psi2", "psi3"],
            f"displaced-state overlaps vs {sweep}", f"{sweep} [K]", "overlap",
        )


def _build_dephasing(sets) -> Iterator:
    for ds in sets:
        tag = os.path.basename(ds.path).replace("dephasing_populations_", "").replace(".csv", "")
        yield f"populations_{tag}", _line_panel(
            ds, "t", [f"pop{i}" for i in range(5)],
            [f"level {i}" for i in range(5)],
            f"level populations ({tag})", "t [1/K]", "population",
        )
        yield f"offdiag_{tag}", _line_panel(
            ds, "t", ["offdiag01_abs"], [""], f"qubit coherence ({tag})",
            "t [1/K]", "|rho01|",
        )


def _build_gammabar(sets) -> Iterator:
    for ds in sets:
        tag = os.path.basename(ds.path).replace("gammabar_vs_rho00_", "").replace(".csv", "")
        yield tag, _line_panel(
            ds, "rho00", ["re_gammabar", "im_gammabar"], ["Re", "Im"],
            f"time-averaged reflection ({tag})", "rho00(0)", "Gamma-bar",
        )


def _build_nominal(sets) -> Iterator:
    (ds,) = sets
    yield "rates", _line_panel(
        ds, "alpha", ["kex_nominal", "kint_nominal", "kint_nominal_nodeph"],
        ["external", "internal", "internal (no dephasing)"],
        "nominal decay rates", "alpha", "rate [K]",
    )
    yield "gamma1", _line_panel(
        ds, "alpha", ["re_gamma1"], [""], "on-resonance reflection, rho00=1",
        "alpha", "Re Gamma(1)",
    )


FIGURES: dict[str, PlotSpec] = {
    "ramp_relaxation": PlotSpec("ramp_relaxation", "ramp_relaxation",
                                ("ramp_relaxation.csv",), _build_ramp_relaxation),
    "gamma_maps": PlotSpec("gamma_maps", "gamma_maps",
                           ("gamma_maps_rho0.csv", "gamma_maps_rho1.csv"), _build_gamma_maps),
    "gamma_complex_plane": PlotSpec("gamma_complex_plane", "gamma_complex_plane",
                                    ("gamma_complex_plane_*.csv",), _build_gamma_complex_plane),
    "sensitivity_vs_win": PlotSpec("sensitivity_vs_win", "sensitivity_vs_win",
                                   ("sensitivity_vs_win_*.csv",), _build_sensitivity_vs_win),
    "sensitivity_vs_p": PlotSpec("sensitivity_vs_p", "sensitivity_vs_p",
                                 ("sensitivity_vs_p_*.csv",), _build_sensitivity_vs_p),
    "sensitivity_vs_omega": PlotSpec("sensitivity_vs_omega", "sensitivity_vs_omega",
                                     ("sensitivity_vs_omega.csv",), _build_sensitivity_vs_omega),
    "tomo_fidelity_vs_kex": PlotSpec("tomo_fidelity_vs_kex", "tomo_fidelity_vs_kex",
                                     ("tomo_fidelity_vs_kex.csv",), _build_tomo_fidelity),
    "wigner_reconstruction": PlotSpec("wigner_reconstruction", "wigner_reconstruction",
                                      ("wigner_*.csv",), _build_wigner),
    "dtheta_robustness": PlotSpec("dtheta_robustness", "dtheta_robustness",
                                  ("dtheta_robustness.csv",), _build_dtheta),
    "offdiag_effect": PlotSpec("offdiag_effect", "offdiag_effect",
                               ("offdiag_effect.csv",), _build_offdiag),
    "displaced_overlaps": PlotSpec("displaced_overlaps", "displaced_overlaps",
                                   ("displaced_overlaps_*.csv",), _build_overlaps),
    "dephasing_populations": PlotSpec("dephasing_populations", "dephasing_populations",
                                      ("dephasing_populations_*.csv",), _build_dephasing),
    "gammabar_vs_rho00": PlotSpec("gammabar_vs_rho00", "gammabar_vs_rho00",
                                  ("gammabar_vs_rho00_*.csv",), _build_gammabar),
    "nominal_rates": PlotSpec("nominal_rates", "nominal_rates",
                              ("nominal_rates.csv",), _build_nominal),
}


def build_panels(figure: str, in_dir: str) -> list[tuple[str, plt.Figure]]:
    """Load the figure's datasets and build one matplotlib figure per panel."""
    if figure not in FIGURES:
        raise SchemaError(f"unknown figure {figure!r}; available: {', '.join(sorted(FIGURES))}")
    spec = FIGURES[figure]
    sets = _load(spec, in_dir)
    return list(spec.builder(sets))


def render(figure: str, in_dir: str, out_dir: str, fmt: str = "svg") -> list[str]:
    """Render every panel of a figure to out_dir; returns the written paths."""
    if fmt not in ("svg", "png"):
        raise SchemaError(f"unsupported format {fmt!r}; use svg or png")
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for panel, fig in build_panels(figure, in_dir):
        path = os.path.join(out_dir, f"{figure}__{panel}.{fmt}")
        metadata = {"Date": None} if fmt == "svg" else {"Software": "kpo-plot"}
        fig.savefig(path, format=fmt, metadata=metadata, dpi=110)
        plt.close(fig)
        paths.append(path)
    return paths
