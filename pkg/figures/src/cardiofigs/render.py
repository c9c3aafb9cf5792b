"""Render study CSVs into PNG figures.

Kinds: speed (measured vs exact front speeds with the signal-speed bound),
convergence (log-log errors with fitted-slope annotations), cv_tau
(normalized CV against relaxation time per model), anisotropy (velocity
ratios with reference levels), activation (first-arrival map), and vep
(transmembrane sign map).  Rendering is deterministic: identical inputs
produce byte-identical PNGs.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

KINDS = ("speed", "convergence", "cv_tau", "anisotropy", "activation", "vep")


class RenderError(ValueError):
    pass


@dataclass
class FigureSpec:
    kind: str
    inputs: list
    output: Path
    title: str | None = None
    xlabel: str | None = None
    ylabel: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise RenderError(f"unknown figure kind {self.kind!r}")
        self.inputs = [Path(p) for p in self.inputs]
        self.output = Path(self.output)
        for p in self.inputs:
            if not p.exists():
                raise RenderError(f"input file {p} does not exist")


def _read_csv(path: Path, required: tuple, numeric: tuple):
    """Read a delimited table, checking the required columns exist."""
    with Path(path).open(newline="") as fp:
        reader = csv.reader(fp)
        try:
            header = next(reader)
        except StopIteration:
            raise RenderError(f"{path}: empty file") from None
        rows = [r for r in reader if r]
    for col in required:
        if col not in header:
            raise RenderError(f"{path}: missing column {col!r}")
    if not rows:
        raise RenderError(f"{path}: no data rows")
    idx = {c: header.index(c) for c in header}
    out = {}
    for col in header:
        vals = []
        for r in rows:
            if len(r) != len(header):
                raise RenderError(f"{path}: ragged row of width {len(r)}")
            cell = r[idx[col]]
            if col in numeric:
                try:
                    vals.append(float(cell) if cell != "" else math.nan)
                except ValueError:
                    raise RenderError(
                        f"{path}: column {col!r} has non-numeric value {cell!r}"
                    ) from None
            else:
                vals.append(cell)
        out[col] = np.array(vals) if col in numeric else vals
    return out


def _fig(width=6.0, height=4.2):
    return plt.subplots(figsize=(width, height), dpi=150)


def _finish(fig, ax, spec: FigureSpec, default_x, default_y):
    ax.set_xlabel(spec.xlabel or default_x)
    ax.set_ylabel(spec.ylabel or default_y)
    if spec.title:
        ax.set_title(spec.title)
    fig.tight_layout()
    spec.output.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(spec.output, format="png")
    plt.close(fig)


def _loglog_slope(x, y) -> float:
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def render(spec: FigureSpec) -> dict:
    """Render one figure; returns the annotation values used in the plot."""
    return _RENDERERS[spec.kind](spec)


def _render_speed(spec: FigureSpec) -> dict:
    data = _read_csv(spec.inputs[0], ("alpha", "mu", "cv", "cv_exact"),
                     ("alpha", "mu", "cv", "cv_exact", "rel_err", "c_s"))
    fig, ax = _fig()
    notes = {}
    for alpha in sorted(set(data["alpha"])):
        m = data["alpha"] == alpha
        mu = data["mu"][m]
        order = np.argsort(mu)
        ax.plot(mu[order], data["cv_exact"][m][order], "-", lw=1.2,
                label=f"exact, alpha={alpha:g}")
        ax.plot(mu[order], data["cv"][m][order], "o", ms=4,
                label=f"measured, alpha={alpha:g}")
    mu_pos = np.array(sorted(set(data["mu"][data["mu"] > 0])))
    if mu_pos.size:
        grid = np.linspace(mu_pos.min(), data["mu"].max(), 200)
        ax.plot(grid, np.sqrt(1.0 / grid), "k-", lw=1.8,
                label="signal speed bound")
        notes["bound_drawn"] = True
    ax.legend(fontsize=7)
    _finish(fig, ax, spec, "relaxation ratio", "front speed")
    return notes


def _render_convergence(spec: FigureSpec) -> dict:
    fig, ax = _fig()
    notes = {}
    for path in spec.inputs:
        data = _read_csv(path, ("h", "err_V"),
                         ("h", "dt", "err_V", "err_Q", "order_V", "order_Q"))
        h = data["h"]
        label = Path(path).stem.replace("convergence_", "")
        slope_v = _loglog_slope(h, data["err_V"])
        ax.loglog(h, data["err_V"], "o-", ms=4,
                  label=f"{label} V (slope {slope_v:.2f})")
        notes[f"{label}:slope_V"] = slope_v
        if "err_Q" in data:
            slope_q = _loglog_slope(h, data["err_Q"])
            ax.loglog(h, data["err_Q"], "s--", ms=4,
                      label=f"{label} Q (slope {slope_q:.2f})")
            notes[f"{label}:slope_Q"] = slope_q
    ax.legend(fontsize=7)
    ax.grid(True, which="both", alpha=0.3)
    _finish(fig, ax, spec, "mesh size h", "L2 error at final time")
    return notes


def _render_cv_tau(spec: FigureSpec) -> dict:
    data = _read_csv(spec.inputs[0], ("model", "tau", "cv"), ("tau", "cv"))
    fig, ax = _fig()
    notes = {}
    models = sorted(set(data["model"]))
    for name in models:
        m = np.array([s == name for s in data["model"]])
        tau = data["tau"][m]
        cv = data["cv"][m]
        order = np.argsort(tau)
        base = cv[order][tau[order] == 0.0]
        norm = base[0] if base.size else cv[order][0]
        ax.plot(tau[order], cv[order] / norm, "o-", ms=4, label=name)
        notes[f"{name}:cv0"] = float(norm)
    ax.axhline(1.0, color="k", lw=0.8, alpha=0.5)
    ax.legend(fontsize=8)
    _finish(fig, ax, spec, "relaxation time (ms)", "CV / CV(tau=0)")
    return notes


_RATIO_REFS = {"v2_over_v1": 1.0 / math.sqrt(2.0), "v3_over_v1": 0.5,
               "v4_over_v1": 1.0 / math.sqrt(8.0)}


def _render_anisotropy(spec: FigureSpec) -> dict:
    data = _read_csv(spec.inputs[0],
                     ("tau", "v2_over_v1", "v3_over_v1", "v4_over_v1"),
                     ("tau", "v2_over_v1", "v3_over_v1", "v4_over_v1"))
    fig, ax = _fig()
    order = np.argsort(data["tau"])
    for col, ref in _RATIO_REFS.items():
        ax.plot(data["tau"][order], data[col][order], "o-", ms=4, label=col)
        ax.axhline(ref, color="k", lw=0.7, ls=":", alpha=0.6)
    ax.legend(fontsize=8)
    _finish(fig, ax, spec, "relaxation time (ms)", "velocity ratio")
    return {"taus": len(set(data["tau"]))}


def _render_activation(spec: FigureSpec) -> dict:
    data = _read_csv(spec.inputs[0], ("x", "y", "t_act"), ("x", "y", "t_act"))
    fig, ax = _fig(5.4, 4.6)
    if np.ptp(data["y"]) == 0.0:    # 1D map
        order = np.argsort(data["x"])
        ax.plot(data["x"][order], data["t_act"][order], "-", lw=1.2)
        _finish(fig, ax, spec, "x", "activation time")
    else:
        sc = ax.scatter(data["x"], data["y"], c=data["t_act"], s=3,
                        cmap="viridis", rasterized=True)
        fig.colorbar(sc, ax=ax, label="activation time")
        ax.set_aspect("equal")
        _finish(fig, ax, spec, "x", "y")
    return {"nodes": int(len(data["x"]))}


def _render_vep(spec: FigureSpec) -> dict:
    data = _read_csv(spec.inputs[0], ("x", "y", "V"), ("x", "y", "V"))
    fig, ax = _fig(6.4, 3.2)
    v = data["V"]
    lim = float(np.max(np.abs(v))) or 1.0
    sc = ax.scatter(data["x"], data["y"], c=v, s=2, cmap="RdBu_r",
                    vmin=-lim, vmax=lim, rasterized=True)
    fig.colorbar(sc, ax=ax, label="V")
    ax.set_aspect("equal")
    _finish(fig, ax, spec, "x (mm)", "y (mm)")
    return {"v_min": float(v.min()), "v_max": float(v.max())}


_RENDERERS = {
    "speed": _render_speed,
    "convergence": _render_convergence,
    "cv_tau": _render_cv_tau,
    "anisotropy": _render_anisotropy,
    "activation": _render_activation,
    "vep": _render_vep,
}
