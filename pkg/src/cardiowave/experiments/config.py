"""Declarative experiment configs: JSON in, solver run, CSV/VTK out."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..bidomain import BidomainConfig, BidomainSolver
from ..ionic import create_model, default_tissue
from ..mesh import DiffusionSpec, line_mesh, rect_tri_mesh, uniform_fiber_frame
from ..monodomain import MonodomainConfig, MonodomainSolver, ProbeSet
from ..outputs import write_activation_csv, write_probe_csv, write_vtk
from ..stimulus import Box, Interval, L1Ball, Stimulus


class ConfigError(ValueError):
    pass


def _build_region(spec: dict):
    kind = spec.get("type")
    if kind == "interval":
        return Interval(spec["a"], spec["b"])
    if kind == "box":
        return Box(spec.get("xmin"), spec.get("xmax"),
                   spec.get("ymin"), spec.get("ymax"))
    if kind == "l1ball":
        return L1Ball(tuple(spec["center"]), spec["radius"])
    raise ConfigError(f"unknown region type {kind!r}")


def _build_stimuli(specs):
    out = []
    for s in specs or []:
        out.append(Stimulus(region=_build_region(s["region"]),
                            amplitude=s["amplitude"], start=s["start"],
                            duration=s["duration"], period=s.get("period"),
                            count=s.get("count", 1)))
    return out


def _build_mesh(spec: dict):
    kind = spec.get("type")
    if kind == "line":
        return line_mesh(spec["length"], spec["n"], origin=spec.get("origin", 0.0))
    if kind == "rect":
        return rect_tri_mesh(spec["lx"], spec["ly"], spec["nx"], spec["ny"],
                             diagonal=spec.get("diagonal", "right"),
                             origin=tuple(spec.get("origin", (0.0, 0.0))))
    raise ConfigError(f"unknown mesh type {kind!r}")


def _build_tissue(spec: dict | None, model_name: str) -> tuple[DiffusionSpec, float]:
    base = default_tissue(model_name)
    spec = spec or {}
    d = DiffusionSpec(sigma_f=spec.get("sigma_f", base.sigma_f),
                      sigma_s=spec.get("sigma_s", base.sigma_s),
                      chi=spec.get("chi", base.chi))
    return d, spec.get("C_m", base.C_m)


@dataclass
class ExperimentConfig:
    """Mirror of the JSON document driving a single generic run."""

    kind: str
    mesh: dict
    model: dict
    solver: dict
    stimuli: list = field(default_factory=list)
    extracellular_stimuli: list = field(default_factory=list)
    tissue: dict | None = None
    extra_tissue: dict | None = None
    fiber_angle: float = 0.0
    probes: list = field(default_factory=list)
    threshold: float | None = 0.9
    outputs: dict = field(default_factory=dict)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path) as fp:
            doc = json.load(fp)
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        try:
            return cls(**doc)
        except TypeError as e:
            raise ConfigError(str(e)) from None

    def to_json(self, path) -> None:
        doc = {k: getattr(self, k) for k in self.__dataclass_fields__}
        with open(path, "w") as fp:
            json.dump(doc, fp, indent=2)


def run_experiment(config: ExperimentConfig, out_dir=None):
    """Build the configured solver, advance to t_end, write the outputs."""
    mesh = _build_mesh(config.mesh)
    model_name = config.model["name"]
    model = create_model(model_name, eps=config.model.get("eps", 0.0),
                         **config.model.get("overrides", {}))
    fibers = uniform_fiber_frame(mesh, config.fiber_angle)
    tissue, C_m = _build_tissue(config.tissue, model_name)
    stimuli = _build_stimuli(config.stimuli)
    probes = [tuple(p) if isinstance(p, (list, tuple)) else (p,)
              for p in config.probes]
    if probes:
        ProbeSet(mesh, probes)   # validates that probes lie inside the domain

    out = dict(config.outputs)
    out_dir = Path(out_dir or out.get("dir", "."))
    out_dir.mkdir(parents=True, exist_ok=True)
    snapshot_every = out.get("snapshot_every")

    if config.kind == "monodomain":
        cfg = MonodomainConfig(
            dt=config.solver["dt"], t_end=config.solver["t_end"],
            tau=config.solver.get("tau", 0.0), C_m=C_m,
            integrator_order=config.solver.get("integrator_order", 1),
            stimuli=stimuli, v_est=config.solver.get("v_est"),
            linear_solver=config.solver.get("linear_solver", "auto"))
        solver = MonodomainSolver(mesh, fibers, tissue, model, cfg)
        snapshots = _snapshot_hook(out_dir, mesh, solver, snapshot_every,
                                   lambda s: {"V": s.state.V, "Q": s.state.Q})
        res = solver.run(probes=probes or None, threshold=config.threshold,
                         record_every=out.get("record_every", 1),
                         on_sample=snapshots)
    elif config.kind == "bidomain":
        extra, _ = _build_tissue(config.extra_tissue, model_name)
        cfg = BidomainConfig(
            dt=config.solver["dt"], t_end=config.solver["t_end"],
            tau_i=config.solver.get("tau_i", 0.0),
            tau_e=config.solver.get("tau_e", 0.0), C_m=C_m,
            stimuli=stimuli,
            extracellular_stimuli=_build_stimuli(config.extracellular_stimuli),
            linear_solver=config.solver.get("linear_solver", "auto"))
        solver = BidomainSolver(mesh, fibers, tissue, extra, model, cfg)
        res = solver.run(probes=probes or None, threshold=config.threshold)
        write_vtk(out_dir / "final.vtk", mesh,
                  {"V": res.state.V, "Q": res.state.Q, "Ve": res.state.Ve})
    else:
        raise ConfigError(f"unknown experiment kind {config.kind!r}")

    if probes:
        write_probe_csv(out_dir / out.get("probe_csv", "probes.csv"),
                        res.probe_times, res.probe_values, probes)
    if config.threshold is not None and res.activation is not None:
        write_activation_csv(out_dir / out.get("activation_csv", "activation.csv"),
                             mesh, res.activation)
    return res


def _snapshot_hook(out_dir, mesh, solver, every, fields):
    if not every:
        return None
    counter = {"i": 0}

    def hook(s, _vals):
        counter["i"] += 1
        if counter["i"] % every == 0:
            write_vtk(out_dir / f"snapshot_{counter['i']:06d}.vtk", mesh,
                      fields(s))
    return hook
