"""Bidomain stepping: separate intra/extracellular relaxation times.

The transmembrane/extracellular pair is advanced by a first-order
splitting of the system

    tau_i*C_m*V_tt + C_m*V_t - div(D_i grad V) - div(D_i grad V_e)
        = -i_ion - tau_i*d(i_ion)/dt + i_stim,
    (tau_e - tau_i)*C_m*V_tt + div(D_i grad V) + div((D_i + D_e) grad V_e)
        = (tau_i - tau_e)*d(i_ion)/dt - s_e,

where s_e is the applied extracellular current density.  Each step: the
gate ODEs advance, the V/Q update solves an SPD system with V_e lagged
from the previous step, and V_e is recovered from the (singular,
pure-Neumann) elliptic equation by zero-mean deflated CG.  With
tau_i = tau_e the extra coupling terms vanish identically, giving the
hyperbolic-elliptic reduction; with both zero this is the classic
parabolic-elliptic bidomain model on the same code path.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .fem import LinearSolver, assemble_mass, assemble_stiffness, lump_mass
from .ionic import IonicModel
from .mesh import DiffusionSpec, FiberFrame, SimplicialMesh
from .monodomain import ProbeSet, SimulationError, ActivationTracker
from .stimulus import StimulusField


@dataclass
class BidomainConfig:
    dt: float
    t_end: float
    tau_i: float = 0.0
    tau_e: float = 0.0
    C_m: float = 1.0
    stimuli: list = field(default_factory=list)                 # transmembrane
    extracellular_stimuli: list = field(default_factory=list)   # into V_e equation
    cg_tol: float = 1e-8
    precond: str = "jacobi"
    warm_start: bool = True
    linear_solver: str = "auto"

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.tau_i < 0.0 or self.tau_e < 0.0:
            raise ValueError("relaxation times must be nonnegative")


@dataclass
class BidomainState:
    t: float
    V: np.ndarray
    Q: np.ndarray
    Ve: np.ndarray
    W: np.ndarray


class BidomainSolver:
    """First-order bidomain stepper with extracellular stimulation."""

    def __init__(self, mesh: SimplicialMesh, fibers: FiberFrame,
                 intra: DiffusionSpec, extra: DiffusionSpec,
                 model: IonicModel, config: BidomainConfig):
        self.mesh = mesh
        self.model = model
        self.config = config
        M = assemble_mass(mesh)
        self.M = M
        self.M_L = lump_mass(M)
        self.K_i = assemble_stiffness(mesh, fibers, intra)
        K_e = assemble_stiffness(mesh, fibers, extra)
        self.K_ie = (self.K_i + K_e).tocsr()

        n = mesh.n_nodes
        self.stimuli = StimulusField(config.stimuli, mesh.nodes)
        self.stimuli_e = StimulusField(config.extracellular_stimuli, mesh.nodes)
        self.state = BidomainState(
            t=0.0,
            V=np.full(n, float(model.rest_potential)),
            Q=np.zeros(n),
            Ve=np.zeros(n),
            W=model.rest_states(n),
        )
        dt, tau_i, C_m = config.dt, config.tau_i, config.C_m
        method = config.linear_solver
        if method == "auto":
            method = "direct" if n <= 50_000 else "cg"
        A_v = (C_m * (tau_i + dt)) * sp.diags(self.M_L) + (dt * dt) * self.K_i
        self._solve_v = LinearSolver(A_v.tocsr(), method=method,
                                     rel_tol=config.cg_tol,
                                     precond=config.precond,
                                     warm_start=config.warm_start)
        # V_e operator is singular (nullspace of constants): zero-mean deflation
        self._solve_e = LinearSolver(self.K_ie, method=method,
                                     rel_tol=config.cg_tol,
                                     precond=config.precond,
                                     warm_start=config.warm_start, deflate=True)

    def initialize_extracellular(self):
        """Solve the elliptic constraint for V_e at the current state.

        Needed when V is seeded away from rest; otherwise the first step
        would couple against an inconsistent V_e = 0.  Idempotent at rest.
        """
        s = self.state
        tau_i, tau_e = self.config.tau_i, self.config.tau_e
        rhs_e = -(self.K_i @ s.V)
        if tau_e != tau_i:
            dion = self.model.di_ion_dt(s.V, s.Q, s.W)
            rhs_e = rhs_e + (tau_e - tau_i) * (self.M @ dion)
        s.Ve = self._solve_e.solve(rhs_e)

    def step(self):
        s = self.state
        cfg = self.config
        dt, C_m = cfg.dt, cfg.C_m
        tau_i, tau_e = cfg.tau_i, cfg.tau_e

        # reaction: gates first, currents with updated states
        if self.model.n_states:
            g = self.model.g(s.V, s.W)
            W_new = s.W + dt * g
            if np.isnan(W_new).any():
                node = int(np.flatnonzero(np.isnan(W_new).any(axis=0))[0])
                raise SimulationError(
                    f"gate variables became NaN at node {node}, t={s.t:g}")
        else:
            W_new = s.W
        reac = -self.model.i_ion(s.V, W_new)
        stim = self.stimuli.current(s.t)
        if stim is not None:
            reac = reac + stim
        needs_dion = tau_i != 0.0 or tau_e != tau_i
        dion = self.model.di_ion_dt(s.V, s.Q, W_new) if needs_dion else 0.0

        # V/Q update with lagged extracellular potential
        rhs = (tau_i * C_m) * (self.M_L * s.Q) \
            - dt * (self.K_i @ (s.V + s.Ve)) \
            + dt * (self.M @ (reac - tau_i * dion))
        Q_new = self._solve_v.solve(rhs)
        V_new = s.V + dt * Q_new

        # extracellular solve, zero-mean
        rhs_e = -(self.K_i @ V_new)
        if tau_e != tau_i:
            rhs_e = rhs_e + (tau_e - tau_i) * (
                C_m * (self.M_L * (Q_new - s.Q)) / dt + self.M @ dion)
        stim_e = self.stimuli_e.current(s.t)
        if stim_e is not None:
            rhs_e = rhs_e + self.M @ stim_e
        Ve_new = self._solve_e.solve(rhs_e)

        if np.isnan(V_new).any() or np.isnan(Ve_new).any():
            raise SimulationError(f"NaN in potentials at t={s.t + dt:g}")
        s.V, s.Q, s.Ve, s.W = V_new, Q_new, Ve_new, W_new
        s.t += dt

    def run(self, probes=None, threshold: float | None = None):
        cfg = self.config
        n_steps = int(round(cfg.t_end / cfg.dt))
        if self.state.t == 0.0:
            self.initialize_extracellular()
        probeset = ProbeSet(self.mesh, probes) if probes else None
        tracker = None
        if threshold is not None:
            tracker = ActivationTracker(len(self.state.V), threshold)
            tracker.start(self.state.V, self.state.t)
        times = [self.state.t]
        values = [probeset.interpolate(self.state.V)] if probeset else []
        for _ in range(n_steps):
            V_prev = self.state.V
            t_prev = self.state.t
            self.step()
            if tracker is not None:
                tracker.update(t_prev, self.state.t, V_prev, self.state.V)
            times.append(self.state.t)
            if probeset:
                values.append(probeset.interpolate(self.state.V))
        return BidomainRunResult(
            state=self.state,
            probe_times=np.array(times),
            probe_values=np.array(values) if values else np.zeros((len(times), 0)),
            activation=tracker.t_act if tracker is not None else None,
        )


@dataclass
class BidomainRunResult:
    state: BidomainState
    probe_times: np.ndarray
    probe_values: np.ndarray
    activation: np.ndarray | None
