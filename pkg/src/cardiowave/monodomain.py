"""Time stepping for the parabolic and relaxation-flux (hyperbolic) monodomain model.

The model is evolved as the first-order system

    dV/dt = Q,
    tau*C_m*dQ/dt + C_m*Q - div(D grad V) = -i_ion - tau*d(i_ion)/dt + i_stim,

spatially discretized with P1 elements and half mass-lumping: the lumped
mass multiplies the time-derivative terms while reaction terms are
weighted by the consistent mass matrix.  Reaction and diffusion are
decoupled each step (Godunov splitting): the gate ODEs advance first and
the updated states feed the nodal current evaluations.

Two implicit-explicit integrators are provided.  The first-order scheme
(backward/forward Euler pairing) solves a single SPD system

    [C_m*(tau+dt)*M_L + dt^2*K] Q(n+1) =
        tau*C_m*M_L*Q(n) - dt*K*V(n) + dt*M*(R + tau*R'),

with R the nodal reaction (stimulus included) and R' its chain-rule time
derivative, then updates V(n+1) = V(n) + dt*Q(n+1).  The second-order
scheme pairs an explicit-trapezoid treatment of the reaction terms with
Crank-Nicolson on the linear ones: a first-order predictor supplies the
end-of-step reaction evaluation and a trapezoidal corrector closes the
step.  Both remain well defined at tau = 0, where they reduce to standard
parabolic steppers on the same code path.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .fem import LinearSolver, assemble_mass, assemble_stiffness, lump_mass
from .ionic import IonicModel
from .mesh import DiffusionSpec, FiberFrame, SimplicialMesh
from .stimulus import StimulusField


class SimulationError(RuntimeError):
    pass


@dataclass
class MonodomainConfig:
    dt: float
    t_end: float
    tau: float = 0.0
    C_m: float = 1.0
    integrator_order: int = 1
    stimuli: list = field(default_factory=list)
    v_est: float | None = None
    linear_solver: str = "auto"      # "auto" | "cg" | "direct"
    cg_tol: float = 1e-8
    precond: str = "jacobi"
    warm_start: bool = True

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.tau < 0.0:
            raise ValueError("tau must be nonnegative")
        if self.C_m <= 0.0:
            raise ValueError("C_m must be positive")
        if self.integrator_order not in (1, 2):
            raise ValueError("integrator_order must be 1 or 2")


@dataclass
class SolverState:
    t: float
    V: np.ndarray
    Q: np.ndarray
    W: np.ndarray


class ProbeSet:
    """P1 interpolation weights for a list of probe points."""

    def __init__(self, mesh: SimplicialMesh, points):
        self.points = [np.atleast_1d(np.asarray(p, dtype=float)) for p in points]
        self._nodes = []
        self._weights = []
        for p in self.points:
            idx, w = self._locate(mesh, p)
            self._nodes.append(idx)
            self._weights.append(w)

    @staticmethod
    def _locate(mesh: SimplicialMesh, p: np.ndarray):
        tol = 1e-10
        pts = mesh.nodes[mesh.elements]
        if mesh.dim == 1:
            x = p[0]
            a, b = pts[:, 0, 0], pts[:, 1, 0]
            inside = (x >= a - tol) & (x <= b + tol)
            if not inside.any():
                raise ValueError(f"probe {p} lies outside the mesh")
            e = int(np.argmax(inside))
            h = b[e] - a[e]
            w1 = (x - a[e]) / h
            return mesh.elements[e], np.array([1.0 - w1, w1])
        d1 = pts[:, 1] - pts[:, 0]
        d2 = pts[:, 2] - pts[:, 0]
        det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
        rp = p[None, :] - pts[:, 0]
        l1 = (rp[:, 0] * d2[:, 1] - rp[:, 1] * d2[:, 0]) / det
        l2 = (d1[:, 0] * rp[:, 1] - d1[:, 1] * rp[:, 0]) / det
        l0 = 1.0 - l1 - l2
        inside = (l0 >= -tol) & (l1 >= -tol) & (l2 >= -tol)
        if not inside.any():
            raise ValueError(f"probe {p} lies outside the mesh")
        e = int(np.argmax(inside))
        return mesh.elements[e], np.array([l0[e], l1[e], l2[e]])

    def interpolate(self, values: np.ndarray) -> np.ndarray:
        return np.array([float(values[idx] @ w)
                         for idx, w in zip(self._nodes, self._weights)])


class ActivationTracker:
    """First upward threshold crossing per node, linearly interpolated in time."""

    def __init__(self, n_nodes: int, threshold: float):
        self.threshold = threshold
        self.t_act = np.full(n_nodes, np.nan)

    def start(self, V: np.ndarray, t0: float = 0.0):
        self.t_act[V >= self.threshold] = t0

    def update(self, t_prev: float, t_new: float,
               V_prev: np.ndarray, V_new: np.ndarray):
        thr = self.threshold
        newly = np.isnan(self.t_act) & (V_new >= thr) & (V_prev < thr)
        if newly.any():
            frac = (thr - V_prev[newly]) / (V_new[newly] - V_prev[newly])
            self.t_act[newly] = t_prev + (t_new - t_prev) * frac


@dataclass
class RunResult:
    state: SolverState
    n_steps: int
    probe_times: np.ndarray
    probe_values: np.ndarray          # shape (n_samples, n_probes)
    activation: np.ndarray | None
    max_cg_iterations: int
    reaction_seconds: float
    diffusion_seconds: float


class MonodomainSolver:
    """Owns the assembled operators and the evolving state for one run."""

    def __init__(self, mesh: SimplicialMesh, fibers: FiberFrame,
                 diffusion: DiffusionSpec, model: IonicModel,
                 config: MonodomainConfig):
        M = assemble_mass(mesh)
        K = assemble_stiffness(mesh, fibers, diffusion)
        self._setup(M, lump_mass(M), K, model, config,
                    mesh=mesh, h_min=mesh.min_edge_length())

    @classmethod
    def from_operators(cls, M, M_L, K, model: IonicModel,
                       config: MonodomainConfig, nodes: np.ndarray | None = None):
        """Build a solver from prebuilt operators (testing and reductions)."""
        self = cls.__new__(cls)
        self._setup(sp.csr_matrix(M), np.asarray(M_L, dtype=float),
                    sp.csr_matrix(K), model, config, mesh=None, h_min=None,
                    nodes=nodes)
        return self

    def _setup(self, M, M_L, K, model, config, mesh=None, h_min=None, nodes=None):
        self.mesh = mesh
        self.M = M
        self.M_L = M_L
        self.K = K
        self.model = model
        self.config = config
        if config.v_est is not None and h_min is not None:
            if config.dt > h_min / config.v_est:
                raise ValueError(
                    f"dt={config.dt:g} violates the CFL bound "
                    f"h_min/v = {h_min / config.v_est:g}")
        n = M.shape[0]
        node_coords = mesh.nodes if mesh is not None else nodes
        if node_coords is None:
            node_coords = np.zeros((n, 1))
        self.stimuli = StimulusField(config.stimuli, node_coords)
        self.state = SolverState(
            t=0.0,
            V=np.full(n, float(model.rest_potential)),
            Q=np.zeros(n),
            W=model.rest_states(n),
        )
        dt, tau, C_m = config.dt, config.tau, config.C_m
        method = config.linear_solver
        if method == "auto":
            method = "direct" if n <= 50_000 else "cg"

        def make_solver(A):
            return LinearSolver(A, method=method, rel_tol=config.cg_tol,
                                precond=config.precond,
                                warm_start=config.warm_start)

        A1 = (C_m * (tau + dt)) * sp.diags(M_L) + (dt * dt) * K
        self._solve1 = make_solver(A1.tocsr())
        if config.integrator_order == 2:
            A2 = (C_m * (tau + 0.5 * dt)) * sp.diags(M_L) + (0.25 * dt * dt) * K
            self._solve2 = make_solver(A2.tocsr())
        self.reaction_seconds = 0.0
        self.diffusion_seconds = 0.0
        self._debug_nan_guard = True

    # -- reaction -----------------------------------------------------------

    def _nodal_reaction(self, V, Q, W, t):
        """Nodal R = -i_ion + i_stim and R' = -d(i_ion)/dt.

        The current derivative is only evaluated in the relaxation model;
        the parabolic path never pays for it.
        """
        reac = -self.model.i_ion(V, W)
        s = self.stimuli.current(t)
        if s is not None:
            reac = reac + s
        rate = -self.model.di_ion_dt(V, Q, W) if self.config.tau != 0.0 else 0.0
        return reac, rate

    def reaction_substep(self, state: SolverState, dt: float, order: int):
        """Advance the gate ODEs by dt (Euler or Heun) with V frozen.

        Returns the updated state array; currents are evaluated separately
        so the two integrators can choose their sampling points.
        """
        if self.model.n_states == 0:
            return state.W
        g1 = self.model.g(state.V, state.W)
        if order == 1:
            W_new = state.W + dt * g1
        else:
            W_pred = state.W + dt * g1
            g2 = self.model.g(state.V, W_pred)
            W_new = state.W + 0.5 * dt * (g1 + g2)
        if np.isnan(W_new).any():
            node = int(np.flatnonzero(np.isnan(W_new).any(axis=0))[0])
            raise SimulationError(
                f"gate variables became NaN at node {node}, t={state.t:g}")
        return W_new

    # -- steppers -----------------------------------------------------------

    def step(self):
        if self.config.integrator_order == 1:
            self._step_o1()
        else:
            self._step_o2()
        if self._debug_nan_guard and np.isnan(self.state.V).any():
            raise SimulationError(f"NaN in potential at t={self.state.t:g}")

    def _step_o1(self):
        s = self.state
        dt, tau, C_m = self.config.dt, self.config.tau, self.config.C_m
        tic = time.perf_counter()
        W_new = self.reaction_substep(s, dt, order=1)
        reac, rate = self._nodal_reaction(s.V, s.Q, W_new, s.t)
        self.reaction_seconds += time.perf_counter() - tic

        tic = time.perf_counter()
        rhs = (tau * C_m) * (self.M_L * s.Q) - dt * (self.K @ s.V) \
            + dt * (self.M @ (reac + tau * rate))
        s.Q = self._solve1.solve(rhs)
        s.V = s.V + dt * s.Q
        self.diffusion_seconds += time.perf_counter() - tic
        s.W = W_new
        s.t += dt

    def _step_o2(self):
        s = self.state
        dt, tau, C_m = self.config.dt, self.config.tau, self.config.C_m

        tic = time.perf_counter()
        r1, j1 = self._nodal_reaction(s.V, s.Q, s.W, s.t)
        W_new = self.reaction_substep(s, dt, order=2)
        rp, jp = self._nodal_reaction(s.V, s.Q, W_new, s.t)
        self.reaction_seconds += time.perf_counter() - tic

        tic = time.perf_counter()
        rhs_p = (tau * C_m) * (self.M_L * s.Q) - dt * (self.K @ s.V) \
            + dt * (self.M @ (rp + tau * jp))
        Qp = self._solve1.solve(rhs_p)
        Vp = s.V + dt * Qp
        self.diffusion_seconds += time.perf_counter() - tic

        tic = time.perf_counter()
        r2, j2 = self._nodal_reaction(Vp, Qp, W_new, s.t + dt)
        self.reaction_seconds += time.perf_counter() - tic

        tic = time.perf_counter()
        rhs = ((tau - 0.5 * dt) * C_m) * (self.M_L * s.Q) \
            - dt * (self.K @ s.V) - (0.25 * dt * dt) * (self.K @ s.Q) \
            + (0.5 * dt) * (self.M @ ((r1 + tau * j1) + (r2 + tau * j2)))
        Q_new = self._solve2.solve(rhs)
        s.V = s.V + (0.5 * dt) * (s.Q + Q_new)
        self.diffusion_seconds += time.perf_counter() - tic
        s.Q = Q_new
        s.W = W_new
        s.t += dt

    # -- driver -------------------------------------------------------------

    @property
    def max_cg_iterations(self) -> int:
        worst = self._solve1.max_iterations
        if self.config.integrator_order == 2:
            worst = max(worst, self._solve2.max_iterations)
        return worst

    def run(self, probes=None, threshold: float | None = None,
            record_every: int = 1, on_sample=None, stop_when=None) -> RunResult:
        """Advance to t_end, recording probe traces and activation times.

        ``on_sample(solver, probe_vals)`` fires at every recorded sample;
        ``stop_when(solver, tracker)`` may end the run early.
        """
        cfg = self.config
        n_steps = int(round(cfg.t_end / cfg.dt))
        probeset = ProbeSet(self.mesh, probes) if probes else None
        tracker = None
        if threshold is not None:
            tracker = ActivationTracker(len(self.state.V), threshold)
            tracker.start(self.state.V, self.state.t)

        times = [self.state.t]
        values = [probeset.interpolate(self.state.V)] if probeset else []
        steps_done = 0
        for istep in range(n_steps):
            V_prev = self.state.V
            t_prev = self.state.t
            self.step()
            steps_done += 1
            if tracker is not None:
                tracker.update(t_prev, self.state.t, V_prev, self.state.V)
            if (istep + 1) % record_every == 0 or istep == n_steps - 1:
                times.append(self.state.t)
                if probeset:
                    vals = probeset.interpolate(self.state.V)
                    values.append(vals)
                    if on_sample is not None:
                        on_sample(self, vals)
            if stop_when is not None and stop_when(self, tracker):
                break
        return RunResult(
            state=self.state,
            n_steps=steps_done,
            probe_times=np.array(times),
            probe_values=np.array(values) if values else np.zeros((len(times), 0)),
            activation=tracker.t_act if tracker is not None else None,
            max_cg_iterations=self.max_cg_iterations,
            reaction_seconds=self.reaction_seconds,
            diffusion_seconds=self.diffusion_seconds,
        )


def lumped_l2_norm(M_L: np.ndarray, e: np.ndarray) -> float:
    """Discrete L2 norm sqrt(sum M_L e^2)."""
    return math.sqrt(float(np.sum(M_L * e * e)))
