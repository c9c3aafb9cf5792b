"""Numerical studies: speed verification, convergence, CV scans, benchmarks.

Each study is a plain function that runs the solvers at its published
protocol, returns the measurements, and (optionally) writes the CSV
artifacts consumed by the figure renderer.  Length unit is mm, time ms;
conductivities are in the models' accompanying units so D = sigma/chi
comes out in mm^2/ms.
"""
from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .. import analytic as an
from ..bidomain import BidomainConfig, BidomainSolver
from ..ionic import create_model, default_tissue
from ..mesh import (DiffusionSpec, SimplicialMesh, line_mesh, rect_tri_mesh,
                    uniform_fiber_frame)
from ..monodomain import (MonodomainConfig, MonodomainSolver, ProbeSet,
                          lumped_l2_norm)
from ..outputs import write_table_csv, write_vtk
from ..stimulus import Box, Interval, L1Ball, Stimulus


class NoFrontError(RuntimeError):
    """A probe never crossed the activation threshold."""


def conduction_velocity(t_act, mesh: SimplicialMesh, x1, x2) -> float:
    """Front speed between two probe points from an activation map.

    Activation times are taken at the nearest mesh node to each probe;
    simultaneous activation is an error rather than an infinite speed.
    """
    pts = [np.atleast_1d(np.asarray(p, dtype=float)) for p in (x1, x2)]
    nodes = mesh.nodes if mesh.dim > 1 else mesh.nodes[:, :1]
    idx = [int(np.argmin(((nodes - p[None, : nodes.shape[1]]) ** 2).sum(axis=1)))
           for p in pts]
    t1, t2 = t_act[idx[0]], t_act[idx[1]]
    if not (np.isfinite(t1) and np.isfinite(t2)):
        raise NoFrontError(f"no activation recorded at probe(s) {x1}, {x2}")
    if t1 == t2:
        raise NoFrontError(f"probes {x1} and {x2} activated simultaneously")
    dist = float(np.linalg.norm(pts[1] - pts[0]))
    return dist / abs(t2 - t1)


def _stop_after_activation(mesh: SimplicialMesh, points, margin: float):
    """Early-stop callback: all probe nodes activated and margin elapsed."""
    nodes = mesh.nodes if mesh.dim > 1 else mesh.nodes[:, :1]
    idx = [int(np.argmin(((nodes - np.atleast_1d(np.asarray(p, float))[None, : nodes.shape[1]]) ** 2).sum(axis=1)))
           for p in points]

    def stop(solver, tracker):
        if tracker is None:
            return False
        t_act = tracker.t_act[idx]
        return bool(np.all(np.isfinite(t_act))
                    and solver.state.t > t_act.max() + margin)
    return stop


# ---------------------------------------------------------------------------
# exact-speed verification
# ---------------------------------------------------------------------------

def verify_speed(alphas=(0.1, 0.2, 0.3), mus=(0.0, 0.25, 0.5, 1.0, 2.0),
                 h: float = 0.03125, dt: float = 0.003653,
                 length: float = 50.0, probes=(30.0, 32.0),
                 threshold: float = 0.9, out_dir=None):
    """Measure 1D front speeds against the closed-form value.

    Each run is seeded with the exact front profile centered mid-domain
    (a unit stimulus cannot ignite the less excitable corners of the
    parameter grid) and the speed is measured between the two probes,
    far from the seed and the boundaries.  Returns a list of dicts and
    writes speed.csv when out_dir is given.
    """
    n = int(round(length / h))
    mesh = line_mesh(length, n)
    x = mesh.nodes[:, 0]
    fibers = uniform_fiber_frame(mesh)
    rows = []
    for alpha in alphas:
        for mu in mus:
            exact = an.mckean_speed(alpha, mu)
            travel = (max(probes) - length / 2.0 + 6.0) / exact
            cfg = MonodomainConfig(dt=dt, t_end=travel * 1.5 + 5.0, tau=mu,
                                   integrator_order=1)
            solver = MonodomainSolver(mesh, fibers, DiffusionSpec(1.0),
                                      create_model("McKean", alpha=alpha), cfg)
            V0, Q0 = an.front_initial_state(x, alpha, mu,
                                            front_position=length / 2.0)
            solver.state.V[:] = V0
            solver.state.Q[:] = Q0
            res = solver.run(threshold=threshold,
                             stop_when=_stop_after_activation(mesh, probes, 0.2))
            cv = conduction_velocity(res.activation, mesh, probes[0], probes[1])
            rows.append({
                "alpha": alpha, "mu": mu, "cv": cv, "cv_exact": exact,
                "rel_err": abs(cv - exact) / exact,
                "c_s": math.sqrt(1.0 / mu) if mu > 0 else math.inf,
            })
    if out_dir is not None:
        write_table_csv(Path(out_dir) / "speed.csv",
                        ["alpha", "mu", "cv", "cv_exact", "rel_err", "c_s"],
                        [[r["alpha"], r["mu"], r["cv"], r["cv_exact"],
                          r["rel_err"], r["c_s"]] for r in rows])
    return rows


# ---------------------------------------------------------------------------
# space-time convergence
# ---------------------------------------------------------------------------

def convergence_study(levels: int = 4, integrator_order: int = 2,
                      reaction: str = "mckean", tau: float = 0.0,
                      alpha: float = 0.1, h0: float = 0.5, dt0: float = 0.05,
                      t_end: float = 1.0, out_dir=None, label: str | None = None):
    """L2 errors against the exact front under simultaneous h, dt refinement.

    The domain is [-25, 25] with the front seeded at the origin; dt is
    proportional to h with dt0 on the coarsest level.  Returns a dict with
    per-level errors, pairwise observed orders, and least-squares fitted
    orders for V and Q.
    """
    if levels < 3:
        raise ValueError("need at least 3 refinement levels")
    if reaction not in ("mckean", "cubic"):
        raise ValueError(f"unknown reaction {reaction!r}")
    if reaction == "cubic" and tau != 0.0:
        raise ValueError("the cubic front oracle is only valid for tau = 0")
    hs, eVs, eQs = [], [], []
    for lev in range(levels):
        h = h0 / 2 ** lev
        n = int(round(50.0 / h))
        dt = dt0 * h / h0
        mesh = line_mesh(50.0, n, origin=-25.0)
        x = mesh.nodes[:, 0]
        if reaction == "mckean":
            c = an.mckean_speed(alpha, tau)
            V0, Q0 = an.front_initial_state(x, alpha, tau)
            Vex, dU = an.front_profile(x - c * t_end, alpha, tau)
            model = create_model("McKean", alpha=alpha)
        else:
            c = an.cubic_front_speed(alpha)
            V0, Q0 = an.cubic_front_initial_state(x, alpha)
            Vex, dU = an.cubic_front_profile(x - c * t_end, alpha)
            model = create_model("Cubic", alpha=alpha)
        cfg = MonodomainConfig(dt=dt, t_end=t_end, tau=tau,
                               integrator_order=integrator_order)
        solver = MonodomainSolver(mesh, uniform_fiber_frame(mesh),
                                  DiffusionSpec(1.0), model, cfg)
        solver.state.V[:] = V0
        solver.state.Q[:] = Q0
        res = solver.run()
        hs.append(h)
        eVs.append(lumped_l2_norm(solver.M_L, res.state.V - Vex))
        eQs.append(lumped_l2_norm(solver.M_L, res.state.Q - (-c * dU)))
    hs, eVs, eQs = np.array(hs), np.array(eVs), np.array(eQs)
    result = {
        "h": hs, "err_V": eVs, "err_Q": eQs,
        "order_V": np.log2(eVs[:-1] / eVs[1:]),
        "order_Q": np.log2(eQs[:-1] / eQs[1:]),
        "fitted_order_V": float(np.polyfit(np.log(hs), np.log(eVs), 1)[0]),
        "fitted_order_Q": float(np.polyfit(np.log(hs), np.log(eQs), 1)[0]),
    }
    if out_dir is not None:
        name = label or f"convergence_{reaction}_o{integrator_order}_tau{tau:g}"
        rows = []
        for i in range(levels):
            rows.append([float(hs[i]), float(dt0 * hs[i] / h0),
                         float(eVs[i]), float(eQs[i]),
                         float(result["order_V"][i - 1]) if i else "",
                         float(result["order_Q"][i - 1]) if i else ""])
        write_table_csv(Path(out_dir) / f"{name}.csv",
                        ["h", "dt", "err_V", "err_Q", "order_V", "order_Q"],
                        rows)
    return result


# ---------------------------------------------------------------------------
# conduction velocity vs relaxation time
# ---------------------------------------------------------------------------

DEFAULT_TAUS = (0.0, 0.02, 0.03, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 1.0)


def _cv_1d(model_name: str, tau: float, h: float, dt: float,
           sigma: float | None = None, length: float = 50.0,
           probes=(30.0, 32.0), threshold: float = 0.9,
           t_max: float = 200.0, alpha: float | None = None):
    """Center-stimulated 1D run; returns the measured CV."""
    tissue = default_tissue(model_name)
    sigma_f = tissue.sigma_f if sigma is None else sigma
    n = int(round(length / h))
    mesh = line_mesh(length, n)
    overrides = {} if alpha is None else {"alpha": alpha}
    model = create_model(model_name, **overrides)
    mid = length / 2.0
    stim = [Stimulus(Interval(mid - 0.55, mid + 0.55), 1.0, 0.03, 1.0)]
    cfg = MonodomainConfig(dt=dt, t_end=t_max, tau=tau, C_m=tissue.C_m,
                           stimuli=stim)
    solver = MonodomainSolver(mesh, uniform_fiber_frame(mesh),
                              DiffusionSpec(sigma_f, chi=tissue.chi),
                              model, cfg)
    res = solver.run(threshold=threshold,
                     stop_when=_stop_after_activation(mesh, probes, 0.5))
    return conduction_velocity(res.activation, mesh, probes[0], probes[1])


def cv_vs_tau_study(models=("FK3", "AP"), taus=DEFAULT_TAUS,
                    h: float = 0.03125, dt: float = 0.003125,
                    out_dir=None):
    """CV against relaxation time for the named models (1D, center stimulus)."""
    rows = []
    for name in models:
        alpha = 0.1 if name.upper() == "AP" else None
        for tau in taus:
            cv = _cv_1d(name, tau, h, dt, alpha=alpha)
            rows.append({"model": name, "tau": tau, "cv": cv})
    if out_dir is not None:
        write_table_csv(Path(out_dir) / "cv_tau.csv", ["model", "tau", "cv"],
                        [[r["model"], r["tau"], r["cv"]] for r in rows])
    return rows


# ---------------------------------------------------------------------------
# anisotropy ratios
# ---------------------------------------------------------------------------

ANISO_SIGMAS = (0.1, 0.05, 0.025, 0.0125)    # mS/mm


def anisotropy_study(taus=(0.0, 0.4, 1.0), sigmas=ANISO_SIGMAS,
                     h: float = 0.025, dt: float = 0.0025, out_dir=None):
    """Plane-wave CV for four conductivities across relaxation times.

    Returns speed rows plus the velocity ratios against the largest
    conductivity and, per conductivity, the relaxation time at which the
    hyperbolic CV matches the parabolic one (interpolated on the tau grid).
    """
    cvs = {}
    for sigma in sigmas:
        for tau in taus:
            cvs[(sigma, tau)] = _cv_1d("FK3", tau, h, dt, sigma=sigma,
                                       probes=(30.0, 33.0))
    rows = [{"sigma": s, "tau": t, "cv": cvs[(s, t)]}
            for s in sigmas for t in taus]
    ratios = []
    s1 = sigmas[0]
    for tau in taus:
        ratios.append({
            "tau": tau,
            "v2_over_v1": cvs[(sigmas[1], tau)] / cvs[(s1, tau)],
            "v3_over_v1": cvs[(sigmas[2], tau)] / cvs[(s1, tau)],
            "v4_over_v1": cvs[(sigmas[3], tau)] / cvs[(s1, tau)],
        })
    matched = {}
    for sigma in sigmas:
        base = cvs[(sigma, taus[0])]
        tau_grid = [t for t in taus if t > 0]
        diffs = [cvs[(sigma, t)] - base for t in tau_grid]
        tau_star = None
        for (t1, d1), (t2, d2) in zip(zip(tau_grid, diffs),
                                      zip(tau_grid[1:], diffs[1:])):
            if d1 == 0.0:
                tau_star = t1
                break
            if d1 * d2 < 0.0:
                tau_star = t1 + (t2 - t1) * d1 / (d1 - d2)
                break
        matched[sigma] = tau_star
    if out_dir is not None:
        write_table_csv(Path(out_dir) / "anisotropy.csv",
                        ["sigma", "tau", "cv"],
                        [[r["sigma"], r["tau"], r["cv"]] for r in rows])
        write_table_csv(Path(out_dir) / "anisotropy_ratios.csv",
                        ["tau", "v2_over_v1", "v3_over_v1", "v4_over_v1"],
                        [[r["tau"], r["v2_over_v1"], r["v3_over_v1"],
                          r["v4_over_v1"]] for r in ratios])
    return {"speeds": rows, "ratios": ratios, "matched_tau": matched}


# ---------------------------------------------------------------------------
# fiber/mesh orientation benchmark
# ---------------------------------------------------------------------------

def orientation_benchmark(hs=(0.24, 0.12, 0.06, 0.03), fiber_angle_deg: float = -45.0,
                          diagonals=("right", "left"), size: float = 30.0,
                          tau: float = 0.0, dt: float = 0.05,
                          stim_radius: float = 2.5, probe_radii=(6.0, 10.0),
                          t_max: float = 160.0, out_dir=None,
                          full_scale: bool = False):
    """Diagonal-orientation sensitivity of the CV on structured grids.

    Fibers at -45 degrees make propagation along the (+1, +1) domain
    diagonal transverse to the fibers; the corner stimulus then sends a
    front up that diagonal, where the two triangulation orientations
    interact differently with the slow conduction direction.  Returns the
    measured CV per (h, diagonal) and the per-h discrepancy.
    """
    if full_scale:
        size, stim_radius = 120.0, 10.0
        probe_radii = tuple(4.0 * r for r in probe_radii)
    tissue = default_tissue("FK3")
    angle = math.radians(fiber_angle_deg)
    diag_dir = np.array([1.0, 1.0]) / math.sqrt(2.0)
    probes = [tuple(r * diag_dir) for r in probe_radii]
    rows = []
    for h in hs:
        n = int(round(size / h))
        for diagonal in diagonals:
            mesh = rect_tri_mesh(size, size, n, n, diagonal)
            fibers = uniform_fiber_frame(mesh, angle)
            stim = [Stimulus(L1Ball((0.0, 0.0), stim_radius), 1.0, 0.0, 1.0)]
            cfg = MonodomainConfig(dt=dt, t_end=t_max, tau=tau, C_m=tissue.C_m,
                                   stimuli=stim)
            solver = MonodomainSolver(mesh, fibers,
                                      DiffusionSpec(tissue.sigma_f,
                                                    tissue.sigma_s,
                                                    chi=tissue.chi),
                                      create_model("FK3"), cfg)
            res = solver.run(threshold=0.9,
                             stop_when=_stop_after_activation(mesh, probes, 0.5))
            cv = conduction_velocity(res.activation, mesh, probes[0], probes[1])
            rows.append({"h": h, "diagonal": diagonal, "cv": cv})
    discrepancies = []
    for h in hs:
        vals = {r["diagonal"]: r["cv"] for r in rows if r["h"] == h}
        if len(vals) == 2:
            a, b = vals.values()
            discrepancies.append({"h": h, "discrepancy": abs(a - b)})
    if out_dir is not None:
        write_table_csv(Path(out_dir) / "orientation.csv",
                        ["h", "diagonal", "cv"],
                        [[r["h"], r["diagonal"], r["cv"]] for r in rows])
        if discrepancies:
            write_table_csv(Path(out_dir) / "orientation_discrepancy.csv",
                            ["h", "cv_discrepancy"],
                            [[d["h"], d["discrepancy"]] for d in discrepancies])
    return {"cv": rows, "discrepancy": discrepancies}


# ---------------------------------------------------------------------------
# spiral waves (S1-S2)
# ---------------------------------------------------------------------------

def spiral_test(tau: float = 0.0, scale: float = 0.25, h: float = 0.05,
                dt: float = 0.125, t_end: float = 1000.0, s2_time: float = 320.0,
                out_dir=None, snapshot_times=(), full_scale: bool = False,
                progress=None):
    """S1-S2 reentry on a square slab, desk-scaled by similarity.

    At linear scale s the conductivities are scaled by s^2, which maps the
    full-size solution onto the reduced domain with the time axis (and so
    the S2 timing, period, and action potential duration) unchanged.
    Reentry is detected as repeated unstimulated activations of the center
    probe; the presence of both front (Q > 0) and tail (Q < 0) regions
    after spiral formation is recorded as well.
    """
    if full_scale:
        scale, h = 1.0, 0.1
    size = 120.0 * scale
    sigma = 0.1 * scale * scale if not full_scale else 0.1
    n = int(round(size / h))
    mesh = rect_tri_mesh(size, size, n, n, "right")
    tissue = default_tissue("FK3")
    stim = [
        Stimulus(Box(ymax=5.0 * scale), 1.0, 0.0, 1.0),
        Stimulus(Box(xmax=60.0 * scale, ymax=70.0 * scale), 1.0, s2_time, 1.0),
    ]
    cfg = MonodomainConfig(dt=dt, t_end=t_end, tau=tau, C_m=tissue.C_m,
                           stimuli=stim)
    solver = MonodomainSolver(mesh, uniform_fiber_frame(mesh, math.pi / 2.0),
                              DiffusionSpec(sigma, sigma, chi=tissue.chi),
                              create_model("FK3"), cfg)
    center = (size / 2.0, size / 2.0)
    probe = ProbeSet(mesh, [center])
    snap_steps = {int(round(t / dt)) for t in snapshot_times}

    n_steps = int(round(t_end / dt))
    crossings = []          # upward 0.5-crossings of the center probe
    armed = True
    q_front = q_tail = False
    v_prev = float(probe.interpolate(solver.state.V)[0])
    for istep in range(n_steps):
        solver.step()
        v = float(probe.interpolate(solver.state.V)[0])
        if armed and v_prev < 0.5 <= v:
            crossings.append(solver.state.t)
            armed = False
        elif not armed and v < 0.2:
            armed = True
        v_prev = v
        if solver.state.t > s2_time + 2.0:
            q = solver.state.Q
            if not q_front and q.max() > 0.05:
                q_front = True
            if not q_tail and q.min() < -0.05:
                q_tail = True
        if out_dir is not None and (istep + 1) in snap_steps:
            write_vtk(Path(out_dir) / f"spiral_tau{tau:g}_t{solver.state.t:07.1f}.vtk",
                      mesh, {"V": solver.state.V, "Q": solver.state.Q})
        if progress is not None and (istep + 1) % 800 == 0:
            progress(solver.state.t)
    reentry = [t for t in crossings if t > s2_time + dt]
    result = {
        "tau": tau,
        "crossings": crossings,
        "reentrant_activations": len(reentry),
        "q_front_and_tail": bool(q_front and q_tail),
        "nan_free": bool(np.isfinite(solver.state.V).all()),
        "t_end": solver.state.t,
    }
    if out_dir is not None:
        write_table_csv(Path(out_dir) / f"spiral_tau{tau:g}.csv",
                        ["crossing_time"], [[float(t)] for t in crossings])
    return result


# ---------------------------------------------------------------------------
# virtual electrode
# ---------------------------------------------------------------------------

# Epicardial-sheet conductivities (mS/cm) over chi = 2000/cm with C_m = 1
# uF/cm^2, expressed here through chi = 20 so D = sigma/chi lands in mm^2/ms.
VEP_CHI = 20.0
VEP_SIGMA_I = (2.3172, 0.2435)
VEP_SIGMA_E = (1.5448, 1.0438)


def virtual_electrode_run(equal_anisotropy: bool = False, tau_i: float = 0.2,
                          tau_e: float = 0.2, amplitude: float = -100.0,
                          h: float = 0.1, dt: float = 0.01, t_end: float = 2.0,
                          out_dir=None):
    """Unipolar cathodal stimulation of an anisotropic sheet.

    The cathode sits over [-0.5, 0.5] x [-0.1, 0.1] mm at the center of a
    40 x 16 mm sheet with fibers along x; the return current is supplied by
    distant strips at the short edges, balanced against the discrete
    electrode area so no net current needs redistributing.  Returns the
    final state plus probe readings on the fiber axis (+-1 mm, where the
    classic virtual anodes form) and the transverse axis (+-0.5 mm, inside
    the depolarized lobe).
    """
    nx, ny = int(round(40.0 / h)), int(round(16.0 / h))
    mesh = rect_tri_mesh(40.0, 16.0, nx, ny, "right", origin=(-20.0, -8.0))
    fibers = uniform_fiber_frame(mesh, 0.0)
    intra = DiffusionSpec(*VEP_SIGMA_I, chi=VEP_CHI)
    if equal_anisotropy:
        lam = VEP_SIGMA_E[0] / VEP_SIGMA_I[0]
        extra = DiffusionSpec(VEP_SIGMA_I[0] * lam, VEP_SIGMA_I[1] * lam,
                              chi=VEP_CHI)
    else:
        extra = DiffusionSpec(*VEP_SIGMA_E, chi=VEP_CHI)

    cathode = Box(-0.5, 0.5, -0.1, 0.1)
    returns = [Box(xmax=-19.5), Box(xmin=19.5)]
    # balance the return amplitude against the discrete (mass-weighted)
    # electrode areas so the injected current nets to zero
    from ..fem import assemble_mass, lump_mass
    area = lump_mass(assemble_mass(mesh))
    a_cath = float(area[cathode.mask(mesh.nodes)].sum())
    a_ret = float(sum(area[r.mask(mesh.nodes)].sum() for r in returns))
    ret_amp = -amplitude * a_cath / a_ret
    stim_e = [Stimulus(cathode, amplitude, 0.0, t_end)]
    stim_e += [Stimulus(r, ret_amp, 0.0, t_end) for r in returns]

    cfg = BidomainConfig(dt=dt, t_end=t_end, tau_i=tau_i, tau_e=tau_e,
                         extracellular_stimuli=stim_e, linear_solver="direct")
    solver = BidomainSolver(mesh, fibers, intra, extra, create_model("FK3"), cfg)
    for _ in range(int(round(t_end / dt))):
        solver.step()

    V = solver.state.V
    x, y = mesh.nodes[:, 0], mesh.nodes[:, 1]
    probe = ProbeSet(mesh, [(1.0, 0.0), (-1.0, 0.0), (0.0, 0.5), (0.0, -0.5)])
    fiber_flank = probe.interpolate(V)[:2]
    transverse = probe.interpolate(V)[2:]
    near = (np.abs(x) <= 5.0) & (np.abs(y) <= 5.0)
    result = {
        "equal_anisotropy": equal_anisotropy,
        "V": V,
        "Ve": solver.state.Ve,
        "mesh": mesh,
        "v_max": float(V.max()),
        "fiber_flank_V": fiber_flank,
        "transverse_V": transverse,
        "near_cathode_min": float(V[near].min()),
    }
    if out_dir is not None:
        tag = "equal" if equal_anisotropy else "unequal"
        write_vtk(Path(out_dir) / f"vep_{tag}.vtk", mesh,
                  {"V": V, "Q": solver.state.Q, "Ve": solver.state.Ve})
        write_table_csv(Path(out_dir) / f"vep_{tag}_probes.csv",
                        ["probe", "V"],
                        [["fiber+1mm", float(fiber_flank[0])],
                         ["fiber-1mm", float(fiber_flank[1])],
                         ["transv+0.5mm", float(transverse[0])],
                         ["transv-0.5mm", float(transverse[1])],
                         ["near_min", result["near_cathode_min"]],
                         ["v_max", result["v_max"]]])
        write_table_csv(Path(out_dir) / f"vep_{tag}_field.csv",
                        ["node", "x", "y", "V"],
                        [[int(i), float(x[i]), float(y[i]), float(V[i])]
                         for i in range(mesh.n_nodes)])
    return result


# ---------------------------------------------------------------------------
# solver cost comparison
# ---------------------------------------------------------------------------

def cost_comparison(models=("AP", "FK3"), taus=(0.0, 0.4), grid: int = 100,
                    n_steps: int = 1000, dt: float = 0.05, out_dir=None):
    """Max CG iterations and reaction/diffusion wall shares per model and tau.

    Mirrors the serial cost table setup: a square grid, a plane-wave
    stimulus, symmetric-SOR preconditioned CG restarted from zero each
    step so iteration counts are comparable across runs.
    """
    rows = []
    for name in models:
        tissue = default_tissue(name)
        for tau in taus:
            mesh = rect_tri_mesh(10.0, 10.0, grid, grid, "right")
            stim = [Stimulus(Box(xmax=0.5), 1.0, 0.0, 1.0)]
            cfg = MonodomainConfig(dt=dt, t_end=n_steps * dt, tau=tau,
                                   C_m=tissue.C_m, stimuli=stim,
                                   linear_solver="cg", precond="ssor",
                                   warm_start=False)
            solver = MonodomainSolver(mesh, uniform_fiber_frame(mesh),
                                      DiffusionSpec(tissue.sigma_f,
                                                    tissue.sigma_s,
                                                    chi=tissue.chi),
                                      create_model(name), cfg)
            res = solver.run()
            total = res.reaction_seconds + res.diffusion_seconds
            rows.append({
                "model": name, "tau": tau,
                "max_cg_iterations": res.max_cg_iterations,
                "reaction_seconds": res.reaction_seconds,
                "diffusion_seconds": res.diffusion_seconds,
                "reaction_share": res.reaction_seconds / total,
            })
    if out_dir is not None:
        write_table_csv(Path(out_dir) / "cost.csv",
                        ["model", "tau", "max_cg_iterations",
                         "reaction_seconds", "diffusion_seconds",
                         "reaction_share"],
                        [[r["model"], r["tau"], r["max_cg_iterations"],
                          r["reaction_seconds"], r["diffusion_seconds"],
                          r["reaction_share"]] for r in rows])
    return rows
