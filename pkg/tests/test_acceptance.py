"""Acceptance suite: one test per criterion, each printing a PASS line.

Protocols and tolerances are fixed here; several runs are large (the
orientation refinement series and the two spiral runs dominate) so the
whole module takes on the order of a few hours of CPU.  Run it with
``pytest tests/test_acceptance.py -v -s``.
"""
import math
from pathlib import Path

import numpy as np
import pytest

from cardiowave import analytic as an
from cardiowave.bidomain import BidomainConfig, BidomainSolver
from cardiowave.experiments import studies
from cardiowave.ionic import create_model
from cardiowave.mesh import DiffusionSpec, line_mesh, uniform_fiber_frame
from cardiowave.monodomain import MonodomainConfig, MonodomainSolver
from cardiowave.stimulus import Interval, Stimulus

RESULTS = Path(__file__).resolve().parent / "_acceptance_out"
RESULTS.mkdir(exist_ok=True)


def note(line: str):
    print(f"\n{line}")


# --------------------------------------------------------------------------
# A1 / A2: exact speed and the signal-speed bound
# --------------------------------------------------------------------------

@pytest.fixture(scope="module")
def speed_rows():
    return studies.verify_speed(alphas=(0.1, 0.2, 0.3),
                                mus=(0.0, 0.25, 0.5, 1.0, 2.0),
                                h=0.03125, dt=0.003653,
                                probes=(30.0, 32.0), threshold=0.9,
                                out_dir=RESULTS)


def test_a1_exact_speed(speed_rows):
    worst = 0.0
    for r in speed_rows:
        assert r["rel_err"] < 0.05, (
            f"alpha={r['alpha']} mu={r['mu']}: cv={r['cv']:.5f} "
            f"exact={r['cv_exact']:.5f} err={r['rel_err']:.2%}")
        worst = max(worst, r["rel_err"])
    note(f"A1 PASS exact speed: 15 cases within 5% (worst {worst:.2%})")


def test_a2_speed_bound(speed_rows):
    checked = 0
    for r in speed_rows:
        if r["mu"] > 0:
            assert r["cv"] < math.sqrt(1.0 / r["mu"])
            checked += 1
    note(f"A2 PASS speed bound: {checked} measured CVs below sqrt(1/mu)")


# --------------------------------------------------------------------------
# A3: convergence orders
# --------------------------------------------------------------------------

def test_a3_convergence_orders():
    def run(order, tau, reaction):
        return studies.convergence_study(levels=4, integrator_order=order,
                                         reaction=reaction, tau=tau,
                                         out_dir=RESULTS)

    hyp2 = run(2, 1.0, "mckean")
    assert 1.7 <= hyp2["fitted_order_V"] <= 2.3
    assert 0.7 <= hyp2["fitted_order_Q"] <= 1.3
    par2 = run(2, 0.0, "mckean")
    assert 0.7 <= par2["fitted_order_V"] <= 1.3
    cub2 = run(2, 0.0, "cubic")
    assert 1.7 <= cub2["fitted_order_V"] <= 2.3
    o1_orders = []
    for tau, reaction in ((1.0, "mckean"), (0.0, "mckean"), (0.0, "cubic")):
        res = run(1, tau, reaction)
        o1_orders.append(res["fitted_order_V"])
        assert 0.7 <= res["fitted_order_V"] <= 1.3, (tau, reaction, res)
    note("A3 PASS convergence orders: "
         f"hyperbolic o2 V {hyp2['fitted_order_V']:.2f} / Q "
         f"{hyp2['fitted_order_Q']:.2f}; parabolic o2 pwl "
         f"{par2['fitted_order_V']:.2f}; cubic {cub2['fitted_order_V']:.2f}; "
         f"o1 {['%.2f' % p for p in o1_orders]}")


# --------------------------------------------------------------------------
# A4: CV enhancement at small relaxation times
# --------------------------------------------------------------------------

@pytest.fixture(scope="module")
def cv_tau_rows():
    return studies.cv_vs_tau_study(models=("FK3", "AP"),
                                   taus=studies.DEFAULT_TAUS,
                                   out_dir=RESULTS)


def test_a4_cv_enhancement(cv_tau_rows):
    for model in ("FK3", "AP"):
        cvs = {r["tau"]: r["cv"] for r in cv_tau_rows if r["model"] == model}
        base = cvs[0.0]
        peak = max(cv for tau, cv in cvs.items() if 0.0 < tau <= 0.5)
        assert peak > base, f"{model}: no CV enhancement ({peak} <= {base})"
        assert cvs[1.0] < base, f"{model}: CV(1 ms) not below CV(0)"
    note("A4 PASS CV enhancement: both FK3 and AP(alpha=0.1) exceed the "
         "parabolic CV for some tau in (0, 0.5] and fall below it at 1 ms")


# --------------------------------------------------------------------------
# A5: anisotropy ratios
# --------------------------------------------------------------------------

def test_a5_anisotropy():
    res = studies.anisotropy_study(taus=(0.0, 0.4, 1.0), out_dir=RESULTS)
    refs = {"v2_over_v1": 1 / math.sqrt(2), "v3_over_v1": 0.5,
            "v4_over_v1": 1 / math.sqrt(8)}
    series = {k: [] for k in refs}
    for row in res["ratios"]:
        for key, ref in refs.items():
            assert abs(row[key] - ref) / ref < 0.05, (row, key)
            series[key].append(row[key])
    for key, vals in series.items():
        spread = (max(vals) - min(vals)) / min(vals)
        assert spread <= 0.05, (key, vals)
    cvs = {(r["sigma"], r["tau"]): r["cv"] for r in res["speeds"]}
    s4 = 0.0125
    assert abs(cvs[(s4, 0.4)] - cvs[(s4, 0.0)]) / cvs[(s4, 0.0)] < 0.02
    note("A5 PASS anisotropy: ratios within 5% of 1/sqrt2, 1/2, 1/sqrt8 for "
         "tau in {0, 0.4, 1.0}; spread <= 5%; sigma4 CV(0.4) within 2% of CV(0)")


# --------------------------------------------------------------------------
# A6: bidomain reduces to the monodomain oracle
# --------------------------------------------------------------------------

def test_a6_monodomain_reduction():
    lam, tau = 2.0, 0.4
    mesh = line_mesh(50.0, 1000)
    stim = [Stimulus(Interval(24.5, 25.5), 1.0, 0.03, 1.0)]
    bc = BidomainConfig(dt=0.01, t_end=40.0, tau_i=tau, tau_e=tau, stimuli=stim)
    b = BidomainSolver(mesh, uniform_fiber_frame(mesh), DiffusionSpec(1.0),
                       DiffusionSpec(lam), create_model("McKean", alpha=0.1), bc)
    cv_b = studies.conduction_velocity(b.run(threshold=0.9).activation,
                                       mesh, 30.0, 32.0)
    mc = MonodomainConfig(dt=0.01, t_end=40.0,
                          tau=an.monodomain_tau(tau, tau, lam), stimuli=stim)
    m = MonodomainSolver(mesh, uniform_fiber_frame(mesh),
                         DiffusionSpec(lam / (lam + 1.0)),
                         create_model("McKean", alpha=0.1), mc)
    cv_m = studies.conduction_velocity(m.run(threshold=0.9).activation,
                                       mesh, 30.0, 32.0)
    rel = abs(cv_b - cv_m) / cv_m
    assert rel < 0.02
    note(f"A6 PASS monodomain reduction: bidomain CV {cv_b:.4f} vs effective "
         f"monodomain {cv_m:.4f} ({rel:.2%})")


# --------------------------------------------------------------------------
# A7: virtual electrode sign pattern
# --------------------------------------------------------------------------

def test_a7_virtual_electrode():
    une = studies.virtual_electrode_run(equal_anisotropy=False, out_dir=RESULTS)
    tol = 1e-3 * une["v_max"]
    assert np.all(une["transverse_V"] > tol), une["transverse_V"]
    assert np.all(une["fiber_flank_V"] < -tol), une["fiber_flank_V"]
    eq = studies.virtual_electrode_run(equal_anisotropy=True, out_dir=RESULTS)
    tol_eq = 1e-3 * eq["v_max"]
    assert eq["near_cathode_min"] >= -tol_eq, eq["near_cathode_min"]
    note("A7 PASS virtual electrode: unequal anisotropy depolarizes the "
         f"transverse probes ({une['transverse_V'][0]:+.2f}) and "
         f"hyperpolarizes the fiber-axis flanks ({une['fiber_flank_V'][0]:+.2f}); "
         "equal-anisotropy control has no sub-rest region near the cathode")


# --------------------------------------------------------------------------
# A8: solver cost ordering
# --------------------------------------------------------------------------

def test_a8_cost_ordering():
    rows = studies.cost_comparison(models=("AP", "FK3"), taus=(0.0, 0.4),
                                   grid=100, n_steps=1000, out_dir=RESULTS)
    by = {(r["model"], r["tau"]): r for r in rows}
    for model in ("AP", "FK3"):
        para, hyp = by[(model, 0.0)], by[(model, 0.4)]
        assert hyp["max_cg_iterations"] < para["max_cg_iterations"], model
        assert hyp["reaction_share"] > para["reaction_share"], model
    note("A8 PASS cost ordering: hyperbolic max CG iterations "
         f"{[by[(m, 0.4)]['max_cg_iterations'] for m in ('AP', 'FK3')]} < "
         f"parabolic {[by[(m, 0.0)]['max_cg_iterations'] for m in ('AP', 'FK3')]}; "
         "reaction wall share larger under relaxation for both models")


# --------------------------------------------------------------------------
# A9: finite propagation speed
# --------------------------------------------------------------------------

def test_a9_finite_propagation():
    tau, sigma, r0, amp = 0.5, 1.0, 2.0, 0.05
    mesh = line_mesh(50.0, 800)
    h = 50.0 / 800
    cfg = MonodomainConfig(dt=0.0025, t_end=2.0, tau=tau)
    solver = MonodomainSolver(mesh, uniform_fiber_frame(mesh),
                              DiffusionSpec(sigma),
                              create_model("McKean", alpha=0.3), cfg)
    x = mesh.nodes[:, 0]
    u = np.clip((x - 25.0) / r0, -1.0, 1.0)
    bump = amp * np.cos(u * np.pi / 2) ** 4
    bump[np.abs(x - 25.0) >= r0] = 0.0
    solver.state.V[:] = bump
    c_s = math.sqrt(sigma / (tau * 1.0))
    worst = 0.0
    while solver.state.t < cfg.t_end - 1e-12:
        solver.step()
        radius = r0 + c_s * solver.state.t + 3.0 * h
        outside = np.abs(x - 25.0) > radius
        leak = float(np.max(np.abs(solver.state.V[outside]), initial=0.0))
        worst = max(worst, leak / amp)
        assert leak < 1e-6 * amp, (solver.state.t, leak)
    note(f"A9 PASS finite propagation: support inside r0 + c_s t + 3h at every "
         f"step to t=2 (worst leak {worst:.1e} of amplitude)")


# --------------------------------------------------------------------------
# A10: orientation benchmark
# --------------------------------------------------------------------------

def test_a10_orientation_refinement():
    res = studies.orientation_benchmark(hs=(0.24, 0.12, 0.06, 0.03),
                                        out_dir=RESULTS)
    d = [row["discrepancy"] for row in res["discrepancy"]]
    assert len(d) == 4
    assert all(a > b for a, b in zip(d, d[1:])), d
    assert d[0] >= 3.0 * d[-1], d
    note("A10 PASS orientation: transverse CV discrepancy between diagonal "
         f"orientations falls monotonically {['%.4f' % v for v in d]} "
         f"(240um/30um ratio {d[0] / d[-1]:.1f}x)")


# --------------------------------------------------------------------------
# A11: spiral smoke test
# --------------------------------------------------------------------------

def test_a11_spiral_reentry():
    summaries = []
    for tau in (0.0, 0.4):
        r = studies.spiral_test(tau=tau, t_end=1000.0, out_dir=RESULTS)
        assert r["nan_free"], f"tau={tau}: NaN before t_end"
        assert r["reentrant_activations"] >= 2, (
            f"tau={tau}: only {r['reentrant_activations']} reentrant "
            f"activations (crossings {r['crossings']})")
        assert r["q_front_and_tail"], f"tau={tau}: Q fronts/tails missing"
        summaries.append(f"tau={tau:g}: {r['reentrant_activations']}")
    note("A11 PASS spiral: sustained reentry with Q fronts and tails, "
         "NaN-free to t_end (" + "; ".join(summaries) + ")")


# --------------------------------------------------------------------------
# A12: figure rendering (secondary component)
# --------------------------------------------------------------------------

def test_a12_figures():
    cardiofigs = pytest.importorskip(
        "cardiofigs", reason="secondary figures package not installed")
    from cardiofigs import FigureSpec, render

    speed_csv = RESULTS / "speed.csv"
    conv_csv = RESULTS / "convergence_mckean_o2_tau1.csv"
    cvtau_csv = RESULTS / "cv_tau.csv"
    aniso_csv = RESULTS / "anisotropy_ratios.csv"
    for path in (speed_csv, conv_csv, cvtau_csv, aniso_csv):
        assert path.exists(), f"{path} missing (run A1/A3/A4/A5 first)"

    out = RESULTS / "figures"
    notes = render(FigureSpec("convergence", [conv_csv], out / "conv.png"))
    ref = studies.convergence_study(levels=4, integrator_order=2,
                                    reaction="mckean", tau=1.0)
    assert notes["mckean_o2_tau1:slope_V"] == pytest.approx(
        ref["fitted_order_V"], abs=0.05)
    assert notes["mckean_o2_tau1:slope_Q"] == pytest.approx(
        ref["fitted_order_Q"], abs=0.05)

    produced = []
    for kind, src in (("speed", speed_csv), ("cv_tau", cvtau_csv),
                      ("anisotropy", aniso_csv)):
        a = out / f"{kind}_a.png"
        b = out / f"{kind}_b.png"
        render(FigureSpec(kind, [src], a))
        render(FigureSpec(kind, [src], b))
        assert a.read_bytes() == b.read_bytes(), f"{kind} not deterministic"
        produced.append(kind)
    a = out / "conv_rerun.png"
    render(FigureSpec("convergence", [conv_csv], a))
    assert a.read_bytes() == (out / "conv.png").read_bytes()
    note("A12 PASS figures: convergence slope annotations match the fitted "
         f"orders within 0.05; byte-identical PNGs for {produced + ['convergence']}")
