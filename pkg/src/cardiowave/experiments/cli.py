"""Command-line entry point for the experiment harness."""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np


def _limit_threads(n: int) -> None:
    # sparse kernels are single-threaded; this caps the dense-BLAS pools so
    # runs stay reproducible and well-behaved on shared machines
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, str(n))


def _csv_floats(text: str):
    return tuple(float(t) for t in text.split(",") if t)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cardiowave",
        description="Monodomain/bidomain studies with relaxation fluxes")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--threads", type=int, default=1,
                        help="BLAS thread cap (default 1, reproducible)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a JSON experiment config")
    p.add_argument("config", type=Path)

    p = sub.add_parser("verify-speed",
                       help="1D front speeds vs the closed-form value")
    p.add_argument("--alphas", type=_csv_floats, default=(0.1, 0.2, 0.3))
    p.add_argument("--mus", type=_csv_floats, default=(0.0, 0.25, 0.5, 1.0, 2.0))
    p.add_argument("--dt", type=float, default=0.003653)
    p.add_argument("--h", type=float, default=0.03125)

    p = sub.add_parser("converge", help="space-time convergence study")
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--order", type=int, choices=(1, 2), default=2)
    p.add_argument("--reaction", choices=("mckean", "cubic"), default="mckean")
    p.add_argument("--tau", type=float, default=0.0)

    p = sub.add_parser("cv-tau", help="conduction velocity vs relaxation time")
    p.add_argument("--models", default="FK3,AP")
    p.add_argument("--taus", type=_csv_floats,
                   default=(0.0, 0.02, 0.03, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 1.0))
    p.add_argument("--dt", type=float, default=0.003125)

    p = sub.add_parser("anisotropy", help="CV ratios across conductivities")
    p.add_argument("--taus", type=_csv_floats, default=(0.0, 0.4, 1.0))

    p = sub.add_parser("orientation", help="fiber/mesh alignment benchmark")
    p.add_argument("--hs", type=_csv_floats, default=(0.24, 0.12, 0.06, 0.03))
    p.add_argument("--angle", type=float, default=-45.0,
                   help="fiber angle in degrees")
    p.add_argument("--diagonals", default="right,left")
    p.add_argument("--full-scale", action="store_true")

    p = sub.add_parser("spiral", help="S1-S2 spiral wave test")
    p.add_argument("--tau", type=float, default=0.0)
    p.add_argument("--t-end", type=float, default=1000.0)
    p.add_argument("--snapshots", type=_csv_floats, default=())
    p.add_argument("--full-scale", action="store_true")

    p = sub.add_parser("virtual-electrode", help="unipolar cathode test")
    p.add_argument("--equal-anisotropy", action="store_true")
    p.add_argument("--tau-i", type=float, default=0.2)
    p.add_argument("--tau-e", type=float, default=0.2)

    p = sub.add_parser("cost", help="CG iteration and timing comparison")
    p.add_argument("--models", default="AP,FK3")
    p.add_argument("--taus", type=_csv_floats, default=(0.0, 0.4))
    p.add_argument("--grid", type=int, default=100)
    p.add_argument("--steps", type=int, default=1000)

    args = parser.parse_args(argv)
    _limit_threads(args.threads)

    from . import studies
    from .config import ExperimentConfig, run_experiment

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    if args.command == "run":
        cfg = ExperimentConfig.from_json(args.config)
        res = run_experiment(cfg, out_dir=out_dir)
        print(f"finished at t={res.state.t:g}, outputs in {out_dir}")
    elif args.command == "verify-speed":
        rows = studies.verify_speed(alphas=args.alphas, mus=args.mus,
                                    h=args.h, dt=args.dt, out_dir=out_dir)
        worst = max(r["rel_err"] for r in rows)
        for r in rows:
            print(f"alpha={r['alpha']:<5g} mu={r['mu']:<5g} "
                  f"cv={r['cv']:.5f} exact={r['cv_exact']:.5f} "
                  f"err={r['rel_err'] * 100:.2f}%")
        print(f"worst relative error {worst * 100:.2f}%")
    elif args.command == "converge":
        res = studies.convergence_study(levels=args.levels,
                                        integrator_order=args.order,
                                        reaction=args.reaction, tau=args.tau,
                                        out_dir=out_dir)
        for i, h in enumerate(res["h"]):
            line = f"h={h:<9g} err_V={res['err_V'][i]:.4e} err_Q={res['err_Q'][i]:.4e}"
            if i:
                line += (f"  p_V={res['order_V'][i - 1]:.2f}"
                         f" p_Q={res['order_Q'][i - 1]:.2f}")
            print(line)
        print(f"fitted orders: V {res['fitted_order_V']:.2f}, "
              f"Q {res['fitted_order_Q']:.2f}")
    elif args.command == "cv-tau":
        rows = studies.cv_vs_tau_study(models=args.models.split(","),
                                       taus=args.taus, dt=args.dt,
                                       out_dir=out_dir)
        for r in rows:
            print(f"{r['model']:<5s} tau={r['tau']:<5g} cv={r['cv']:.5f}")
    elif args.command == "anisotropy":
        res = studies.anisotropy_study(taus=args.taus, out_dir=out_dir)
        for r in res["ratios"]:
            print(f"tau={r['tau']:<4g} v2/v1={r['v2_over_v1']:.4f} "
                  f"v3/v1={r['v3_over_v1']:.4f} v4/v1={r['v4_over_v1']:.4f}")
        print("matched tau:", {f"{k:g}": (f"{v:.3f}" if v else "none")
                               for k, v in res["matched_tau"].items()})
    elif args.command == "orientation":
        res = studies.orientation_benchmark(hs=args.hs,
                                            fiber_angle_deg=args.angle,
                                            diagonals=args.diagonals.split(","),
                                            out_dir=out_dir,
                                            full_scale=args.full_scale)
        for r in res["cv"]:
            print(f"h={r['h']:<6g} diagonal={r['diagonal']:<6s} cv={r['cv']:.5f}")
        for d in res["discrepancy"]:
            print(f"h={d['h']:<6g} |cv_right - cv_left|={d['discrepancy']:.5f}")
    elif args.command == "spiral":
        res = studies.spiral_test(tau=args.tau, t_end=args.t_end,
                                  out_dir=out_dir,
                                  snapshot_times=args.snapshots,
                                  full_scale=args.full_scale,
                                  progress=lambda t: print(f"  t={t:g}",
                                                           flush=True))
        print(f"tau={res['tau']:g}: {res['reentrant_activations']} reentrant "
              f"activations, fronts+tails={res['q_front_and_tail']}, "
              f"NaN-free={res['nan_free']}")
    elif args.command == "virtual-electrode":
        res = studies.virtual_electrode_run(
            equal_anisotropy=args.equal_anisotropy,
            tau_i=args.tau_i, tau_e=args.tau_e, out_dir=out_dir)
        print(f"equal_anisotropy={res['equal_anisotropy']} "
              f"v_max={res['v_max']:.3f} "
              f"fiber flanks V={np.round(res['fiber_flank_V'], 4)} "
              f"transverse V={np.round(res['transverse_V'], 4)} "
              f"near-cathode min={res['near_cathode_min']:.4f}")
    elif args.command == "cost":
        rows = studies.cost_comparison(models=args.models.split(","),
                                       taus=args.taus, grid=args.grid,
                                       n_steps=args.steps, out_dir=out_dir)
        for r in rows:
            print(f"{r['model']:<5s} tau={r['tau']:<4g} "
                  f"max CG iters={r['max_cg_iterations']:<4d} "
                  f"reaction share={r['reaction_share']:.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
