"""Command-line entry points.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 identity/acceptance check failure.
"""

import argparse
import os
import sys

import numpy as np

from .errors import ConfigError, KinhydroError


def _threads_env(n):
    if n and n > 0:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "NUMBA_NUM_THREADS"):
            os.environ.setdefault(var, str(n))


def cmd_transport(args):
    from .collision import CollisionWorkspace
    from .csvio import format_value
    from .linearized import assemble, transport_coefficients, transport_refinement
    from .velocity import build_grid

    print("# kinhydro transport-coeffs")
    print("n,v_max,sphere_order,nu,kappa,spectral_gap")
    rows = []
    ns = (12, 16, 20) if args.refine else (args.n,)
    for n in ns:
        grid = build_grid(n, args.vmax, args.sphere)
        ws = CollisionWorkspace(grid)
        op = assemble(grid, ws)
        tc = transport_coefficients(op)
        gap = op.spectral_gap()
        rows.append((n, grid.h, tc.nu, tc.kappa, gap))
        print(",".join(format_value(v) for v in
                       (n, args.vmax, args.sphere, tc.nu, tc.kappa, gap)))
    if args.refine:
        hs = [r[1] for r in rows]
        for label, idx in (("nu", 2), ("kappa", 3)):
            vals = [r[idx] for r in rows]
            rc, rf, drift, p = transport_refinement(vals, hs)
            print(f"# {label}_extrapolated = {format_value(rf)} "
                  f"(order {p:.2f}, pair drift {drift * 100:.3f}%)")
    return 0


def cmd_relax(args):
    from .collision import CollisionWorkspace, relax_homogeneous
    from .csvio import write_csv
    from .velocity import DistributionSlice, build_grid, maxwellian, moments

    grid = build_grid(args.n, args.vmax, args.sphere)
    ws = CollisionWorkspace(grid)
    u0 = np.array([args.u0, 0.0, 0.0])
    f0 = DistributionSlice(0.5 * (maxwellian(1.0, u0, 1.0, grid).values
                                  + maxwellian(1.0, -u0, 1.0, grid).values))
    history = relax_homogeneous(f0, args.dt, args.tfinal, ws,
                                record_every=args.record_every)
    mom = moments(f0, grid)
    m_eq = maxwellian(mom.rho, mom.u, mom.theta, grid)
    rows = []
    for slc, rep in history:
        l1 = grid.weight * np.abs(slc.values - m_eq.values).sum()
        rows.append((rep.time, rep.h_rel, rep.production, l1))
    write_csv(args.out, "relax",
              {"n": args.n, "v_max": args.vmax, "sphere_order": args.sphere,
               "dt": args.dt, "u0": args.u0},
              ["time", "h_rel", "production", "l1_distance"], rows)
    print(f"wrote {args.out}; final H = {rows[-1][1]:.3e}, "
          f"final L1 distance = {rows[-1][3]:.3e}")
    if rows[-1][3] > rows[0][3]:
        print("warning: no relaxation progress", file=sys.stderr)
    return 0


def _plan_from_args(args):
    from .config import RunConfig, echo_config, load_config

    if args.config:
        cfg = load_config(args.config)
    else:
        cfg = RunConfig()
        cfg.regime = args.regime
        if args.eps is not None:
            cfg.eps_list = (args.eps,)
        elif args.eps_list:
            cfg.eps_list = tuple(float(x) for x in args.eps_list.split(","))
        if args.initial_data:
            cfg.initial_data = args.initial_data
        else:
            cfg.initial_data = {
                "acoustic": "acoustic-wave",
                "stokes": "thermal-spot",
                "euler": "taylor-green",
                "navier-stokes": "taylor-green",
            }.get(args.regime, "shear-mode")
        if cfg.initial_data == "taylor-green":
            cfg.cells = (args.cells2d, args.cells2d)
            cfg.n_per_axis = 10
        if args.n:
            cfg.n_per_axis = args.n
        if args.cells:
            cfg.cells = tuple(int(x) for x in args.cells.split("x"))
        if args.dt:
            cfg.dt = args.dt
        if args.tfinal:
            cfg.t_final = args.tfinal
        if args.out:
            cfg.out_dir = args.out
        cfg.validate()
    _threads_env(getattr(cfg, "threads", 0))
    return cfg


def cmd_limit(args):
    from .config import echo_config
    from .harness import run_regime

    cfg = _plan_from_args(args)
    plan = cfg.to_plan()
    report = run_regime(plan)
    out_root = os.path.join(plan.out_dir, plan.regime_tag.value)
    echo_config(cfg, os.path.join(out_root, "config.txt"))
    failed = [r for r in report.results if r.failed]
    for r in failed:
        print(f"eps={r.eps:g} failed: {r.failed}", file=sys.stderr)
    for eps, err in report.max_errors():
        print(f"eps={eps:g} max joint error = {err:.4e}")
    if report.fitted_order is not None:
        print(f"fitted order p = {report.fitted_order:.3f} "
              f"+/- {report.fitted_order_ci:.3f}")
    print(f"report: {os.path.join(out_root, 'report.csv')}")
    return 3 if failed and not report.max_errors() else 0


def cmd_check_identities(args):
    from .collision import CollisionWorkspace, collide
    from .linearized import (a_pair_exact, a_pair_matrix, assemble,
                             dirichlet_form, q_quadratic_values)
    from .velocity import (DistributionSlice, build_grid, infinitesimal_maxwellian,
                           invariant_projector, maxwellian)

    grid = build_grid(args.n, args.vmax, 6)
    ws = CollisionWorkspace(grid)
    op = assemble(grid, ws)
    rng = np.random.default_rng(0)
    checks = []

    proj = invariant_projector(grid)
    x = rng.normal(size=grid.size)
    checks.append(("projector idempotent", np.abs(proj(proj(x)) - proj(x)).max(), 1e-12))

    f = DistributionSlice(np.abs(rng.normal(size=grid.size)) * grid.maxwellian_values)
    q = collide(f, ws)
    mom = np.abs(grid.invariants @ q.values * grid.weight).max()
    checks.append(("post-fixup conservation", mom, 1e-12))

    pair = a_pair_matrix(grid)
    worst = max(
        abs(pair[i, j, k, l] - a_pair_exact(i, j, k, l))
        for i in range(3) for j in range(3) for k in range(3) for l in range(3)
    )
    checks.append(("<A_ij A_kl> closed form", worst, 1e-3))

    gi = infinitesimal_maxwellian(0.3, (0.2, -0.1, 0.05), 0.15, grid).values
    qg = q_quadratic_values(gi, ws)
    lg = 0.5 * op.apply_values(gi * gi)
    wm = grid.weight * grid.maxwellian_values
    rel = np.sqrt(((qg - lg) ** 2 * wm).sum() / ((lg**2 * wm).sum()))
    checks.append(("Q(g,g) = L(g^2)/2", rel, 1e-2))

    a, b = rng.normal(size=(2, grid.size))
    sym = abs(op.inner(a, op.apply_values(b)) - op.inner(b, op.apply_values(a)))
    checks.append(("self-adjointness", sym / max(abs(op.inner(a, op.apply_values(b))), 1e-300), 1e-10))

    d = dirichlet_form(rng.normal(size=grid.size), op)
    checks.append(("Dirichlet form nonnegative", 0.0 if d >= 0 else -d, 1e-12))

    ok = True
    for name, val, tol in checks:
        status = "pass" if val <= tol else "FAIL"
        ok &= val <= tol
        print(f"{status}  {name}: {val:.3e} (tol {tol:g})")
    return 0 if ok else 4


def cmd_physical_kn(args):
    # Kn = 2 / (d^2 L rho_bar) for hard spheres of diameter d
    print(repr(2.0 / args.d2Lrho))
    return 0


def build_parser():
    p = argparse.ArgumentParser(
        prog="kinhydro",
        description="Discrete-velocity hard-sphere kinetic solver and "
                    "fluid-limit verification harness",
    )
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("transport-coeffs", help="viscosity/conductivity from the linearized operator")
    t.add_argument("--n", type=int, default=16)
    t.add_argument("--vmax", type=float, default=6.0)
    t.add_argument("--sphere", type=int, default=26)
    t.add_argument("--refine", action="store_true",
                   help="run n in {12,16,20} and extrapolate")
    t.set_defaults(fn=cmd_transport)

    r = sub.add_parser("relax", help="space-homogeneous relaxation from a bimodal mixture")
    r.add_argument("--n", type=int, default=12)
    r.add_argument("--vmax", type=float, default=6.0)
    r.add_argument("--sphere", type=int, default=6)
    r.add_argument("--dt", type=float, default=0.02)
    r.add_argument("--tfinal", type=float, default=10.0)
    r.add_argument("--u0", type=float, default=0.6)
    r.add_argument("--record-every", type=int, default=5)
    r.add_argument("--out", default="relax.csv")
    r.set_defaults(fn=cmd_relax)

    for name, help_ in (("limit", "single-epsilon limit run"),
                        ("sweep", "epsilon sweep per regime")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", help="key = value config file")
        s.add_argument("--regime", default="stokes",
                       choices=["acoustic", "stokes", "euler", "navier-stokes"])
        s.add_argument("--eps", type=float, default=None if name == "sweep" else 0.1)
        s.add_argument("--eps-list", default=None)
        s.add_argument("--n", type=int, default=0)
        s.add_argument("--cells", default=None)
        s.add_argument("--cells2d", type=int, default=32)
        s.add_argument("--dt", type=float, default=0.0)
        s.add_argument("--tfinal", type=float, default=0.0)
        s.add_argument("--initial-data", default=None, choices=INITIAL_CHOICES)
        s.add_argument("--out", default=None)
        s.set_defaults(fn=cmd_limit)

    c = sub.add_parser("check-identities", help="structural identity suite (exit 4 on failure)")
    c.add_argument("--n", type=int, default=12)
    c.add_argument("--vmax", type=float, default=6.0)
    c.set_defaults(fn=cmd_check_identities)

    k = sub.add_parser("physical-kn", help="Knudsen number from d^2 L rho_bar")
    k.add_argument("--d2Lrho", type=float, required=True)
    k.set_defaults(fn=cmd_physical_kn)
    return p


INITIAL_CHOICES = [None, "acoustic-wave", "shear-mode", "thermal-spot", "taylor-green"]


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except KinhydroError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
