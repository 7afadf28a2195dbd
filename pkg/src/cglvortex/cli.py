"""Command-line interface.

Commands: solve, sweep, expand, verify, physical.
Exit codes: 0 success, 1 validation error, 2 solver non-convergence
(solve only), 3 I/O error.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .errors import InvalidArgument, ToolkitError
from .quadrature import make_grid
from .reduction import (
    CoreParams,
    asymptotic_r,
    asymptotic_U,
    cubic_forcing,
    fixed_point_solve,
    project_mean,
)
from .greens import solvability_residual
from .direct import FdState, compare_branches, fd_solve, shoot_solve
from .physics import (
    asymptotic_R,
    asymptotic_omega,
    cgl_residual,
    extend_solution,
    mu_nu_from_rho,
    physical_from_r,
    rho_from_physical,
)
from .sweep import (
    SweepSpec,
    emit_results,
    mirror_conjugate,
    record_from_branch,
    run_sweep,
)

METHOD_ALIASES = {"fp": "fixed_point", "shoot": "shooting", "fd": "finite_difference"}


class _CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _CliError(message)


def _add_rho_eps(p, eps_required=False):
    p.add_argument("--rho-re", type=float, default=0.0)
    p.add_argument("--rho-im", type=float, default=0.0)
    p.add_argument("--eps-re", type=float, default=1.0)
    p.add_argument("--eps-im", type=float, default=0.0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cglvortex", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one parameter point")
    _add_rho_eps(p)
    p.add_argument("--method", choices=list(METHOD_ALIASES), default="fp")
    p.add_argument("--nodes", type=int, default=257)
    p.add_argument("--tol", type=float, default=1e-12)

    p = sub.add_parser("sweep", help="sweep the bifurcation parameter")
    p.add_argument("--mode", choices=["rect", "arg", "mod"], required=True)
    p.add_argument("--method", choices=list(METHOD_ALIASES), default="fp")
    p.add_argument("--eps-re", type=float, default=1.0)
    p.add_argument("--eps-im", type=float, default=0.0)
    p.add_argument("--nodes", type=int, default=257)
    p.add_argument("--re-min", type=float, default=-3.5)
    p.add_argument("--re-max", type=float, default=3.5)
    p.add_argument("--re-steps", type=int, default=15)
    p.add_argument("--im-min", type=float, default=0.0)
    p.add_argument("--im-max", type=float, default=1.5)
    p.add_argument("--im-steps", type=int, default=7)
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--arg-min", type=float, default=0.0)
    p.add_argument("--arg-max", type=float, default=float(np.pi))
    p.add_argument("--arg", dest="ray_arg", type=float, default=0.0)
    p.add_argument("--mod-min", type=float, default=1.0)
    p.add_argument("--mod-max", type=float, default=9.0)
    p.add_argument("--steps", type=int, default=None,
                   help="steps for arg/mod modes (defaults 64/32)")
    p.add_argument("--continue", dest="warm_start", action="store_true",
                   help="warm-start each point from its neighbor")
    p.add_argument("--mirror", action="store_true",
                   help="append conjugate-parameter records")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["csv", "json"], default="csv")

    p = sub.add_parser("expand", help="asymptotic branch data")
    _add_rho_eps(p)
    p.add_argument("--order", type=int, choices=[0, 1, 2], default=2)
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--nu", type=float, default=0.0)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--samples", type=int, default=33)

    p = sub.add_parser("verify", help="cross-check all three solvers")
    _add_rho_eps(p)
    p.add_argument("--nodes", type=int, default=257)

    p = sub.add_parser("physical", help="physical constants of one branch")
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--nu", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps-re", type=float, default=1.0)
    p.add_argument("--eps-im", type=float, default=0.0)
    p.add_argument("--nodes", type=int, default=257)
    return parser


def _solve_by_method(method, rho, eps, grid, tol):
    if method == "fixed_point":
        params = CoreParams(rho=rho, eps=eps, max_iter=800, tol_fp=tol)
        branch = fixed_point_solve(params, grid=grid)
        if not branch.converged and not branch.diverged:
            branch = fixed_point_solve(params, grid=grid, relaxation=0.5)
        return branch
    if method == "shooting":
        return shoot_solve(rho, eps, grid=grid)
    state = FdState(grid=grid, picard_tol=tol)
    return fd_solve(rho, eps, state=state)


def _branch_summary(branch):
    rec = record_from_branch(branch)
    grid = branch.grid
    d = rec.as_dict()
    d.update(
        eps_re=branch.params.eps.real,
        eps_im=branch.params.eps.imag,
        fp_residual=branch.fp_residual,
        grid={
            "n_nodes": grid.n_nodes,
            "x_min": float(grid.nodes[0]),
            "x_max": float(grid.nodes[-1]),
            "spacing": grid.spacing,
        },
        U_re=branch.U.values.real.tolist(),
        U_im=branch.U.values.imag.tolist(),
    )
    return d


def _cmd_solve(args) -> int:
    rho = complex(args.rho_re, args.rho_im)
    eps = complex(args.eps_re, args.eps_im)
    grid = make_grid(args.nodes)
    method = METHOD_ALIASES[args.method]
    branch = _solve_by_method(method, rho, eps, grid, args.tol)
    print(json.dumps(_branch_summary(branch), indent=2))
    return 0 if branch.converged else 2


def _cmd_sweep(args) -> int:
    kw = dict(
        method=METHOD_ALIASES[args.method],
        eps=complex(args.eps_re, args.eps_im),
        n_nodes=args.nodes,
        warm_start=args.warm_start,
        out=args.out,
    )
    if args.mode == "rect":
        spec = SweepSpec(
            mode="rectangle",
            re_min=args.re_min, re_max=args.re_max, re_steps=args.re_steps,
            im_min=args.im_min, im_max=args.im_max, im_steps=args.im_steps,
            **kw,
        )
    elif args.mode == "arg":
        spec = SweepSpec(
            mode="arg_sweep",
            radius=args.radius, arg_min=args.arg_min, arg_max=args.arg_max,
            arg_steps=args.steps if args.steps else 64,
            **kw,
        )
    else:
        spec = SweepSpec(
            mode="modulus_sweep",
            ray_arg=args.ray_arg, mod_min=args.mod_min, mod_max=args.mod_max,
            mod_steps=args.steps if args.steps else 32,
            **kw,
        )
    records = run_sweep(spec)
    if args.mirror:
        records = mirror_conjugate(records)
    emit_results(records, args.format, args.out)
    conv = sum(1 for r in records if r.converged)
    print(f"wrote {len(records)} records to {args.out} ({conv} converged)")
    return 0


def _cmd_expand(args) -> int:
    rho = complex(args.rho_re, args.rho_im)
    eps = complex(args.eps_re, args.eps_im)
    r = asymptotic_r(rho, eps, min(args.order, 1))
    xs = np.linspace(-np.pi / 2, np.pi / 2, args.samples)
    u = asymptotic_U(rho, eps, xs, args.order)
    out = {
        "order": args.order,
        "r_re": r.real,
        "r_im": r.imag,
        "R": asymptotic_R(eps, args.mu, args.nu, args.n),
        "omega": asymptotic_omega(eps, args.mu, args.nu, args.n),
        "U": {"x": xs.tolist(), "re": u.real.tolist(), "im": u.imag.tolist()},
    }
    print(json.dumps(out, indent=2))
    return 0


def _cmd_verify(args) -> int:
    rho = complex(args.rho_re, args.rho_im)
    eps = complex(args.eps_re, args.eps_im)
    grid = make_grid(args.nodes)
    h = grid.spacing
    zeta = abs(rho) * abs(eps) ** 2
    checks: list[tuple[str, float, float]] = []  # (name, value, bound)

    branches = {}
    for method in ("fixed_point", "shooting", "finite_difference"):
        branches[method] = _solve_by_method(method, rho, eps, grid, 1e-12)
    for name, br in branches.items():
        checks.append((f"converged[{name}]", 0.0 if br.converged else 1.0, 0.5))

    pair_tol_fd = max(1e-6, h * h * (1.0 + zeta)) * max(1.0, abs(eps))
    pair_tol_hi = 1e-6 * max(1.0, abs(eps))
    if all(b.converged for b in branches.values()):
        d1 = compare_branches(branches["fixed_point"], branches["shooting"])
        d2 = compare_branches(branches["fixed_point"], branches["finite_difference"])
        d3 = compare_branches(branches["shooting"], branches["finite_difference"])
        checks.append(("diff[fp,shoot]", d1, pair_tol_hi))
        checks.append(("diff[fp,fd]", d2, pair_tol_fd))
        checks.append(("diff[shoot,fd]", d3, pair_tol_fd))

        for name, br in branches.items():
            checks.append(
                (f"mean_free[{name}]", abs(project_mean(br.w)), 1e-10)
            )
        forcing = cubic_forcing(branches["fixed_point"].w, rho)
        checks.append(
            ("solvability[N(w)]",
             abs(solvability_residual(forcing)),
             1e-10 * max(1.0, forcing.sup_norm))
        )
        # gauge invariance of r under a quarter-turn of eps
        rot = _solve_by_method("fixed_point", rho, eps * 1j, grid, 1e-12)
        checks.append(
            ("gauge[r]", abs(rot.r - branches["fixed_point"].r), 1e-12 * max(1.0, abs(rho)))
        )
        fp = branches["fixed_point"]
        sol = extend_solution(fp, 1, 0.0, enforce_jump_gate=False)
        from .sweep import count_zeros, symmetry_defect

        zc, extra = count_zeros(sol.nodes, sol.values, 1)
        checks.append(("zero_count-2", abs(zc - 2), 0.5))
        checks.append(("extra_zeros", float(extra), 0.5))
        checks.append(("symmetry_defect", symmetry_defect(fp.U), 1e-8 * max(1.0, abs(eps))))
        try:
            mu, nu = mu_nu_from_rho(rho, 1)
        except InvalidArgument:
            print("SKIP  cgl_residual            (rho has no physical preimage)")
        else:
            phys = physical_from_r(fp.r, mu, nu, 1)
            sol_w = extend_solution(fp, 1, phys.omega, enforce_jump_gate=False)
            resid = cgl_residual(sol_w, phys)
            bound = 4.0 * h * h * max(1.0, zeta) * abs(complex(1, nu)) * max(1.0, abs(eps))
            checks.append(("cgl_residual", resid, bound))

    all_ok = True
    for name, value, bound in checks:
        ok = value <= bound
        all_ok &= ok
        print(f"{'PASS' if ok else 'FAIL'}  {name:24s} {value:.3e}  (bound {bound:.3e})")
    print("verify:", "PASS" if all_ok else "FAIL")
    return 0 if all_ok else 1


def _cmd_physical(args) -> int:
    eps = complex(args.eps_re, args.eps_im)
    rho = rho_from_physical(args.mu, args.nu, args.n)
    grid = make_grid(args.nodes)
    branch = _solve_by_method("fixed_point", rho, eps, grid, 1e-12)
    phys = physical_from_r(branch.r, args.mu, args.nu, args.n)
    out = {
        "rho_re": rho.real,
        "rho_im": rho.imag,
        "converged": bool(branch.converged),
        "r_re": branch.r.real,
        "r_im": branch.r.imag,
        "R": phys.R,
        "omega": phys.omega,
        "R_asymptotic": asymptotic_R(eps, args.mu, args.nu, args.n),
        "omega_asymptotic": asymptotic_omega(eps, args.mu, args.nu, args.n),
    }
    print(json.dumps(out, indent=2))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        if args.command == "solve":
            return _cmd_solve(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "expand":
            return _cmd_expand(args)
        if args.command == "verify":
            return _cmd_verify(args)
        if args.command == "physical":
            return _cmd_physical(args)
    except InvalidArgument as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ToolkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    return 1


if __name__ == "__main__":
    sys.exit(main())
