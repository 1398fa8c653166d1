"""Command-line interface: machine-readable data behind every harness.

Subcommands emit CSV for grids/sweeps and JSON for structured single
results; plotting is left to external tooling.  All defaults reproduce
the reference experiment settings, so a bare invocation yields the data
behind the corresponding study.  Exit codes: 0 success, 2 usage error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Sequence

import numpy as np

from . import harmonic, hmc, nls, stability
from .methods import MethodCoefficients, method_names, method_registry, named_method
from .processing import ProcessedMethod, processor_for
from .stability import T_AS_A, T_AS_B

OUTDIR_ENV = "TRISPLIT_OUTDIR"

NLS_CSV_HEADER = "method,role,processing,h,error"
HARMONIC_CSV_HEADER = "h,theta_over_h,xi,delta"
AH_CSV_HEADER = "z,ah"


class NumericalFailure(RuntimeError):
    pass


def _out_path(path: str | None) -> str | None:
    if path is None:
        return None
    outdir = os.environ.get(OUTDIR_ENV)
    if outdir and not os.path.isabs(path):
        return os.path.join(outdir, path)
    return path


def _emit(text: str, path: str | None) -> None:
    target = _out_path(path)
    if target is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        os.makedirs(os.path.dirname(target) or ".", exist_ok=True)
        with open(target, "w", encoding="utf-8") as fh:
            fh.write(text)


def _parse_role(role: str) -> str:
    return {"A": T_AS_A, "B": T_AS_B, T_AS_A: T_AS_A, T_AS_B: T_AS_B}[role]


def _parse_floats(text: str) -> list[float]:
    return [float(tok) for tok in text.replace(",", " ").split()]


def _parse_range(text: str) -> tuple[float, float]:
    lo, hi = (float(tok) for tok in text.split(":"))
    return lo, hi


def cmd_methods_list(args: argparse.Namespace) -> int:
    entries = []
    for entry in method_registry():
        coeffs = MethodCoefficients(entry["a"], entry["b"])
        entry["h_max"] = stability.stability_interval(coeffs).h_max
        entries.append(entry)
    _emit(json.dumps(entries, indent=2), args.out)
    return 0


def cmd_stability(args: argparse.Namespace) -> int:
    report = stability.stability_interval(MethodCoefficients(args.a, args.b))
    _emit(report.to_json(indent=2), args.out)
    return 0


def cmd_stability_map(args: argparse.Namespace) -> int:
    rows = stability.stability_map(args.a_range, args.b_range, args.res)
    _emit(stability.stability_map_csv(rows), args.out)
    return 0


def cmd_harmonic_sweep(args: argparse.Namespace) -> int:
    desc = named_method(args.method)
    role = _parse_role(args.role)
    if args.ah_curve:
        z = np.linspace(0.0, args.z_max, args.points)
        ah = stability.stability_polynomial(desc.coeffs, z)
        lines = [AH_CSV_HEADER]
        lines += [f"{zi:.17g},{ai:.17g}" for zi, ai in zip(z, ah)]
        _emit("\n".join(lines) + "\n", args.out)
        return 0
    h_list = args.h_list if args.h_list else [0.2, 0.1, 0.05, 0.025]
    lines = [HARMONIC_CSV_HEADER]
    for h in h_list:
        an = harmonic.analyze(desc.coeffs, h, role)
        delta = harmonic.energy_error_step(desc.coeffs, h, args.q, args.p, role)
        lines.append(f"{h:.17g},{an.theta / h:.17g},{an.xi:.17g},{delta:.17g}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_nls_converge(args: argparse.Namespace) -> int:
    disc = nls.SPECTRAL if args.disc == "spectral" else nls.CENTRAL_DIFFERENCE
    grid = nls.default_grid(args.problem, disc)
    if args.nodes:
        grid = nls.GridSpec(grid.x_left, grid.x_right, args.nodes, disc)
    h_list = args.h_list if args.h_list else list(nls.default_h_list(disc))
    role = _parse_role(args.role)
    lines = [NLS_CSV_HEADER]
    for name in args.methods:
        desc = named_method(name)
        for processed in ([False, True] if args.processed == "both" else [args.processed == "yes"]):
            if processed and desc.lam is None:
                continue
            rows = nls.convergence_run(
                desc.coeffs, processed, args.problem, grid, role, h_list
            )
            for row in rows:
                lines.append(
                    f"{name},{args.role},{int(processed)},{row.h:.17g},{row.error:.17g}"
                )
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_hmc_run(args: argparse.Namespace) -> int:
    kind, _, dim = args.target.partition(":")
    target = hmc.builtin_targets(kind, int(dim) if dim else None)
    desc = named_method(args.method)
    method = desc.coeffs
    if args.processed:
        method = ProcessedMethod(desc.coeffs, processor_for(desc))
    config = hmc.ChainConfig(
        h=args.h,
        steps_per_trajectory=args.steps,
        n_chains=args.chains,
        burn_in=args.burn_in,
        samples=args.samples,
        beta=args.beta,
        seed=args.seed,
    )
    stats = hmc.run_chains(target, method, config)
    payload = {"method": args.method, "h": args.h, **stats.as_dict()}
    _emit(json.dumps(payload, indent=2), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trisplit",
        description="Palindromic three-stage splitting integrators: analysis and experiment drivers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("methods-list", help="JSON registry of named methods")
    p.add_argument("--out")
    p.set_defaults(func=cmd_methods_list)

    p = sub.add_parser("stability", help="stability report for one (a, b)")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("stability-map", help="CSV raster of h_max and curve residuals")
    p.add_argument("--a-range", type=_parse_range, default=(-0.5, 1.0))
    p.add_argument("--b-range", type=_parse_range, default=(-0.5, 1.0))
    p.add_argument("--res", type=int, default=60)
    p.add_argument("--out")
    p.set_defaults(func=cmd_stability_map)

    p = sub.add_parser("harmonic-sweep", help="CSV of h, theta/h, xi, delta for one method")
    p.add_argument("--method", required=True, choices=sorted(method_names()))
    p.add_argument("--h-list", type=_parse_floats, default=None)
    p.add_argument("--role", default="A", choices=["A", "B"])
    p.add_argument("--q", type=float, default=0.7, help="probe position for delta")
    p.add_argument("--p", type=float, default=0.4, help="probe momentum for delta")
    p.add_argument("--ah-curve", action="store_true", help="emit z, A_h(z) samples instead")
    p.add_argument("--z-max", type=float, default=40.0)
    p.add_argument("--points", type=int, default=400)
    p.add_argument("--out")
    p.set_defaults(func=cmd_harmonic_sweep)

    p = sub.add_parser("nls-converge", help="CSV of L2 errors vs h for the NLS references")
    p.add_argument("--problem", required=True, choices=["breather", "soliton"])
    p.add_argument("--disc", default="spectral", choices=["spectral", "fd"])
    p.add_argument("--role", default="A", choices=["A", "B"])
    p.add_argument("--methods", type=lambda s: s.split(","), default=["Strang"])
    p.add_argument("--h-list", type=_parse_floats, default=None)
    p.add_argument("--nodes", type=int, default=None)
    p.add_argument("--processed", default="no", choices=["no", "yes", "both"])
    p.add_argument("--out")
    p.set_defaults(func=cmd_nls_converge)

    p = sub.add_parser("hmc-run", help="JSON acceptance statistics for an HMC run")
    p.add_argument("--target", default="gaussian:27", help="name or name:dimension")
    p.add_argument("--method", default="BlCaSa", choices=sorted(method_names()))
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--steps", type=int, default=8)
    p.add_argument("--chains", type=int, default=20)
    p.add_argument("--burn-in", type=int, default=200)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--processed", action="store_true", help="(refused; for diagnostics)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_hmc_run)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FloatingPointError, RuntimeError) as exc:
        print(f"trisplit: error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
