"""Command-line entry point.

    midiode cubic -1.7320508 -0.19245009
    midiode regions --grid 200 --format svg --out regions.svg
    midiode sweep config.json --out data/fig2
    midiode sweep --figure fig6 --grid 100

Exit codes: 0 success, 2 domain or precondition error, 3 numerical failure,
4 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import sweep as sw
from .model import DomainError, NumericalError

EXIT_OK, EXIT_DOMAIN, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4


def _grid(text):
    try:
        parts = [int(p) for p in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError("grid must be N or N,M") from None
    if not 1 <= len(parts) <= 2 or min(parts) < 2:
        raise argparse.ArgumentTypeError("grid must be N or N,M with counts >= 2")
    return parts


def _common(p, default_format="csv"):
    p.add_argument("--out", help="output path (stdout when omitted)")
    p.add_argument("--format", choices=sw.FORMATS, default=default_format)
    p.add_argument("--grid", type=_grid, help="sample count N, or N,M for planes")


def build_parser():
    ap = argparse.ArgumentParser(prog="midiode", description="Magnetically insulated diode toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cubic", help="roots and Theta branches for one (k_hat, beta_hat)")
    p.add_argument("k_hat", type=float)
    p.add_argument("beta_hat", type=float)
    _common(p)

    p = sub.add_parser("regions", help="region map over the (k_hat, beta_hat) plane")
    p.add_argument("--k-range", type=float, nargs=2, default=(-5.0, 5.0))
    p.add_argument("--beta-range", type=float, nargs=2, default=(-5.0, 5.0))
    p.add_argument("--focus", choices=("negative", "positive"))
    _common(p)

    p = sub.add_parser("boundary", help="the discriminant-zero curve beta_minus(k), beta_plus(k)")
    p.add_argument("--k-range", type=float, nargs=2, default=(-5.0, 5.0))
    _common(p)

    p = sub.add_parser("potential", help="effective potential profile D(x)")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--jx", type=float, default=1.0)
    p.add_argument("--x-end", type=float)
    _common(p)

    p = sub.add_parser("uv", help="coupled potentials u, v on the gap")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--jx", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--beta", type=float, help="default sqrt(2 j_x gamma)")
    p.add_argument("--x-end", type=float)
    _common(p)

    p = sub.add_parser("cl", help="Child-Langmuir current")
    p.add_argument("--jx", type=float, help="dimensionless current for the delta equation")
    p.add_argument("--voltage", type=float, help="anode voltage in volts")
    p.add_argument("--gap", type=float, default=1.0, help="gap (metres in physical mode)")
    _common(p, "json")

    p = sub.add_parser("tangent", help="tangent approximation theta(x)")
    p.add_argument("--theta-l", type=float, required=True)
    p.add_argument("--jx", type=float, default=1.0)
    p.add_argument("--k1", type=float, required=True)
    p.add_argument("--k2", type=float, required=True)
    p.add_argument("--branch-sign", type=int, choices=(-1, 1), default=1)
    _common(p)

    p = sub.add_parser("sweep", help="run a JSON sweep config or a figure preset")
    p.add_argument("config", nargs="?", help="sweep config JSON file")
    p.add_argument("--figure", choices=sorted(sw.FIGURES, key=lambda f: int(f[3:])))
    p.add_argument("--list", action="store_true", help="list figure presets")
    _common(p)
    return ap


def _cubic_dataset(k, b):
    from .cubic import solve
    from .thetad import classify_region, theta_branches

    r = solve((k, b))
    th = theta_branches(r)
    adm = {lbl for lbl, _ in th.admissible}
    phys = {lbl for lbl, _ in th.physical}
    cols = {"branch_id": [], "re": [], "im": [], "theta_re": [], "theta_im": [],
            "admissible": [], "physical": []}
    for i, u in enumerate(r.roots):
        lbl = f"u{i + 1}"
        t = u * u
        for key, v in zip(cols, (i, u.real, u.imag, t.real, t.imag, lbl in adm, lbl in phys)):
            cols[key].append(v)
    reg = classify_region((k, b))
    meta = {"k_hat": k, "beta_hat": b, "discriminant": r.discriminant, "case": r.case_tag,
            "n_physical": reg.n_physical}
    return sw.Dataset.from_columns("cubic", cols, meta)


def _cl_dataset(args):
    from . import childlangmuir as cl

    if args.voltage is not None:
        res = cl.physical_result(args.voltage, args.gap)
    elif args.jx is not None:
        res = cl.dimensionless_result(args.jx, args.gap)
    else:
        raise DomainError("cl needs --jx or --voltage")
    cols = {"mode": [res.mode], "delta": [res.delta], "K_delta": [res.K_delta], "j_cl": [res.j_cl]}
    ds = sw.Dataset.from_columns("child_langmuir", cols, {"constant": res.constant})
    return ds


def _n(grid, default):
    return grid[0] if grid else default


def _plane(args):
    n = args.grid or [sw.DEFAULT_2D]
    m = n[1] if len(n) > 1 else n[0]
    return {"k_hat": (*args.k_range, n[0]), "beta_hat": (*args.beta_range, m)}


def _dataset(args):
    cmd = args.command
    if cmd == "cubic":
        return _cubic_dataset(args.k_hat, args.beta_hat)
    if cmd == "regions":
        return sw.run(sw.SweepSpec("region_map", {}, _plane(args), focus=args.focus))
    if cmd == "boundary":
        return sw.run(sw.SweepSpec("boundary_curve", {}, {"k_hat": (*args.k_range, _n(args.grid, sw.DEFAULT_1D))}))
    if cmd == "potential":
        rng = {}
        if args.x_end is not None:
            rng["x"] = (0.0, args.x_end, _n(args.grid, sw.DEFAULT_1D))
        elif args.grid:
            from .potential import build_profile
            rng["x"] = (0.0, build_profile(args.gamma, args.jx, n=16).x_end, args.grid[0])
        return sw.run(sw.SweepSpec("potential_profile", {"gamma": args.gamma, "j_x": args.jx}, rng))
    if cmd == "uv":
        fixed = {"gamma": args.gamma, "j_x": args.jx, "alpha": args.alpha}
        if args.beta is not None:
            fixed["beta"] = args.beta
        elif args.gamma < 0:
            raise DomainError("--beta is required when gamma < 0")
        rng = {"x": (0.0, args.x_end, 2)} if args.x_end is not None else {}
        return sw.run(sw.SweepSpec("uv_profile", fixed, rng))
    if cmd == "cl":
        return _cl_dataset(args)
    if cmd == "tangent":
        fixed = {"theta_L": args.theta_l, "j_x": args.jx, "k1": args.k1, "k2": args.k2,
                 "branch_sign": args.branch_sign}
        return sw.run(sw.SweepSpec("tangent_scan", fixed, {"x": (0.0, 1.0, _n(args.grid, sw.DEFAULT_1D))}))
    raise AssertionError(cmd)


def _sweep(args):
    if args.list:
        for name, spec in sw.FIGURES.items():
            print(name, spec.mode, spec.quantity, sorted(spec.range))
        return EXIT_OK
    if (args.config is None) == (args.figure is None):
        raise DomainError("give either a config file or --figure")
    spec = sw.FIGURES[args.figure] if args.figure else sw.SweepSpec.load(args.config)
    spec = sw.with_grid(spec, args.grid)
    ds = sw.run(spec)
    if args.out is None:
        sys.stdout.write(sw.emit(ds, args.format))
    else:
        out = Path(args.out)
        formats = spec.outputs if args.config else (args.format,)
        if out.suffix[1:] in sw.FORMATS and len(formats) == 1:
            sw.emit(ds, formats[0], out)
        else:
            sw.write_outputs(ds, out, formats)
    return EXIT_OK


def _main(argv):
    args = build_parser().parse_args(argv)
    if args.command == "sweep":
        return _sweep(args)
    ds = _dataset(args)
    text = sw.emit(ds, args.format)
    if args.out is None:
        sys.stdout.write(text)
    else:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    return EXIT_OK


def main(argv=None) -> int:
    try:
        return _main(argv)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
