"""Command-line front end.

Exit status: 0 on success, 1 on invalid input (bad flags, malformed files,
invalid knots), 2 on numerical failure (near double points, non-finite values).
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import catalog
from .energy import check_double_points, total_energy
from .geometry import KnotError, NumericalError, normalize_length, resample_arclength
from .io import format_knotfile, format_obj, parse_knotfile, parse_obj, read_knot, write_knot
from .kernels import get_kernel
from .mm import e_mm
from .optimize import AnnealConfig, anneal
from .variation import residual_field


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def fmt(x: float) -> str:
    return f"{x:.9g}"


def _curve(path, samples: int):
    knot = read_knot(path)
    check_double_points(knot)
    knot, _ = normalize_length(knot)
    return resample_arclength(knot, samples)


def cmd_energy(args, out):
    k = get_kernel(args.kernel)
    rep = total_energy(_curve(args.knotfile, args.samples), k)
    out.write("kernel,n,value\n")
    out.write(f"{rep.kernel_name},{rep.n},{fmt(rep.value)}\n")


def cmd_mm(args, out):
    knot = read_knot(args.knotfile)
    check_double_points(knot)
    rep = e_mm(knot, args.samples, workers=args.threads)
    if not rep.validity:
        raise KnotError(f"vertex angles not obtuse at {rep.obtuse.violations[:10]}; E_Mm undefined")
    out.write(f"E_Mm,{fmt(rep.value)}\n")
    if args.per_point:
        rows = ["t,f_Mm"] + [f"{fmt(t)},{fmt(f)}" for t, f in rep.per_point]
        Path(args.per_point).write_text("\n".join(rows) + "\n")


def cmd_residual(args, out):
    k = get_kernel(args.kernel)
    field = residual_field(_curve(args.knotfile, args.samples), k)
    out.write("t,V1,V2\n")
    for t, a, b in zip(field.params, field.v1, field.v2):
        out.write(f"{fmt(t)},{fmt(a)},{fmt(b)}\n")
    out.write(f"defect,{fmt(field.defect)}\n")


def cmd_minimize(args, out):
    cfg = AnnealConfig.from_file(args.config) if args.config else AnnealConfig()
    if args.objective:
        cfg.objective = args.objective
    if args.seed is not None:
        cfg.seed = args.seed
    if cfg.objective != "mm":
        get_kernel(cfg.objective)
    res = anneal(read_knot(args.start), cfg)
    write_knot(res.best_knot, args.out)
    if args.trace:
        rows = ["iteration,energy,best"] + [f"{i},{fmt(e)},{fmt(b)}" for i, e, b in res.trace]
        Path(args.trace).write_text("\n".join(rows) + "\n")
    out.write("objective,iterations,accepted,best_energy\n")
    out.write(f"{cfg.objective},{cfg.iterations},{res.accepted_moves},{fmt(res.best_energy)}\n")


def cmd_catalog(args, out):
    if args.action == "list":
        out.write("name,class\n")
        for name, entry in catalog.PRESETS.items():
            out.write(f"{name},{entry.expected_class}\n")
        return
    if not args.name:
        raise UsageError("catalog build: --name is required")
    knot = catalog.build(args.name, args.samples)
    text = format_knotfile(knot)
    if args.out:
        Path(args.out).write_text(text)
    else:
        out.write(text)


def cmd_convert(args, out):
    src = Path(args.input)
    if args.obj:
        Path(args.obj).write_text(format_obj(read_knot(src)))
    elif args.knot:
        Path(args.knot).write_text(format_knotfile(parse_obj(src.read_text())))
    else:
        raise UsageError("convert: give --obj <out.obj> or --knot <out.knot>")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="knotenergy", description="Knot energies, Mm-energy and normal-form search.")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1, help="worker cap (default: all cores)")
    p.add_argument("--seed", type=int, default=None, help="random seed (default 0, or the config's seed)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("energy", help="pairwise energy E_f")
    s.add_argument("--kernel", required=True)
    s.add_argument("--samples", type=int, default=512)
    s.add_argument("knotfile")
    s.set_defaults(func=cmd_energy)

    s = sub.add_parser("mm", help="Mm-energy")
    s.add_argument("--samples", type=int, default=None, help="base points (default 4 per vertex)")
    s.add_argument("--per-point", metavar="CSV")
    s.add_argument("knotfile")
    s.set_defaults(func=cmd_mm)

    s = sub.add_parser("residual", help="extremality residuals V1, V2 and the defect")
    s.add_argument("--kernel", required=True)
    s.add_argument("--samples", type=int, default=512)
    s.add_argument("knotfile")
    s.set_defaults(func=cmd_residual)

    s = sub.add_parser("minimize", help="simulated annealing")
    s.add_argument("--objective", default=None, help="mm or a kernel name (overrides the config)")
    s.add_argument("--config")
    s.add_argument("--out", required=True)
    s.add_argument("--trace")
    s.add_argument("start")
    s.set_defaults(func=cmd_minimize)

    s = sub.add_parser("catalog", help="built-in knots")
    s.add_argument("action", choices=["list", "build"])
    s.add_argument("--name")
    s.add_argument("--samples", type=int, default=256)
    s.add_argument("--out")
    s.set_defaults(func=cmd_catalog)

    s = sub.add_parser("convert", help="knotfile <-> OBJ polyline")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--obj", help="write this OBJ file from a knotfile")
    g.add_argument("--knot", help="write this knotfile from an OBJ file")
    s.add_argument("input")
    s.set_defaults(func=cmd_convert)
    return p


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        err.write(f"{exc}\n")
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=err)
    try:
        args.func(args, out)
    except NumericalError as exc:
        err.write(f"numerical error: {exc}\n")
        return 2
    except (UsageError, KnotError, ValueError, OSError) as exc:
        err.write(f"error: {exc}\n")
        return 1
    return 0


def main() -> None:
    sys.exit(run())
