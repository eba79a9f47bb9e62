"""Command-line front end: ``pkmdesign {analyze,map,modes,synth}``.

Exit codes: 0 ok, 1 input error, 2 out of reach, 3 unsupported operation,
4 infeasible synthesis spec. Every failure prints one line starting ``error:``.
"""

import argparse
import os
import sys

import numpy as np

from . import io
from .errors import (
    InfeasibleSpecError,
    MechanismFileError,
    NoAssemblyError,
    OutOfReachError,
    PKMError,
    UnsupportedOperationError,
)
from .kinetostatics import evaluate
from .mechanisms import (
    Kind,
    default_working_mode,
    enumerate_assembly_modes,
    enumerate_working_modes,
    inverse_kinematics,
)
from .synthesis import SynthesisSpec, synthesize_orthoglide
from .workspace import Axis, FactorBounds, Region, dextrous_region, sweep_grid

EXIT_OK, EXIT_INPUT, EXIT_REACH, EXIT_UNSUPPORTED, EXIT_INFEASIBLE = 0, 1, 2, 3, 4

REGION_HELP = ("sampling axis as AXIS=MIN:MAX:COUNT, repeated once per pose coordinate "
               "(x, y[, z] or x, y[, phi] for the 3-RPR; phi defaults to 0). "
               "COUNT=1 with MIN=MAX fixes the coordinate.")


class CliError(Exception):
    def __init__(self, message, code=EXIT_INPUT):
        super().__init__(message)
        self.code = code


def _floats(text, what):
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise CliError(f"{what}: expected comma-separated numbers, got {text!r}") from None


def _axis(text):
    try:
        name, spec = text.split("=", 1)
        lo, hi, count = spec.split(":")
        return name.strip(), Axis(float(lo), float(hi), int(count))
    except ValueError as exc:
        raise CliError(f"--region {text!r}: {exc if '=' in text else 'expected AXIS=MIN:MAX:COUNT'}") from None


def _region(model, specs):
    axes = dict(_axis(s) for s in specs or [])
    names = model.pose_axes
    if model.kind is Kind.THREE_RPR:
        axes.setdefault("phi", Axis.point(0.0))
    unknown = set(axes) - set(names)
    if unknown:
        raise CliError(f"--region: unknown axis {sorted(unknown)[0]!r} for {model.kind.value}")
    missing = [n for n in names if n not in axes]
    if missing:
        raise CliError(f"--region: missing axis {missing[0]!r}")
    return Region(tuple(axes[n] for n in names))


def _mode(model, text):
    if text is None:
        return default_working_mode(model)
    signs = [int(v) for v in _floats(text, "--mode")]
    return signs


def _bounds(args):
    if (args.lo is None) != (args.hi is None):
        raise CliError("--lo and --hi must be given together")
    if args.lo is None:
        return None
    return FactorBounds(args.lo, args.hi)


def _emit(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def cmd_analyze(args):
    model = io.load_model(args.model)
    pose = np.array(_floats(args.pose, "--pose"))
    mode = _mode(model, args.mode)
    joints = inverse_kinematics(model, pose, mode)
    km, rep = evaluate(model, pose, joints, tol=args.tol, characteristic_length=args.char_length)
    doc = {
        "kind": model.kind.value,
        "pose": pose,
        "working_mode": list(mode),
        "joints": joints,
        "within_limits": bool(model.within_limits(joints)),
        "matrices": {"A": km.A, "B": km.B, "J": km.J},
        "sigma": rep.sigma,
        "kappa": rep.kappa,
        "ellipsoid": None if rep.ellipsoid is None else {
            "axes": rep.ellipsoid.axes, "semi_lengths": rep.ellipsoid.semi_lengths},
        "class": rep.classification.value,
    }
    if model.kind is Kind.THREE_RPR:
        doc["characteristic_length"] = args.char_length
        doc["rotation_gain"] = rep.rotation_gain
    _emit(io.dumps(doc), args.output)


def cmd_map(args):
    model = io.load_model(args.model)
    region = _region(model, args.region)
    bounds = _bounds(args)
    grid = sweep_grid(model, region, _mode(model, args.mode), characteristic_length=args.char_length)
    mask = dextrous_region(grid, bounds) if bounds is not None else None
    if args.output in (None, "-"):
        io.write_grid_csv(model, grid, sys.stdout, mask)
    else:
        with open(args.output, "w", newline="") as fh:
            io.write_grid_csv(model, grid, fh, mask)
    if args.plot:
        from .plotting import plot_grid

        plot_grid(model, grid, args.plot, metric=args.metric, bounds=bounds)


def cmd_modes(args):
    model = io.load_model(args.model)
    if (args.pose is None) == (args.joints is None):
        raise CliError("give exactly one of --pose or --joints")
    if args.pose is not None:
        pose = np.array(_floats(args.pose, "--pose"))
        entries = []
        for mode in enumerate_working_modes(model):
            try:
                q = inverse_kinematics(model, pose, mode)
                entries.append({"signs": list(mode), "reachable": True, "joints": q,
                                "within_limits": bool(model.within_limits(q))})
            except OutOfReachError:
                entries.append({"signs": list(mode), "reachable": False, "joints": None,
                                "within_limits": False})
        doc = {"kind": model.kind.value, "pose": pose, "working_modes": entries}
    else:
        joints = np.array(_floats(args.joints, "--joints"))
        poses = enumerate_assembly_modes(model, joints)
        doc = {"kind": model.kind.value, "joints": joints,
               "assembly_modes": [{"index": i + 1, "pose": p} for i, p in enumerate(poses)]}
    _emit(io.dumps(doc), args.output)


def cmd_synth(args):
    bounds = FactorBounds(args.lo, args.hi)
    result = synthesize_orthoglide(SynthesisSpec(args.cube, bounds, args.lattice))
    os.makedirs(args.out_dir, exist_ok=True)
    stem = os.path.join(args.out_dir, args.name)
    io.save_model(result.model, stem + ".json")
    report = result.report()
    io.write_json(report, stem + "_report.json")
    if args.plot:
        from .plotting import plot_grid

        c, e = result.cube_center, result.cube_edge
        region = Region((Axis(c[0] - e, c[0] + e, 81), Axis(c[1] - e, c[1] + e, 81), Axis.point(c[2])))
        grid = sweep_grid(result.model, region, (-1, -1, -1))
        plot_grid(result.model, grid, stem + "_section.png", metric="kappa", bounds=bounds,
                  cube=((c[0] - e / 2, c[1] - e / 2), e))
    sys.stdout.write(io.dumps(report))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def build_parser():
    parser = _Parser(
        prog="pkmdesign",
        description="Kinetostatic analysis and Orthoglide synthesis for parallel kinematic machines.",
        epilog="Negative values for --mode must be attached with '=', e.g. --mode=-1,1.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="kinetostatic report at one pose (JSON)")
    p.add_argument("model", help="mechanism description file (JSON)")
    p.add_argument("--pose", required=True, help="comma-separated pose, e.g. 0,4 or 0,0,0")
    p.add_argument("--mode", help="working-mode signs, e.g. --mode=-1,1 (default per kind)")
    p.add_argument("--tol", type=float, default=1e-9, help="singularity tolerance (default 1e-9)")
    p.add_argument("--char-length", type=float, help="3-RPR characteristic length to homogenise J")
    p.add_argument("-o", "--output", help="output file (default stdout)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("map", help="metric map over a grid (CSV)")
    p.add_argument("model")
    p.add_argument("--region", action="append", metavar="AXIS=MIN:MAX:COUNT", help=REGION_HELP)
    p.add_argument("--mode", help="working-mode signs (default per kind)")
    p.add_argument("--lo", type=float, help="lower amplification-factor bound; adds a dextrous column")
    p.add_argument("--hi", type=float, help="upper amplification-factor bound")
    p.add_argument("--char-length", type=float, help="3-RPR characteristic length")
    p.add_argument("-o", "--output", help="CSV file (default stdout)")
    p.add_argument("--plot", metavar="PNG", help="also render a section heat map to this file")
    p.add_argument("--metric", default="kappa", choices=["kappa", "sigma_min", "sigma_max"],
                   help="metric shown by --plot")
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("modes", help="working modes at a pose or assembly modes for joints (JSON)")
    p.add_argument("model")
    p.add_argument("--pose")
    p.add_argument("--joints")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_modes)

    p = sub.add_parser("synth", help="size an Orthoglide for a prescribed cube")
    p.add_argument("--cube", type=float, required=True, help="prescribed cube edge [mm]")
    p.add_argument("--lo", type=float, default=0.6)
    p.add_argument("--hi", type=float, default=1.7)
    p.add_argument("--lattice", type=int, default=9, help="verification points per cube edge")
    p.add_argument("--out-dir", default=".", help="directory for the mechanism file and report")
    p.add_argument("--name", default="orthoglide", help="output file stem")
    p.add_argument("--plot", action="store_true", help="also render <name>_section.png")
    p.set_defaults(func=cmd_synth)
    return parser


def _fail(kind, exc, code):
    message = " ".join(str(exc).split())
    sys.stderr.write(f"error: {kind}: {message}\n")
    return code


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        args.func(args)
    except CliError as exc:
        return _fail("input", exc, exc.code)
    except MechanismFileError as exc:
        return _fail("input", exc, EXIT_INPUT)
    except OutOfReachError as exc:
        return _fail("out-of-reach", exc, EXIT_REACH)
    except UnsupportedOperationError as exc:
        return _fail("unsupported", exc, EXIT_UNSUPPORTED)
    except InfeasibleSpecError as exc:
        return _fail("infeasible", exc, EXIT_INFEASIBLE)
    except NoAssemblyError as exc:
        return _fail("no-assembly", exc, EXIT_INPUT)
    except (PKMError, ValueError, OSError) as exc:
        return _fail("input", exc, EXIT_INPUT)
    return EXIT_OK


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
