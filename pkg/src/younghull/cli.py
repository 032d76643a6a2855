"""Command-line front end.

Every subcommand builds a RunRecord (command, canonical inputs, outputs,
timings, versions) and prints it in the requested format.  Exit codes:
0 ok, 1 verification failure, 2 bad input, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, acceptance, frames, oracle, r4closed, volumes
from .trigcurve import CurveSpecError, TrigCurve, convexity_certificate, parse_curve

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3


class InputError(ValueError):
    pass


@dataclass
class RunRecord:
    command: str
    inputs: dict
    outputs: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    versions: str = f"younghull {__version__}"
    rows: list | None = None  # tabular payload (skeleton, ruling), kept out of the JSON record
    columns: list | None = None

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "timings": self.timings,
            "versions": self.versions,
        }

    def to_json(self) -> str:
        return json.dumps(_plain(self.to_dict()), sort_keys=True, allow_nan=True)


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def fmt(value) -> str:
    """Human formatting: 9 significant digits for floats."""
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.9g}"
    if isinstance(value, (list, tuple, np.ndarray)):
        return "(" + ", ".join(fmt(v) for v in value) + ")"
    return str(value)


def _parse_point(text: str, dim: int | None = None) -> np.ndarray:
    try:
        vals = np.array([float(v) for v in text.replace(" ", "").split(",") if v != ""])
    except ValueError as exc:
        raise InputError(f"cannot parse point {text!r}: {exc}") from exc
    if dim is not None and vals.size != dim:
        raise InputError(f"point has {vals.size} coordinates, curve lives in R^{dim}")
    if not np.all(np.isfinite(vals)):
        raise InputError("point coordinates must be finite")
    return vals


def _diagram(text: str | None, n: int) -> frames.YoungDiagram:
    if text is None:
        return frames.YoungDiagram((n,))
    try:
        d = frames.YoungDiagram.parse(text)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    if d.area != n:
        raise InputError(f"diagram {d} has area {d.area}, curve needs area {n}")
    return d


def _grid(args, default):
    g = args.grid if args.grid is not None else default
    if g < 1:
        raise InputError("--grid must be positive")
    return g


# --- subcommands -----------------------------------------------------------


def cmd_volume(args, curve: TrigCurve) -> RunRecord:
    n = curve.half_dim
    if args.hull == "eh-closed":
        name, _, rest = args.curve.partition(":")
        try:
            k, l = (int(v) for v in rest.split(","))
        except ValueError:
            k = l = 0
        if name != "lissajoux" or l != k + 1:
            raise InputError("eh-closed needs --curve lissajoux:k,k+1")
        value = r4closed.vol_eh_closed(k)
        return RunRecord("volume", {"hull": args.hull}, {"value": value, "signed_raw": -value, "k": k})
    hull = args.hull or "eh"
    if hull not in ("ch", "eh"):
        raise InputError(f"volume does not support --hull {hull}")
    spec = volumes.QuadratureSpec(_grid(args, volumes.default_points(n)), n)
    fn = volumes.vol_convex_hull if hull == "ch" else volumes.vol_elliptic_hull
    res = fn(curve, spec, threads=args.threads)
    convex = convexity_certificate(curve).verdict
    if not convex:
        print("warning: curve fails the convexity certificate; hull volumes may be meaningless", file=sys.stderr)
    return RunRecord(
        "volume",
        {"hull": hull, "grid": spec.to_dict()},
        {"value": res.value, "signed_raw": res.signed_raw, "diagnostics": res.diagnostics, "convex_certificate": convex},
    )


def cmd_length(args, curve):
    samples = _grid(args, 1024)
    return RunRecord("length", {"samples": samples}, {"length": volumes.arc_length(curve, samples)})


def cmd_iso(args, curve):
    n = curve.half_dim
    spec = volumes.QuadratureSpec(_grid(args, volumes.default_points(n)), n)
    length = volumes.arc_length(curve)
    vol = volumes.vol_convex_hull(curve, spec, threads=args.threads).value
    ratio = volumes.isoperimetric_ratio(curve, spec, threads=args.threads)
    return RunRecord("iso", {"grid": spec.to_dict()}, {"length": length, "ch_volume": vol, "ratio": ratio})


def cmd_gamma(args, curve):
    if args.point is None:
        raise InputError("gamma needs --point t1,...,tk (angles)")
    ts = _parse_point(args.point)
    if ts.size > curve.half_dim or ts.size < 1:
        raise InputError(f"need between 1 and {curve.half_dim} angles")
    value = frames.gamma_map_repeated(curve, ts, curve.half_dim)
    return RunRecord("gamma", {"angles": ts.tolist()}, {"point": value.tolist()})


def _sample_columns(n, dim):
    return [f"t{i + 1}" for i in range(n)] + [f"x{i + 1}" for i in range(dim)] + ["stratum"]


def cmd_skeleton(args, curve):
    g = args.grid_per_axis or _grid(args, 64)
    samples, failures = oracle.skeleton_sample(curve, g)
    rows = [list(s.ts) + s.point.tolist() + [str(s.stratum)] for s in samples]
    rec = RunRecord("skeleton", {"grid_per_axis": g}, {"rows": len(rows), "failures": failures})
    rec.rows, rec.columns = rows, _sample_columns(curve.half_dim, curve.dim)
    return rec


def cmd_ruling(args, curve):
    diagram = _diagram(args.diagram, curve.half_dim)
    g = args.grid_per_axis or _grid(args, 32)
    pts, skipped = oracle.export_ruling(curve, diagram, g, args.rays, args.seed)
    width = max((len(p.ts) for p in pts), default=diagram.length)
    rows = [list(p.ts) + p.point.tolist() + [str(p.diagram)] for p in pts]
    rec = RunRecord(
        "ruling",
        {"diagram": str(diagram), "grid": g, "rays": args.rays, "seed": args.seed},
        {"rows": len(rows), "skipped": skipped},
    )
    rec.rows, rec.columns = rows, _sample_columns(width, curve.dim)
    return rec


def cmd_member(args, curve):
    if args.point is None:
        raise InputError("member needs --point x1,...,x2n")
    p = _parse_point(args.point, curve.dim)
    hull = args.hull or "eh"
    out: dict
    if hull == "ch":
        samples = _grid(args, 512)
        inside = oracle.membership_ch(curve, p, samples)
        out = {"inside": inside}
        inputs = {"hull": "ch", "samples": samples}
    elif hull == "yh":
        diagram = _diagram(args.diagram, curve.half_dim)
        g = args.grid_per_axis or _grid(args, 64)
        margin = oracle.membership_yh(curve, diagram, p, g)
        out = {"margin": margin, "inside": margin >= -oracle.MEMBERSHIP_TOL}
        inputs = {"hull": "yh", "diagram": str(diagram), "grid_per_axis": g}
    elif hull == "eh":
        g = _grid(args, 512)
        margin = oracle.membership_eh(curve, p, g)
        out = {"margin": margin, "inside": margin >= -oracle.MEMBERSHIP_TOL}
        inputs = {"hull": "eh", "grid": g}
    else:
        raise InputError(f"member does not support --hull {hull}")
    inputs["point"] = p.tolist()
    out["verdict"] = "inside" if out["inside"] else "outside"
    return RunRecord("member", inputs, out)


def cmd_mc(args, curve):
    hull = args.hull or "eh"
    box = oracle.bounding_box(curve)
    inputs = {"hull": hull, "trials": args.trials, "seed": args.seed}
    if hull == "eh":
        g = _grid(args, 512)
        member = oracle.EllipticHullOracle(curve, g)
        inputs["grid"] = g
    elif hull == "ch":
        # facets of the same inscribed sample polytope the LP test uses
        g = _grid(args, 512)
        member = oracle.PointCloudHull(oracle.curve_samples(curve, g))
        inputs["samples"] = g
    elif hull == "yh":
        diagram = _diagram(args.diagram, curve.half_dim)
        g = args.grid_per_axis or _grid(args, 64)
        member = oracle.YoungHullOracle(curve, diagram, g)
        inputs.update(diagram=str(diagram), grid_per_axis=g)
    elif hull == "skeleton":
        g = args.grid_per_axis or _grid(args, 128)
        samples, _ = oracle.skeleton_sample(curve, g)
        member = oracle.PointCloudHull(np.array([s.point for s in samples]))
        inputs["grid_per_axis"] = g
    else:
        raise InputError(f"mc does not support --hull {hull}")
    est = oracle.mc_volume(member, box, args.trials, args.seed, threads=args.threads)
    return RunRecord("mc", inputs, est.to_dict())


def cmd_nesting(args, curve):
    report = oracle.nesting_check(curve, args.trials, args.seed, grid_per_axis=args.grid_per_axis)
    out = {
        "violations": report.violations,
        "excluded": report.excluded,
        "checked": report.checked,
        "diagrams": [str(d) for d in report.diagrams],
        "pairs": report.per_pair,
        "inside": report.inside,
    }
    return RunRecord("nesting", {"points": args.trials, "seed": args.seed}, out)


def cmd_verify(args, _curve=None):
    only = None
    if args.only:
        try:
            only = sorted({int(v) for v in args.only.split(",")})
        except ValueError as exc:
            raise InputError(f"bad --only list {args.only!r}") from exc
        if any(not 1 <= i <= len(acceptance.CRITERIA) for i in only):
            raise InputError(f"--only entries must be in 1..{len(acceptance.CRITERIA)}")
    results = []
    for crit in acceptance.CRITERIA if only is None else [acceptance.CRITERIA[i - 1] for i in only]:
        res = crit(args.quick)
        results.append(res)
        if args.format == "human":
            print(res.summary(), flush=True)
    rec = RunRecord(
        "verify",
        {"quick": args.quick, "only": only},
        {"passed": all(r.passed for r in results), "criteria": [r.to_dict() for r in results]},
    )
    rec.rows = [[r.number, r.title, "PASS" if r.passed else "FAIL", r.seconds] for r in results]
    rec.columns = ["criterion", "title", "status", "seconds"]
    return rec


COMMANDS = {
    "volume": cmd_volume,
    "length": cmd_length,
    "iso": cmd_iso,
    "gamma": cmd_gamma,
    "skeleton": cmd_skeleton,
    "ruling": cmd_ruling,
    "member": cmd_member,
    "mc": cmd_mc,
    "nesting": cmd_nesting,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="younghull", description="Young hulls of closed convex curves in R^2n.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--curve", help="gen-ellipse:n, lissajoux:k,l or a JSON curve file")
    common.add_argument("--hull", choices=["ch", "eh", "eh-closed", "yh", "skeleton"])
    common.add_argument("--diagram", help="Young diagram such as 2,1 (default: the single row n)")
    common.add_argument("--grid", type=int, help="grid points per axis / samples")
    common.add_argument("--grid-per-axis", type=int, help="angle grid for tuple sweeps")
    common.add_argument("--trials", type=int, default=100_000)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--point", help="comma separated coordinates (or angles for gamma)")
    common.add_argument("--rays", type=int, default=8, help="points per spanning subspace (ruling)")
    common.add_argument("--format", choices=["human", "csv", "jsonl"], default="human")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out", help="write the record (or table) to this file instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "verify":
            p.add_argument("--quick", action="store_true", help="reduced suite, under a minute")
            p.add_argument("--only", help="comma separated criterion numbers")
    return parser


def _flatten(prefix, value, out):
    if isinstance(value, dict):
        for k in sorted(value):
            _flatten(f"{prefix}.{k}" if prefix else str(k), value[k], out)
    else:
        out.append((prefix, value))


def render(rec: RunRecord, fmt_name: str) -> str:
    if fmt_name == "jsonl":
        if rec.rows is not None and rec.command != "verify":
            lines = [json.dumps(_plain(dict(zip(rec.columns, row))), sort_keys=True) for row in rec.rows]
            return "\n".join(lines) + ("\n" if lines else "")
        return rec.to_json() + "\n"
    if fmt_name == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        if rec.rows is not None:
            writer.writerow(rec.columns)
            writer.writerows([[repr(v) if isinstance(v, float) else v for v in row] for row in rec.rows])
        else:
            writer.writerow(["key", "value"])
            items: list = []
            _flatten("", _plain(rec.outputs), items)
            writer.writerows([(k, repr(v) if isinstance(v, float) else json.dumps(v)) for k, v in items])
        return buf.getvalue()
    lines = [f"{rec.command}  ({rec.versions})"]
    items = []
    _flatten("", _plain(rec.outputs), items)
    lines += [f"  {k}: {fmt(v)}" for k, v in items if k != "criteria"]
    if rec.rows is not None and rec.command in ("skeleton", "ruling"):
        lines.append("  " + "  ".join(rec.columns))
        for row in rec.rows[:20]:
            lines.append("  " + "  ".join(fmt(v) for v in row))
        if len(rec.rows) > 20:
            lines.append(f"  ... {len(rec.rows) - 20} more rows (use --format csv/jsonl for all)")
    lines.append(f"  wall_ms: {rec.timings.get('wall_ms', 0):.1f}")
    return "\n".join(lines) + "\n"


def run(argv=None) -> tuple[int, RunRecord | None]:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        if args.threads < 1:
            raise InputError("--threads must be >= 1")
        if args.trials < 1:
            raise InputError("--trials must be >= 1")
        curve = None
        if args.command != "verify":
            if not args.curve:
                raise InputError("--curve is required")
            curve = parse_curve(args.curve)
        rec = COMMANDS[args.command](args, curve)
        if args.curve:
            rec.inputs["curve"] = args.curve
    except (InputError, CurveSpecError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT, None
    except (ArithmeticError, oracle.FeasibilityError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC, None
    rec.timings["wall_ms"] = (time.perf_counter() - start) * 1000.0
    text = render(rec, args.format)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        if args.format != "human":
            print(render(rec, "human"), end="")
    elif not (args.command == "verify" and args.format == "human"):
        print(text, end="")
    else:
        print(f"{'all criteria passed' if rec.outputs['passed'] else 'some criteria FAILED'}")
    if args.command == "verify" and not rec.outputs["passed"]:
        return EXIT_VERIFY, rec
    return EXIT_OK, rec


def main(argv=None) -> int:
    code, _ = run(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
