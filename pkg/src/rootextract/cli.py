"""Command-line front end: ``rootextract extract | eval | gen``.

Exit status is 0 on success, 2 for bad usage or unreadable input and 1 for
anything unexpected.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import synth
from .costmap import EmptyLCCError, EmptySegmentationError, ExtractionConfig
from .evaluate import DEFAULT_SPACING, DEFAULT_TOLERANCE, match_samples, resample, score_samples
from .pipeline import COST_MAPS, AutoStartError, run_pipeline
from .rootgraph_io import GraphFormatError, read_graph, write_graph
from .volume import VolumeError, read_volume, write_volume

log = logging.getLogger("rootextract")

STOCK = {
    "tube": lambda n: synth.straight_tube_spec(n, length=n - 4),
    "gapped-tube": lambda n: synth.straight_tube_spec(n, length=n - 4, gap=4),
    "y": lambda n: synth.y_junction_spec(n),
}

_HELP = {
    "gamma": "intensity threshold separating root from gap voxels",
    "omega": "maximum path cost kept in the connected component",
    "gap_len": "longest run of gap voxels that may be bridged (0 disables)",
    "w_rad": "weight of the radius term in the voxel cost",
    "epsilon": "cost floor",
    "beta": "dilation multiplier for the control volumes, in [1.1, 2.0]",
    "delta": "Douglas-Peucker tolerance in voxels (0 disables)",
    "cut_z": "ignore quench points on the shoot side of this slice",
    "fill_ratio_seg": "sphere fill ratio for the segmentation radius map",
    "fill_ratio_lcc": "sphere fill ratio for the component radius map",
    "quench_threshold": "dominated neighbours needed for a quench point",
    "gap_penalty": "cost multiplier for sub-threshold voxels",
}


class InputError(Exception):
    """Bad user input; reported without a traceback and exit status 2."""


def _position(text: str) -> tuple[int, int, int]:
    try:
        parts = tuple(int(v) for v in text.split(","))
    except ValueError:
        parts = ()
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected x,y,z integers, got {text!r}")
    return parts


def _config_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("extraction parameters")
    for f in dataclasses.fields(ExtractionConfig):
        if f.name == "shoot_at_low_z":
            continue
        kind = int if f.name in ("gap_len", "quench_threshold", "cut_z") else float
        group.add_argument("--" + f.name.replace("_", "-"), dest=f.name, type=kind, default=None,
                           help=f"{_HELP[f.name]} (default {f.default})")
    group.add_argument("--shoot-side", choices=("low", "high"), default=None,
                       help="which z end of the volume holds the shoot (default low)")
    group.add_argument("--config", type=Path, default=None,
                       help="JSON file of parameter values; flags override it")


def build_config(args: argparse.Namespace) -> ExtractionConfig:
    values: dict = {}
    if args.config is not None:
        try:
            raw = json.loads(_read_text(args.config))
        except json.JSONDecodeError as exc:
            raise InputError(f"{args.config}: invalid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise InputError(f"{args.config}: expected a JSON object")
        unknown = sorted(set(raw) - set(ExtractionConfig.field_names()))
        if unknown:
            raise InputError(f"{args.config}: unknown parameter(s) {', '.join(unknown)}")
        values.update(raw)
    for name in ExtractionConfig.field_names():
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    if args.shoot_side is not None:
        values["shoot_at_low_z"] = args.shoot_side == "low"
    try:
        return ExtractionConfig(**values)
    except (TypeError, ValueError) as exc:
        raise InputError(f"invalid parameter: {exc}") from exc


def _read_text(path: Path) -> str:
    if not path.exists():
        raise InputError(f"{path}: no such file")
    return path.read_text()


def _need(path: Path) -> Path:
    if not path.exists():
        raise InputError(f"{path}: no such file")
    return path


# -- subcommands ------------------------------------------------------------

def cmd_extract(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    seg = read_volume(_need(args.input))
    start = None
    if not args.auto_start:
        if not seg.contains(args.start):
            raise InputError(f"start point {args.start} lies outside volume of dims {seg.dims}")
        start = args.start
    res = run_pipeline(seg, cfg, start, cost=args.cost, skip_lcc=args.skip_lcc,
                       keep_volumes=args.debug_dir is not None)
    write_graph(res.graph, args.output)
    if args.full_graph is not None:
        write_graph(res.full_graph, args.full_graph)
    if args.debug_dir is not None:
        args.debug_dir.mkdir(parents=True, exist_ok=True)
        for name, vol in res.volumes.items():
            write_volume(vol, args.debug_dir / f"{name}.rvol")
    for stage, secs in res.timings.items():
        log.info("%-16s %.3f s", stage, secs)
    print(f"start {res.start[0]},{res.start[1]},{res.start[2]} nodes {res.graph.node_count} "
          f"branches {res.full_graph.branch_count - 1}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    if not args.spacing > 0:
        raise InputError("--spacing must be positive")
    if args.tolerance < 0:
        raise InputError("--tolerance must be nonnegative")
    extracted = read_graph(_need(args.extracted))
    target = read_graph(_need(args.target))
    l_g, l_t = resample(extracted, args.spacing), resample(target, args.spacing)
    report = score_samples(l_g, l_t, args.tolerance)
    print(report.as_line())
    if args.pairs is not None:
        with open(args.pairs, "w") as fh:
            fh.write("# target_index extracted_index tx ty tz gx gy gz\n")
            for ti, gi in match_samples(l_g, l_t, args.tolerance):
                coords = " ".join(repr(c) for c in (*l_t[ti].pos, *l_g[gi].pos))
                fh.write(f"{ti} {gi} {coords}\n")
    return 0


def cmd_gen(args: argparse.Namespace) -> int:
    if (args.spec is None) == (args.stock is None):
        raise InputError("give exactly one of SPEC or --stock")
    if args.stock is not None:
        spec = STOCK[args.stock](args.size)
    else:
        try:
            spec = synth.PhantomSpec.from_dict(json.loads(_read_text(args.spec)))
        except json.JSONDecodeError as exc:
            raise InputError(f"{args.spec}: invalid JSON: {exc}") from exc
    vol, graph = synth.generate(spec, args.seed)
    write_volume(vol, args.volume)
    write_graph(graph, args.graph)
    digest = hashlib.sha256(np.ascontiguousarray(vol.data).tobytes()).hexdigest()
    print(f"dims {vol.dims[0]}x{vol.dims[1]}x{vol.dims[2]} nodes {graph.node_count} sha256 {digest}")
    return 0


# -- wiring -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rootextract", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    parser.add_argument("--threads", type=int, default=None, help="cap on worker threads")
    sub = parser.add_subparsers(dest="command", required=True)

    ex = sub.add_parser("extract", help="extract a root graph from a segmented volume")
    ex.add_argument("input", type=Path, help="segmented RVOL volume")
    ex.add_argument("-o", "--output", type=Path, required=True, help="RGRAPH1 output path")
    where = ex.add_mutually_exclusive_group(required=True)
    where.add_argument("--start", type=_position, help="shoot voxel as x,y,z")
    where.add_argument("--auto-start", action="store_true", help="locate the shoot automatically")
    ex.add_argument("--cost", choices=COST_MAPS, default="rad",
                    help="centerline cost map: radius (rad) or relative dominance (rel)")
    ex.add_argument("--skip-lcc", action="store_true",
                    help="skeletonize the thresholded input without gap closing")
    ex.add_argument("--full-graph", type=Path, default=None,
                    help="also write the graph before simplification")
    ex.add_argument("--debug-dir", type=Path, default=None,
                    help="write intermediate volumes here as RVOL")
    _config_flags(ex)
    ex.set_defaults(func=cmd_extract)

    ev = sub.add_parser("eval", help="score an extracted graph against a reference")
    ev.add_argument("extracted", type=Path)
    ev.add_argument("target", type=Path)
    ev.add_argument("--spacing", type=float, default=DEFAULT_SPACING, help="resampling step s")
    ev.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE, help="match distance d")
    ev.add_argument("--pairs", type=Path, default=None, help="write matched sample pairs here")
    ev.set_defaults(func=cmd_eval)

    gen = sub.add_parser("gen", help="render a phantom volume and its ground-truth graph")
    gen.add_argument("spec", type=Path, nargs="?", default=None, help="phantom JSON spec")
    gen.add_argument("--stock", choices=sorted(STOCK), default=None, help="built-in phantom instead of a spec")
    gen.add_argument("--size", type=int, default=64, help="cube edge for --stock phantoms")
    gen.add_argument("--volume", type=Path, required=True, help="RVOL output path")
    gen.add_argument("--graph", type=Path, required=True, help="RGRAPH1 output path")
    gen.add_argument("--seed", type=int, default=0)
    gen.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    # numba falls back to another threading layer on its own; the notice is noise here
    warnings.filterwarnings("ignore", message="The TBB threading layer")
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads is not None:
        if args.threads < 1:
            parser.error("--threads must be at least 1")
        import numba

        numba.set_num_threads(min(args.threads, numba.config.NUMBA_NUM_THREADS))
    try:
        return args.func(args)
    except (InputError, VolumeError, GraphFormatError, synth.PhantomError, AutoStartError,
            EmptySegmentationError, EmptyLCCError, IndexError) as exc:
        print(f"rootextract: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"rootextract: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        log.debug("unexpected failure", exc_info=True)
        print(f"rootextract: internal error: {exc!r}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
