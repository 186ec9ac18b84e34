"""Command line interface: ``voxsubdiv <subcommand> ...``."""
from __future__ import annotations

import argparse
import logging
import sys
from typing import List, Optional

from . import __version__
from .config import DEFAULT_HALO, ConfigError, Mode, SubdivisionConfig, parse_triple
from .metrics import MetricError, metrics_report
from .phantom import generate_phantom
from .pipeline import roundtrip
from .subdiv3d import subdivide3d_tiled
from .volume import VolumeError, export_slice, extract_roi, read_volume, write_volume

log = logging.getLogger("voxsubdiv")


class UsageError(Exception):
    """Bad flag value; the message names the flag."""


def _triple(flag):
    def parse(text):
        try:
            return parse_triple(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{flag} expects X,Y,Z integers, got {text!r}") from None
    return parse


def _add_mode_flags(p):
    p.add_argument("--mode", required=True, choices=[m.value for m in Mode])
    p.add_argument("--tau", type=float, default=None, help="tension parameter, nonlinear mode only (default 2)")
    p.add_argument("--boundary", choices=["mirror", "periodic"], default="mirror")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="voxsubdiv", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phantom", help="write the synthetic test volume (f32le)")
    p.add_argument("--dims", type=_triple("--dims"), default=(256, 256, 256))
    p.add_argument("--out", required=True)

    p = sub.add_parser("subdivide", help="one 2x refinement step")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    _add_mode_flags(p)
    p.add_argument("--tile", type=_triple("--tile"), default=(64, 64, 64))
    p.add_argument("--halo", type=int, default=DEFAULT_HALO)
    p.add_argument("--threads", type=int, default=None)

    p = sub.add_parser("roundtrip", help="downsample, refine, and score against the input")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--report", required=True)
    _add_mode_flags(p)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", default=None, help="optionally keep the upsampled volume")

    p = sub.add_parser("metrics", help="compare two volumes")
    p.add_argument("--ref", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--report", required=True)

    p = sub.add_parser("roi", help="cut an axis-aligned region")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--origin", type=_triple("--origin"), required=True)
    p.add_argument("--dims", type=_triple("--dims"), required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("slice", help="export one slice as an 8-bit PGM")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--axis", choices=["x", "y", "z"], required=True)
    p.add_argument("--index", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--gamma", type=float, default=1.0)
    return parser


def _config(args, tile=(64, 64, 64), halo=DEFAULT_HALO) -> SubdivisionConfig:
    mode = Mode.parse(args.mode)
    if args.tau is not None and mode is Mode.LINEAR:
        raise UsageError("--tau is only valid with --mode nonlinear")
    if args.threads is not None and args.threads < 1:
        raise UsageError(f"--threads must be >= 1, got {args.threads}")
    try:
        return SubdivisionConfig(mode=mode, tau=args.tau, boundary=args.boundary,
                                 tile_dims=tile, halo=halo, workers=args.threads)
    except ConfigError as exc:
        msg = str(exc)
        for key, flag in (("tau", "--tau"), ("halo", "--halo"), ("tile", "--tile"), ("workers", "--threads")):
            if key in msg:
                raise UsageError(f"{flag}: {msg}") from None
        raise UsageError(msg) from None


class FlagError(Exception):
    """Runtime failure attributable to one flag."""


def _read(path, flag):
    try:
        return read_volume(path)
    except (VolumeError, OSError) as exc:
        raise FlagError(f"{flag} {path}: {exc}") from exc


def _write(v, path, flag="--out"):
    try:
        write_volume(v, path, "f32le")
    except OSError as exc:
        raise FlagError(f"{flag} {path}: {exc}") from exc


def _report(report, path):
    try:
        report.write(path)
    except OSError as exc:
        raise FlagError(f"--report {path}: {exc}") from exc


def _run(args) -> None:
    cmd = args.command
    if cmd == "phantom":
        try:
            v = generate_phantom(args.dims)
        except VolumeError as exc:
            raise UsageError(f"--dims: {exc}") from None
        _write(v, args.out)
    elif cmd == "subdivide":
        config = _config(args, args.tile, args.halo)
        v = _read(args.inp, "--in")
        out = subdivide3d_tiled(v, config)
        _write(out, args.out)
        log.info("wrote %s with dims %s", args.out, out.dims)
    elif cmd == "roundtrip":
        config = _config(args)
        v = _read(args.inp, "--in")
        try:
            up, report = roundtrip(v, config)
        except VolumeError as exc:
            raise FlagError(f"--in {args.inp}: {exc}") from None
        _report(report, args.report)
        if args.out:
            _write(up, args.out)
    elif cmd == "metrics":
        ref, test = _read(args.ref, "--ref"), _read(args.test, "--test")
        try:
            report = metrics_report(ref, test)
        except MetricError as exc:
            raise FlagError(f"--ref/--test: {exc}") from None
        _report(report, args.report)
    elif cmd == "roi":
        v = _read(args.inp, "--in")
        try:
            roi = extract_roi(v, args.origin, args.dims)
        except VolumeError as exc:
            raise UsageError(f"--origin/--dims: {exc}") from None
        _write(roi, args.out)
    elif cmd == "slice":
        if not args.gamma > 0:
            raise UsageError(f"--gamma must be positive, got {args.gamma}")
        v = _read(args.inp, "--in")
        if not 0 <= args.index < v.dims["xyz".index(args.axis)]:
            raise UsageError(f"--index {args.index} outside the {args.axis} extent of {v.dims}")
        try:
            export_slice(v, args.axis, args.index, args.out, args.gamma)
        except OSError as exc:
            raise FlagError(f"--out {args.out}: {exc}") from exc


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        _run(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (FlagError, VolumeError, MetricError, ConfigError, OSError) as exc:
        print(f"voxsubdiv {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
