"""Command line entry point.

Subcommands: compress, decompress, errormap, info, sweep, bench, plot.
Exit code 0 on success, nonzero with a diagnostic on stderr otherwise.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import bench, lowrank, metrics
from .errors import LrimgError
from .image import load_image, save_image
from .lowrank import ToleranceSpec


def _cmd_compress(args) -> int:
    t = load_image(args.input)
    if args.rank is not None:
        low = lowrank.compress_at_rank(t, args.rank)
    else:
        low = lowrank.compress(t, args.tolerance)
    data = lowrank.encode_lrif(low)
    Path(args.output).write_bytes(data)
    print(f"{args.output}: {len(data)} bytes, ranks {list(low.ranks)}")
    return 0


def _cmd_decompress(args) -> int:
    low = lowrank.decode_lrif(Path(args.input).read_bytes())
    save_image(lowrank.decompress(low), args.output)
    print(f"{args.output}: {low.height}x{low.width}x{low.channels}")
    return 0


def _cmd_errormap(args) -> int:
    original = load_image(args.original)
    approx = load_image(args.approx)
    em = metrics.error_map(original, approx)
    save_image(metrics.render_error_map(em), args.output)
    err = metrics.relative_frobenius_error(original, approx)
    print(f"relative frobenius error: {err:.6g}")
    return 0


def _cmd_info(args) -> int:
    data = Path(args.input).read_bytes()
    low = lowrank.decode_lrif(data)
    print(f"LRIF v{lowrank.LRIF_VERSION}")
    print(f"dimensions: {low.height}x{low.width}, channels: {low.channels}")
    print(f"ranks: {list(low.ranks)}")
    print(f"file bytes: {len(data)}")
    return 0


def _parse_grid(text: str | None) -> ToleranceSpec:
    if text is None:
        return ToleranceSpec()
    return ToleranceSpec(grid=tuple(float(v) for v in text.split(",")))


def _cmd_sweep(args) -> int:
    grid = _parse_grid(args.grid)
    method = "svd-factor" if args.mode == "factor" else "svd-reencoded"
    records = bench.sweep_image(args.image, grid, methods=(method,))
    print(",".join(bench.CSV_FIELDS))
    for r in sorted(records, key=lambda r: (r.method, r.tolerance)):
        print(",".join(bench._record_row(r)))
    return 0


def _cmd_bench(args) -> int:
    config = bench.parse_config(args.config)
    corpus = args.corpus_dir or config.corpus
    if corpus is None:
        print("error: no corpus directory given (argument or config key)", file=sys.stderr)
        return 2
    curves = bench.run_benchmark(corpus, config)
    out = Path(config.output_dir)
    print(f"records: {out / 'records.csv'}")
    print(f"curves:  {out / 'curves.csv'}")
    print(f"plot:    {out / 'curves.svg'}")
    for c in curves:
        n = c.points[0].count if c.points else 0
        print(f"  {c.method}: {len(c.points)} points over {n} images")
    return 0


def _cmd_plot(args) -> int:
    curves = bench.read_curves_csv(args.curves)
    bench.emit_svg_plot(curves, args.output)
    print(f"wrote {args.output}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lrimg", description="Low-rank SVD image compression toolkit"
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compress", help="compress an image to LRIF")
    p.add_argument("input")
    p.add_argument("output")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--tolerance", type=float, help="relative Frobenius error target")
    group.add_argument("--rank", type=int, help="fixed rank for every channel")
    p.set_defaults(func=_cmd_compress)

    p = sub.add_parser("decompress", help="decode an LRIF file to an image")
    p.add_argument("input")
    p.add_argument("output")
    p.set_defaults(func=_cmd_decompress)

    p = sub.add_parser("errormap", help="write a pixel-wise error map image")
    p.add_argument("original")
    p.add_argument("approx")
    p.add_argument("output")
    p.set_defaults(func=_cmd_errormap)

    p = sub.add_parser("info", help="describe an LRIF file")
    p.add_argument("input")
    p.set_defaults(func=_cmd_info)

    p = sub.add_parser("sweep", help="tolerance sweep of one image, CSV to stdout")
    p.add_argument("image")
    p.add_argument("--grid", help="comma-separated tolerance list")
    p.add_argument("--mode", choices=("factor", "reencoded"), default="factor")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("bench", help="run the corpus benchmark")
    p.add_argument("corpus_dir", nargs="?")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("plot", help="render a curves CSV as an SVG chart")
    p.add_argument("curves")
    p.add_argument("output")
    p.set_defaults(func=_cmd_plot)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except LrimgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
