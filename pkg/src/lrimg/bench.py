"""Corpus sweep driver: SVD codec and external codecs across the tolerance
grid, with resumable CSV persistence, averaged curves and SVG plots."""

from __future__ import annotations

import concurrent.futures
import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bridge, lowrank, metrics
from .errors import ConfigError, EmptyCorpusError, PlotError
from .image import ImageTensor, load_image, png_bytes
from .linalg import SvdFactors, reconstruct, svd, truncate
from .lowrank import DEFAULT_GRID, LowRankImage, ToleranceSpec, select_rank
from .svgplot import line_chart_svg

log = logging.getLogger(__name__)

SVD_METHODS = ("svd-factor", "svd-reencoded")
DEFAULT_METHODS = ("svd-factor", "svd-reencoded", "jpeg", "webp")
IMAGE_SUFFIXES = (".png", ".pgm", ".ppm")

CSV_FIELDS = (
    "image_id",
    "method",
    "tolerance",
    "achieved_error",
    "original_bytes",
    "compressed_bytes",
    "ratio",
    "met",
    "rank_per_channel",
)


@dataclass(frozen=True)
class CompressionRecord:
    image_id: str
    method: str
    tolerance: float
    achieved_error: float | None
    original_bytes: int
    compressed_bytes: int | None
    ratio: float | None
    met: bool
    rank_per_channel: tuple[int, ...] = ()

    @property
    def is_error_row(self) -> bool:
        return self.ratio is None


@dataclass(frozen=True)
class CurvePoint:
    tolerance: float
    mean_ratio: float
    mean_error: float
    count: int
    mean_ratio_met: float | None
    count_met: int


@dataclass(frozen=True)
class ToleranceCurve:
    method: str
    points: tuple[CurvePoint, ...]


@dataclass
class RunConfig:
    output_dir: Path
    corpus: Path | None = None
    grid: tuple[float, ...] = DEFAULT_GRID
    methods: tuple[str, ...] = DEFAULT_METHODS
    parallelism: int = 1
    codec_templates: dict = field(default_factory=dict)


CONFIG_KEYS = ("corpus", "output_dir", "grid", "methods", "parallelism")


def parse_config(path) -> RunConfig:
    """Parse the key=value run configuration file."""
    path = Path(path)
    values = {}
    templates = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key.startswith("codec."):
            templates[key[len("codec."):]] = value
        elif key in CONFIG_KEYS:
            values[key] = value
        else:
            raise ConfigError(f"{path}:{lineno}: unknown configuration key {key!r}")
    if "output_dir" not in values:
        raise ConfigError(f"{path}: missing required key 'output_dir'")
    cfg = RunConfig(output_dir=Path(values["output_dir"]))
    if "corpus" in values:
        cfg.corpus = Path(values["corpus"])
    if "grid" in values:
        try:
            cfg.grid = tuple(float(v) for v in values["grid"].split(","))
        except ValueError as exc:
            raise ConfigError(f"{path}: bad grid value: {exc}") from exc
        ToleranceSpec(grid=cfg.grid)
    if "methods" in values:
        cfg.methods = tuple(m.strip() for m in values["methods"].split(",") if m.strip())
    if "parallelism" in values:
        try:
            cfg.parallelism = int(values["parallelism"])
        except ValueError as exc:
            raise ConfigError(f"{path}: bad parallelism value: {exc}") from exc
        if cfg.parallelism < 1:
            raise ConfigError(f"{path}: parallelism must be >= 1")
    cfg.codec_templates = templates
    return cfg


def build_codec_registry(config: RunConfig | None = None) -> dict:
    registry = bridge.builtin_codecs()
    if config is not None:
        for name, template in config.codec_templates.items():
            registry[name] = bridge.command_codec(name, template)
    return registry


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def _svd_full_factors(t: ImageTensor) -> list[SvdFactors | None]:
    """One full decomposition per nonzero channel; None marks zero channels."""
    return [svd(p) if p.any() else None for p in t.planes]


def _lowrank_at_tolerance(
    t: ImageTensor, full: list[SvdFactors | None], tolerance: float
) -> LowRankImage:
    factors = []
    for f in full:
        if f is None:
            factors.append(lowrank._zero_channel_factors(t.height, t.width))
        else:
            k = select_rank(f.sigma, tolerance)
            factors.append(lowrank._to_storage(truncate(f, k)))
    return LowRankImage(height=t.height, width=t.width, factors=tuple(factors))


def _error_record(image_id, method, tolerance, original_bytes) -> CompressionRecord:
    return CompressionRecord(
        image_id=image_id,
        method=method,
        tolerance=tolerance,
        achieved_error=None,
        original_bytes=original_bytes,
        compressed_bytes=None,
        ratio=None,
        met=False,
    )


def sweep_image(
    path,
    grid: ToleranceSpec,
    methods=DEFAULT_METHODS,
    codecs: dict | None = None,
) -> list[CompressionRecord]:
    """One CompressionRecord per tolerance x method for a single image.

    Per-method failures become error rows (empty measurements, met=false)
    rather than aborting the image.
    """
    path = Path(path)
    image_id = path.name
    original = load_image(path)
    original_bytes = len(png_bytes(original))
    if codecs is None:
        codecs = build_codec_registry()

    svd_requested = [m for m in methods if m in SVD_METHODS]
    full = _svd_full_factors(original) if svd_requested else []

    records = []
    for method in sorted(set(methods)):
        codec = codecs.get(method) if method not in SVD_METHODS else None
        target = original
        if codec is not None and original.channels == 4 and not codec.supports_alpha:
            log.warning(
                "%s: %s has no alpha support, comparing RGB planes only",
                image_id,
                method,
            )
            target = ImageTensor(planes=original.planes[:3])
        for tolerance in grid.grid:
            try:
                if method in SVD_METHODS:
                    low = _lowrank_at_tolerance(original, full, tolerance)
                    quantized = lowrank.decompress(low)
                    err = metrics.relative_frobenius_error(original, quantized)
                    if method == "svd-factor":
                        nbytes = lowrank.factor_storage_bytes(low)
                    else:
                        nbytes = len(png_bytes(quantized))
                    records.append(
                        CompressionRecord(
                            image_id=image_id,
                            method=method,
                            tolerance=tolerance,
                            achieved_error=err,
                            original_bytes=original_bytes,
                            compressed_bytes=nbytes,
                            ratio=metrics.compression_ratio(original_bytes, nbytes),
                            met=err <= tolerance,
                            rank_per_channel=low.ranks,
                        )
                    )
                else:
                    if codec is None or not codec.available:
                        raise bridge.CodecUnavailableError(
                            f"codec backend not available: {method}"
                        )
                    result = bridge.match_error_tolerance(codec, target, tolerance)
                    records.append(
                        CompressionRecord(
                            image_id=image_id,
                            method=method,
                            tolerance=tolerance,
                            achieved_error=result.achieved_error,
                            original_bytes=original_bytes,
                            compressed_bytes=result.bytes,
                            ratio=metrics.compression_ratio(original_bytes, result.bytes),
                            met=result.met,
                        )
                    )
            except Exception as exc:
                log.warning("%s: method %s failed at tolerance %g: %s",
                            image_id, method, tolerance, exc)
                records.append(
                    _error_record(image_id, method, tolerance, original_bytes)
                )
    return records


def _record_row(r: CompressionRecord) -> list[str]:
    return [
        r.image_id,
        r.method,
        _fmt(r.tolerance),
        "" if r.achieved_error is None else _fmt(r.achieved_error),
        str(r.original_bytes),
        "" if r.compressed_bytes is None else str(r.compressed_bytes),
        "" if r.ratio is None else _fmt(r.ratio),
        "true" if r.met else "false",
        ";".join(str(k) for k in r.rank_per_channel),
    ]


def emit_csv(records, path) -> None:
    """Write records sorted by (image_id, method, tolerance); deterministic bytes."""
    rows = sorted(records, key=lambda r: (r.image_id, r.method, r.tolerance))
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_FIELDS)
        for r in rows:
            writer.writerow(_record_row(r))


def read_records_csv(path) -> list[CompressionRecord]:
    records = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            records.append(
                CompressionRecord(
                    image_id=row["image_id"],
                    method=row["method"],
                    tolerance=float(row["tolerance"]),
                    achieved_error=float(row["achieved_error"]) if row["achieved_error"] else None,
                    original_bytes=int(row["original_bytes"]),
                    compressed_bytes=int(row["compressed_bytes"]) if row["compressed_bytes"] else None,
                    ratio=float(row["ratio"]) if row["ratio"] else None,
                    met=row["met"] == "true",
                    rank_per_channel=tuple(
                        int(k) for k in row["rank_per_channel"].split(";") if k
                    ),
                )
            )
    return records


def curves_from_records(records, grid: ToleranceSpec) -> list[ToleranceCurve]:
    """Unweighted per-tolerance means; met-only means reported alongside."""
    methods = sorted({r.method for r in records})
    curves = []
    for method in methods:
        points = []
        for tolerance in grid.grid:
            rows = [
                r
                for r in records
                if r.method == method
                and abs(r.tolerance - tolerance) < 1e-12
                and not r.is_error_row
            ]
            if not rows:
                continue
            met_rows = [r for r in rows if r.met]
            points.append(
                CurvePoint(
                    tolerance=tolerance,
                    mean_ratio=float(np.mean([r.ratio for r in rows])),
                    mean_error=float(np.mean([r.achieved_error for r in rows])),
                    count=len(rows),
                    mean_ratio_met=float(np.mean([r.ratio for r in met_rows]))
                    if met_rows
                    else None,
                    count_met=len(met_rows),
                )
            )
        curves.append(ToleranceCurve(method=method, points=tuple(points)))
    return curves


CURVES_FIELDS = (
    "method",
    "tolerance",
    "mean_ratio",
    "mean_error",
    "count",
    "mean_ratio_met",
    "count_met",
)


def emit_curves_csv(curves, path) -> None:
    with open(Path(path), "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CURVES_FIELDS)
        for curve in sorted(curves, key=lambda c: c.method):
            for p in curve.points:
                writer.writerow(
                    [
                        curve.method,
                        _fmt(p.tolerance),
                        _fmt(p.mean_ratio),
                        _fmt(p.mean_error),
                        str(p.count),
                        "" if p.mean_ratio_met is None else _fmt(p.mean_ratio_met),
                        str(p.count_met),
                    ]
                )


def read_curves_csv(path) -> list[ToleranceCurve]:
    by_method: dict[str, list[CurvePoint]] = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            by_method.setdefault(row["method"], []).append(
                CurvePoint(
                    tolerance=float(row["tolerance"]),
                    mean_ratio=float(row["mean_ratio"]),
                    mean_error=float(row["mean_error"]),
                    count=int(row["count"]),
                    mean_ratio_met=float(row["mean_ratio_met"]) if row["mean_ratio_met"] else None,
                    count_met=int(row["count_met"]),
                )
            )
    return [
        ToleranceCurve(method=m, points=tuple(pts)) for m, pts in sorted(by_method.items())
    ]


def emit_svg_plot(curves, path) -> None:
    """Mean-ratio-vs-tolerance line chart, one polyline per method."""
    series = [
        (c.method, [(p.tolerance, p.mean_ratio) for p in c.points])
        for c in sorted(curves, key=lambda c: c.method)
        if c.points
    ]
    if not series:
        raise PlotError("no curves to plot")
    svg = line_chart_svg(
        series,
        title="Compression Ratio vs Relative Frobenius Error",
        x_label="Tolerated relative Frobenius error",
        y_label="Mean compression ratio",
    )
    Path(path).write_text(svg)


def list_corpus(corpus_dir) -> list[Path]:
    corpus_dir = Path(corpus_dir)
    if not corpus_dir.is_dir():
        raise EmptyCorpusError(f"not a directory: {corpus_dir}")
    paths = sorted(
        (p for p in corpus_dir.rglob("*") if p.suffix.lower() in IMAGE_SUFFIXES),
        key=lambda p: str(p.relative_to(corpus_dir)),
    )
    if not paths:
        raise EmptyCorpusError(f"no supported images under {corpus_dir}")
    return paths


def _completed_images(records_path: Path, expected_per_image: int, image_ids) -> list[str]:
    """Longest prefix of image_ids whose record blocks are complete in the CSV.

    The file is rewritten truncated to that prefix so a resumed run appends
    from a clean boundary even after a mid-write interruption.
    """
    if not records_path.exists():
        return []
    records = []
    with open(records_path, newline="") as fh:
        for row in csv.DictReader(fh):
            try:
                records.append(
                    CompressionRecord(
                        image_id=row["image_id"],
                        method=row["method"],
                        tolerance=float(row["tolerance"]),
                        achieved_error=float(row["achieved_error"])
                        if row["achieved_error"]
                        else None,
                        original_bytes=int(row["original_bytes"]),
                        compressed_bytes=int(row["compressed_bytes"])
                        if row["compressed_bytes"]
                        else None,
                        ratio=float(row["ratio"]) if row["ratio"] else None,
                        met=row["met"] == "true",
                        rank_per_channel=tuple(
                            int(k) for k in row["rank_per_channel"].split(";") if k
                        ),
                    )
                )
            except (TypeError, ValueError, KeyError, AttributeError):
                continue  # interrupted mid-write; drop the partial line
    counts: dict[str, int] = {}
    for r in records:
        counts[r.image_id] = counts.get(r.image_id, 0) + 1
    done = []
    for image_id in image_ids:
        if counts.get(image_id, 0) == expected_per_image:
            done.append(image_id)
        else:
            break
    kept = {i for i in done}
    emit_csv([r for r in records if r.image_id in kept], records_path)
    return done


def _sweep_worker(args):
    path, grid, methods, templates = args
    cfg = RunConfig(output_dir=Path("."), codec_templates=templates)
    codecs = build_codec_registry(cfg)
    return sweep_image(path, grid, methods, codecs)


def run_benchmark(corpus_dir, config: RunConfig):
    """Sweep the corpus, persisting records incrementally; returns the curves.

    Deterministic lexicographic image order; images whose record blocks are
    already complete in records.csv are skipped, so an interrupted run can be
    resumed and still produce byte-identical outputs.
    """
    paths = list_corpus(corpus_dir)
    grid = ToleranceSpec(grid=config.grid)
    methods = tuple(sorted(set(config.methods)))
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    records_path = out / "records.csv"
    curves_path = out / "curves.csv"
    plot_path = out / "curves.svg"

    expected = len(grid.grid) * len(methods)
    done = set(_completed_images(records_path, expected, [p.name for p in paths]))
    if not records_path.exists() or not done:
        emit_csv([], records_path)

    pending = [p for p in paths if p.name not in done]
    codecs = build_codec_registry(config)

    def append_block(block):
        rows = sorted(block, key=lambda r: (r.image_id, r.method, r.tolerance))
        with open(records_path, "a", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            for r in rows:
                writer.writerow(_record_row(r))
            fh.flush()

    if config.parallelism > 1 and len(pending) > 1:
        jobs = [(p, grid, methods, config.codec_templates) for p in pending]
        with concurrent.futures.ProcessPoolExecutor(config.parallelism) as pool:
            for block in pool.map(_sweep_worker, jobs):
                append_block(block)
    else:
        for p in pending:
            append_block(sweep_image(p, grid, methods, codecs))

    records = read_records_csv(records_path)
    curves = curves_from_records(records, grid)
    emit_curves_csv(curves, curves_path)
    emit_svg_plot(curves, plot_path)
    return curves
