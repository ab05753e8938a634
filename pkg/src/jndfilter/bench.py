"""Rate-distortion benchmarking against external encoders.

For every (image, pipeline variant, encoder, QP) cell the harness optionally
pre-filters the image, drives the encoder and decoder as child processes,
and computes quality metrics of the decoded output against the ORIGINAL
(unfiltered) image; that anchoring is the whole point of evaluating a
pre-filter and is enforced by tests. Results land in a CSV of RD points plus
BD-rate summary JSON files comparing each variant to the identity anchor.

Encoder profiles are shell command templates with {input}, {output}, {qp},
{width}, {height} placeholders. Built-in profiles cover x264, x265, libaom
and VVenC in All-Intra configuration (one-frame inputs, closed GOP of 1) and
the package's own stub codec; all can be overridden from the config file.
The temp workspace root honors the JNDFILTER_TMPDIR environment variable.
"""

from __future__ import annotations

import csv
import json
import logging
import os
import shlex
import shutil
import subprocess
import sys
import tempfile
import threading
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field

import numpy as np

from . import metrics
from .bdrate import bd_rate
from .image import ImagePlane, load_image, save_image
from .injection import apply_prefilter
from .jnd import JndParams

logger = logging.getLogger(__name__)

TMPDIR_ENV = "JNDFILTER_TMPDIR"
CSV_COLUMNS = ("image_id", "variant", "encoder", "qp", "bits") + metrics.METRIC_NAMES
IDENTITY = "identity"


class EncoderNotFoundError(RuntimeError):
    pass


class EncoderFailedError(RuntimeError):
    pass


@dataclass(frozen=True)
class EncoderProfile:
    name: str
    encode_template: str
    decode_template: str
    input_format: str = "y4m"
    bitstream_suffix: str = ".bin"
    decoded_format: str = "y4m"

    def __post_init__(self):
        for placeholder in ("{input}", "{output}", "{qp}"):
            if placeholder not in self.encode_template:
                raise ValueError(f"encode template of {self.name!r} lacks {placeholder}")
        for placeholder in ("{input}", "{output}"):
            if placeholder not in self.decode_template:
                raise ValueError(f"decode template of {self.name!r} lacks {placeholder}")

    def binaries(self) -> tuple[str, str]:
        return shlex.split(self.encode_template)[0], shlex.split(self.decode_template)[0]

    def available(self) -> bool:
        return all(shutil.which(b) is not None for b in self.binaries())


def builtin_profiles() -> dict[str, EncoderProfile]:
    python = sys.executable
    return {
        "stub": EncoderProfile(
            name="stub",
            encode_template=f"{python} -m jndfilter.stubcodec encode {{input}} {{output}} --qp {{qp}}",
            decode_template=f"{python} -m jndfilter.stubcodec decode {{input}} {{output}}",
            input_format="pgm",
            bitstream_suffix=".jfsc",
            decoded_format="pgm",
        ),
        "copy": EncoderProfile(
            name="copy",
            encode_template=f"{python} -m jndfilter.stubcodec store {{input}} {{output}} --qp {{qp}}",
            decode_template=f"{python} -m jndfilter.stubcodec unstore {{input}} {{output}}",
            input_format="pgm",
            bitstream_suffix=".pgm",
            decoded_format="pgm",
        ),
        "x264": EncoderProfile(
            name="x264",
            encode_template=(
                "x264 --qp {qp} --keyint 1 --min-keyint 1 --no-scenecut "
                "--log-level error -o {output} {input}"
            ),
            decode_template="ffmpeg -y -loglevel error -i {input} {output}",
            bitstream_suffix=".264",
        ),
        "x265": EncoderProfile(
            name="x265",
            encode_template=(
                "x265 --input {input} --output {output} --qp {qp} --keyint 1 "
                "--no-open-gop --log-level error"
            ),
            decode_template="ffmpeg -y -loglevel error -i {input} {output}",
            bitstream_suffix=".hevc",
        ),
        "libaom": EncoderProfile(
            name="libaom",
            encode_template=(
                "aomenc --passes=1 --end-usage=q --cq-level={qp} --kf-max-dist=1 "
                "--cpu-used=6 -o {output} {input}"
            ),
            decode_template="ffmpeg -y -loglevel error -i {input} {output}",
            bitstream_suffix=".ivf",
        ),
        "vvenc": EncoderProfile(
            name="vvenc",
            encode_template=(
                "vvencapp -i {input} -s {width}x{height} -r 25 -q {qp} "
                "--gopsize 1 --refreshtype idr -o {output}"
            ),
            decode_template="vvdecapp -b {input} -o {output}",
            input_format="yuv",
            bitstream_suffix=".266",
            decoded_format="yuv",
        ),
    }


@dataclass(frozen=True)
class RdPoint:
    image_id: str
    variant: str
    encoder: str
    qp: int
    bits: int
    metrics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.bits <= 0:
            raise ValueError(f"bits must be > 0, got {self.bits}")


@dataclass(frozen=True)
class BenchConfig:
    images: tuple
    variants: dict  # name -> InjectionConfig, or None for the identity path
    encoders: dict  # name -> EncoderProfile
    qps: tuple = (27, 32, 37, 42)
    metrics: tuple = metrics.METRIC_NAMES
    workers: int = 0
    jnd: JndParams = field(default_factory=JndParams)
    anchor_variant: str = IDENTITY

    def __post_init__(self):
        if not self.images:
            raise ValueError("benchmark needs at least one image")
        if self.anchor_variant not in self.variants:
            raise ValueError(f"anchor variant {self.anchor_variant!r} not in variants")
        unknown = set(self.metrics) - set(metrics.METRIC_NAMES)
        if unknown:
            raise ValueError(f"unknown metrics: {sorted(unknown)}")

    def effective_workers(self) -> int:
        return self.workers if self.workers > 0 else (os.cpu_count() or 1)


@dataclass(frozen=True)
class EncodeResult:
    bits: int
    decoded_path: str


def _render(template: str, **values) -> list[str]:
    return [token.format(**values) for token in shlex.split(template)]


def _run_child(cmd: list[str], log_path: str, what: str) -> None:
    if shutil.which(cmd[0]) is None:
        raise EncoderNotFoundError(f"{what}: binary {cmd[0]!r} not found on PATH")
    proc = subprocess.run(cmd, capture_output=True, text=True)
    with open(log_path, "a") as log:
        log.write(f"$ {shlex.join(cmd)}\n")
        if proc.stderr:
            log.write(proc.stderr)
            if not proc.stderr.endswith("\n"):
                log.write("\n")
    if proc.returncode != 0:
        tail = (proc.stderr or "").strip().splitlines()[-3:]
        raise EncoderFailedError(
            f"{what} exited with status {proc.returncode}: {' | '.join(tail) or 'no stderr'}"
        )


def run_encode_decode(
    input_path: str,
    profile: EncoderProfile,
    qp: int,
    workdir: str,
    *,
    width: int,
    height: int,
) -> EncodeResult:
    """Encode then decode one image; returns bitstream size and decoded path."""
    stem = os.path.join(
        workdir, f"{os.path.splitext(os.path.basename(input_path))[0]}_{profile.name}_q{qp}"
    )
    bitstream = stem + profile.bitstream_suffix
    decoded = stem + "_dec." + profile.decoded_format
    log_path = os.path.join(workdir, "run.log")

    _run_child(
        _render(
            profile.encode_template,
            input=input_path, output=bitstream, qp=qp, width=width, height=height,
        ),
        log_path,
        f"encode[{profile.name} qp={qp}]",
    )
    size = os.path.getsize(bitstream)
    if size == 0:
        raise EncoderFailedError(f"encode[{profile.name} qp={qp}] produced an empty bitstream")
    _run_child(
        _render(
            profile.decode_template,
            input=bitstream, output=decoded, qp=qp, width=width, height=height,
        ),
        log_path,
        f"decode[{profile.name} qp={qp}]",
    )
    return EncodeResult(bits=8 * size, decoded_path=decoded)


# ---------------------------------------------------------------------------
# Result persistence

def persist_rows(path, rows) -> None:
    """Write RD points as CSV, sorted by (image, variant, encoder, qp)."""
    ordered = sorted(rows, key=lambda p: (p.image_id, p.variant, p.encoder, p.qp))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for p in ordered:
            writer.writerow(
                [p.image_id, p.variant, p.encoder, p.qp, p.bits]
                + [repr(float(p.metrics[m])) for m in metrics.METRIC_NAMES]
            )


def load_rows(path) -> list[RdPoint]:
    """Read an RD-point CSV; malformed content is reported with line numbers."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != CSV_COLUMNS:
            raise ValueError(f"{path}: line 1: expected header {','.join(CSV_COLUMNS)}")
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != len(CSV_COLUMNS):
                raise ValueError(
                    f"{path}: line {lineno}: expected {len(CSV_COLUMNS)} fields, got {len(rec)}"
                )
            try:
                rows.append(
                    RdPoint(
                        image_id=rec[0],
                        variant=rec[1],
                        encoder=rec[2],
                        qp=int(rec[3]),
                        bits=int(rec[4]),
                        metrics={m: float(rec[5 + i]) for i, m in enumerate(metrics.METRIC_NAMES)},
                    )
                )
            except ValueError as exc:
                raise ValueError(f"{path}: line {lineno}: {exc}") from None
    return rows


def _complete_curve(rows, image_id, variant, encoder, qps, metric):
    """(rates, qualities) if every QP of the cell succeeded, else None."""
    cell = {
        p.qp: p for p in rows
        if p.image_id == image_id and p.variant == variant and p.encoder == encoder
    }
    if set(qps) - set(cell):
        return None
    rates = [cell[qp].bits for qp in sorted(qps)]
    quals = [cell[qp].metrics[metric] for qp in sorted(qps)]
    # flagged, not fatal: bd_rate prunes such points itself
    if rates != sorted(rates, reverse=True) or len(set(rates)) != len(rates):
        logger.warning(
            "curve %s/%s/%s: bitrate not strictly decreasing in QP: %s",
            image_id, variant, encoder, rates,
        )
    return rates, quals


def summarize(rows, cfg: BenchConfig):
    """BD-rates per (image, variant, encoder, metric) and dataset means.

    Returns (summary, per_image): summary is {variant: {encoder: {metric:
    bdbr, "ALL": mean-over-configured-metrics}}} averaged over the images
    whose anchor and test curves are both complete.
    """
    test_variants = [v for v in cfg.variants if v != cfg.anchor_variant]
    per_image: dict = {}
    summary: dict = {}
    for variant in test_variants:
        summary[variant] = {}
        for encoder in cfg.encoders:
            collected: dict[str, list[float]] = {m: [] for m in cfg.metrics}
            for image in cfg.images:
                image_id = image_id_of(image)
                values = {}
                for metric in cfg.metrics:
                    anchor = _complete_curve(
                        rows, image_id, cfg.anchor_variant, encoder, cfg.qps, metric
                    )
                    test = _complete_curve(rows, image_id, variant, encoder, cfg.qps, metric)
                    if anchor is None or test is None:
                        continue
                    try:
                        value = bd_rate(anchor[0], anchor[1], test[0], test[1])
                    except ValueError as exc:
                        logger.warning(
                            "bd_rate failed for %s/%s/%s/%s: %s",
                            image_id, variant, encoder, metric, exc,
                        )
                        continue
                    values[metric] = value
                    collected[metric].append(value)
                if values:
                    values["ALL"] = float(
                        np.mean([values[m] for m in cfg.metrics if m in values])
                    )
                    per_image.setdefault(image_id, {}).setdefault(variant, {})[encoder] = values
            enc_summary = {
                m: float(np.mean(vals)) for m, vals in collected.items() if vals
            }
            if enc_summary:
                enc_summary["ALL"] = float(
                    np.mean([enc_summary[m] for m in cfg.metrics if m in enc_summary])
                )
            summary[variant][encoder] = enc_summary
    return summary, per_image


def image_id_of(path) -> str:
    return os.path.splitext(os.path.basename(str(path)))[0]


# ---------------------------------------------------------------------------
# Orchestration

def _prepare_inputs(cfg: BenchConfig, workdir: str):
    """Load originals, apply variants, and write encoder input files."""
    originals: dict[str, ImagePlane] = {}
    inputs: dict[tuple, str] = {}
    formats = {profile.input_format for profile in cfg.encoders.values()}
    for image in cfg.images:
        image_id = image_id_of(image)
        original = load_image(image)
        originals[image_id] = original
        for variant, injection_cfg in cfg.variants.items():
            if injection_cfg is None:
                plane = original
            else:
                plane = apply_prefilter(original, cfg.jnd, injection_cfg)
            for fmt in formats:
                path = os.path.join(workdir, f"{image_id}_{variant}.{fmt}")
                save_image(plane, path, format=fmt)
                inputs[(image_id, variant, fmt)] = path
    return originals, inputs


def _evaluate_cell(cfg, originals, inputs, workdir, image_id, variant, encoder, qp):
    profile = cfg.encoders[encoder]
    original = originals[image_id]
    input_path = inputs[(image_id, variant, profile.input_format)]
    result = run_encode_decode(
        input_path, profile, qp, workdir, width=original.width, height=original.height
    )
    decoded = load_image(
        result.decoded_path,
        format=profile.decoded_format,
        width=original.width,
        height=original.height,
    )
    if (decoded.width, decoded.height) != (original.width, original.height):
        raise EncoderFailedError(
            f"decode[{encoder} qp={qp}] dimension mismatch: "
            f"{decoded.width}x{decoded.height} vs {original.width}x{original.height}"
        )
    values = {name: mv.value for name, mv in metrics.compute_all(original, decoded).items()}
    return RdPoint(
        image_id=image_id, variant=variant, encoder=encoder, qp=qp, bits=result.bits,
        metrics=values,
    )


@dataclass
class BenchResult:
    rows: list
    summary: dict
    per_image: dict
    errors: list
    out_dir: str

    @property
    def csv_path(self) -> str:
        return os.path.join(self.out_dir, "results.csv")


def run_benchmark(cfg: BenchConfig, out_dir) -> BenchResult:
    """Run the full grid and write results.csv, summary.json, per_image.json,
    errors.json under ``out_dir``."""
    os.makedirs(out_dir, exist_ok=True)
    tmp_root = os.environ.get(TMPDIR_ENV) or None
    workdir = tempfile.mkdtemp(prefix="jndbench-", dir=tmp_root)
    logger.info("benchmark workspace: %s", workdir)

    originals, inputs = _prepare_inputs(cfg, workdir)
    cells = [
        (image_id_of(image), variant, encoder, qp)
        for image in cfg.images
        for variant in cfg.variants
        for encoder in cfg.encoders
        for qp in cfg.qps
    ]

    rows: list[RdPoint] = []
    errors: list[dict] = []
    lock = threading.Lock()
    partial_path = os.path.join(out_dir, "results.partial.csv")
    with open(partial_path, "w", newline="") as partial:
        writer = csv.writer(partial)
        writer.writerow(CSV_COLUMNS)
        partial.flush()

        def record(point: RdPoint):
            with lock:
                rows.append(point)
                writer.writerow(
                    [point.image_id, point.variant, point.encoder, point.qp, point.bits]
                    + [repr(float(point.metrics[m])) for m in metrics.METRIC_NAMES]
                )
                partial.flush()

        with ThreadPoolExecutor(max_workers=cfg.effective_workers()) as pool:
            futures = {
                pool.submit(
                    _evaluate_cell, cfg, originals, inputs, workdir, *cell
                ): cell
                for cell in cells
            }
            for future in as_completed(futures):
                image_id, variant, encoder, qp = futures[future]
                try:
                    record(future.result())
                except Exception as exc:
                    logger.warning(
                        "cell %s/%s/%s/qp%d failed: %s", image_id, variant, encoder, qp, exc
                    )
                    with lock:
                        errors.append(
                            {
                                "image_id": image_id,
                                "variant": variant,
                                "encoder": encoder,
                                "qp": qp,
                                "error": str(exc),
                            }
                        )

    persist_rows(os.path.join(out_dir, "results.csv"), rows)
    summary, per_image = summarize(rows, cfg)
    _dump_json(os.path.join(out_dir, "summary.json"), summary)
    _dump_json(os.path.join(out_dir, "per_image.json"), per_image)
    _dump_json(
        os.path.join(out_dir, "errors.json"),
        sorted(errors, key=lambda e: (e["image_id"], e["variant"], e["encoder"], e["qp"])),
    )
    return BenchResult(rows=rows, summary=summary, per_image=per_image, errors=errors, out_dir=str(out_dir))


def _dump_json(path, payload) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
