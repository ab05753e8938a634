"""TOML configuration for the JND model, injection strategy, and benchmark.

Every numeric constant of the threshold model and every suppression weight
table can be overridden from a config file; omitted keys keep the package
defaults. Example::

    [jnd]
    s = 1.0
    enable_cm = true

    [jnd.csf]
    picture_height = 1080
    distance_ratio = 3.0

    [injection]
    strategy = "suppress_weighted"
    p_table = "weights.csv"        # or an inline 8x8 array of arrays

    [bench]
    images = ["kodim01.png", "kodim02.png"]
    qps = [27, 32, 37, 42]
    variants = ["identity", "filtered"]
    encoders = ["x265"]
    metrics = ["psnr", "psnr_hvsm", "ssim", "msssim"]
    workers = 4

    [bench.variant.filtered]
    strategy = "suppress_blocktype"

    [bench.encoder.myenc]
    encode = "myenc -q {qp} -o {output} {input}"
    decode = "mydec -o {output} {input}"

Relative paths (images, p-table CSVs) resolve against the config file's
directory. The reserved variant name "identity" encodes without filtering.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .bench import IDENTITY, BenchConfig, EncoderProfile, builtin_profiles
from .injection import BLOCK, GaussianParams, InjectionConfig
from .jnd import (
    ClassifierParams,
    CmParams,
    CsfParams,
    JndParams,
    LaParams,
    SaParams,
)


@dataclass(frozen=True)
class Config:
    jnd: JndParams
    injection: InjectionConfig
    bench: BenchConfig | None = None


def load_config(path=None) -> Config:
    """Load a config file; ``None`` or ``"default"`` gives package defaults."""
    if path is None or str(path) == "default":
        return Config(jnd=JndParams(), injection=InjectionConfig())
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    base_dir = os.path.dirname(os.path.abspath(str(path)))
    return parse_config(raw, base_dir)


def parse_config(raw: dict, base_dir: str = ".") -> Config:
    _reject_unknown(raw, {"jnd", "injection", "bench"}, "config")
    jnd_params = jnd_params_from_dict(raw.get("jnd", {}))
    injection_cfg = injection_config_from_dict(raw.get("injection", {}), base_dir)
    bench_cfg = None
    if "bench" in raw:
        bench_cfg = bench_config_from_dict(raw["bench"], jnd_params, base_dir)
    return Config(jnd=jnd_params, injection=injection_cfg, bench=bench_cfg)


def _reject_unknown(d: dict, allowed: set, where: str) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise ValueError(f"unknown {where} keys: {sorted(unknown)}")


def _build(cls, d: dict, where: str):
    names = {f.name for f in dataclasses.fields(cls)}
    _reject_unknown(d, names, where)
    return cls(**d)


def jnd_params_from_dict(d: dict) -> JndParams:
    _reject_unknown(
        d, {"s", "enable_cm", "enable_sa", "csf", "la", "cm", "classifier", "sa"}, "[jnd]"
    )
    return JndParams(
        s=float(d.get("s", 1.0)),
        enable_cm=bool(d.get("enable_cm", True)),
        enable_sa=bool(d.get("enable_sa", False)),
        csf=_build(CsfParams, d.get("csf", {}), "[jnd.csf]"),
        la=_build(LaParams, d.get("la", {}), "[jnd.la]"),
        cm=_build(CmParams, d.get("cm", {}), "[jnd.cm]"),
        classifier=_build(ClassifierParams, d.get("classifier", {}), "[jnd.classifier]"),
        sa=_build(SaParams, d.get("sa", {}), "[jnd.sa]"),
    )


def _p_table_from(value, base_dir: str) -> np.ndarray:
    if isinstance(value, str):
        path = value if os.path.isabs(value) else os.path.join(base_dir, value)
        table = np.loadtxt(path, delimiter=",", dtype=np.float64)
    else:
        table = np.array(value, dtype=np.float64)
    if table.shape != (BLOCK, BLOCK):
        raise ValueError(f"p table must be 8 rows x 8 cols, got shape {table.shape}")
    return table


def injection_config_from_dict(d: dict, base_dir: str = ".") -> InjectionConfig:
    _reject_unknown(
        d,
        {"strategy", "p_table", "p_table_plane", "p_table_edge", "p_table_texture", "gaussian"},
        "[injection]",
    )
    kwargs: dict = {}
    if "strategy" in d:
        kwargs["strategy"] = d["strategy"]
    if "p_table" in d:
        kwargs["p_table"] = _p_table_from(d["p_table"], base_dir)
    class_tables = {}
    for label in ("plane", "edge", "texture"):
        key = f"p_table_{label}"
        if key in d:
            class_tables[label] = _p_table_from(d[key], base_dir)
    if class_tables:
        base = InjectionConfig().p_tables_by_class
        base.update(class_tables)
        kwargs["p_tables_by_class"] = base
    if "gaussian" in d:
        kwargs["gaussian"] = _build(GaussianParams, d["gaussian"], "[injection.gaussian]")
    return InjectionConfig(**kwargs)


def _encoder_from_dict(name: str, d: dict) -> EncoderProfile:
    _reject_unknown(
        d,
        {"encode", "decode", "input_format", "bitstream_suffix", "decoded_format"},
        f"[bench.encoder.{name}]",
    )
    base = builtin_profiles().get(name)
    if base is None:
        if "encode" not in d or "decode" not in d:
            raise ValueError(f"custom encoder {name!r} needs encode and decode templates")
        base = EncoderProfile(name=name, encode_template=d["encode"], decode_template=d["decode"])
    kwargs = {
        "encode_template": d.get("encode", base.encode_template),
        "decode_template": d.get("decode", base.decode_template),
        "input_format": d.get("input_format", base.input_format),
        "bitstream_suffix": d.get("bitstream_suffix", base.bitstream_suffix),
        "decoded_format": d.get("decoded_format", base.decoded_format),
    }
    return EncoderProfile(name=name, **kwargs)


def bench_config_from_dict(d: dict, jnd_params: JndParams, base_dir: str = ".") -> BenchConfig:
    _reject_unknown(
        d,
        {"images", "qps", "variants", "encoders", "metrics", "workers", "anchor", "variant", "encoder"},
        "[bench]",
    )
    if "images" not in d:
        raise ValueError("[bench] must list images")
    images = tuple(
        img if os.path.isabs(img) else os.path.join(base_dir, img) for img in d["images"]
    )

    variant_tables = d.get("variant", {})
    variant_names = d.get("variants", [IDENTITY] + sorted(variant_tables))
    variants: dict = {}
    for name in variant_names:
        if name == IDENTITY:
            variants[name] = None
        else:
            table = variant_tables.get(name)
            if table is None:
                raise ValueError(f"variant {name!r} has no [bench.variant.{name}] table")
            variants[name] = injection_config_from_dict(table, base_dir)

    encoder_tables = d.get("encoder", {})
    encoder_names = d.get("encoders", sorted(encoder_tables) or ["stub"])
    encoders: dict = {}
    for name in encoder_names:
        if name in encoder_tables:
            encoders[name] = _encoder_from_dict(name, encoder_tables[name])
        elif name in builtin_profiles():
            encoders[name] = builtin_profiles()[name]
        else:
            raise ValueError(f"unknown encoder {name!r} (no built-in profile, no config table)")

    return BenchConfig(
        images=images,
        variants=variants,
        encoders=encoders,
        qps=tuple(int(qp) for qp in d.get("qps", (27, 32, 37, 42))),
        metrics=tuple(d.get("metrics", ("psnr", "psnr_hvsm", "ssim", "msssim"))),
        workers=int(d.get("workers", 0)),
        jnd=jnd_params,
        anchor_variant=d.get("anchor", IDENTITY),
    )
