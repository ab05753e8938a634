import numpy as np
import pytest

from jndfilter.config import load_config
from jndfilter.image import save_image
from jndfilter.testimages import synthetic_natural

FULL_CONFIG = """
[jnd]
s = 1.5
enable_cm = false
enable_sa = true

[jnd.csf]
a = 1.2
b = 0.10
c = 0.20
picture_height = 720
distance_ratio = 4.0

[jnd.la]
dark_knee = 50.0

[jnd.cm]
exponent = 0.4

[jnd.classifier]
plane_energy = 250.0

[jnd.sa]
factor_salient = 0.4

[injection]
strategy = "suppress_blocktype"
p_table_texture = "ptable.csv"

[injection.gaussian]
sigma_max = 1.25
j_ref = 80.0

[bench]
images = ["img.pgm"]
qps = [27, 32, 37, 42]
variants = ["identity", "soft"]
encoders = ["stub", "custom"]
metrics = ["psnr", "msssim"]
workers = 3

[bench.variant.soft]
strategy = "suppress_weighted"
p_table = [
  [0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1],
  [0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1],
  [0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1],
  [0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1],
  [0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1],
  [0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1],
  [0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1],
  [0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1],
]

[bench.encoder.custom]
encode = "myenc -q {qp} -o {output} {input}"
decode = "mydec -o {output} {input}"
input_format = "y4m"
bitstream_suffix = ".bin"
decoded_format = "y4m"
"""


@pytest.fixture
def config_dir(tmp_path):
    (tmp_path / "config.toml").write_text(FULL_CONFIG)
    np.savetxt(tmp_path / "ptable.csv", np.full((8, 8), 0.5), delimiter=",")
    save_image(synthetic_natural(32, 32, seed=0), tmp_path / "img.pgm")
    return tmp_path


def test_defaults_without_file():
    cfg = load_config(None)
    assert cfg.jnd.s == 1.0
    assert cfg.injection.strategy == "suppress_weighted"
    assert cfg.bench is None
    assert load_config("default").jnd == cfg.jnd


def test_full_config_parses(config_dir):
    cfg = load_config(config_dir / "config.toml")

    assert cfg.jnd.s == 1.5
    assert cfg.jnd.enable_cm is False
    assert cfg.jnd.enable_sa is True
    assert cfg.jnd.csf.picture_height == 720
    assert cfg.jnd.csf.distance_ratio == 4.0
    assert cfg.jnd.la.dark_knee == 50.0
    assert cfg.jnd.la.bright_knee == 170.0  # untouched default
    assert cfg.jnd.cm.exponent == 0.4
    assert cfg.jnd.classifier.plane_energy == 250.0
    assert cfg.jnd.sa.factor_salient == 0.4

    assert cfg.injection.strategy == "suppress_blocktype"
    assert np.all(cfg.injection.p_tables_by_class["texture"] == 0.5)
    assert cfg.injection.gaussian.sigma_max == 1.25

    bench = cfg.bench
    assert bench.qps == (27, 32, 37, 42)
    assert bench.metrics == ("psnr", "msssim")
    assert bench.workers == 3
    assert set(bench.variants) == {"identity", "soft"}
    assert bench.variants["identity"] is None
    assert np.all(bench.variants["soft"].p_table == 0.1)
    assert set(bench.encoders) == {"stub", "custom"}
    assert bench.encoders["custom"].encode_template.startswith("myenc")
    assert bench.images[0].endswith("img.pgm")
    assert bench.jnd.s == 1.5


def test_relative_paths_resolve_against_config_dir(config_dir):
    cfg = load_config(config_dir / "config.toml")
    assert cfg.bench.images[0] == str(config_dir / "img.pgm")


def test_unknown_keys_rejected(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text("[jnd]\nsss = 2.0\n")
    with pytest.raises((ValueError, TypeError), match="sss"):
        load_config(path)


def test_unknown_section_rejected(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text("[quantizer]\nx = 1\n")
    with pytest.raises(ValueError, match="quantizer"):
        load_config(path)


def test_variant_without_table_rejected(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text('[bench]\nimages = ["x.pgm"]\nvariants = ["identity", "ghost"]\n')
    with pytest.raises(ValueError, match="ghost"):
        load_config(path)


def test_unknown_encoder_rejected(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text('[bench]\nimages = ["x.pgm"]\nencoders = ["nonesuch"]\n')
    with pytest.raises(ValueError, match="nonesuch"):
        load_config(path)


def test_custom_encoder_requires_templates(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text(
        '[bench]\nimages = ["x.pgm"]\nencoders = ["half"]\n[bench.encoder.half]\nencode = "e {input} {output} {qp}"\n'
    )
    with pytest.raises(ValueError, match="decode"):
        load_config(path)


def test_builtin_profile_flag_override(tmp_path):
    path = tmp_path / "c.toml"
    path.write_text(
        '[bench]\nimages = ["x.pgm"]\nencoders = ["x265"]\n'
        '[bench.encoder.x265]\nencode = "x265 --input {input} --output {output} --qp {qp} --preset slow"\n'
    )
    cfg = load_config(path)
    assert "--preset slow" in cfg.bench.encoders["x265"].encode_template
    assert cfg.bench.encoders["x265"].decode_template.startswith("ffmpeg")
