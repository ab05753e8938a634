"""A deterministic toy image codec for exercising the benchmark pipeline.

Not a real compressor: it uniformly quantizes 8x8 DCT coefficients with a
QP-dependent step and deflates the levels, so bitstream size falls and
distortion rises as QP grows, which is all the rate-distortion harness needs.
Runs as a child process (``python -m jndfilter.stubcodec``) exactly like an
external encoder binary would.

``store``/``unstore`` copy bytes unchanged, giving a perfect-reconstruction
"codec" whose bitstream is the input file itself.
"""

from __future__ import annotations

import argparse
import shutil
import struct
import sys
import zlib

import numpy as np

from . import dct
from .image import ImagePlane, load_image, pad_to_blocks, save_image, tile_blocks, untile_blocks

MAGIC = b"JFSC"


def qp_step(qp: int) -> float:
    return 2.0 ** ((qp - 4) / 6.0)


def encode(input_path: str, output_path: str, qp: int) -> None:
    plane = load_image(input_path)
    view = pad_to_blocks(plane)
    coeffs = dct.dct8_forward(tile_blocks(view.array()))
    levels = np.round(coeffs / qp_step(qp)).astype(np.int16)
    payload = zlib.compress(levels.tobytes(), level=9)
    header = struct.pack("<4sHIIB", MAGIC, 1, plane.width, plane.height, qp)
    with open(output_path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def decode(input_path: str, output_path: str) -> None:
    with open(input_path, "rb") as fh:
        header = fh.read(struct.calcsize("<4sHIIB"))
        magic, version, width, height, qp = struct.unpack("<4sHIIB", header)
        if magic != MAGIC or version != 1:
            raise ValueError(f"{input_path}: not a stub-codec bitstream")
        payload = fh.read()
    rows = -(-height // 8)
    cols = -(-width // 8)
    levels = np.frombuffer(zlib.decompress(payload), dtype=np.int16)
    levels = levels.reshape(rows, cols, 8, 8).astype(np.float64)
    padded = untile_blocks(dct.dct8_inverse(levels * qp_step(qp)))
    plane = ImagePlane(np.ascontiguousarray(padded[:height, :width])).to_uint8()
    save_image(plane, output_path)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="jndfilter.stubcodec")
    sub = parser.add_subparsers(dest="command", required=True)

    p_enc = sub.add_parser("encode")
    p_enc.add_argument("input")
    p_enc.add_argument("output")
    p_enc.add_argument("--qp", type=int, required=True)

    p_dec = sub.add_parser("decode")
    p_dec.add_argument("input")
    p_dec.add_argument("output")
    p_dec.add_argument("--width", type=int, default=0)
    p_dec.add_argument("--height", type=int, default=0)

    for name in ("store", "unstore"):
        p = sub.add_parser(name)
        p.add_argument("input")
        p.add_argument("output")
        p.add_argument("--qp", type=int, default=0)
        p.add_argument("--width", type=int, default=0)
        p.add_argument("--height", type=int, default=0)

    args = parser.parse_args(argv)
    if args.command == "encode":
        encode(args.input, args.output, args.qp)
    elif args.command == "decode":
        decode(args.input, args.output)
    else:
        shutil.copyfile(args.input, args.output)
    return 0


if __name__ == "__main__":
    sys.exit(main())
