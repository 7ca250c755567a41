#!/usr/bin/env python3
"""Cross-check the C++ forward pass against torchvision's MobileNetV2.

Builds a seeded randomly-initialized torchvision model, converts it with
convert_to_lwt, classifies a synthetic image with the compiled CLI, and
compares the class probabilities against torch computing the same pipeline.
Agreement within 1e-4 exercises convolution, batch-norm inference, ReLU6,
residual adds, pooling, the head, and softmax against an independent
implementation.

Usage: crosscheck_torchvision.py [--binary build/tools/lungline]
"""

import argparse
import json
import struct
import subprocess
import sys
import tempfile
import zlib
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))
from convert_to_lwt import convert_state_dict, write_lwt  # noqa: E402


def write_gray_png(path, width, height, pixels):
    raw = b"".join(
        b"\x00" + bytes(pixels[y * width:(y + 1) * width])
        for y in range(height)
    )

    def chunk(tag, payload):
        body = tag + payload
        return struct.pack(">I", len(payload)) + body + struct.pack(
            ">I", zlib.crc32(body))

    header = struct.pack(">IIBBBBB", width, height, 8, 0, 0, 0, 0)
    png = (b"\x89PNG\r\n\x1a\n" + chunk(b"IHDR", header) +
           chunk(b"IDAT", zlib.compress(raw, 9)) + chunk(b"IEND", b""))
    Path(path).write_bytes(png)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--binary", default="build/tools/lungline",
                    help="path to the compiled CLI")
    ap.add_argument("--tolerance", type=float, default=1e-4)
    args = ap.parse_args()

    import torch
    import torchvision

    torch.manual_seed(7)
    model = torchvision.models.mobilenet_v2()
    # Freshly initialized BN carries identity running stats, under which the
    # activations collapse to zero within a few blocks and every class comes
    # out exactly uniform — a vacuous comparison. Calibrate the running
    # stats on random batches so each layer carries signal.
    for m in model.modules():
        if isinstance(m, torch.nn.BatchNorm2d):
            m.momentum = None  # cumulative average over calibration batches
    model.train()
    with torch.no_grad():
        for _ in range(6):
            model(torch.randn(4, 3, 112, 112))
    model.eval()

    size = 224
    pixels = [(31 * x + 57 * y + (x * y) // 7) % 256
              for y in range(size) for x in range(size)]

    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        weights = tmp / "crosscheck.lwt"
        write_lwt(convert_state_dict(model.state_dict()), weights)
        image = tmp / "input.png"
        write_gray_png(image, size, size, pixels)
        report = tmp / "report.json"

        subprocess.run(
            [args.binary, "classify", "--weights", str(weights),
             "--out", str(report), str(image)],
            check=True)
        got = json.loads(report.read_text())["items"][0]["probabilities"]

    # Same preprocessing: 224 input needs no resize; gray maps to itself
    # under the luma weights; then x/255 normalized and replicated to RGB.
    v = torch.tensor(pixels, dtype=torch.float32).reshape(1, 1, size, size)
    x = (v / 255.0 - 0.0960) / 0.9341
    x = x.expand(1, 3, size, size)
    with torch.no_grad():
        want = torch.softmax(model(x)[0], dim=0)

    got = torch.tensor(got, dtype=torch.float64)
    spread = (want.max() - want.min()).item()
    if spread < 1e-5:
        print(f"CROSSCHECK DEGENERATE: probability spread {spread:.3e} "
              "(activations collapsed; nothing real was compared)")
        return 1
    diff = (got - want.double()).abs().max().item()
    agree = int(got.argmax()) == int(want.argmax())
    print(f"max probability difference: {diff:.3e}, spread {spread:.3e} "
          f"(argmax {'agrees' if agree else 'DISAGREES'})")
    if diff > args.tolerance or not agree:
        print("CROSSCHECK FAILED")
        return 1
    print("crosscheck passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
