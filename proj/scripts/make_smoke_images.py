#!/usr/bin/env python3
"""Regenerates the three bundled smoke-test radiograph stand-ins.

The images are synthetic grayscale patterns (no clinical content) used only
to exercise the classification pipeline end to end. Deterministic: running
this script twice produces byte-identical PNGs.
"""

import math
import os
import zlib
import struct

OUT_DIR = os.path.join(os.path.dirname(__file__), "..", "assets", "smoke")
SIZE = 160


def chunk(kind: bytes, payload: bytes) -> bytes:
    return (
        struct.pack(">I", len(payload))
        + kind
        + payload
        + struct.pack(">I", zlib.crc32(kind + payload) & 0xFFFFFFFF)
    )


def write_png(path: str, rows) -> None:
    raw = b"".join(b"\x00" + bytes(row) for row in rows)
    ihdr = struct.pack(">IIBBBBB", SIZE, SIZE, 8, 0, 0, 0, 0)
    with open(path, "wb") as f:
        f.write(b"\x89PNG\r\n\x1a\n")
        f.write(chunk(b"IHDR", ihdr))
        f.write(chunk(b"IDAT", zlib.compress(raw, 9)))
        f.write(chunk(b"IEND", b""))


def clamp(v: float) -> int:
    return max(0, min(255, int(round(v))))


def pattern_one(x: int, y: int) -> int:
    # Bright center fading out, with two darker lobes.
    cx, cy = SIZE / 2, SIZE / 2
    r = math.hypot(x - cx, y - cy) / (SIZE / 2)
    lobe = 40 * math.exp(-((x - 50) ** 2 + (y - 80) ** 2) / 900)
    lobe += 40 * math.exp(-((x - 110) ** 2 + (y - 80) ** 2) / 900)
    return clamp(210 * math.exp(-r * r) + 20 - lobe)


def pattern_two(x: int, y: int) -> int:
    # Diagonal gradient crossed by soft ribs.
    base = 60 + 0.6 * x + 0.3 * y
    ribs = 25 * math.sin(y / 9.0)
    return clamp(base + ribs)


def pattern_three(x: int, y: int) -> int:
    # Concentric rings around an off-center point.
    r = math.hypot(x - 60, y - 100)
    return clamp(120 + 90 * math.sin(r / 7.0) * math.exp(-r / 80.0))


def main() -> None:
    os.makedirs(OUT_DIR, exist_ok=True)
    for name, fn in (
        ("synthetic_a.png", pattern_one),
        ("synthetic_b.png", pattern_two),
        ("synthetic_c.png", pattern_three),
    ):
        rows = [[fn(x, y) for x in range(SIZE)] for y in range(SIZE)]
        write_png(os.path.join(OUT_DIR, name), rows)
        print("wrote", os.path.join(OUT_DIR, name))


if __name__ == "__main__":
    main()
