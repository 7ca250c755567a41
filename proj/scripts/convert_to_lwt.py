#!/usr/bin/env python3
"""Convert torchvision MobileNetV2 weights into the toolkit's .lwt format.

Usage:
  convert_to_lwt.py --pretrained --out mobilenet_v2.lwt
  convert_to_lwt.py --weights checkpoint.pth --out model.lwt

--pretrained downloads the torchvision ImageNet checkpoint (needs network);
--weights reads a local state dict (or a checkpoint with a 'state_dict' key).
Batch-norm weight/bias become gamma/beta; num_batches_tracked is dropped.
"""

import argparse
import re
import struct
import sys
from pathlib import Path

_BN_KEYS = {
    "weight": "gamma",
    "bias": "beta",
    "running_mean": "running_mean",
    "running_var": "running_var",
    "num_batches_tracked": None,
}


def map_key(key):
    """torchvision state-dict key -> toolkit parameter name (None = drop)."""

    def bn(prefix, rest):
        if rest not in _BN_KEYS:
            raise KeyError(f"unexpected batch-norm field in '{key}'")
        mapped = _BN_KEYS[rest]
        return None if mapped is None else f"{prefix}.{mapped}"

    if key.startswith("features.0.0."):
        return "stem.conv." + key[len("features.0.0."):]
    if key.startswith("features.0.1."):
        return bn("stem.bn", key[len("features.0.1."):])
    if key.startswith("features.18.0."):
        return "block18.conv." + key[len("features.18.0."):]
    if key.startswith("features.18.1."):
        return bn("block18.bn1", key[len("features.18.1."):])

    m = re.fullmatch(r"features\.(\d+)\.conv\.(.+)", key)
    if m:
        i, rest = int(m.group(1)), m.group(2)
        blk = f"block{i}"
        if i == 1:  # expansion factor 1: no expand conv
            if rest == "0.0.weight":
                return f"{blk}.dw.weight"
            if rest.startswith("0.1."):
                return bn(f"{blk}.bn1", rest[len("0.1."):])
            if rest == "1.weight":
                return f"{blk}.pw.weight"
            if rest.startswith("2."):
                return bn(f"{blk}.bn2", rest[len("2."):])
        else:
            if rest == "0.0.weight":
                return f"{blk}.conv.weight"
            if rest.startswith("0.1."):
                return bn(f"{blk}.bn1", rest[len("0.1."):])
            if rest == "1.0.weight":
                return f"{blk}.dw.weight"
            if rest.startswith("1.1."):
                return bn(f"{blk}.bn2", rest[len("1.1."):])
            if rest == "2.weight":
                return f"{blk}.pw.weight"
            if rest.startswith("3."):
                return bn(f"{blk}.bn3", rest[len("3."):])
        raise KeyError(f"unrecognized inverted-residual field '{key}'")

    if key == "classifier.1.weight":
        return "head.weight"
    if key == "classifier.1.bias":
        return "head.bias"
    if key.endswith("num_batches_tracked"):
        return None
    raise KeyError(f"unrecognized state-dict key '{key}'")


def convert_state_dict(state):
    """Ordered (name, float32 tensor) pairs in state-dict order."""
    entries = []
    for key, tensor in state.items():
        name = map_key(key)
        if name is None:
            continue
        entries.append((name, tensor))
    return entries


def write_lwt(entries, path):
    import torch

    blob = bytearray(b"LWTF")
    blob += struct.pack("<II", 1, len(entries))
    for name, tensor in entries:
        t = tensor.detach().to(torch.float32).contiguous()
        dims = list(t.shape)
        if not 1 <= len(dims) <= 4:
            raise ValueError(f"'{name}' has unsupported rank {len(dims)}")
        encoded = name.encode("utf-8")
        blob += struct.pack("<H", len(encoded)) + encoded
        blob += struct.pack("<BB", 0, len(dims))
        blob += struct.pack(f"<{len(dims)}I", *dims)
        blob += t.numpy().astype("<f4").tobytes()
    Path(path).write_bytes(bytes(blob))
    return len(blob)


def load_checkpoint(path):
    import torch

    obj = torch.load(path, map_location="cpu", weights_only=True)
    if isinstance(obj, dict) and "state_dict" in obj:
        obj = obj["state_dict"]
    if not isinstance(obj, dict):
        raise SystemExit(f"{path}: not a state dict")
    # Strip common wrapper prefixes from training frameworks.
    return {re.sub(r"^(module\.|model\.)", "", k): v for k, v in obj.items()}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    src = ap.add_mutually_exclusive_group(required=True)
    src.add_argument("--pretrained", action="store_true",
                     help="download the torchvision ImageNet checkpoint")
    src.add_argument("--weights", metavar="FILE",
                     help="local .pth/.pt state dict to convert")
    ap.add_argument("--out", required=True, metavar="FILE",
                    help="output .lwt path")
    args = ap.parse_args()

    if args.pretrained:
        from torchvision.models import MobileNet_V2_Weights, mobilenet_v2
        model = mobilenet_v2(weights=MobileNet_V2_Weights.IMAGENET1K_V1)
        state = model.state_dict()
    else:
        state = load_checkpoint(args.weights)

    entries = convert_state_dict(state)
    size = write_lwt(entries, args.out)
    print(f"wrote {args.out}: {len(entries)} tensors, {size} bytes")
    return 0


if __name__ == "__main__":
    sys.exit(main())
