"""Single-file parameter container.

Layout: 8-byte magic, little-endian uint64 header length, a UTF-8 JSON header
``{"meta": ..., "blocks": [{"name", "shape", "dtype", "offset", "nbytes"}]}``
and then each block's little-endian float64 payload back to back in name
order.  The header is written with sorted keys so identical inputs give
identical bytes.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"LCLCKPT1"
DTYPE = "<f8"


def save(path, blocks, meta=None):
    """Write named float64 arrays ``blocks`` to ``path``, ordered by name."""
    index, payloads, offset = [], [], 0
    for name, arr in sorted(blocks.items()):
        data = np.ascontiguousarray(arr, dtype=DTYPE).tobytes()
        index.append({"name": name, "shape": list(np.shape(arr)), "dtype": DTYPE,
                      "offset": offset, "nbytes": len(data)})
        payloads.append(data)
        offset += len(data)
    header = json.dumps({"meta": meta or {}, "blocks": index}, sort_keys=True).encode("utf-8")
    with open(Path(path), "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(header)))
        fh.write(header)
        for data in payloads:
            fh.write(data)


def load(path):
    """Return ``(blocks, meta)`` with blocks as a name -> ndarray dict."""
    raw = Path(path).read_bytes()
    if raw[:8] != MAGIC:
        raise ValueError(f"{path}: not a checkpoint file")
    (hlen,) = struct.unpack("<Q", raw[8:16])
    header = json.loads(raw[16:16 + hlen].decode("utf-8"))
    base = 16 + hlen
    blocks = {}
    for b in header["blocks"]:
        if b["dtype"] != DTYPE:
            raise ValueError(f"{path}: unsupported dtype {b['dtype']}")
        start = base + b["offset"]
        chunk = raw[start:start + b["nbytes"]]
        if len(chunk) != b["nbytes"]:
            raise ValueError(f"{path}: truncated block {b['name']}")
        blocks[b["name"]] = np.frombuffer(chunk, dtype=DTYPE).reshape(b["shape"]).copy()
    return blocks, header["meta"]
