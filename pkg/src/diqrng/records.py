"""Binary session formats: packed run records and raw bit files.

Run records pack to 5 bits each (x: 2 bits holding 1..3, then a, b, t),
concatenated MSB-first and zero-padded to a byte boundary; the record
count travels in a JSON sidecar next to the file, together with a config
hash for provenance.  Raw bit files (extractor sources, seeds, outputs)
are plain MSB-first bytes with the exact bit length in their sidecar.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

import numpy as np

from .qsim import RunRecord

RECORD_BITS = 5


def sidecar_path(path: str | Path) -> Path:
    p = Path(path)
    return p.with_name(p.name + ".json")


def write_records(
    path: str | Path, records: Sequence[RunRecord], config_hash: str = ""
) -> None:
    n = len(records)
    bits = np.zeros(n * RECORD_BITS, dtype=np.uint8)
    for i, r in enumerate(records):
        o = i * RECORD_BITS
        bits[o] = r.x >> 1
        bits[o + 1] = r.x & 1
        bits[o + 2] = r.a
        bits[o + 3] = r.b
        bits[o + 4] = r.t
    Path(path).write_bytes(np.packbits(bits).tobytes())
    sidecar_path(path).write_text(json.dumps({"n": n, "config_hash": config_hash}))


def read_records(path: str | Path) -> tuple[list[RunRecord], str]:
    meta = json.loads(sidecar_path(path).read_text())
    n = int(meta["n"])
    raw = np.unpackbits(np.frombuffer(Path(path).read_bytes(), dtype=np.uint8))
    if raw.size < n * RECORD_BITS:
        raise ValueError(f"record file holds {raw.size} bits, sidecar claims {n} records")
    bits = raw[: n * RECORD_BITS].reshape(n, RECORD_BITS)
    xs = bits[:, 0] * 2 + bits[:, 1]
    if n and (xs.min() < 1 or xs.max() > 3):
        raise ValueError("corrupt record file: setting outside {1,2,3}")
    records = [
        RunRecord(int(x), int(a), int(b), int(t))
        for x, a, b, t in zip(xs, bits[:, 2], bits[:, 3], bits[:, 4])
    ]
    return records, str(meta.get("config_hash", ""))


def write_bits(path: str | Path, bits: np.ndarray, **meta) -> None:
    bits = np.asarray(bits, dtype=np.uint8)
    Path(path).write_bytes(np.packbits(bits).tobytes())
    sidecar_path(path).write_text(json.dumps({"bits": int(bits.size), **meta}))


def read_bits(path: str | Path) -> np.ndarray:
    meta = json.loads(sidecar_path(path).read_text())
    n = int(meta["bits"])
    raw = np.unpackbits(np.frombuffer(Path(path).read_bytes(), dtype=np.uint8))
    if raw.size < n:
        raise ValueError(f"bit file holds {raw.size} bits, sidecar claims {n}")
    return raw[:n]
