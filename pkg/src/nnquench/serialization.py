"""Flat binary complex-vector files with a plain-text header.

Layout: an ASCII header (magic line, ``kind <name>``, ``shape <ints>``,
``count <n>``, ``end`` line), then n complex values stored as 2n little-endian
float64 words interleaved as re, im, re, im, ...  Files are written atomically
(temp file + rename).
"""

from __future__ import annotations

import os

import numpy as np

MAGIC = b"nnquench-complex v1"


def write_complex_vector(path, kind: str, shape, values: np.ndarray) -> None:
    values = np.asarray(values, dtype=np.complex128).ravel()
    header = b"\n".join(
        [
            MAGIC,
            b"kind " + kind.encode("ascii"),
            b"shape " + " ".join(str(int(s)) for s in shape).encode("ascii"),
            b"count " + str(values.size).encode("ascii"),
            b"end",
            b"",
        ]
    )
    raw = np.empty(2 * values.size, dtype="<f8")
    raw[0::2] = values.real
    raw[1::2] = values.imag
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(header)
        fh.write(raw.tobytes())
    os.replace(tmp, path)


def read_complex_vector(path):
    """Returns (kind, shape tuple, complex128 vector)."""
    with open(path, "rb") as fh:
        blob = fh.read()
    head, _, body = blob.partition(b"end\n")
    lines = head.decode("ascii").strip().splitlines()
    if not lines or lines[0].encode() != MAGIC:
        raise ValueError(f"{path}: not a {MAGIC.decode()} file")
    fields = dict(line.split(" ", 1) for line in lines[1:])
    kind = fields["kind"].strip()
    shape = tuple(int(s) for s in fields["shape"].split())
    count = int(fields["count"])
    raw = np.frombuffer(body, dtype="<f8", count=2 * count)
    return kind, shape, (raw[0::2] + 1j * raw[1::2]).astype(np.complex128)
