"""Versioned binary parameter container.

Layout (little-endian throughout):

    magic "TFWT" | u32 version | u32 n_tensors |
    per tensor: u16 name_len | name utf-8 | u8 ndim | u32 dims... | f32 data |
    sha256 digest of everything above (32 bytes)

A JSON sidecar (written next to the container at ``<path>.json``) carries
the architecture hyperparameters and the feature-manifest hash so loads can
be validated before any weights are touched.
"""

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from ..errors import ChecksumMismatchError, ParseError, VersionMismatchError

MAGIC = b"TFWT"
VERSION = 1


def sidecar_path(path):
    return Path(str(path) + ".json")


def write_checkpoint(path, tensors, sidecar):
    """Write named float32 tensors plus the JSON sidecar."""
    parts = [MAGIC, struct.pack("<II", VERSION, len(tensors))]
    for name, arr in tensors.items():
        arr = np.ascontiguousarray(arr, dtype="<f4")
        encoded = name.encode("utf-8")
        parts.append(struct.pack("<H", len(encoded)))
        parts.append(encoded)
        parts.append(struct.pack("<B", arr.ndim))
        parts.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
        parts.append(arr.tobytes())
    blob = b"".join(parts)
    digest = hashlib.sha256(blob).digest()
    path = Path(path)
    path.write_bytes(blob + digest)
    sidecar_path(path).write_text(
        json.dumps(sidecar, indent=2, sort_keys=True), encoding="utf-8"
    )
    return path


def read_checkpoint(path):
    """Read a container; returns (tensors dict, sidecar dict)."""
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < len(MAGIC) + 8 + 32:
        raise ParseError(f"checkpoint {path} is truncated")
    blob, digest = raw[:-32], raw[-32:]
    if hashlib.sha256(blob).digest() != digest:
        raise ChecksumMismatchError(f"checkpoint {path} failed its checksum")
    if blob[:4] != MAGIC:
        raise ParseError(f"checkpoint {path} has bad magic bytes")
    version, count = struct.unpack_from("<II", blob, 4)
    if version != VERSION:
        raise VersionMismatchError(
            f"checkpoint {path} is version {version}, expected {VERSION}"
        )
    offset = 12
    tensors = {}
    for _ in range(count):
        (name_len,) = struct.unpack_from("<H", blob, offset)
        offset += 2
        name = blob[offset : offset + name_len].decode("utf-8")
        offset += name_len
        (ndim,) = struct.unpack_from("<B", blob, offset)
        offset += 1
        shape = struct.unpack_from(f"<{ndim}I", blob, offset)
        offset += 4 * ndim
        size = int(np.prod(shape)) if ndim else 1
        data = np.frombuffer(blob, dtype="<f4", count=size, offset=offset)
        offset += 4 * size
        tensors[name] = data.reshape(shape).copy()
    side = sidecar_path(path)
    if not side.exists():
        raise ParseError(f"checkpoint sidecar {side} is missing")
    sidecar = json.loads(side.read_text(encoding="utf-8"))
    return tensors, sidecar


def file_sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
