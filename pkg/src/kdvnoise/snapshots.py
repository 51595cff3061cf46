"""Binary ensemble persistence with an integrity-checked JSON header.

Layout: an 8-byte magic string, a little-endian uint32 header length, the
UTF-8 JSON header, then the raw complex128 payload (count x N, row-major,
little-endian). The header carries a SHA-256 of the payload so corruption
and truncation are detected on load. Serialization is canonical (sorted
keys), so identical ensembles produce identical files.
"""
from __future__ import annotations

import hashlib
import json
import struct

import numpy as np

from .invariance import Ensemble

__all__ = ["SnapshotError", "load_ensemble", "peek_header", "save_ensemble"]

_MAGIC = b"KDVSNAP\x01"
_FORMAT_VERSION = 1
_ITEM = np.dtype("<c16")


class SnapshotError(Exception):
    """Raised when a snapshot file is malformed, corrupt, or unsupported."""


def save_ensemble(ensemble, path):
    payload = np.ascontiguousarray(ensemble.coeffs, dtype=_ITEM).tobytes()
    header = {
        "format_version": _FORMAT_VERSION,
        "N": int(ensemble.N),
        "count": int(ensemble.count),
        "time": float(ensemble.time),
        "provenance": ensemble.provenance,
        "payload_sha256": hashlib.sha256(payload).hexdigest(),
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        fh.write(payload)


def _read_header(raw):
    if len(raw) < len(_MAGIC) + 4:
        raise SnapshotError("file too short to be a snapshot")
    if raw[: len(_MAGIC)] != _MAGIC:
        raise SnapshotError("bad magic bytes; not a snapshot file")
    (hlen,) = struct.unpack_from("<I", raw, len(_MAGIC))
    start = len(_MAGIC) + 4
    if len(raw) < start + hlen:
        raise SnapshotError("truncated header")
    try:
        header = json.loads(raw[start : start + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SnapshotError(f"unreadable header: {exc}") from exc
    if header.get("format_version") != _FORMAT_VERSION:
        raise SnapshotError(
            f"unsupported format version {header.get('format_version')!r}"
        )
    return header, raw[start + hlen :]


def peek_header(path):
    """Header dict only; payload integrity is not checked here."""
    with open(path, "rb") as fh:
        raw = fh.read()
    header, _ = _read_header(raw)
    return header


def load_ensemble(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    header, payload = _read_header(raw)
    N, count = header["N"], header["count"]
    expected = N * count * _ITEM.itemsize
    if len(payload) != expected:
        raise SnapshotError(
            f"truncated payload: {len(payload)} bytes, expected {expected}"
        )
    digest = hashlib.sha256(payload).hexdigest()
    if digest != header["payload_sha256"]:
        raise SnapshotError("payload checksum mismatch")
    coeffs = np.frombuffer(payload, dtype=_ITEM).reshape(count, N).copy()
    return Ensemble(
        N=N,
        coeffs=coeffs.astype(np.complex128),
        time=header["time"],
        provenance=header["provenance"],
    )
