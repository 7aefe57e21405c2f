"""Binary container shared by checkpoints and dataset files.

Layout::

    magic      4 bytes (b"SGWN" or b"SGWD")
    version    u32 little-endian
    hdr_len    u32 little-endian
    header     hdr_len bytes of UTF-8 JSON; header["arrays"] lists
               {"name", "shape"} for each payload array, in order
    payload    little-endian f64 arrays, C order, concatenated
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import FormatError

FORMAT_VERSION = 1
_PREFIX = struct.Struct("<4sII")


def encode_header(header: dict, arrays: list) -> bytes:
    header = dict(header)
    header["arrays"] = [{"name": name, "shape": list(np.shape(a))} for name, a in arrays]
    return json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")


def predicted_size(header: dict, arrays: list) -> int:
    """Byte count :func:`write_container` will produce."""
    return _PREFIX.size + len(encode_header(header, arrays)) + sum(8 * int(np.size(a)) for _, a in arrays)


def write_container(path, magic: bytes, header: dict, arrays: list) -> int:
    """Write ``arrays`` (list of (name, ndarray)) after a JSON header; returns bytes written."""
    blob = encode_header(header, arrays)
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(_PREFIX.pack(magic, FORMAT_VERSION, len(blob)))
        fh.write(blob)
        for _, a in arrays:
            fh.write(np.ascontiguousarray(a, dtype="<f8").tobytes())
    return path.stat().st_size


def read_container(path, magic: bytes) -> tuple[dict, dict]:
    """Read a container written by :func:`write_container`; returns (header, {name: array})."""
    raw = Path(path).read_bytes()
    if len(raw) < _PREFIX.size:
        raise FormatError("file too short for header prefix", offset=len(raw))
    got_magic, version, hdr_len = _PREFIX.unpack_from(raw, 0)
    if got_magic != magic:
        raise FormatError(f"bad magic bytes {got_magic!r}, expected {magic!r}", offset=0)
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported format version {version}", offset=4)
    start = _PREFIX.size
    if len(raw) < start + hdr_len:
        raise FormatError("truncated JSON header", offset=len(raw))
    try:
        header = json.loads(raw[start:start + hdr_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"malformed JSON header: {exc}", offset=start) from None
    offset = start + hdr_len
    arrays = {}
    for entry in header.get("arrays", []):
        shape = tuple(int(s) for s in entry["shape"])
        nbytes = 8 * int(np.prod(shape, dtype=np.int64))
        if offset + nbytes > len(raw):
            raise FormatError(f"truncated payload for array {entry['name']!r}", offset=len(raw))
        arrays[entry["name"]] = np.frombuffer(raw, dtype="<f8", count=nbytes // 8, offset=offset).reshape(shape).astype(float)
        offset += nbytes
    if offset != len(raw):
        raise FormatError(f"{len(raw) - offset} trailing bytes after payload", offset=offset)
    return header, arrays
