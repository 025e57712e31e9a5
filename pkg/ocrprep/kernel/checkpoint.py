"""
Weight checkpoint container

Binary layout (all integers little-endian unsigned 32-bit):

    magic        8 bytes   b"OCRPCKPT"
    version      u32       currently 1
    config_len   u32       length of the config block in bytes
    config       bytes     UTF-8 JSON object (model config: kind, widths, vocab, ...)
    count        u32       number of records
    records      count x:
        name_len u32
        name     bytes     UTF-8 dotted parameter/buffer name
        rank     u32
        dims     u32 x rank
        values   float32 little-endian, product(dims) values, C order

Loading a file and saving it again yields identical bytes.
See docs/checkpoint_format.md for the same layout with an annotated example.
"""

import hashlib
import json
import struct
from pathlib import Path
from typing import Any, Union

import numpy as np

from ..errors import CheckpointError

MAGIC = b"OCRPCKPT"
VERSION = 1

PathLike = Union[str, Path]


def _u32(value: int) -> bytes:
    return struct.pack("<I", value)


def encode_checkpoint(state: dict[str, np.ndarray], config: dict[str, Any]) -> bytes:
    """Serialize named arrays plus a config block"""
    config_bytes = json.dumps(config, sort_keys=True, ensure_ascii=False).encode("utf-8")
    parts = [MAGIC, _u32(VERSION), _u32(len(config_bytes)), config_bytes, _u32(len(state))]
    for name, array in state.items():
        name_bytes = name.encode("utf-8")
        values = np.ascontiguousarray(array, dtype="<f4")
        parts.append(_u32(len(name_bytes)))
        parts.append(name_bytes)
        parts.append(_u32(values.ndim))
        parts.extend(_u32(d) for d in values.shape)
        parts.append(values.tobytes(order="C"))
    return b"".join(parts)


def decode_checkpoint(blob: bytes) -> tuple[dict[str, np.ndarray], dict[str, Any]]:
    """Inverse of encode_checkpoint"""
    offset = 0

    def take(n: int) -> bytes:
        nonlocal offset
        if offset + n > len(blob):
            raise CheckpointError(f"truncated checkpoint at byte {offset}")
        chunk = blob[offset:offset + n]
        offset += n
        return chunk

    def take_u32() -> int:
        return struct.unpack("<I", take(4))[0]

    if take(len(MAGIC)) != MAGIC:
        raise CheckpointError("not an ocrprep checkpoint (bad magic)")
    version = take_u32()
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    try:
        config = json.loads(take(take_u32()).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"corrupt config block: {e}") from None

    state: dict[str, np.ndarray] = {}
    for _ in range(take_u32()):
        raw = take(take_u32())
        try:
            name = raw.decode("utf-8")
        except UnicodeDecodeError as e:
            raise CheckpointError(f"corrupt record name at byte {offset - len(raw)}: {e}") from None
        rank = take_u32()
        dims = tuple(take_u32() for _ in range(rank))
        count = int(np.prod(dims)) if dims else 1
        values = np.frombuffer(take(4 * count), dtype="<f4").astype(np.float32)
        state[name] = values.reshape(dims)
    if offset != len(blob):
        raise CheckpointError(f"{len(blob) - offset} trailing bytes after last record")
    return state, config


def save_checkpoint(path: PathLike, state: dict[str, np.ndarray], config: dict[str, Any]) -> str:
    """Write a checkpoint; returns its sha256 hex digest"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    blob = encode_checkpoint(state, config)
    path.write_bytes(blob)
    return hashlib.sha256(blob).hexdigest()


def load_checkpoint(path: PathLike) -> tuple[dict[str, np.ndarray], dict[str, Any]]:
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"checkpoint not found: {path}")
    return decode_checkpoint(path.read_bytes())


def file_sha256(path: PathLike) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
