"""
Binary checkpoint of a trained network.

Layout, little-endian:

    magic            8 bytes   b"TWRKCKPT"
    version          uint32
    header_len       uint32
    header           YAML, utf-8: model config, vocabulary hash, metadata
    num_arrays       uint32
    then for every array:
        name_len     uint16
        name         utf-8
        ndim         uint8
        dims         ndim x uint64
        data         prod(dims) x float64, row-major
"""

import struct
from dataclasses import asdict, dataclass, field
from typing import Any, Dict

import numpy as np
import yaml
from loguru import logger

from tweetrank.config.options import ModelConfig
from tweetrank.errors import CheckpointError, ConfigError
from tweetrank.utils.fs import require_exists
from tweetrank.utils.read_file import file_opener

MAGIC = b"TWRKCKPT"
VERSION = 1


@dataclass
class Checkpoint:
    r"""
    Parameters:
        config: Model config, with resolved maximum lengths
        arrays: Parameter name -> values
        vocab_hash: Hash of the vocabulary the ids refer to
        metadata: Free-form values such as the vocabulary sizes and the tuned interpolation weight
    """

    config: ModelConfig
    arrays: Dict[str, np.ndarray]
    vocab_hash: str
    metadata: Dict[str, Any] = field(default_factory=dict)


def checkpoint_to_bytes(checkpoint: Checkpoint) -> bytes:
    header = yaml.safe_dump(
        {
            "config": asdict(checkpoint.config),
            "vocab_hash": checkpoint.vocab_hash,
            "metadata": checkpoint.metadata,
        },
        sort_keys=True,
    ).encode("utf-8")
    chunks = [MAGIC, struct.pack("<II", VERSION, len(header)), header]
    chunks.append(struct.pack("<I", len(checkpoint.arrays)))
    for name, array in checkpoint.arrays.items():
        array = np.ascontiguousarray(array, dtype="<f8")
        encoded = name.encode("utf-8")
        chunks.append(struct.pack("<H", len(encoded)) + encoded)
        chunks.append(struct.pack("<B", array.ndim) + struct.pack(f"<{array.ndim}Q", *array.shape))
        chunks.append(array.tobytes(order="C"))
    return b"".join(chunks)


class _Reader:
    def __init__(self, data: bytes, path: str):
        self.data = data
        self.pos = 0
        self.path = path

    def read(self, size: int) -> bytes:
        if self.pos + size > len(self.data):
            raise CheckpointError(f"Truncated checkpoint {self.path}")
        chunk = self.data[self.pos : self.pos + size]
        self.pos += size
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.read(struct.calcsize(fmt)))


def checkpoint_from_bytes(data: bytes, path: str = "<bytes>") -> Checkpoint:
    reader = _Reader(data, path)
    if reader.read(len(MAGIC)) != MAGIC:
        raise CheckpointError(f"{path} is not a tweetrank checkpoint")
    version, header_len = reader.unpack("<II")
    if version != VERSION:
        raise CheckpointError(f"Unsupported checkpoint version {version} in {path}, expected {VERSION}")
    try:
        header = yaml.safe_load(reader.read(header_len).decode("utf-8"))
        config = ModelConfig(**header["config"])
        vocab_hash = str(header["vocab_hash"])
        metadata = header.get("metadata") or {}
    except (yaml.YAMLError, KeyError, TypeError, UnicodeDecodeError, ConfigError) as err:
        raise CheckpointError(f"Invalid checkpoint header in {path}: {err}")

    arrays = {}
    (num_arrays,) = reader.unpack("<I")
    for _ in range(num_arrays):
        (name_len,) = reader.unpack("<H")
        name = reader.read(name_len).decode("utf-8")
        (ndim,) = reader.unpack("<B")
        shape = reader.unpack(f"<{ndim}Q") if ndim > 0 else ()
        size = int(np.prod(shape, dtype=np.int64))
        values = np.frombuffer(reader.read(8 * size), dtype="<f8").astype(np.float64)
        arrays[name] = values.reshape(shape)
    if reader.pos != len(data):
        raise CheckpointError(f"Trailing bytes after the last array in {path}")
    return Checkpoint(config=config, arrays=arrays, vocab_hash=vocab_hash, metadata=metadata)


def save_checkpoint(checkpoint: Checkpoint, path: str):
    with file_opener(path, "wb") as f:
        f.write(checkpoint_to_bytes(checkpoint))
    logger.info(f"Saved checkpoint with {len(checkpoint.arrays)} arrays to {path}")


def load_checkpoint(path: str) -> Checkpoint:
    require_exists(path, what="checkpoint")
    with file_opener(path, "rb") as f:
        data = f.read()
    return checkpoint_from_bytes(data, path=str(path))
