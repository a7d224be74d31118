# morphforge/core/container.py

"""Binary tensor container shared by network weights, BSIF banks and detector models.

Layout (little-endian): magic ``CNWT1``, u32 tensor count, then per tensor a u16
name length, the UTF-8 name, a u8 rank, rank x u32 dims and the raw float32 data
in row-major order.
"""

import logging
import struct
from pathlib import Path
from typing import Mapping

import numpy as np
import numpy.typing as npt

from morphforge.core.arrays import FloatArray
from morphforge.core.exceptions import ArtifactIOError, ContainerFormatError

logger = logging.getLogger(__name__)

MAGIC = b"CNWT1"


def encode_tensors(tensors: Mapping[str, npt.ArrayLike]) -> bytes:
    """Serialize named tensors into container bytes."""
    chunks = [MAGIC, struct.pack("<I", len(tensors))]
    for name, tensor in tensors.items():
        encoded_name = name.encode("utf-8")
        if len(encoded_name) > 0xFFFF:
            raise ContainerFormatError(detail=f"Tensor name too long: {name[:32]}...")
        array = np.asarray(tensor)
        if not np.all(np.isfinite(array)):
            raise ContainerFormatError(detail=f"Tensor '{name}' has non-finite values")
        chunks.append(struct.pack("<H", len(encoded_name)))
        chunks.append(encoded_name)
        chunks.append(struct.pack("<B", array.ndim))
        chunks.append(struct.pack(f"<{array.ndim}I", *array.shape))
        chunks.append(np.ascontiguousarray(array, dtype="<f4").tobytes())
    return b"".join(chunks)


def decode_tensors(payload: bytes) -> dict[str, FloatArray]:
    """Parse container bytes into an ordered name -> float32 array mapping."""
    if payload[: len(MAGIC)] != MAGIC:
        raise ContainerFormatError(detail="Bad magic: not a CNWT1 container")

    offset = len(MAGIC)

    def take(size: int, what: str) -> bytes:
        nonlocal offset
        if offset + size > len(payload):
            raise ContainerFormatError(detail=f"Truncated container while reading {what}")
        chunk = payload[offset:offset + size]
        offset += size
        return chunk

    (count,) = struct.unpack("<I", take(4, "tensor count"))
    tensors: dict[str, FloatArray] = {}
    for index in range(count):
        (name_length,) = struct.unpack("<H", take(2, f"name length of tensor {index}"))
        try:
            name = take(name_length, f"name of tensor {index}").decode("utf-8")
        except UnicodeDecodeError as e:
            raise ContainerFormatError(detail=f"Tensor {index} name is not UTF-8: {e}")
        (rank,) = struct.unpack("<B", take(1, f"rank of '{name}'"))
        dims = struct.unpack(f"<{rank}I", take(4 * rank, f"dims of '{name}'"))
        size = int(np.prod(dims, dtype=np.int64)) if rank else 1
        data = take(4 * size, f"data of '{name}'")
        if name in tensors:
            raise ContainerFormatError(detail=f"Duplicate tensor name '{name}'")
        tensors[name] = np.frombuffer(data, dtype="<f4").astype(np.float32).reshape(dims)

    if offset != len(payload):
        raise ContainerFormatError(detail=f"{len(payload) - offset} trailing bytes after the last tensor")
    return tensors


def write_container(path: str | Path, tensors: Mapping[str, npt.ArrayLike]) -> None:
    """Write named tensors to a container file."""
    try:
        Path(path).write_bytes(encode_tensors(tensors))
    except OSError as e:
        raise ArtifactIOError(detail=f"Cannot write container {path}: {e}")


def read_container(path: str | Path) -> dict[str, FloatArray]:
    """Read a container file."""
    try:
        payload = Path(path).read_bytes()
    except OSError as e:
        raise ArtifactIOError(detail=f"Cannot read container {path}: {e}")
    tensors = decode_tensors(payload)
    logger.debug(f"Read {len(tensors)} tensors from {path}")
    return tensors
