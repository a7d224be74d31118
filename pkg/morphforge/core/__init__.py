# morphforge/core/__init__.py

from .container import decode_tensors, encode_tensors, read_container, write_container
from .exceptions import MorphForgeException

__all__ = [
    "MorphForgeException",
    "decode_tensors",
    "encode_tensors",
    "read_container",
    "write_container",
]
