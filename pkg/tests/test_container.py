# tests/test_container.py

import struct

import numpy as np
import pytest

from morphforge.core.container import MAGIC, decode_tensors, encode_tensors, read_container, write_container
from morphforge.core.exceptions import ArtifactIOError, ContainerFormatError


class TestTensorContainer:
    """Test the CNWT1 tensor container."""

    def test_layout(self):
        """Test the byte layout of a single tensor."""
        payload = encode_tensors({"ab": np.array([[1.0, 2.0]], dtype=np.float32)})
        expected = (
            MAGIC
            + struct.pack("<I", 1)
            + struct.pack("<H", 2)
            + b"ab"
            + struct.pack("<B", 2)
            + struct.pack("<2I", 1, 2)
            + struct.pack("<2f", 1.0, 2.0)
        )
        assert payload == expected

    def test_file_round_trip_is_bit_exact(self, tmp_path, rng):
        """Test writing and reading a file keeps every tensor bit for bit."""
        tensors = {
            "conv1_1.weight": rng.standard_normal((4, 3, 3, 3)).astype(np.float32),
            "conv1_1.bias": np.zeros(4, dtype=np.float32),
            "scalar": np.array(3.5, dtype=np.float32),
        }
        path = tmp_path / "weights.cnwt"
        write_container(path, tensors)
        loaded = read_container(path)

        assert list(loaded) == list(tensors)
        for name, tensor in tensors.items():
            assert loaded[name].shape == tensor.shape
            assert loaded[name].tobytes() == tensor.tobytes()

    def test_bad_magic(self):
        """Test a wrong magic is rejected."""
        with pytest.raises(ContainerFormatError):
            decode_tensors(b"NOPE1" + struct.pack("<I", 0))

    def test_truncated_tensor(self):
        """Test a payload cut inside tensor data is rejected."""
        payload = encode_tensors({"w": np.ones((2, 2), dtype=np.float32)})
        with pytest.raises(ContainerFormatError, match="Truncated"):
            decode_tensors(payload[:-3])

    def test_duplicate_names(self):
        """Test two tensors with the same name are rejected."""
        single = encode_tensors({"w": np.ones(1, dtype=np.float32)})
        body = single[len(MAGIC) + 4:]
        payload = MAGIC + struct.pack("<I", 2) + body + body
        with pytest.raises(ContainerFormatError, match="Duplicate"):
            decode_tensors(payload)

    def test_non_finite_values_rejected(self):
        """Test NaN values cannot be encoded."""
        with pytest.raises(ContainerFormatError):
            encode_tensors({"w": np.array([np.nan], dtype=np.float32)})

    def test_missing_file(self, tmp_path):
        """Test a missing file raises an I/O error."""
        with pytest.raises(ArtifactIOError):
            read_container(tmp_path / "absent.cnwt")

    def test_trailing_bytes_rejected(self):
        """Bytes after the last declared tensor make the container invalid."""
        payload = encode_tensors({"w": np.ones((2, 2), dtype=np.float32)})
        with pytest.raises(ContainerFormatError, match="4 trailing bytes"):
            decode_tensors(payload + b"\x00\x00\x80\x3f")

    def test_trailing_bytes_rejected_on_read(self, tmp_path):
        """A container file with an appended tail fails to load."""
        path = tmp_path / "model.cnwt"
        path.write_bytes(encode_tensors({}) + b"x")
        with pytest.raises(ContainerFormatError, match="trailing"):
            read_container(path)
