import math
import struct

import numpy as np
import pytest

from filmcascade.errors import ContractError
from filmcascade.params import ScalingParams
from filmcascade.tflm import FieldSnapshot, decode_tflm, encode_tflm, read_tflm, write_tflm

PRM = ScalingParams(0.1, 0.05, 0.5, 0.4, math.pi / 6)


def test_round_trip_bulk(tmp_path):
    rng = np.random.default_rng(0)
    snap = FieldSnapshot(1.25, PRM, rng.standard_normal(8), *(rng.standard_normal((8, 5)) for _ in range(3)))
    path = tmp_path / "a.tflm"
    write_tflm(path, snap)
    back = read_tflm(path)
    assert back.t == 1.25 and back.params == PRM and back.ny == 5
    for k in ("eta", "u", "v", "p"):
        assert np.array_equal(getattr(back, k), getattr(snap, k))


def test_round_trip_surface_only():
    snap = FieldSnapshot(0.0, PRM, np.linspace(-1, 1, 6))
    back = decode_tflm(encode_tflm(snap))
    assert back.ny == 0 and back.u is None
    assert np.array_equal(back.eta, snap.eta)


def test_layout_header():
    data = encode_tflm(FieldSnapshot(2.0, PRM, np.zeros(4)))
    magic, version, nx, ny = struct.unpack_from("<4sIII", data)
    assert (magic, version, nx, ny) == (b"TFLM", 1, 4, 0)
    assert len(data) == 16 + 48 + 32


def test_corrupt_files_rejected():
    data = encode_tflm(FieldSnapshot(0.0, PRM, np.zeros(4)))
    with pytest.raises(ContractError):
        decode_tflm(b"XXXX" + data[4:])
    with pytest.raises(ContractError):
        decode_tflm(data[:-8])
    with pytest.raises(ContractError):
        decode_tflm(data[:10])
    with pytest.raises(ContractError):
        decode_tflm(data[:4] + struct.pack("<I", 2) + data[8:])
    with pytest.raises(ContractError):
        encode_tflm(FieldSnapshot(0.0, PRM, np.zeros(4), np.zeros((3, 2)), np.zeros((3, 2)), np.zeros((3, 2))))
