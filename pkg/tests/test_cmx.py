import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from l4sparsify import cmx
from l4sparsify.errors import FormatError

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 5), st.integers(1, 5), st.just(2)), elements=finite))
def test_binary_round_trip_is_exact(parts):
    m = parts[..., 0] + 1j * parts[..., 1]
    back = cmx.decode_cmx1(cmx.encode_cmx1(m))
    assert back.shape == m.shape
    assert np.array_equal(back.view(np.float64), m.view(np.float64))


def test_header_layout():
    buf = cmx.encode_cmx1(np.array([[1 + 2j, 3 - 4j]]))
    assert buf[:4] == b"CMX1"
    assert int.from_bytes(buf[4:8], "little") == 1
    assert int.from_bytes(buf[8:12], "little") == 2
    assert np.frombuffer(buf[12:], "<f8").tolist() == [1, 2, 3, -4]


def test_corrupt_files_rejected():
    good = cmx.encode_cmx1(np.eye(2))
    with pytest.raises(FormatError):
        cmx.decode_cmx1(good[:10])
    with pytest.raises(FormatError):
        cmx.decode_cmx1(b"XXXX" + good[4:])
    with pytest.raises(FormatError):
        cmx.decode_cmx1(good[:-1])
    with pytest.raises(FormatError):
        cmx.encode_cmx1(np.zeros(3))


def test_csv_round_trip_exact(tmp_path, rng):
    m = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
    m[0, 0] = complex(0.1, -0.0)
    p = tmp_path / "m.csv"
    cmx.write_csv(p, m)
    back = cmx.read_csv(p)
    assert np.array_equal(back, m)
    assert np.signbit(back[0, 0].imag)


def test_csv_ragged_rejected(tmp_path):
    p = tmp_path / "r.csv"
    p.write_text("1+0j,2+0j\n3+0j\n")
    with pytest.raises(FormatError):
        cmx.read_csv(p)
    p.write_text("1+0j,abc\n")
    with pytest.raises(FormatError):
        cmx.read_csv(p)
