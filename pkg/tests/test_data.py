import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csfkit.data import (
    Dataset,
    Item,
    PointSet,
    decode_multiset,
    encode_multiset,
    load_idx,
    load_points_csv,
)
from csfkit.errors import DomainError, FormatError


def test_item_requires_bytes():
    with pytest.raises(DomainError):
        Item("a", "not bytes")


def test_dataset_of_assigns_indexed_ids():
    ds = Dataset.of([b"x", b"y"], prefix="d")
    assert [it.id for it in ds] == ["d0", "d1"]
    assert ds.n == len(ds) == 2
    assert ds[1].data == b"y"


def test_pointset_validates_shape_and_finiteness():
    ps = PointSet(np.array([[1, 2], [3, 4]]))
    assert ps.n == 2 and ps.d == 2
    assert ps.points.dtype == np.float64
    with pytest.raises(DomainError):
        PointSet(np.zeros(3))
    with pytest.raises(DomainError):
        PointSet(np.array([[np.nan, 0.0]]))


def test_concat_mode_joins_payloads():
    assert encode_multiset([b"ab", b"c"]) == b"abc"
    assert encode_multiset([]) == b""
    with pytest.raises(DomainError):
        encode_multiset([b"x"], mode="bogus")


def _strip_trailing_empties(blobs):
    out = list(blobs)
    while out and out[-1] == b"":
        out.pop()
    return out


@settings(max_examples=150, deadline=None)
@given(st.lists(st.binary(max_size=6), max_size=5))
def test_prefix_code_round_trips_up_to_trailing_empties(blobs):
    decoded = decode_multiset(encode_multiset(blobs, mode="prefix"))
    stripped = _strip_trailing_empties(blobs)
    # non-empty prefix is exact; trailing empties may be dropped (their
    # separator bits merge into byte padding) but never invented
    assert decoded[: len(stripped)] == stripped
    assert all(b == b"" for b in decoded[len(stripped):])
    assert len(decoded) <= len(blobs)


def test_prefix_code_preserves_interior_empties():
    assert decode_multiset(encode_multiset([b"", b"x"], mode="prefix")) == [b"", b"x"]
    # a trailing empty after a payload is indistinguishable from padding...
    assert decode_multiset(encode_multiset([b"x", b""], mode="prefix")) == [b"x"]
    # ...but a lone empty pads to a whole byte and is recovered
    assert decode_multiset(encode_multiset([b""], mode="prefix")) == [b""]


def test_prefix_decode_error_paths():
    with pytest.raises(FormatError):
        decode_multiset(b"\xff")  # ones run into end of stream
    with pytest.raises(FormatError):
        decode_multiset(b"\x80")  # 1-bit length: not a whole byte count


def _write_idx1(path, payload: bytes):
    path.write_bytes(struct.pack(">II", 0x00000801, len(payload)) + payload)


def test_load_idx_rank1_and_rank3(tmp_path):
    p1 = tmp_path / "v.idx"
    _write_idx1(p1, bytes([5, 6, 7]))
    ds = load_idx(p1)
    assert ds.n == 3 and ds[2].data == bytes([7]) and ds[0].id == "0"

    p3 = tmp_path / "m.idx"
    body = bytes(range(2 * 2 * 3))
    p3.write_bytes(struct.pack(">IIII", 0x00000803, 2, 2, 3) + body)
    ds3 = load_idx(p3)
    assert ds3.n == 2 and ds3[0].data == body[:6] and ds3[1].data == body[6:]


def test_load_idx_error_paths(tmp_path):
    bad = tmp_path / "bad.idx"
    bad.write_bytes(struct.pack(">I", 0xDEADBEEF))
    with pytest.raises(FormatError):
        load_idx(bad)
    short = tmp_path / "short.idx"
    short.write_bytes(b"\x00\x00")
    with pytest.raises(FormatError):
        load_idx(short)
    wrong = tmp_path / "wrong.idx"
    wrong.write_bytes(struct.pack(">II", 0x00000801, 5) + b"abc")
    with pytest.raises(FormatError):
        load_idx(wrong)


def test_load_points_csv_with_and_without_header(tmp_path):
    f = tmp_path / "pts.csv"
    f.write_text("x,y\n1.5,2\n3,4\n\n", encoding="utf-8")
    ps = load_points_csv(f)
    assert ps.n == 2 and ps.points[0, 0] == 1.5

    g = tmp_path / "raw.csv"
    g.write_text("1,2\n3,4\n", encoding="utf-8")
    assert load_points_csv(g).n == 2


def test_load_points_csv_rejects_ragged_rows(tmp_path):
    f = tmp_path / "ragged.csv"
    f.write_text("1,2\n3\n", encoding="utf-8")
    with pytest.raises(FormatError):
        load_points_csv(f)
