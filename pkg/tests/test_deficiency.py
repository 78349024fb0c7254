import math

import numpy as np
import pytest

from csfkit.compression import Compressor, get_compressor
from csfkit.data import Item, PointSet
from csfkit.deficiency import (
    CentroidOracle,
    CompressorOracle,
    TableOracle,
    deficiency_stats,
    delta,
    index_items,
    sigma_trim,
)
from csfkit.errors import DomainError, OracleError

from conftest import table_items


def staircase(vals):
    return TableOracle({str(i): float(v) for i, v in enumerate(vals)})


def test_delta_zero_below_two_members():
    oracle = staircase([3, 5])
    items = list(table_items(2))
    assert delta(oracle, [items[0]], items[0]) == 0.0


def test_delta_matches_hand_computation():
    # set falls back to max member complexity: K(A) = 5
    oracle = staircase([3, 5])
    a, b = table_items(2)
    assert delta(oracle, [a, b], a) == 5 + 1 - 3  # log2(2) == 1
    assert delta(oracle, [a, b], b) == 5 + 1 - 5


def test_delta_rejects_non_member():
    oracle = staircase([3, 5, 7])
    items = list(table_items(3))
    with pytest.raises(DomainError):
        delta(oracle, items[:2], items[2])


def test_explicit_set_entry_overrides_fallback():
    oracle = TableOracle({"0": 1.0, "1": 2.0}, {"0,1": 10.0})
    a, b = table_items(2)
    assert oracle.set_complexity([a, b]) == 10.0
    assert delta(oracle, [a, b], a) == 10 + 1 - 1


def test_table_oracle_missing_item_raises():
    oracle = staircase([1])
    with pytest.raises(OracleError):
        oracle.item_complexity(Item("99", b""))
    with pytest.raises(DomainError):
        TableOracle({"0": -1.0})


def test_deficiency_stats_two_point_fixture():
    # deltas {1, 3}: mean 2, scale sqrt(2)/2
    oracle = TableOracle({"0": 2.0, "1": 0.0})
    stats = deficiency_stats(oracle, table_items(2))
    assert stats.values == (1.0, 3.0)
    assert stats.mean == 2.0
    assert abs(stats.std - 0.7071067811865476) < 1e-12
    assert stats.bandwidth == 2.0


def test_sigma_trim_keeps_tight_majority():
    # deltas 2,2,2,102: the lone outlier is dropped
    oracle = TableOracle({"0": 100.0, "1": 100.0, "2": 100.0, "3": 0.0})
    items = list(table_items(4))
    kept = sigma_trim(oracle, items)
    assert [x.id for x in kept] == ["0", "1", "2"]


def test_sigma_trim_never_empty():
    # two equidistant values, scale below the gap: nearest-to-mean kept
    oracle = TableOracle({"0": 0.0, "1": 4.0})
    kept = sigma_trim(oracle, table_items(2))
    assert len(kept) == 2  # both tie at distance 2 from the mean


def test_compressor_oracle_caches_set_encodings():
    calls = []
    inner = get_compressor("zlib")
    comp = Compressor("zlib", lambda d: (calls.append(1), inner.fn(d))[1])
    oracle = CompressorOracle(comp)
    items = [Item("a", b"aaaa"), Item("b", b"bbbb")]
    deficiency_stats(oracle, items)
    first = len(calls)
    deficiency_stats(oracle, items)
    assert len(calls) == first  # everything served from cache


def test_compressor_oracle_units_scale():
    store = get_compressor("store")
    bits = CompressorOracle(store, units="bits")
    raw = CompressorOracle(store, units="bytes")
    it = Item("a", b"abcd")
    assert bits.item_complexity(it) == 32.0
    assert raw.item_complexity(it) == 4.0
    with pytest.raises(DomainError):
        CompressorOracle(store, units="nibbles")


def test_centroid_oracle_is_euclidean_distance():
    points = PointSet(np.array([[0.0, 0.0], [4.0, 0.0], [0.0, 3.0]]))
    items = list(index_items(points))
    oracle = CentroidOracle(points)
    # centroid of all three is (4/3, 1); distance from (0,0)
    expect = math.hypot(4 / 3, 1.0)
    assert abs(oracle.complexity_gap(items, items[0]) - expect) < 1e-12
    assert delta(oracle, items, items[0]) == pytest.approx(expect + math.log2(3))
    no_log = CentroidOracle(points, include_log_term=False)
    assert delta(no_log, items, items[0]) == pytest.approx(expect)


def test_centroid_oracle_id_validation():
    points = PointSet(np.zeros((2, 2)))
    oracle = CentroidOracle(points)
    bad = [Item("x", b""), Item("1", b"")]
    with pytest.raises(DomainError):
        oracle.complexity_gap(bad, bad[0])


def test_index_items_ids_match_rows():
    points = PointSet(np.zeros((3, 1)))
    assert [it.id for it in index_items(points)] == ["0", "1", "2"]
