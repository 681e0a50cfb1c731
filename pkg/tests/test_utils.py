from __future__ import annotations

import numpy as np
import pytest

from backend.engine import utils
from backend.engine.errors import ContractError
from backend.engine.utils import (
    bitstrings,
    check_bitstring,
    chunk_ranges,
    derive_rng,
    hamming,
    map_ordered,
    normalize_output,
    wilson_interval,
)


def test_public_helpers():
    assert sorted(utils.__all__) == [
        "SIGNIFICANT_DIGITS",
        "bitstrings",
        "check_bitstring",
        "chunk_ranges",
        "derive_rng",
        "hamming",
        "int_to_bits",
        "map_ordered",
        "normalize_output",
        "round_sig",
        "standard_error",
        "wilson_interval",
    ]
    assert not hasattr(utils, "xor_bits")


def test_derived_streams_are_reproducible_and_distinct():
    first = derive_rng(7, 1, 2).integers(0, 2**32, size=4)
    again = derive_rng(7, 1, 2).integers(0, 2**32, size=4)
    other = derive_rng(7, 2, 1).integers(0, 2**32, size=4)
    np.testing.assert_array_equal(first, again)
    assert not np.array_equal(first, other)


def test_bitstrings_and_hamming():
    assert bitstrings(2) == ["00", "01", "10", "11"]
    assert hamming("0110", "1100") == 2
    with pytest.raises(ContractError):
        check_bitstring("012")
    with pytest.raises(ContractError):
        hamming("01", "011")


def test_chunks_cover_range_in_order():
    chunks = list(chunk_ranges(10, 4))
    assert chunks == [(0, 0, 4), (1, 4, 8), (2, 8, 10)]
    assert map_ordered(lambda c: c[2] - c[1], chunks, workers=3) == [4, 4, 2]


def test_wilson_interval_contains_rate():
    low, high = wilson_interval(75, 100)
    assert low < 0.75 < high
    assert wilson_interval(0, 10)[0] == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ContractError):
        wilson_interval(0, 0)


def test_normalize_output_rounds_and_unwraps():
    data = normalize_output({"a": np.float64(0.1 + 0.2), "b": (np.int64(3), np.bool_(True)), "c": 1 + 2j})
    assert data == {"a": 0.3, "b": [3, True], "c": [1.0, 2.0]}
