"""
Tests for utility functions.
"""
import json

import numpy as np
import pytest

from hermite_nc.util import (
    chunked,
    clamp,
    format_value,
    lex_key,
    log_spaced,
    params_label,
    rng_for,
    to_jsonable,
    utc_now_iso,
    write_csv,
    write_json,
)


def test_clamp():
    """Test value clamping function."""
    assert clamp(0, 5, 10) == 5
    assert clamp(0, -1, 10) == 0
    assert clamp(0, 15, 10) == 10
    assert clamp(5, 7, 10) == 7


def test_utc_now_iso():
    """Test UTC timestamp formatting."""
    stamp = utc_now_iso()
    assert stamp.endswith("Z") or stamp.endswith("+00:00")


def test_rng_for_is_reproducible():
    """Same (seed, keys) gives the same stream; different keys differ."""
    a = rng_for(3, 1, 2).standard_normal(4)
    b = rng_for(3, 1, 2).standard_normal(4)
    c = rng_for(3, 2, 1).standard_normal(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_format_value():
    """Floats keep full precision, bools are lowercase."""
    assert format_value(0.1) == "0.1"
    assert format_value(np.float64(1 / 3)) == repr(1 / 3)
    assert format_value(np.int64(7)) == "7"
    assert format_value(True) == "true"


def test_params_label_is_sorted():
    """Keys come out in sorted order regardless of insertion order."""
    assert params_label({"t": 0.5, "R": 4}) == "R=4;t=0.5"


def test_lex_key_orders_numbers_before_strings():
    """Numbers sort numerically, strings after them."""
    keys = sorted([{"x": "b"}, {"x": 10}, {"x": 2}], key=lex_key)
    assert [k["x"] for k in keys] == [2, 10, "b"]


def test_write_csv(tmp_path):
    """Rows are written in order with the requested columns."""
    path = tmp_path / "out" / "results.csv"
    write_csv(path, [{"a": 1, "b": 0.5}, {"a": 2, "b": "x", "c": "ignored"}], ["a", "b"])
    assert path.read_text() == "a,b\n1,0.5\n2,x\n"


def test_to_jsonable_and_write_json(tmp_path):
    """Numpy values, complex numbers and infinities become plain JSON."""
    obj = {"arr": np.arange(3), "z": 1 + 2j, "inf": float("inf"), "flag": np.bool_(True)}
    assert to_jsonable(obj) == {"arr": [0, 1, 2], "z": [1.0, 2.0], "inf": "inf", "flag": True}
    path = tmp_path / "r.json"
    write_json(path, obj)
    assert json.loads(path.read_text())["z"] == [1.0, 2.0]


def test_log_spaced_and_chunked():
    """Geometric spacing and fixed-size chunks."""
    assert np.allclose(log_spaced(1.0, 100.0, 3), [1.0, 10.0, 100.0])
    assert chunked(range(5), 2) == [[0, 1], [2, 3], [4]]
