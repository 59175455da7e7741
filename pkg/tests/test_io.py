import json
import math

import numpy as np
import pytest

from qnetdeco.io import (
    dumps,
    fmt_complex,
    jsonable,
    matrix_csv,
    matrix_dump,
    matrix_load,
    parse_angle,
    parse_complex,
    read_matrix_csv,
)


def test_fmt_complex_uses_twelve_significant_digits():
    assert fmt_complex(1 / 3 - 2j) == "0.333333333333-2i"
    assert fmt_complex(0.25) == "0.25+0i"


def test_matrix_dump_round_trip(rng):
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    back = matrix_load(matrix_dump(m))
    assert np.allclose(back, m, rtol=1e-11)
    assert np.allclose(read_matrix_csv(matrix_csv(m)), m, rtol=1e-11)


@pytest.mark.parametrize(
    "raw, want",
    [(0.5, 0.5), ([0.5, -1], 0.5 - 1j), ("1e-3+2i", 1e-3 + 2j), ("-i", -1j), ("3", 3)],
)
def test_parse_complex_forms(raw, want):
    assert parse_complex(raw) == pytest.approx(want)


@pytest.mark.parametrize(
    "raw, want",
    [("2*pi/3", 2 * math.pi / 3), ("-pi/5", -math.pi / 5), (1.0, 1.0), ("pi**2", math.pi**2)],
)
def test_parse_angle(raw, want):
    assert parse_angle(raw) == pytest.approx(want)


@pytest.mark.parametrize("raw", ["__import__('os')", "pi.real", "[1]", "foo", "1 if 1 else 2"])
def test_parse_angle_rejects_non_arithmetic(raw):
    with pytest.raises(ValueError):
        parse_angle(raw)


def test_jsonable_handles_numpy_and_complex():
    obj = {"a": np.float64(1 / 3), "b": np.int64(3), "c": 1 + 2j, "d": np.arange(2)}
    out = json.loads(dumps(obj))
    assert out["a"] == pytest.approx(1 / 3, rel=1e-11)
    assert out["b"] == 3
    assert out["c"] == [1.0, 2.0]
    assert out["d"] == [0, 1]
    assert jsonable(None) is None
