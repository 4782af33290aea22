import json
import math

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from aglerkit import jsonio

scalars = st.one_of(
    st.none(),
    st.booleans(),
    st.integers(-(10**12), 10**12),
    st.floats(allow_nan=False, allow_infinity=False),
    st.text(max_size=8),
)
trees = st.recursive(
    scalars,
    lambda inner: st.one_of(st.lists(inner, max_size=4), st.dictionaries(st.text(max_size=5), inner, max_size=4)),
    max_leaves=20,
)


@given(trees)
def test_round_trip_matches_json(obj):
    assert json.loads(jsonio.dumps(obj)) == obj


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_floats_round_trip_exactly(x):
    assert float(json.loads(jsonio.dumps(x))) == x


def test_float_formatting():
    assert jsonio.dumps(0.1).strip() == "0.10000000000000001"
    assert jsonio.dumps(1.0).strip() == "1.0"
    assert jsonio.dumps(np.float64(2.5)).strip() == "2.5"
    assert jsonio.dumps([math.inf, -math.inf, math.nan]).strip() == '["inf", "-inf", "nan"]'


def test_numpy_and_complex_values():
    out = json.loads(jsonio.dumps({"a": np.arange(3), "z": 1 + 2j, "b": np.bool_(True)}))
    assert out == {"a": [0, 1, 2], "z": [1.0, 2.0], "b": True}


def test_key_order_is_preserved():
    text = jsonio.dumps({"b": 1, "a": 2})
    assert text.index('"b"') < text.index('"a"')


def test_objects_with_to_json():
    class Thing:
        def to_json(self):
            return {"x": 1.5}

    assert json.loads(jsonio.dumps([Thing()])) == [{"x": 1.5}]
