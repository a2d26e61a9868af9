import json
import math

import numpy as np
import pytest

from cvknit.errors import InputError
from cvknit.serialization import csv_text, format_float, stable_dumps


def test_format_float():
    assert format_float(1.0) == "1.0"
    assert format_float(0.1) == "0.1"
    assert float(format_float(math.pi)) == math.pi
    assert format_float(1e300) == "1e+300"
    assert float(format_float(1e300)) == 1e300
    with pytest.raises(InputError):
        format_float(float("nan"))


def test_stable_dumps_sorted_and_round_trips():
    obj = {"b": [1, 2.5, np.float64(0.1)], "a": {"z": True, "y": None}, "c": 1 + 2j}
    text = stable_dumps(obj)
    assert text.endswith("\n")
    assert text.index('"a"') < text.index('"b"') < text.index('"c"')
    back = json.loads(text)
    assert back["b"] == [1, 2.5, 0.1]
    assert back["c"] == {"re": 1.0, "im": 2.0}
    assert stable_dumps(obj) == text


def test_stable_dumps_rejects_unknown():
    with pytest.raises(InputError):
        stable_dumps({"x": object()})


def test_csv_rfc4180():
    text = csv_text(["a", "b"], [[1.5, "x,y"], [None, 'q"t']])
    assert text == 'a,b\r\n1.5,"x,y"\r\n,"q""t"\r\n'
    with pytest.raises(InputError):
        csv_text(["a"], [[1, 2]])
