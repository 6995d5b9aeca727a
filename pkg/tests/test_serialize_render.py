import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from infbeltrami import Disk, Piecewise
from infbeltrami.render import COLORMAP, OUTSIDE, render_ppm
from infbeltrami.serialize import dumps, load_json, write_atomic, write_json

from conftest import const, zbar


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_floats_round_trip_exactly(x):
    assert json.loads(dumps(x)) == x


def test_complex_and_nan():
    assert json.loads(dumps({"a": 1 + 2j, "b": math.nan})) == {"a": [1.0, 2.0], "b": None}


def test_numpy_scalars_and_arrays():
    out = json.loads(dumps({"x": np.float64(0.1), "n": np.int64(3), "v": np.arange(3)}))
    assert out == {"x": 0.1, "n": 3, "v": [0, 1, 2]}


def test_atomic_write(tmp_path):
    p = tmp_path / "r.json"
    write_json(p, {"k": 1})
    write_atomic(p, dumps({"k": 2}))
    assert load_json(p) == {"k": 2}
    assert [f.name for f in tmp_path.iterdir()] == ["r.json"]


def _pixels(img):
    header, size, _, data = img.split(b"\n", 3)
    w, h = map(int, size.split())
    assert header == b"P6"
    return np.frombuffer(data, dtype=np.uint8).reshape(h, w, 3)


def test_constant_renders_uniform():
    px = _pixels(render_ppm(const(0.3), 32))
    inside = np.any(px != OUTSIDE, axis=2)
    assert inside.sum() > 0.7 * 32 * 32
    colors = np.unique(px[inside], axis=0)
    assert len(colors) == 1
    assert np.array_equal(colors[0], COLORMAP[-1])


def test_render_is_deterministic_and_scaled():
    f = Piecewise(Disk.unit(), zbar(), ((Disk(0.3, 0.2), const(0.0)),))
    a = render_ppm(f, 48, vmax=1.0)
    assert a == render_ppm(f, 48, vmax=1.0)
    px = _pixels(a)
    assert np.array_equal(px[24, 24 + 7], COLORMAP[0])  # inside the zero piece


def test_colormap_table():
    assert COLORMAP.shape == (256, 3) and COLORMAP.dtype == np.uint8


def test_render_rejects_bad_resolution():
    with pytest.raises(ValueError):
        render_ppm(const(0.3), 0)
