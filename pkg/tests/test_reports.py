"""CSV/SVG/manifest emission: formatting and byte stability."""

import json
import math

import numpy as np
import pytest

from greendec.errors import EmptyReport, InvalidParams
from greendec.reports import (RunManifest, hash_bytes, package_versions,
                              svg_loglog, write_csv, write_manifest)


def test_csv_number_and_bool_formatting(tmp_path):
    path = tmp_path / "t.csv"
    rows = [{"a": 1.0 / 3.0, "b": True, "c": None, "d": float("nan"),
             "e": 7, "f": "tag"}]
    write_csv(path, rows, ["a", "b", "c", "d", "e", "f"])
    text = path.read_text()
    assert text.splitlines()[0] == "a,b,c,d,e,f"
    assert text.splitlines()[1] == "0.333333333333,true,,nan,7,tag"


def test_csv_is_byte_deterministic(tmp_path):
    rows = [{"x": math.pi * i, "y": i} for i in range(5)]
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_csv(p1, rows, ["x", "y"])
    write_csv(p2, rows, ["x", "y"])
    assert p1.read_bytes() == p2.read_bytes()


def test_csv_rejects_delimiter_in_field(tmp_path):
    with pytest.raises(InvalidParams):
        write_csv(tmp_path / "t.csv", [{"a": "x,y"}], ["a"])


def test_svg_scatter_with_fit(tmp_path):
    path = tmp_path / "plot.svg"
    x = np.array([0.1, 0.2, 0.4, 0.8])
    y = x ** -1.0
    svg_loglog(path, x, y, slope=-1.0, intercept=0.0, title="t")
    text = path.read_text()
    assert text.count("<circle") == 4
    assert text.count('class="fit"') == 1
    assert "slope" in text


def test_svg_median_line_for_nan_slope(tmp_path):
    path = tmp_path / "plot.svg"
    x = np.array([0.1, 0.2, 0.4])
    y = np.array([2.0, 2.0, 2.0])
    svg_loglog(path, x, y, slope=float("nan"), title="t")
    assert "median" in path.read_text()


def test_svg_empty_input_raises(tmp_path):
    with pytest.raises(EmptyReport):
        svg_loglog(tmp_path / "e.svg", np.array([]), np.array([]))
    with pytest.raises(EmptyReport):
        svg_loglog(tmp_path / "e.svg", np.array([-1.0, 0.0]),
                   np.array([1.0, 2.0]))


def test_hash_bytes_is_sha256():
    assert hash_bytes(b"abc") == ("ba7816bf8f01cfea414140de5dae2223"
                                  "b00361a396177a9cb410ff61f20015ad")


def test_manifest_roundtrip(tmp_path):
    m = RunManifest(experiment="x", config_hash=hash_bytes(b""), seed=3,
                    versions=package_versions(), outputs=["a.csv"])
    path = tmp_path / "manifest.json"
    write_manifest(path, m)
    data = json.loads(path.read_text())
    assert data["experiment"] == "x"
    assert data["seed"] == 3
    assert "greendec" in data["versions"]
    assert "numpy" in data["versions"]
    # canonical serialization: keys sorted at every level
    keys = list(data)
    assert keys == sorted(keys)
