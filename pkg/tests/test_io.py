import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from eomsim.io import (
    RunManifest, file_digest, format_float, manifest_path_for, read_columns, read_csv, write_csv,
)
from eomsim.parallel import map_ordered, worker_count


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_format_round_trips(x):
    assert float(format_float(x)) == x


def test_csv_round_trip(tmp_path):
    rows = np.array([[0.1, 1 / 3, -2e-300], [1e300, 5.0, np.pi]])
    path = tmp_path / "sub" / "x.csv"
    assert write_csv(path, ("a", "b", "c"), rows) == 2
    header, data = read_csv(path)
    assert header == ["a", "b", "c"]
    assert np.array_equal(data, rows)


def test_read_columns_checks_header(tmp_path):
    path = tmp_path / "x.csv"
    write_csv(path, ("t", "u_sq"), [[0.0, 1.0]])
    assert read_columns(path, ("t", "u_sq")).shape == (1, 2)
    with pytest.raises(ValueError):
        read_columns(path, ("t", "a_target"))


@pytest.mark.parametrize("text", ["", "t,u_sq\n0,1,2\n", "t,u_sq\n0,abc\n"])
def test_read_csv_rejects_malformed(tmp_path, text):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(ValueError):
        read_csv(path)


def test_manifest(tmp_path):
    out = tmp_path / "data.csv"
    write_csv(out, ("x",), [[1.0], [2.0]])
    m = RunManifest(config={"b": 2, "a": 1}, command_line="eomsim spectrum")
    m.add_output(out, 2)
    mpath = manifest_path_for(out)
    assert mpath.name == "data.csv.manifest.json"
    m.write(mpath)
    doc = json.loads(mpath.read_text())
    assert doc["config_digest"] == RunManifest(config={"a": 1, "b": 2}, command_line="").config_digest
    assert doc["outputs"] == [{"path": str(out), "row_count": 2, "digest": file_digest(out)}]
    assert doc["finished"] is not None


def test_worker_count(monkeypatch):
    monkeypatch.setenv("EOMSIM_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("EOMSIM_THREADS", "0")
    assert worker_count() >= 1
    monkeypatch.setenv("EOMSIM_THREADS", "many")
    with pytest.raises(ValueError):
        worker_count()
    assert worker_count(2) == 2


def _square(x):
    return x * x


@pytest.mark.parametrize("processes", [False, True])
def test_map_ordered(processes):
    assert map_ordered(_square, range(20), workers=4, processes=processes) == [x * x for x in range(20)]
