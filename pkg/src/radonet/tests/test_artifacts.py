import json

import numpy as np
import pytest

from radonet.app.core.exceptions import ArtifactIOError, ConfigError
from radonet.app.core.schemas import ExperimentSummary
from radonet.app.utils import artifacts


def test_snapshot_round_trip_preserves_graph(tmp_path, small_graph):
    path = artifacts.write_snapshot(small_graph, tmp_path / "snap" / "g.txt", 0.75)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "# radonet-snapshot t=5 n=6 lambda=0.75"
    assert lines[1:3] == ["0 1", "0 2"]
    g, header = artifacts.read_snapshot(path)
    assert header == {"t": 5, "n": 6, "lambda": 0.75}
    assert np.array_equal(g.edges(), small_graph.edges())
    degrees_only, _ = artifacts.read_snapshot(path, track_adjacency=False)
    assert degrees_only.degrees.tolist() == small_graph.degrees.tolist()


@pytest.mark.parametrize("content,line", [
    ("", 1),
    ("# something else\n0 1\n", 1),
    ("# radonet-snapshot t=2 n=4 lambda=1.0\n0 1\n", 1),
    ("# radonet-snapshot t=2 n=3 lambda=1.0\n0 1\n1\n", 3),
])
def test_bad_snapshot_reports_line(tmp_path, content, line):
    path = tmp_path / "bad.txt"
    path.write_text(content, encoding="utf-8")
    with pytest.raises(ConfigError) as exc:
        artifacts.read_snapshot(path)
    assert exc.value.line == line
    assert f"line {line}" in exc.value.message


def test_missing_snapshot_is_io_error(tmp_path):
    with pytest.raises(ArtifactIOError):
        artifacts.read_snapshot(tmp_path / "missing.txt")


def test_series_csv(tmp_path):
    path = artifacts.write_series_csv(tmp_path / "x.csv", [2, 3, 4], [0.5, 1 / 3, 0.25], {"u": 0, "colour": "black"})
    meta, ts, values = artifacts.read_series_csv(path)
    assert meta == {"u": "0", "colour": "black"}
    assert ts.tolist() == [2, 3, 4]
    assert values[1] == 1 / 3


def test_trajectory_csv_marks_unborn_vertices(tmp_path):
    class _Trajectory:
        tracked = [0, 4]
        t_new = np.array([3, 4])
        new_degree = np.array([1, 2])
        edge_count = np.array([3, 5])
        tracked_degrees = np.array([[2, -1], [3, 2]])

        def __len__(self):
            return 2

    path = artifacts.write_trajectory_csv(_Trajectory(), tmp_path / "trajectory.csv")
    assert path.read_text(encoding="utf-8").splitlines() == [
        "t,new_degree,edge_count,d_0,d_4",
        "3,1,3,2,",
        "4,2,5,3,2",
    ]


def test_dumps_is_sorted_and_numpy_aware():
    text = artifacts.dumps({"b": np.int64(2), "a": np.array([1.5, 2.0]), "c": frozenset({3, 1})})
    assert text.index('"a"') < text.index('"b"') < text.index('"c"')
    assert json.loads(text) == {"a": [1.5, 2.0], "b": 2, "c": [1, 3]}
    assert text.endswith("\n")


def test_write_summary(tmp_path):
    summary = ExperimentSummary(experiment="simulate", master_seed=7, lam=1.0, horizon=100, replicates=2)
    summary.check("ok", True, value=1)
    summary.plot_data["x_fans"] = [{"t": 1}]
    path = artifacts.write_summary(summary, tmp_path, {"threads": 4})
    data = json.loads(path.read_text(encoding="utf-8"))
    assert data["assertions"] == [{"name": "ok", "passed": True, "detail": {"value": 1}}]
    assert "plot_data" not in data
    meta = json.loads((tmp_path / "summary.meta.json").read_text(encoding="utf-8"))
    assert meta["threads"] == 4 and "written_at" in meta
