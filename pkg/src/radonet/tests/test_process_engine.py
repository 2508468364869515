from fractions import Fraction

import numpy as np
import pytest

from radonet.app.core.config import settings
from radonet.app.core.exceptions import (
    AdjacencyCapError,
    EnumerationGuardError,
    ParameterDomainError,
    UntrackedVertexError,
)
from radonet.app.core.schemas import ExperimentConfig, SeedGraphSpec
from radonet.app.models.growing_graph import new_seed, preset_seed
from radonet.app.services.business import process_engine
from radonet.app.utils import artifacts
from radonet.app.utils.rng import make_rng


def _config(**kwargs):
    kwargs.setdefault("horizon", 200)
    return ExperimentConfig(**kwargs)


def test_complete_seed_stays_complete(k3, rng):
    for _ in range(30):
        record = process_engine.step(k3, rng)
        assert record.new_degree == record.t_new == k3.t
    assert k3.is_complete()
    assert k3.edge_count == k3.t * (k3.t + 1) // 2


def test_edgeless_seed_stays_edgeless(e3, rng):
    for _ in range(30):
        record = process_engine.step(e3, rng, lam=0.7)
        assert record.new_degree == 0
    assert e3.is_edgeless()


def test_universal_vertex_collects_every_vertex_at_lambda_one(p3, rng):
    for _ in range(50):
        process_engine.step(p3, rng)
    assert p3.degree(1) == p3.t
    assert 1 in p3.universal_vertices


def test_run_trajectory_shape_and_series(rng):
    config = _config(tracked_vertices=[0, 2, 50])
    trajectory = process_engine.run(config, rng, keep_graph=True)
    g = trajectory.final_graph
    assert len(trajectory) == 198
    assert trajectory.t_new[0] == 3 and trajectory.horizon == 200
    assert np.all(np.diff(trajectory.edge_count) >= 0)
    assert trajectory.edge_count[-1] == g.edge_count
    assert np.array_equal(np.diff(np.concatenate([[2], trajectory.edge_count])), trajectory.new_degree)

    ts, ds = trajectory.degree_series(0)
    assert ts[0] == 2 and ds[0] == 1
    assert ds[-1] == g.degree(0)
    ts50, ds50 = trajectory.degree_series(50)
    assert ts50[0] == 50
    assert ds50[0] == trajectory.new_degree[50 - 3]
    with pytest.raises(UntrackedVertexError):
        trajectory.degree_series(1)

    ts_e, es = trajectory.edge_series()
    assert ts_e[0] == 2 and es[0] == 2
    records = list(trajectory.records())
    assert records[0].t_new == 3
    assert records[-1].edge_count_after == g.edge_count
    assert 50 not in records[0].tracked_degrees
    assert records[-1].tracked_degrees[50] == g.degree(50)


def test_run_is_deterministic_and_chunk_independent(monkeypatch):
    config = _config(horizon=300, tracked_vertices=[0])
    first = process_engine.run(config, make_rng(7, 0))
    second = process_engine.run(config, make_rng(7, 0))
    assert np.array_equal(first.new_degree, second.new_degree)

    monkeypatch.setattr(settings, "CHUNK_DRAWS", 64)
    chunked = process_engine.run(config, make_rng(7, 0))
    assert np.array_equal(first.new_degree, chunked.new_degree)
    assert np.array_equal(first.tracked_degrees, chunked.tracked_degrees)


def test_run_rejects_horizon_not_after_seed(rng):
    config = _config(horizon=2)
    with pytest.raises(ParameterDomainError):
        process_engine.run(config, rng)


def test_run_respects_adjacency_cap(rng):
    config = _config(horizon=100, track_adjacency=True)
    seed = new_seed([(0, 1), (1, 2)], 3, adjacency_cap=50)
    with pytest.raises(AdjacencyCapError):
        process_engine.run(config, rng, seed_graph=seed)


def test_snapshot_and_checkpoint(tmp_path, rng):
    config = _config(horizon=80, checkpoints=[50], snapshot_times=[50])
    seen = {}

    def _capture(g):
        seen[g.t] = g.edges().copy()

    trajectory = process_engine.run(config, rng, on_checkpoint=_capture, snapshot_dir=tmp_path)
    path = tmp_path / "snapshot_t50.txt"
    assert trajectory.snapshot_paths[50] == str(path)
    g, header = artifacts.read_snapshot(path)
    assert header["t"] == 50 and header["n"] == 51 and header["lambda"] == 1.0
    assert np.array_equal(g.edges(), seen[50])


def test_exact_step_distribution_p3(p3):
    dist = process_engine.exact_step_distribution(p3)
    assert dist.total() == 1
    assert len(dist.outcomes) == 4
    assert all(1 in s for s, _ in dist.outcomes)
    assert dist.probability_of({0, 1}) == Fraction(1, 4)
    assert dist.probability_of({0}) == 0
    assert dist.new_degree_mean() == 2
    assert dist.new_degree_variance() == Fraction(1, 2)


def test_exact_step_distribution_lambda(p3):
    dist = process_engine.exact_step_distribution(p3, "1/2")
    assert dist.total() == 1
    assert len(dist.outcomes) == 8
    assert dist.probability_of(set()) == Fraction(3, 4) * Fraction(1, 2) * Fraction(3, 4)
    assert dist.new_degree_mean() == 1


def test_exact_step_distribution_guard():
    path = new_seed([(i, i + 1) for i in range(settings.ORACLE_MAX_T + 1)], settings.ORACLE_MAX_T + 2)
    with pytest.raises(EnumerationGuardError):
        process_engine.exact_step_distribution(path)
    with pytest.raises(ParameterDomainError):
        process_engine.exact_step_distribution(preset_seed("P3"), 2)


def test_new_degree_moments(p3):
    assert process_engine.expected_new_degree(p3, 1.0) == 2.0
    assert process_engine.new_degree_variance(p3, 1.0) == 0.5
    assert process_engine.expected_new_degree(p3, 0.5) == 1.0
    assert process_engine.new_degree_variance(p3, 0.5) == pytest.approx(0.625)


def test_sampled_steps_follow_exact_distribution(p3, rng):
    codes = process_engine.sample_step_codes(p3, rng, 1.0, 20_000)
    assert np.all(codes & 2)
    assert p3.t == 2
    only_universal = np.mean(codes == process_engine.subset_code({1}))
    assert abs(only_universal - 0.25) < 0.02


def test_subset_code():
    assert process_engine.subset_code({0, 2}) == 5
    assert process_engine.subset_code(()) == 0


def test_build_seed_sources(tmp_path):
    spec = SeedGraphSpec(edges=[(0, 1), (1, 2), (2, 3)])
    g = process_engine.build_seed(spec)
    assert g.t == 3 and g.edge_count == 3
    artifacts.write_snapshot(g, tmp_path / "seed.txt", 1.0)
    from_snapshot = process_engine.build_seed(SeedGraphSpec(snapshot=str(tmp_path / "seed.txt")))
    assert np.array_equal(from_snapshot.edges(), g.edges())
    assert process_engine.describe_seed(SeedGraphSpec()) == "P3"
    assert process_engine.describe_seed(SeedGraphSpec(preset="star", t0=8, degree=4)) == "star:t0=8,degree=4"
