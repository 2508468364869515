import numpy as np
import pytest

from radonet.app.constants.graph_types import VertexClass
from radonet.app.core.exceptions import (
    AdjacencyCapError,
    AdjacencyDisabledError,
    DuplicateEdgeError,
    DuplicateNeighborError,
    ParameterDomainError,
    SelfLoopError,
    TooFewVerticesError,
    VertexRangeError,
)
from radonet.app.models.growing_graph import (
    attach_probability,
    classify_vertex,
    complement,
    new_seed,
    preset_seed,
    star_edges,
    white_degree,
)
from radonet.app.services.business import process_engine


def test_p3_seed_state(p3):
    assert p3.t == 2
    assert p3.edge_count == 2
    assert p3.degrees.tolist() == [1, 2, 1]
    assert p3.classification == [VertexClass.STANDARD, VertexClass.UNIVERSAL, VertexClass.STANDARD]
    assert p3.universal_vertices == [1]
    assert p3.standard_vertices().tolist() == [0, 2]


def test_degenerate_seeds_classification(k3, e3):
    assert all(c is VertexClass.UNIVERSAL for c in k3.classification)
    assert all(c is VertexClass.ISOLATED for c in e3.classification)
    assert k3.is_complete() and not k3.is_edgeless()
    assert e3.is_edgeless() and not e3.is_complete()


def test_seed_validation_errors():
    with pytest.raises(TooFewVerticesError):
        new_seed([], 1)
    with pytest.raises(SelfLoopError):
        new_seed([(0, 0)], 3)
    with pytest.raises(DuplicateEdgeError):
        new_seed([(0, 1), (1, 0)], 3)
    with pytest.raises(VertexRangeError):
        new_seed([(0, 5)], 3)


def test_attach_probability(p3, e3):
    assert attach_probability(p3, 0) == 0.5
    assert attach_probability(p3, 1) == 1.0
    assert attach_probability(p3, 1, lam=0.5) == 0.5
    assert attach_probability(p3, 2, lam=0.5) == 0.25
    assert attach_probability(e3, 0) == 0.0
    with pytest.raises(ParameterDomainError):
        attach_probability(p3, 0, lam=1.5)
    with pytest.raises(ParameterDomainError):
        attach_probability(p3, 0, lam=0.0)


def test_white_degree_is_complement_of_black(p3, c4):
    assert white_degree(p3, 0) == 1
    assert white_degree(p3, 1) == 0
    for u in range(c4.n_vertices):
        assert c4.degree(u) + white_degree(c4, u) == c4.t


def test_add_vertex_updates_degrees_and_classes(p3):
    p3.add_vertex([0, 1])
    assert p3.t == 3
    assert p3.degrees.tolist() == [2, 3, 1, 2]
    assert p3.edge_count == 4
    assert classify_vertex(p3, 1) is VertexClass.UNIVERSAL
    assert classify_vertex(p3, 3) is VertexClass.STANDARD
    p3.check_invariants()


def test_add_vertex_drops_universal_when_skipped(p3):
    p3.add_vertex([0])
    assert classify_vertex(p3, 1) is VertexClass.STANDARD
    assert p3.universal_vertices == []


def test_add_vertex_can_attach_isolated_vertex(e3):
    e3.add_vertex([0])
    assert classify_vertex(e3, 0) is VertexClass.STANDARD
    assert classify_vertex(e3, 1) is VertexClass.ISOLATED
    e3.check_invariants()


def test_add_vertex_rejects_bad_neighbors(p3):
    with pytest.raises(DuplicateNeighborError):
        p3.add_vertex([0, 0])
    with pytest.raises(VertexRangeError):
        p3.add_vertex([3])
    assert p3.t == 2


def test_adjacency_queries(small_graph):
    g = small_graph
    assert g.is_adjacent(0, 1)
    assert g.is_adjacent(5, 2)
    assert not g.is_adjacent(0, 3)
    assert not g.is_adjacent(4, 4)
    assert g.neighbors(0).tolist() == [1, 2, 4, 5]
    assert g.neighbors(1).tolist() == [0, 3, 4]
    assert g.adjacency_mask(3).tolist() == [False, True, False, False, False, False]
    assert g.edges().tolist() == [[0, 1], [0, 2], [0, 4], [0, 5], [1, 3], [1, 4], [2, 5]]


def test_complement_is_an_involution(p3, c4):
    white = complement(p3)
    assert white.edges().tolist() == [[0, 2]]
    assert np.array_equal(complement(white).edges(), p3.edges())
    white4 = complement(c4)
    assert white4.edges().tolist() == [[0, 2], [1, 3]]
    for u in range(c4.n_vertices):
        assert c4.degree(u) + white4.degree(u) == c4.t


def test_degree_only_mode_refuses_adjacency_queries():
    g = preset_seed("P3", track_adjacency=False)
    assert g.degrees.tolist() == [1, 2, 1]
    with pytest.raises(AdjacencyDisabledError):
        g.edges()
    with pytest.raises(AdjacencyDisabledError):
        g.is_adjacent(0, 1)
    with pytest.raises(AdjacencyDisabledError):
        complement(g)


def test_adjacency_cap():
    g = new_seed([(0, 1), (1, 2)], 3, adjacency_cap=5)
    with pytest.raises(AdjacencyCapError):
        g.reserve(6)
    with pytest.raises(AdjacencyCapError):
        new_seed([(i, i + 1) for i in range(7)], 8, adjacency_cap=5)
    # 只记度数时没有上限
    g = new_seed([(0, 1), (1, 2)], 3, track_adjacency=False, adjacency_cap=5)
    g.reserve(100)


def test_star_seed():
    g = preset_seed("star", t0=32, degree=16)
    assert g.t == 32
    assert g.degree(0) == 16
    assert g.classify_vertex(0) is VertexClass.STANDARD
    assert len(star_edges(32, 16)) == 16 + 31
    with pytest.raises(ParameterDomainError):
        star_edges(4, 4)
    with pytest.raises(ParameterDomainError):
        preset_seed("K9")


def test_watch_rows_survive_adjacency_release(p3):
    p3.watch([0, 2])
    assert p3.adjacency_rows([0, 2])[1].tolist() == [True, True]
    p3.release_adjacency()
    p3.add_vertex([0])
    p3.add_vertex([1, 2])
    rows = p3.adjacency_rows([0, 2])
    assert rows[3].tolist() == [True, False]
    assert rows[4].tolist() == [False, True]
    assert p3.watched == [0, 2]
    with pytest.raises(AdjacencyDisabledError):
        p3.adjacency_rows([1])


def test_copy_is_independent(p3):
    clone = p3.copy()
    clone.add_vertex([0])
    assert p3.t == 2
    assert p3.degrees.tolist() == [1, 2, 1]
    assert clone.t == 3


def test_invariants_hold_after_random_growth(c4, rng):
    for _ in range(60):
        process_engine.step(c4, rng, lam=0.8)
    c4.check_invariants()
    assert int(c4.degrees.sum()) == 2 * c4.edge_count
    for w in range(1, c4.n_vertices):
        nbrs = c4.earlier_neighbors(w)
        assert np.all(np.diff(nbrs) > 0)
        assert np.all(nbrs < w)


@pytest.mark.parametrize("seed", ["P3", "C4"])
def test_complement_attach_probabilities_sum_to_one(seed):
    g = preset_seed(seed)
    white = complement(g)
    for u in range(g.n_vertices):
        assert attach_probability(g, u) + attach_probability(white, u) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("edges,n,lam", [
    ([(0, 1), (1, 2)], 3, 1.0),
    ([(0, 1), (1, 2)], 4, 1.0),
    ([(0, 1), (1, 2)], 4, 0.6),
])
def test_vertex_class_is_stable_along_growth(edges, n, lam, rng):
    g = new_seed(edges, n)
    history = [list(g.classification)]
    for _ in range(200):
        process_engine.step(g, rng, lam=lam)
        history.append(list(g.classification))
    for before, after in zip(history, history[1:]):
        for u, cls in enumerate(before):
            if cls is VertexClass.UNIVERSAL and lam < 1.0:
                # λ<1 时全连接顶点可以错过新顶点
                assert after[u] in (VertexClass.UNIVERSAL, VertexClass.STANDARD)
            else:
                assert after[u] is cls
