import numpy as np
import pytest

from sigmaforest import (GraphError, Pinning, PinningError, augment,
                         build_graph, build_ladder, delta_pinning,
                         horizontal_distance, ladder_spec, read_graph_file,
                         uniform_pinning)
from sigmaforest.graphs import write_graph_file


def test_build_graph_basic(k2):
    assert k2.n == 2
    assert k2.m == 1
    ei, ej, w = k2.edge_arrays
    assert ei.tolist() == [0]
    assert ej.tolist() == [1]
    assert w.tolist() == [1.0]


def test_build_graph_rejects_bad_edges():
    with pytest.raises(GraphError):
        build_graph(2, [(1, 3, 1.0)])  # out of range
    with pytest.raises(GraphError):
        build_graph(2, [(1, 1, 1.0)])  # self loop
    with pytest.raises(GraphError):
        build_graph(2, [(1, 2, 1.0), (2, 1, 2.0)])  # duplicate edge
    with pytest.raises(GraphError):
        build_graph(2, [(1, 2, 0.0)])  # nonpositive weight
    with pytest.raises(GraphError):
        build_graph(3, [(1, 2, 1.0)])  # disconnected


def test_pinning_validation():
    with pytest.raises(PinningError):
        Pinning(pi=(1.0, -1.0), epsilon=0.5)
    with pytest.raises(PinningError):
        Pinning(pi=(0.0, 0.0), epsilon=0.5)
    with pytest.raises(PinningError):
        Pinning(pi=(1.0, 1.0), epsilon=0.0)
    p = uniform_pinning(3, 0.25)
    assert np.allclose(p.eps, 0.25)
    d = delta_pinning(3, 2, 0.25)
    assert d.eps.tolist() == [0.0, 0.25, 0.0]


def test_augment_rho_edges(path3):
    ag = augment(path3, delta_pinning(3, 1, 0.5))
    assert ag.rho_edges == ((0, 1, 0.5),)
    assert len(ag.all_edges) == path3.m + 1
    ag2 = augment(path3, uniform_pinning(3, 0.5))
    assert len(ag2.rho_edges) == 3


def test_ladder_path():
    base = build_graph(1, [])
    spec = ladder_spec(base, 0, 3, 1.0, 1.0)
    g = build_ladder(spec)
    assert g.n == 4
    assert g.m == 3
    assert horizontal_distance(g, 1, 4) == 3
    assert horizontal_distance(g, 2, 2) == 0


def test_ladder_width2():
    base = build_graph(2, [(1, 2, 1.0)])
    spec = ladder_spec(base, 0, 2, 2.0, 3.0)
    g = build_ladder(spec)
    assert g.n == 6
    # 3 vertical rungs + 2 levels x 2 horizontal rails
    assert g.m == 3 + 4
    assert spec.vertex(0, 1) == 1
    assert spec.vertex(2, 2) == 6
    assert horizontal_distance(g, 1, 6) == 2
    weights = {tuple(sorted((i, j))): w for i, j, w in g.edges}
    assert weights[(1, 2)] == 2.0  # vertical, inside level 0
    assert weights[(1, 3)] == 3.0  # horizontal step


def test_graph_file_roundtrip(tmp_path, cycle4):
    path = tmp_path / "g.graph"
    write_graph_file(cycle4, path)
    g = read_graph_file(path)
    assert g.n == cycle4.n
    assert sorted(g.edges) == sorted(cycle4.edges)


def test_read_graph_file_rejects_garbage(tmp_path):
    path = tmp_path / "bad.graph"
    path.write_text("2 1\n1 2 0.0\n")
    with pytest.raises(GraphError):
        read_graph_file(path)
