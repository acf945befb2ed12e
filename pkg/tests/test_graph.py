import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ldpdist import Graph, complement, density, exact_all_pairs, load_edge_list
from ldpdist.graph import (
    UNREACHABLE,
    EdgeListParseError,
    distances_from_adjacency,
    largest_connected_component,
    parse_edge_list,
    random_graph,
)

from conftest import complete_graph, floyd_warshall, path_graph, random_small_graphs


def test_load_path():
    g = load_edge_list("0 1\n1 2", report_stream=None)
    assert (g.n, g.m) == (3, 2)
    assert g.adjacency == ((1,), (0, 2), (1,))


def test_load_directed_symmetrizes_and_drops_self_loop():
    g, report = parse_edge_list("0 1\n1 0\n0 0", directed=True)
    assert (g.n, g.m) == (2, 1)
    assert g.edges() == [(0, 1)]
    assert report.self_loops == 1
    assert report.reciprocal == 1
    assert report.duplicates == 0


def test_undirected_repeat_counts_as_duplicate():
    _, report = parse_edge_list("0 1\n1 0\n0 1\n")
    assert report.duplicates == 2


def test_ids_compacted_in_first_seen_order():
    g, report = parse_edge_list("# header\n100 7\n7 42\n")
    assert report.id_map == {100: 0, 7: 1, 42: 2}
    assert g.edges() == [(0, 1), (1, 2)]
    assert report.comments == 1


def test_parse_error_carries_line_number():
    with pytest.raises(EdgeListParseError, match="line 3"):
        load_edge_list("0 1\n1 2\n2 x\n", report_stream=None)


def test_empty_input_rejected():
    with pytest.raises(ValueError):
        load_edge_list("# only a comment\n\n", report_stream=None)


def test_bytes_stream_and_report_line():
    err = io.StringIO()
    g = load_edge_list(io.BytesIO(b"1 2\n2 3\n3 3\n"), report_stream=err)
    assert g.m == 2
    line = err.getvalue()
    assert line.count("\n") == 1
    assert "n=3" in line and "m=2" in line and "self_loops_dropped=1" in line


def test_complement_flag_on_ingest():
    g = load_edge_list("0 1\n1 2\n", take_complement=True, report_stream=None)
    assert g.edges() == [(0, 2)]


def test_largest_component_option():
    g, report = parse_edge_list("0 1\n1 2\n5 6\n", largest_component=True)
    assert g.n == 3 and g.m == 2
    assert report.dropped_vertices == 2
    assert set(report.id_map) == {0, 1, 2}


def test_graph_rejects_asymmetric_adjacency():
    with pytest.raises(ValueError):
        Graph(2, ((1,), ()))
    with pytest.raises(ValueError):
        Graph(1, ((0,),))


@pytest.mark.parametrize(
    "g, expected",
    [
        (complete_graph(4), 1.0),
        (path_graph(4), 0.5),  # degrees 1,2,2,1 -> 6/12
        (Graph.from_edges(5, []), 0.0),
    ],
)
def test_density_examples(g, expected):
    assert density(g) == pytest.approx(expected)


def test_density_needs_two_vertices():
    with pytest.raises(ValueError):
        density(Graph.from_edges(1, []))


def test_complement_examples():
    assert complement(complete_graph(3)).m == 0
    assert complement(Graph.from_edges(3, [])).edges() == [(0, 1), (0, 2), (1, 2)]


@pytest.mark.parametrize("seed", range(5))
def test_complement_density_identity_and_involution(seed):
    g = random_graph(30, 0.2, seed)
    assert density(complement(g)) == pytest.approx(1 - density(g))
    assert complement(complement(g)) == g


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 25), st.floats(0, 1), st.integers(0, 2**31))
def test_density_invariant_under_relabeling(n, gamma, seed):
    g = random_graph(n, gamma, seed)
    perm = np.random.default_rng(seed).permutation(n)
    relabeled = Graph.from_edges(n, [(int(perm[u]), int(perm[v])) for u, v in g.edges()])
    assert density(relabeled) == pytest.approx(density(g))


def test_loaded_graph_symmetric_exhaustive():
    g = random_graph(1000, 0.01, 3)
    text = "".join(f"{u} {v}\n" for u, v in g.edges())
    loaded = load_edge_list(text, report_stream=None)
    a = loaded.to_matrix()
    assert np.array_equal(a, a.T)
    assert not a.diagonal().any()


def test_exact_all_pairs_examples():
    tri = exact_all_pairs(complete_graph(3))
    assert np.array_equal(tri, 1 - np.eye(3))
    assert exact_all_pairs(path_graph(4))[0, 3] == 3
    two_edges = Graph.from_edges(4, [(0, 1), (2, 3)])
    capped = exact_all_pairs(two_edges, cap=6)
    assert capped[0, 2] == capped[1, 3] == capped[3, 0] == 6
    assert exact_all_pairs(two_edges)[0, 2] == UNREACHABLE


def test_exact_all_pairs_agrees_with_floyd_warshall():
    for g in random_small_graphs(60, seed=11):
        d = exact_all_pairs(g)
        assert np.array_equal(d, floyd_warshall(g))
        # triangle inequality; inf on the right only when a leg is unreachable
        for k in range(g.n):
            assert np.all(d <= d[:, [k]] + d[[k], :])


def test_dense_bfs_path_matches_sparse_path():
    for gamma in (0.05, 0.3):
        g = random_graph(200, gamma, 4)
        a = g.to_matrix()
        assert np.array_equal(distances_from_adjacency(a), floyd_warshall(g))
        assert np.array_equal(distances_from_adjacency(a, cap=2), np.minimum(floyd_warshall(g), 2))


def test_largest_connected_component_keeps_biggest():
    g = Graph.from_edges(6, [(0, 1), (2, 3), (3, 4)])
    sub, kept = largest_connected_component(g)
    assert kept.tolist() == [2, 3, 4]
    assert sub.m == 2
