import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from effsgd import graphs as gr


def test_path_from_text():
    g = gr.parse_edge_list("0 1\n1 2\n")
    assert g.n == 3
    assert g.degrees.tolist() == [1, 2, 1]


def test_duplicate_edges_collapse():
    g = gr.parse_edge_list("1 2\n1 2\n2 1\n")
    assert g.degrees.tolist() == [1, 1]


def test_comments_blank_lines_and_string_labels():
    g = gr.parse_edge_list("# header\n\nalice bob\nbob carol\n")
    assert g.labels == ("alice", "bob", "carol")
    assert g.num_edges == 2


@pytest.mark.parametrize("text, match", [
    ("1 1\n", "self"),
    ("", "empty"),
    ("1 2 3\n", "line"),
    ("0 1\n2 3\n", "connected"),
])
def test_parse_errors(text, match):
    with pytest.raises(gr.GraphError, match=match):
        gr.parse_edge_list(text)


def test_g2_adjacency_and_degrees():
    g = gr.graph_g2()
    nbrs = {i + 1: sorted(j + 1 for j in g.adjacency[i]) for i in range(g.n)}
    assert nbrs == {1: [2, 3, 4, 5], 2: [1, 4, 5], 3: [1, 4], 4: [1, 2, 3, 5], 5: [1, 2, 4]}
    np.testing.assert_allclose(gr.degree_distribution(g), np.array([4, 3, 2, 4, 3]) / 16)


@pytest.mark.parametrize("g, expected", [
    (gr.path_graph(3), [0.25, 0.5, 0.25]),
    (gr.complete_graph(4), [0.25] * 4),
])
def test_degree_distribution(g, expected):
    np.testing.assert_allclose(gr.degree_distribution(g), expected, atol=1e-15)


def test_file_roundtrip(tmp_path):
    g = gr.graph_g1()
    p = tmp_path / "g1.txt"
    gr.save_edge_list(g, p)
    h = gr.load_edge_list(p)
    assert h.n == g.n and h.num_edges == g.num_edges
    assert sorted(h.degrees.tolist()) == sorted(g.degrees.tolist())


def test_dolphins_standin_shape():
    g = gr.dolphins_standin()
    assert g.n == 62 and g.num_edges == 159


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 30), seed=st.integers(0, 10_000))
def test_random_graphs_are_valid(n, seed):
    g = gr.random_connected_graph(n, seed=seed)
    A = g.adjacency_matrix()
    assert np.array_equal(A, A.T) and np.all(np.diag(A) == 0)
    assert np.array_equal(A.sum(axis=1), g.degrees)
    pi = gr.degree_distribution(g)
    assert abs(pi.sum() - 1) < 1e-12 and np.all(pi > 0)
    # BFS reaches everything
    seen, stack = {0}, [0]
    while stack:
        for j in g.adjacency[stack.pop()]:
            if j not in seen:
                seen.add(j)
                stack.append(j)
    assert len(seen) == n
