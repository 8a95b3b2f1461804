import logging

import numpy as np
import pytest

from orbalign.errors import DimensionError, ParseError, ValidationError
from orbalign.graph import (Graph, GroundTruth, load_attributes, load_edge_list,
                            load_groundtruth, normalize_rows, write_edge_list)


@pytest.fixture
def write(tmp_path):
    def _write(name, text):
        p = tmp_path / name
        p.write_text(text, encoding="utf-8")
        return p
    return _write


def test_triangle_edge_list(write):
    g = load_edge_list(write("t.edges", "0 1\n1 2\n2 0"))
    assert g.node_count == 3
    assert g.edge_set() == {(0, 1), (1, 2), (0, 2)}


def test_duplicates_collapse_and_self_loops_drop(write, caplog):
    with caplog.at_level(logging.WARNING):
        g = load_edge_list(write("d.edges", "0 1\n1 0\n0 0"))
    assert g.node_count == 2
    assert g.edge_set() == {(0, 1)}
    assert "self-loop" in caplog.text


def test_remap_dense_first_appearance(write):
    g = load_edge_list(write("a.edges", "a b\nb c"), id_policy="remap-dense")
    assert g.node_count == 3
    assert g.edge_set() == {(0, 1), (1, 2)}
    assert g.node_labels == {"a": 0, "b": 1, "c": 2}


def test_comments_are_ignored(write):
    g = load_edge_list(write("c.edges", "# header\n0 1\n\n# more\n1 2\n"))
    assert g.edge_set() == {(0, 1), (1, 2)}


def test_malformed_line_reports_line_number(write):
    with pytest.raises(ParseError) as info:
        load_edge_list(write("bad.edges", "0 1\n# c\n7\n"))
    assert info.value.line_no == 3


def test_non_integer_under_require_dense(write):
    with pytest.raises(ParseError):
        load_edge_list(write("bad.edges", "a b\n"))


def test_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    g = Graph.from_edges(12, rng.integers(0, 12, size=(30, 2)))
    p = tmp_path / "g.edges"
    write_edge_list(p, g)
    back = load_edge_list(p)
    assert back.edge_set() == g.edge_set()
    assert back.node_count == g.node_count


def test_line_order_does_not_matter(write):
    lines = ["0 1", "1 2", "3 2", "4 0", "2 0"]
    a = load_edge_list(write("a.edges", "\n".join(lines)))
    b = load_edge_list(write("b.edges", "\n".join(reversed(lines))))
    assert a == b


def test_graph_rejects_bad_edges():
    with pytest.raises(ValidationError):
        Graph(2, np.array([[1, 0]]))
    with pytest.raises(ValidationError):
        Graph(2, np.array([[0, 2]]))
    with pytest.raises(ValidationError):
        Graph(3, np.array([[0, 1], [0, 1]]))


def test_attributes_basic(write):
    g = Graph.from_edges(3, [(0, 1)])
    x = load_attributes(write("x.csv", "1,2\n3,4\n5,6\n"), g)
    assert x.shape == (3, 2)
    np.testing.assert_array_equal(x, [[1, 2], [3, 4], [5, 6]])


def test_attributes_tab_and_header(write):
    g = Graph.from_edges(3, [(0, 1)])
    x = load_attributes(write("x.tsv", "f1\tf2\n1\t2\n3\t4\n5\t6\n"), g)
    np.testing.assert_array_equal(x[2], [5, 6])


def test_attributes_row_mismatch(write):
    g = Graph.from_edges(3, [(0, 1)])
    with pytest.raises(DimensionError):
        load_attributes(write("x.csv", "1,2\n3,4\n"), g)


def test_attributes_non_numeric_cell(write):
    g = Graph.from_edges(3, [(0, 1)])
    with pytest.raises(ParseError):
        load_attributes(write("x.csv", "1,2\n3,x\n5,6\n"), g)


def test_attributes_by_id_column(write):
    g = load_edge_list(write("a.edges", "b a\na c"), id_policy="remap-dense")
    x = load_attributes(write("x.csv", "a,1\nb,2\nc,3\n"), g, id_column=True)
    assert x[g.node_labels["a"], 0] == 1
    assert x[g.node_labels["b"], 0] == 2


def test_normalize_rows():
    x = normalize_rows(np.array([[3.0, 4.0], [0.0, 0.0]]))
    np.testing.assert_allclose(x, [[0.6, 0.8], [0, 0]])


def test_groundtruth(write):
    t = load_groundtruth(write("gt.txt", "0 5\n1 3"))
    assert t.pairs == {(0, 5), (1, 3)}


def test_groundtruth_repeated_source(write):
    with pytest.raises(ValidationError):
        load_groundtruth(write("gt.txt", "0 5\n0 3"))


def test_groundtruth_empty(write):
    assert len(load_groundtruth(write("gt.txt", ""))) == 0


def test_groundtruth_repeated_target():
    with pytest.raises(ValidationError):
        GroundTruth.from_pairs([(0, 1), (2, 1)])
