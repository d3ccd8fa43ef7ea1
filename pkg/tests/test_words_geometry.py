import json

import numpy as np
import pytest
import hypothesis.strategies as st
from hypothesis import given, settings

from fractalforms.kinds import FractalKind
from fractalforms.words import (
    Word,
    as_digits,
    check_word,
    enumerate_words,
    pack_word,
    unpack_word,
)
from fractalforms.geometry import (
    apply_map,
    base_point,
    canonical_address,
    cached_vertex_graph,
    cell_graph,
    graph_from_json_dict,
    graph_to_json_dict,
    point_of,
    read_graph_json,
    sc_side_ids,
    sg_corner_ids,
    sg_vertex_count,
    vertex_graph,
    vertex_scale,
    write_graph_json,
)

SG = FractalKind.SG
SC = FractalKind.SC

sg_digits = st.lists(st.integers(0, 2), max_size=7)
sc_digits = st.lists(st.integers(0, 7), max_size=5)


def test_word_basics():
    w = Word.from_string("0212")
    assert len(w) == 4
    assert str(w) == "0212"
    assert w.parent() == Word((0, 2, 1))
    assert w.child(1) == Word((0, 2, 1, 2, 1))
    assert as_digits("012") == (0, 1, 2)
    assert as_digits(w) == (0, 2, 1, 2)
    assert as_digits([1, 0]) == (1, 0)


def test_check_word_rejects_bad_digits():
    with pytest.raises(ValueError):
        check_word(SG, "013")
    with pytest.raises(ValueError):
        check_word(SC, (0, 8))
    assert check_word(SG, "012") == (0, 1, 2)
    assert check_word(SC, "07") == (0, 7)


@pytest.mark.parametrize("kind,n", [(SG, 0), (SG, 1), (SG, 3), (SC, 0), (SC, 1), (SC, 2)])
def test_enumerate_words_count_and_order(kind, n):
    ws = list(enumerate_words(kind, n))
    assert len(ws) == kind.n_maps ** n
    assert ws == sorted(ws)
    assert all(len(w) == n for w in ws)


@given(sg_digits)
def test_sg_pack_unpack_roundtrip(digits):
    packed = pack_word(SG, digits)
    assert unpack_word(SG, packed, len(digits)) == tuple(digits)


@given(sc_digits)
def test_sc_pack_unpack_roundtrip(digits):
    packed = pack_word(SC, digits)
    assert unpack_word(SC, packed, len(digits)) == tuple(digits)


def test_base_points_are_unit_cell_corners():
    # gasket: equilateral triangle (0,0), (1,0), (1/2, sqrt(3)/2)
    xs = [base_point(SG, i).as_floats() for i in range(3)]
    assert xs[0] == (0.0, 0.0)
    assert xs[1] == (1.0, 0.0)
    assert xs[2] == (0.5, pytest.approx(np.sqrt(3) / 2))
    # carpet: 8 boundary points of the unit square, counterclockwise
    ys = [base_point(SC, i).as_floats() for i in range(8)]
    assert ys[0] == (0.0, 0.0)
    assert ys[2] == (1.0, 0.0)
    assert ys[4] == (1.0, 1.0)
    assert ys[6] == (0.0, 1.0)
    assert ys[1] == (0.5, 0.0)
    assert ys[5] == (0.5, 1.0)


def test_apply_map_halves_and_thirds():
    p = base_point(SG, 1)  # (1,0)
    q = apply_map(SG, 0, p)
    assert q.as_floats() == (0.5, 0.0)
    r = base_point(SC, 4)  # (1,1)
    s = apply_map(SC, 0, r)
    assert s.as_floats() == (pytest.approx(1 / 3), pytest.approx(1 / 3))


@given(sg_digits.filter(lambda d: len(d) >= 1))
@settings(max_examples=50)
def test_sg_point_of_matches_composed_maps(digits):
    # word addresses f_{w[:-1]}(q_last)
    p = point_of(SG, digits)
    q = base_point(SG, digits[-1])
    for d in reversed(digits[:-1]):
        q = apply_map(SG, d, q)
    assert p.lifted(10) == q.lifted(10)
    # repeating the final digit fixes the point: q_i is the fixed point of map i
    assert point_of(SG, list(digits) + [digits[-1]]).lifted(10) == p.lifted(10)


@given(sc_digits.filter(lambda d: len(d) >= 1))
@settings(max_examples=50)
def test_sc_point_of_matches_composed_maps(digits):
    p = point_of(SC, digits)
    q = base_point(SC, digits[-1])
    for d in reversed(digits[:-1]):
        q = apply_map(SC, d, q)
    assert p.lifted(8) == q.lifted(8)
    assert point_of(SC, list(digits) + [digits[-1]]).lifted(8) == p.lifted(8)


def test_sq_dist_is_exact_euclidean():
    a = base_point(SG, 0)
    b = base_point(SG, 2)
    assert a.sq_dist(b) == 1  # unit side length
    c = base_point(SC, 0)
    d = base_point(SC, 4)
    assert c.sq_dist(d) == 2  # diagonal of the unit square


def test_cell_corner_points_level1():
    # corners of gasket cell "0": the origin and the two adjacent midpoints
    assert point_of(SG, (0, 0)).lifted(2) == (0, 0)
    assert point_of(SG, (0, 1)).lifted(2) == (2, 0)
    assert point_of(SG, (0, 2)).lifted(2) == (1, 1)


@pytest.mark.parametrize("n,expected", [(0, 3), (1, 6), (2, 15), (3, 42)])
def test_sg_vertex_count_closed_form(n, expected):
    assert sg_vertex_count(n) == expected
    assert vertex_graph(SG, n).n_vertices == expected


def test_sc_vertex_count_level1():
    # 8 cells x 8 boundary points with shared corners: 40 distinct vertices
    assert vertex_graph(SC, 1).n_vertices == 40


def test_vertex_scale():
    assert vertex_scale(SG, 0) == 1
    assert vertex_scale(SG, 3) == 4
    assert vertex_scale(SC, 2) == 2


def test_sg_cell_graph_level1_and_2():
    cg = cell_graph(SG, 1)
    assert cg.n_cells == 3
    assert sorted(cg.edges) == [(0, 1), (0, 2), (1, 2)]
    assert cg.edge_types == ["I", "I", "I"]
    cg2 = cell_graph(SG, 2)
    assert cg2.n_cells == 9
    assert len(cg2.edges) == 12
    types = dict(zip(cg2.edges, cg2.edge_types))
    # within-cell contacts are type I, across the removed middle are type II
    assert types[(0, 1)] == "I"
    assert sorted(t for t in cg2.edge_types if t == "II") == ["II", "II", "II"]


def test_sc_cell_graph_level1_is_ring_with_corner_contacts():
    cg = cell_graph(SC, 1)
    assert cg.n_cells == 8
    assert cg.edge_types is None
    # ring of 8 cells: 8 side contacts; corner-only contacts are excluded
    assert len(cg.edges) == 8
    degree = np.zeros(8, dtype=int)
    for i, j in cg.edges:
        degree[i] += 1
        degree[j] += 1
    assert set(degree) == {2}


def test_sg_edges_count():
    # 3^(n+1) within-cell edges at level n
    for n in range(0, 4):
        vg = vertex_graph(SG, n)
        assert len(vg.edges) == 3 ** (n + 1)
        assert (vg.edges[:, 2] == 1).all()


def test_sc_edge_multiplicity():
    vg = vertex_graph(SC, 1)
    # cell-boundary edges shared by two cells carry multiplicity 2
    assert set(vg.edges[:, 2]) == {1, 2}


def test_sg_corner_ids():
    vg = vertex_graph(SG, 2)
    ids = sg_corner_ids(vg)
    pts = [(float(vg.xn[i]) / 2 ** vg.scale, float(vg.yn[i]) * np.sqrt(3) / 2 ** vg.scale) for i in ids]
    assert pts[0] == (0.0, 0.0)
    assert pts[1] == (1.0, 0.0)


def test_sc_side_ids_symmetric():
    vg = vertex_graph(SC, 2)
    left = sc_side_ids(vg, "left")
    right = sc_side_ids(vg, "right")
    assert len(left) == len(right) > 0
    assert (vg.xn[left] == 0).all()
    assert (vg.xn[right] == 2 * 3 ** vg.scale).all()
    with pytest.raises(ValueError):
        sc_side_ids(vg, "top_left")


@given(st.integers(0, 14))
def test_address_id_roundtrip(i):
    vg = cached_vertex_graph(SG, 2)
    w = vg.address(i)
    p = point_of(SG, w)
    assert vg.id_of(p) == i


@given(sg_digits.filter(lambda d: len(d) >= 1))
@settings(max_examples=40)
def test_canonical_address_is_lexicographically_minimal(digits):
    # p is a vertex of the level-n graph with address digits + repeated last
    n = len(digits)
    p = point_of(SG, digits)
    addr = canonical_address(SG, p, n)
    assert len(addr) == n + 1
    assert point_of(SG, addr).lifted(n + 2) == p.lifted(n + 2)
    assert tuple(addr) <= tuple(digits) + (digits[-1],)


@pytest.mark.parametrize("kind,n", [(SG, 2), (SC, 1)])
def test_graph_json_roundtrip(kind, n, tmp_path):
    vg = vertex_graph(kind, n)
    d = graph_to_json_dict(vg)
    json.dumps(d)  # serializable
    back = graph_from_json_dict(d)
    assert back.kind is vg.kind
    assert back.level == vg.level
    assert (back.xn == vg.xn).all()
    assert (back.yn == vg.yn).all()
    assert (back.edges == vg.edges).all()
    path = tmp_path / "graph.json"
    write_graph_json(vg, path)
    again = read_graph_json(path)
    assert (again.xn == vg.xn).all()
    assert (again.edges == vg.edges).all()


def test_cached_vertex_graph_identity():
    a = cached_vertex_graph(SG, 3)
    b = cached_vertex_graph(SG, 3)
    assert a is b


def test_vertex_graph_rejects_bad_level():
    with pytest.raises(ValueError):
        vertex_graph(SG, -1)
