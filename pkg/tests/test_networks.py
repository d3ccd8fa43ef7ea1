import math
from fractions import Fraction

import numpy as np
import pytest
import hypothesis.strategies as st
from hypothesis import given, settings

from fractalforms.kinds import FractalKind
from fractalforms.geometry import vertex_graph
from fractalforms.networks import (
    ResistanceResult,
    SolverError,
    WeightedNetwork,
    delta_to_wye,
    effective_resistance,
    fit_log_geometric,
    graph_edge_arrays,
    resistance_from_arrays,
    rho_estimate,
    sc_RnV,
    sg_vertex_corner_resistance,
    sg_word_resistance,
    solve_dirichlet,
    wye_to_delta,
)

positive = st.floats(min_value=0.05, max_value=50.0, allow_nan=False)


def test_delta_to_wye_unit_triangle_exact():
    r1, r2, r3 = delta_to_wye(Fraction(1), Fraction(1), Fraction(1))
    assert (r1, r2, r3) == (Fraction(1, 3), Fraction(1, 3), Fraction(1, 3))


def test_delta_to_wye_236():
    r1, r2, r3 = delta_to_wye(Fraction(2), Fraction(3), Fraction(6))
    assert (r1, r2, r3) == (Fraction(12, 11), Fraction(6, 11), Fraction(18, 11))


def test_wye_to_delta_inverts_exactly_on_rationals():
    star = delta_to_wye(Fraction(5, 3), Fraction(7, 2), Fraction(11))
    assert wye_to_delta(*star) == (Fraction(5, 3), Fraction(7, 2), Fraction(11))


@given(positive, positive, positive)
@settings(max_examples=200)
def test_delta_wye_roundtrip_floats(a, b, c):
    back = wye_to_delta(*delta_to_wye(a, b, c))
    for x, y in zip(back, (a, b, c)):
        assert math.isclose(x, y, rel_tol=1e-12)


@given(positive, positive, positive)
@settings(max_examples=200)
def test_wye_delta_roundtrip_floats(a, b, c):
    back = delta_to_wye(*wye_to_delta(a, b, c))
    for x, y in zip(back, (a, b, c)):
        assert math.isclose(x, y, rel_tol=1e-12)


def _random_net_with_triangle(rng):
    # 7 nodes, a guaranteed triangle on 0-1-2, a spanning chain, extra chords
    net = WeightedNetwork()
    for a, b in ((0, 1), (1, 2), (0, 2)):
        net.add_edge(a, b, rng.uniform(0.2, 5.0))
    for v in range(1, 7):
        net.add_edge(v - 1, v, rng.uniform(0.2, 5.0))
    for _ in range(5):
        a, b = rng.integers(0, 7, size=2)
        if a != b:
            net.add_edge(int(a), int(b), rng.uniform(0.2, 5.0))
    return net


def test_resistance_invariant_under_delta_wye_substitution():
    rng = np.random.default_rng(42)
    for trial in range(50):
        net = _random_net_with_triangle(rng)
        before = effective_resistance(net, [3], [6]).resistance
        reduced = net.copy()
        reduced.substitute_delta_with_wye(0, 1, 2, center=("y", trial))
        after = effective_resistance(reduced, [3], [6]).resistance
        assert abs(before - after) < 1e-10


def test_substitute_requires_triangle():
    net = WeightedNetwork()
    net.add_edge(0, 1, 1.0)
    net.add_edge(1, 2, 1.0)
    with pytest.raises(KeyError):
        net.substitute_delta_with_wye(0, 1, 2, center=9)


def test_short_nodes_merges_parallel_conductances():
    net = WeightedNetwork()
    net.add_edge(0, 1, 2.0)
    net.add_edge(0, 2, 3.0)
    net.add_edge(1, 2, 7.0)  # collapses away when 1 and 2 merge
    net.short_nodes([1, 2], label="m")
    r = effective_resistance(net, [0], ["m"]).resistance
    assert abs(r - 1.0 / 5.0) < 1e-12


def test_cut_node_splits_series_chain():
    net = WeightedNetwork()
    net.add_edge(0, 1, 1.0)
    net.add_edge(1, 2, 1.0)
    labels = net.cut_node(1, [[0], [2]])
    assert len(labels) == 2
    nodes = set(net.nodes())
    assert 1 not in nodes
    assert set(labels) <= nodes


def test_triangle_corner_resistance():
    net = WeightedNetwork()
    net.add_edge(0, 1, 1.0)
    net.add_edge(1, 2, 1.0)
    net.add_edge(0, 2, 1.0)
    res = effective_resistance(net, [0], [1])
    assert isinstance(res, ResistanceResult)
    assert abs(res.resistance - 2.0 / 3.0) < 1e-12


def test_series_resistance_and_potentials():
    # path 0-1-2 with unit conductances: R = 2, midpoint potential 1/2
    ii = np.array([0, 1])
    jj = np.array([1, 2])
    cc = np.array([1.0, 1.0])
    res = resistance_from_arrays(3, ii, jj, cc, np.array([0]), np.array([2]))
    assert abs(res.resistance - 2.0) < 1e-12
    u, info = solve_dirichlet(3, ii, jj, cc, np.array([0, 2]), np.array([0.0, 1.0]))
    assert abs(u[1] - 0.5) < 1e-12
    assert info["method"] == "dense"


def test_disconnected_terminals_infinite_resistance():
    ii = np.array([0, 2])
    jj = np.array([1, 3])
    cc = np.array([1.0, 1.0])
    res = resistance_from_arrays(4, ii, jj, cc, np.array([0]), np.array([2]))
    assert res.is_infinite


def test_solve_dirichlet_zero_off_reached_component():
    ii = np.array([0, 2])
    jj = np.array([1, 3])
    cc = np.array([1.0, 1.0])
    u, _ = solve_dirichlet(4, ii, jj, cc, np.array([0]), np.array([5.0]))
    assert u[1] == 5.0
    assert u[2] == 0.0 and u[3] == 0.0


def test_maxiter_cap_raises_solver_error():
    vg = vertex_graph(FractalKind.SG, 4)
    ii, jj, cc = graph_edge_arrays(vg)
    with pytest.raises(SolverError):
        solve_dirichlet(
            vg.n_vertices,
            ii,
            jj,
            cc,
            np.array([0, 1]),
            np.array([0.0, 1.0]),
            dense_limit=1,
            maxiter_factor=0,
        )


def test_sg_word_resistance_closed_form():
    # between opposite fixed points across n cell-subdivision levels
    assert abs(sg_word_resistance(1).resistance - 2.0 / 3.0) < 1e-12
    for n in range(1, 5):
        expect = (5.0 / 3.0) ** n - 1.0
        assert abs(sg_word_resistance(n).resistance - expect) < 1e-9 * max(1.0, expect)


def test_sg_vertex_corner_resistance_closed_form():
    for n in range(1, 4):
        expect = (10.0 / 9.0) * (5.0 / 3.0) ** (n - 1)
        got = sg_vertex_corner_resistance(n).resistance
        assert abs(got - expect) < 1e-9


def test_sc_RnV_level1_value():
    # plate-to-plate resistance of the 40-vertex level-1 carpet graph
    got = sc_RnV(1).resistance
    assert abs(got - 1.1818181818) < 1e-8


def test_sc_RnV_accepts_prebuilt_graph():
    vg = vertex_graph(FractalKind.SC, 2)
    a = sc_RnV(2).resistance
    b = sc_RnV(vg).resistance
    assert abs(a - b) < 1e-12


def test_fit_log_geometric_recovers_exact_ratio():
    ns = [1, 2, 3, 4, 5]
    values = [2.0 * 0.6 ** n for n in ns]
    ratio, log_amp = fit_log_geometric(ns, values)
    assert abs(ratio - 0.6) < 1e-12
    assert abs(math.exp(log_amp) - 2.0) < 1e-10


@given(
    st.floats(min_value=0.1, max_value=3.0),
    st.floats(min_value=0.1, max_value=5.0),
)
@settings(max_examples=60)
def test_fit_log_geometric_scale_invariance(ratio, amp):
    ns = range(1, 6)
    values = [amp * ratio ** n for n in ns]
    got, _ = fit_log_geometric(ns, values)
    assert math.isclose(got, ratio, rel_tol=1e-9)


def test_rho_estimate_on_synthetic_geometric_series():
    levels = [1, 2, 3, 4, 5]
    values = [1.3 * 1.25 ** n for n in levels]
    est = rho_estimate(levels, values, fit_from=2)
    assert abs(est.rho_hat - 1.25) < 1e-10
    assert abs(est.beta_star_hat - math.log(8 * 1.25) / math.log(3)) < 1e-10
    assert len(est.ratios) == 4
    assert est.levels == (2, 3, 4, 5)
