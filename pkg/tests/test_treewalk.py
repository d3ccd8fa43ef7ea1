import math
import random
from fractions import Fraction

import numpy as np
import pytest
import hypothesis.strategies as st
from hypothesis import given, settings

from fractalforms.treewalk import (
    WalkParams,
    boundary_hit_distribution,
    build_tables,
    conductance,
    ctrw_lifetime,
    ctrw_lifetime_closed_form,
    ctrw_truncation_bias,
    detailed_balance_residual,
    escape_depth_profile,
    green_oo,
    gromov_product,
    hitting_prob_F,
    horizontal_conductance,
    martin_kernel_check,
    rho_a,
    tree_graph,
    vertical_conductance,
)

word_st = st.text(alphabet="012", min_size=0, max_size=6)


def _params(**kw):
    base = dict(lam=0.5, seed=0, samples=4000, depth_cut=8, workers=2)
    base.update(kw)
    return WalkParams(**base)


def test_params_validation():
    with pytest.raises(ValueError):
        WalkParams(lam=0.0)
    with pytest.raises(ValueError):
        WalkParams(lam=1.0)
    with pytest.raises(ValueError):
        WalkParams(lam=0.5, c=0.7)  # needs c < lam
    with pytest.raises(ValueError):
        WalkParams(lam=0.5, depth_cut=1)
    p = WalkParams(lam=0.5, c=0.25)
    assert p.require_c() == 0.25
    with pytest.raises(ValueError):
        WalkParams(lam=0.5).require_c()


def test_tree_graph_ids_and_levels():
    tg = tree_graph(4)
    assert tg.id_of("") == 0
    assert tg.id_of("0") == 1
    assert tg.id_of("2") == 3
    assert tg.id_of("00") == 4
    assert str(tg.word_of(tg.id_of("0212"))) == "0212"
    assert tg.level_of(tg.id_of("0212")) == 4
    assert len(tg.sphere_ids(2)) == 9


@given(word_st)
@settings(max_examples=60)
def test_tree_id_roundtrip(w):
    tg = tree_graph(6)
    assert tuple(tg.word_of(tg.id_of(w))) == tuple(int(d) for d in w)


def test_conductance_values():
    p = _params()
    assert vertical_conductance(p, 0) == 1.0
    assert vertical_conductance(p, 2) == pytest.approx((3 * 0.5) ** -2)
    # vertical edge root -> child uses the parent level
    assert conductance(p, "", "0") == pytest.approx(1.0)
    assert conductance(p, "0", "00") == pytest.approx(1.0 / 1.5)
    # horizontal edges at level n scale like the verticals
    h1 = horizontal_conductance(p, 1, "I")
    assert h1 == pytest.approx(p.C1 / 1.5)
    h2 = horizontal_conductance(p, 2, "II")
    assert h2 == pytest.approx(p.C2 / 1.5 ** 2)


def test_conductance_rejects_non_edges():
    p = _params()
    with pytest.raises(ValueError):
        conductance(p, "0", "012")  # not parent/child or sibling contact
    with pytest.raises(ValueError):
        conductance(p, "0", "0")


def test_horizontal_edges_match_cell_contacts():
    # level 1: the three cells touch pairwise (type I contacts)
    p = _params(C1=2.0, C2=5.0)
    assert conductance(p, "0", "1") == pytest.approx(2.0 / 1.5)
    assert conductance(p, "01", "10") == pytest.approx(5.0 / 1.5 ** 2)


def test_detailed_balance_small_graph():
    for lam in (0.3, 0.5, 0.9):
        res = detailed_balance_residual(_params(lam=lam), depth=4)
        assert res < 1e-13


def test_hitting_prob_brackets_contain_lambda_powers():
    for lam in (0.25, 0.5):
        p = _params(lam=lam)
        for w in ("", "0", "12", "021"):
            lo, hi = hitting_prob_F(w, p)
            assert lo <= lam ** len(w) <= hi
            assert hi - lo < 5e-3


def test_hitting_prob_bracket_width_shrinks_with_depth():
    p8 = _params(depth_cut=8)
    p11 = _params(depth_cut=11)
    w = "01"
    lo8, hi8 = hitting_prob_F(w, p8)
    lo11, hi11 = hitting_prob_F(w, p11)
    assert hi11 - lo11 < hi8 - lo8


def test_hitting_prob_rejects_words_at_cut():
    p = _params(depth_cut=4)
    with pytest.raises(ValueError):
        hitting_prob_F("0120", p)


def test_green_exact_bracket():
    for lam in (0.25, 0.5):
        g = green_oo(_params(lam=lam), mode="exact")
        expect = 1.0 / (1.0 - lam)
        assert g["lower"] <= expect <= g["upper"]
        assert g["upper"] - g["lower"] < 0.05 * expect


def test_green_mc_agrees_with_closed_form():
    p = _params(lam=0.5, samples=20000)
    g = green_oo(p, mode="mc")
    z = (g["mean"] - 2.0) / g["stderr"]
    assert abs(z) < 4.0
    assert g["paths"] == 20000


def test_green_mc_deterministic_given_seed():
    p = _params(lam=0.5, samples=3000)
    a = green_oo(p, mode="mc")
    b = green_oo(p, mode="mc")
    assert a == b
    c = green_oo(_params(lam=0.5, samples=3000, seed=5), mode="mc")
    assert a != c


def test_boundary_hit_distribution_first_digit():
    p = _params(lam=0.5, samples=6000, depth_cut=8)
    out = boundary_hit_distribution(p, m=1)
    freqs = np.asarray(out["freqs"])
    assert freqs.shape == (3,)
    assert abs(freqs.sum() - 1.0) < 1e-12
    sigma = math.sqrt((1 / 3) * (2 / 3) / out["samples_used"])
    assert np.abs(freqs - 1 / 3).max() < 4 * sigma
    assert out["overflowed"] == 0


def test_ctrw_lifetime_closed_form_values():
    assert ctrw_lifetime_closed_form(_params(c=0.25)) == pytest.approx(8.0 / 9.0)
    p = _params(lam=0.9, c=0.1)
    assert ctrw_lifetime_closed_form(p) == pytest.approx(100.0 / 27.0)


def test_ctrw_lifetime_mc_matches_closed_form():
    p = _params(lam=0.5, c=0.25, samples=6000, depth_cut=8)
    mean, stderr = ctrw_lifetime(p)
    expect = ctrw_lifetime_closed_form(p) - ctrw_truncation_bias(p, p.depth_cut)
    assert abs(mean - expect) < 4.0 * stderr + 1e-9


def test_ctrw_truncation_bias_is_negligible_at_depth():
    p = _params(lam=0.5, c=0.25)
    assert ctrw_truncation_bias(p, 12) < 1e-7
    assert ctrw_truncation_bias(p, 4) > ctrw_truncation_bias(p, 8)


def test_gromov_product_values():
    assert gromov_product("", "012") == 0
    assert gromov_product("0", "1") == Fraction(1, 2)
    assert gromov_product("00", "01") == Fraction(3, 2)
    assert gromov_product("012", "012") == 3
    # symmetric
    assert gromov_product("02", "21") == gromov_product("21", "02")


def test_rho_a_quasi_metric():
    assert rho_a("01", "01", 0.5) == 0.0
    assert rho_a("", "0", 0.5) == pytest.approx(1.0)  # product 0 at the root
    assert rho_a("00", "01", 0.5) == pytest.approx(math.exp(-0.75))
    with pytest.raises(ValueError):
        rho_a("0", "1", 0.0)


def test_rho_a_quasi_ultrametric_inequality():
    # empirical slack in the Gromov products stays below one level
    rng = random.Random(7)

    def rand_word():
        n = rng.randint(0, 5)
        return "".join(rng.choice("012") for _ in range(n))

    for _ in range(300):
        x, y, z = rand_word(), rand_word(), rand_word()
        for a in (0.1, 0.25, 0.5):
            m = max(rho_a(x, z, a), rho_a(z, y, a))
            if m == 0:
                continue
            assert rho_a(x, y, a) <= math.exp(a) * m * (1 + 1e-12)


def test_martin_kernel_comparable_to_target():
    p = _params(lam=0.5, depth_cut=10)
    out = martin_kernel_check(p, xs=["0", "1", "01"], xis_as_deep_words=["00", "22"])
    assert out["ratio_min"] > 1.0 / 10.0
    assert out["ratio_max"] < 10.0
    assert out["spread"] == pytest.approx(out["ratio_max"] / out["ratio_min"])


def test_escape_depth_profile_increases():
    p = _params(lam=0.5, depth_cut=10)
    profile = escape_depth_profile(p, step_budgets=(30, 100, 300), samples=400)
    depths = [d for _, d in profile]
    assert depths[0] < depths[-1]
    assert all(a <= b + 1e-9 for a, b in zip(depths, depths[1:]))


def test_build_tables_row_normalization():
    p = _params()
    tables = build_tables(p, 5)
    assert tables.cum.shape[0] == (3 ** 6 - 1) // 2
    assert np.allclose(tables.cum[:, -1], 1.0)
    assert (tables.pi > 0).all()
