import json
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from twoway.sym_curves import (
    Open, SymLDParams, as_alpha, csym_from_region, csym_ic_feedback, csym_oneway_ic,
    csym_twoway_full, csym_twoway_partial, curves_csv, curves_json, default_grid,
    sweep_fig_curves, twoway_full_outer,
)


@pytest.mark.parametrize("alpha, w", [
    (F(0), F(1)), (F(1, 4), F(3, 4)), (F(1, 2), F(1, 2)), (F(2, 3), F(2, 3)),
    (F(1), F(1, 2)), (F(3, 2), F(3, 4)), (F(2), F(1)), (F(5), F(1)),
])
def test_w_curve_values(alpha, w):
    assert csym_oneway_ic(alpha) == w


def test_v_curve_values():
    assert csym_ic_feedback(0) == 1
    assert csym_ic_feedback(1) == F(1, 2)
    assert csym_ic_feedback(4) == 2


def test_float_alpha_is_exact():
    assert as_alpha(0.5) == F(1, 2)
    assert csym_oneway_ic(0.1) == F(9, 10)
    with pytest.raises(ValueError):
        as_alpha(-1)


def test_params_alpha():
    assert SymLDParams(6, 4).alpha == F(2, 3)
    with pytest.raises(ValueError):
        SymLDParams(0, 1)


def test_twoway_full_open_below_two_thirds():
    val = csym_twoway_full(F(1, 3))
    assert isinstance(val, Open) and str(val) == "OPEN"
    assert val.outer_bound == twoway_full_outer(F(1, 3))
    assert csym_twoway_full(F(2, 3)) == F(2, 3)
    assert csym_twoway_full(3) == 1


def test_outer_bound_dominates_w():
    for a in default_grid():
        assert twoway_full_outer(a) >= csym_oneway_ic(a)
    assert twoway_full_outer(F(1, 2)) == F(3, 4)


def test_partial_equals_w():
    for a in default_grid():
        assert csym_twoway_partial(a) == csym_oneway_ic(a)


alphas = st.fractions(min_value=0, max_value=6, max_denominator=60)


@settings(max_examples=300, deadline=None)
@given(alphas)
def test_v_dominates_w(a):
    assert csym_ic_feedback(a) >= csym_oneway_ic(a)


@settings(max_examples=300, deadline=None)
@given(alphas)
def test_v_equals_w_exactly_on_middle_band(a):
    inside = F(2, 3) <= a <= 2
    assert (csym_ic_feedback(a) == csym_oneway_ic(a)) == (inside or a == 0)


@settings(max_examples=200, deadline=None)
@given(st.fractions(min_value=0, max_value=5, max_denominator=40))
def test_w_is_continuous(a):
    eps = F(1, 10 ** 6)
    assert abs(csym_oneway_ic(a + eps) - csym_oneway_ic(a)) <= eps


def test_w_matches_region_small():
    for p in range(1, 7):
        for q in range(0, 3 * p + 1):
            assert csym_from_region(p, q) == csym_oneway_ic(F(q, p))


def test_sweep_default_grid():
    rows = sweep_fig_curves()
    assert len(rows) == 37
    row = next(r for r in rows if r.alpha == F(2, 3))
    assert row.w == row.v == row.twp == row.twf
    assert isinstance(next(r for r in rows if r.alpha == F(1, 3)).twf, Open)


def test_sweep_rejects_empty():
    with pytest.raises(ValueError):
        sweep_fig_curves([])


def test_csv_and_json_output():
    rows = sweep_fig_curves([F(1, 3), F(1)])
    assert curves_csv(rows) == ("alpha,w,v,twf,twp\n"
                                "0.333333,0.666667,0.833333,OPEN,0.666667\n"
                                "1.000000,0.500000,0.500000,0.500000,0.500000\n")
    doc = json.loads(curves_json(rows))
    assert doc[0]["twf"] == {"open": True, "outer_bound": "5/6"}
    assert doc[1]["w"] == "1/2"
