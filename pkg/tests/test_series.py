import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mimorelay.analytic import lowout_iid, outage_af_iid
from mimorelay.errors import SeriesRangeError
from mimorelay.series import expanded_coefficients, outage_series_iid, tabulated_coefficients


@pytest.mark.parametrize("m", [1, 2, 3, 4])
@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("alpha", [0.0, 0.01, 1.0, 3.0])
def test_tables_match_direct_expansion(m, n, alpha):
    # two independent routes to the same coefficients
    L = 12
    a = tabulated_coefficients(alpha, m, n, L)
    b = expanded_coefficients(alpha, m, n, L)
    for l in range(L + 1):
        scale = max(1.0, abs(b.poly[l]), abs(b.log[l]))
        assert abs(a.poly[l] - b.poly[l]) <= 1e-12 * scale
        assert abs(a.log[l] - b.log[l]) <= 1e-12 * scale


@pytest.mark.parametrize("m", [1, 2, 3])
@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("alpha", [0.0, 0.01, 1.0])
def test_series_matches_closed_form(m, n, alpha):
    for x in (0.1, 0.03, 0.01, 1e-3):
        value, table = outage_series_iid(x, alpha, m, n)
        assert abs(value - outage_af_iid(x, alpha, m, n)) <= 1e-10
        assert table.order <= 60


def test_leading_coefficient_one_by_three():
    t = tabulated_coefficients(0.0, 1, 3, 4)
    assert t.poly[0] == pytest.approx(0.5, rel=1e-15)
    assert t.log[0] == 0.0


def test_one_by_one_series_vs_closed_form():
    v, _ = outage_series_iid(1e-3, 0.0, 1, 1)
    assert v == pytest.approx(outage_af_iid(1e-3, 0.0, 1, 1), abs=1e-10)


@pytest.mark.parametrize("m,n", [(1, 1), (1, 2), (2, 1), (2, 2), (3, 2), (2, 4)])
@pytest.mark.parametrize("alpha", [0.0, 0.5, 2.0])
def test_leading_term_is_lowout(m, n, alpha):
    t = tabulated_coefficients(alpha, m, n, 3)
    lo = lowout_iid(None, alpha, m, n)
    assert t.base_power == lo.leading_power
    # f_0 + g_0 ln x  ==  a + b ln(1/x)
    assert t.poly[0] == pytest.approx(lo.coeff_poly, rel=1e-12, abs=1e-15)
    assert -t.log[0] == pytest.approx(lo.coeff_log, rel=1e-12, abs=1e-15)


def test_split_parts_recombine():
    t = tabulated_coefficients(1.0, 4, 2, 8)
    p = t.parts
    for l in range(9):
        assert t.poly[l] == pytest.approx(p["f1"][l] + p["f2"][l] - p["c1"][l] - p["c2"][l], rel=1e-14, abs=1e-300)
        assert t.log[l] == pytest.approx(p["g1"][l] + p["g2"][l], rel=1e-14, abs=1e-300)


def test_range_and_truncation():
    with pytest.raises(SeriesRangeError):
        outage_series_iid(0.6, 0.0, 1, 1)
    value, table = outage_series_iid(0.0, 1.0, 2, 2)
    assert value == 0.0
    _, table = outage_series_iid(1e-4, 0.0, 2, 2)
    assert table.order < 16


@given(st.floats(1e-8, 0.1), st.integers(1, 3), st.integers(1, 3), st.sampled_from([0.0, 0.01, 1.0]))
def test_series_relative_accuracy_small_x(x, m, n, alpha):
    # the series keeps relative accuracy where the closed form only keeps absolute
    v, _ = outage_series_iid(x, alpha, m, n)
    ref = outage_af_iid(x, alpha, m, n)
    assert abs(v - ref) <= 1e-10
    assert v > 0 and math.isfinite(v)
