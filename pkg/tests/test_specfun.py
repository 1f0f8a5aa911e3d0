import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

import oracles
from mimorelay import specfun
from mimorelay.errors import DomainError, SeriesRangeError, UnsupportedOrderError

# reference values summed independently in mpmath before the module existed
K0_AT_0_2 = 1.7527038555281458
K2_AT_0_2 = 49.512429287732864


def test_k1_small_argument():
    x = 1e-6
    assert x * specfun.bessel_k(1, x) == pytest.approx(1.0, abs=1e-6)


def test_k0_value():
    assert specfun.bessel_k(0, 0.2) == pytest.approx(1.75270, abs=1e-4)
    assert specfun.bessel_k(0, 0.2) == pytest.approx(K0_AT_0_2, rel=1e-13)
    assert oracles.k_series_direct(0, 0.2, 20) == pytest.approx(K0_AT_0_2, rel=1e-14)


def test_k2_from_recurrence_of_series_values():
    k0 = oracles.k_series_direct(0, 0.2, 20)
    k1 = oracles.k_series_direct(1, 0.2, 20)
    assert k0 + 10 * k1 == pytest.approx(49.51, abs=0.02)
    assert specfun.bessel_k(2, 0.2) == pytest.approx(K2_AT_0_2, rel=1e-13)


def test_series_matches_main_at_0_2():
    assert specfun.bessel_k_series(1, 0.2, 30) == pytest.approx(specfun.bessel_k(1, 0.2), rel=1e-12)


def test_series_first_term_only():
    # k = 0 term alone: -(ln(x/2) - psi(1))
    assert specfun.bessel_k_series(0, 0.2, 1) == pytest.approx(1.7254, abs=1e-3)


def test_series_finite_part_only():
    assert specfun.bessel_k_series(1, 0.2, 0) == 5.0


def test_digamma_values():
    assert specfun.digamma_int(1) == pytest.approx(-0.5772156649, abs=1e-10)
    assert specfun.digamma_int(3) == pytest.approx(0.9227843351, abs=1e-10)
    assert specfun.psi_pair(1) == pytest.approx(-0.1544313298, abs=1e-10)
    for k in range(1, 30):
        assert specfun.digamma_int(k) == pytest.approx(float(special.digamma(k)), rel=1e-14, abs=1e-15)


@pytest.mark.parametrize("order", range(0, 33, 4))
def test_against_scipy_wide_range(order):
    for x in (1e-8, 1e-4, 0.01, 0.5, 1.9, 2.0, 2.1, 5.0, 17.0, 50.0):
        ref = special.kn(order, x)
        if not math.isfinite(ref):
            continue
        assert specfun.bessel_k(order, x) == pytest.approx(ref, rel=1e-12)


def test_against_mpmath():
    for order in (0, 1, 3, 7):
        for x in (0.003, 0.7, 3.3, 21.0):
            assert specfun.bessel_k(order, x) == pytest.approx(oracles.bessel_k(order, x), rel=1e-13)


@given(st.integers(1, 31), st.floats(0.01, 50))
def test_recurrence(n, x):
    kp = specfun.bessel_k(n + 1, x)
    resid = kp - specfun.bessel_k(n - 1, x) - (2 * n / x) * specfun.bessel_k(n, x)
    assert abs(resid) <= 1e-10 * kp


@given(st.integers(0, 20), st.floats(1e-6, 40), st.floats(1.0001, 3))
def test_strictly_decreasing(n, x, factor):
    assert specfun.bessel_k(n, x) > specfun.bessel_k(n, x * factor) > 0


@pytest.mark.parametrize("z", [1e-4, 1e-6])
def test_small_argument_laws(z):
    assert z * specfun.bessel_k(1, z) == pytest.approx(1.0, rel=1e-3)
    assert specfun.bessel_k(2, z) * z * z / 2 == pytest.approx(1.0, rel=1e-3)


@settings(max_examples=200)
@given(st.integers(0, 8), st.floats(1e-6, 2.0))
def test_series_oracle_equivalence(n, x):
    assert specfun.bessel_k_series(n, x) == pytest.approx(specfun.bessel_k(n, x), rel=1e-12)


def test_errors():
    with pytest.raises(DomainError):
        specfun.bessel_k(0, 0.0)
    with pytest.raises(DomainError):
        specfun.bessel_k(0, -1.0)
    with pytest.raises(DomainError):
        specfun.bessel_k(1.5, 1.0)
    with pytest.raises(UnsupportedOrderError):
        specfun.bessel_k(65, 1.0)
    with pytest.raises(SeriesRangeError):
        specfun.bessel_k_series(0, 4.5, 10)
    with pytest.raises(DomainError):
        specfun.digamma_int(0)
    with pytest.raises(DomainError):
        specfun.psi_pair(0)
