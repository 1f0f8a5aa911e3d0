import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mimorelay.analytic import outage, outage_af_iid
from mimorelay.capacity import (
    DmtPoint,
    asymptotic_dmt,
    capacity_loss,
    dmt_threshold,
    finite_snr_dmt,
    invert_outage,
    outage_capacity,
    snr_loss_approx,
)
from mimorelay.channel import ChannelConfig
from mimorelay.errors import DomainError, NumericalError, OutOfRangeError


def p_of(config, protocol="af"):
    return lambda x: outage(x, config, protocol)


def test_inversion_roundtrip():
    f = p_of(ChannelConfig(2, 2, 0.5))
    for x0 in (1e-4, 3e-2, 0.7):
        assert invert_outage(f(x0), f) == pytest.approx(x0, rel=1e-9)


def test_inversion_examples():
    x = invert_outage(1e-3, p_of(ChannelConfig(2, 1, 0.0)))
    assert x == pytest.approx(1e-3, rel=0.1)
    x = invert_outage(1e-3, p_of(ChannelConfig(1, 1, 0.0)))
    assert 1.0e-4 <= x <= 1.6e-4


def test_inversion_errors():
    f = p_of(ChannelConfig(1, 1, 0.0))
    with pytest.raises(DomainError):
        invert_outage(1.5, f)
    with pytest.raises(OutOfRangeError):
        invert_outage(0.5, lambda x: min(0.3, x))
    with pytest.raises(NumericalError):
        invert_outage(0.5, lambda x: 0.25 if x < 1 else 0.75)


@settings(max_examples=30, deadline=None)
@given(st.floats(-6, math.log10(0.5)), st.sampled_from([(1, 1), (2, 1), (1, 2), (2, 2)]))
def test_inversion_identity(log_eps, shape):
    eps = 10**log_eps
    f = p_of(ChannelConfig(*shape, 1.0))
    assert f(invert_outage(eps, f)) == pytest.approx(eps, rel=1e-9)


def test_capacity_asymptotes():
    c = ChannelConfig(2, 1, 0.0)
    hi = outage_capacity(0.01, 1e6, c)
    assert hi.gamma * hi.x_eps > 50
    assert hi.high_snr == pytest.approx(hi.exact, rel=0.02)
    assert hi.high_snr == pytest.approx(math.log(1e6) - math.log(1 / hi.x_eps), rel=1e-12)
    lo = outage_capacity(0.01, 1.0, c)
    assert lo.gamma * lo.x_eps < 0.02
    assert lo.low_snr == pytest.approx(lo.exact, rel=0.02)


@settings(max_examples=30, deadline=None)
@given(st.floats(-30, 50), st.sampled_from([(1, 1), (2, 1), (2, 2)]))
def test_capacity_below_awgn(snr_db, shape):
    # for eps below the outage at x = 1 the fading channel cannot beat AWGN
    config = ChannelConfig(*shape, 0.0)
    eps = 0.5 * outage(1.0, config)
    g = 10 ** (snr_db / 10)
    assert outage_capacity(eps, g, config).exact <= math.log1p(g)


def test_snr_loss_branches():
    assert snr_loss_approx(1e-3, ChannelConfig(2, 1, 0.0)).x_eps == pytest.approx(1e-3, rel=1e-12)
    r = snr_loss_approx(1e-3, ChannelConfig(1, 2, 1.0))
    assert r.x_eps == pytest.approx(5e-4, rel=1e-12) and r.branch == "m<n"
    r = snr_loss_approx(1e-3, ChannelConfig(1, 1, 0.0))
    assert r.applicable and r.branch == "m=n"
    exact = invert_outage(1e-3, p_of(ChannelConfig(1, 1, 0.0)))
    # frozen: the one-step log form lands at 1.325 x the exact value
    assert r.x_eps / exact == pytest.approx(1.3245, abs=2e-3)
    assert r.x_eps == pytest.approx(1e-3 / (math.log(1e3) + 1 - 2 * 0.5772156649015329), rel=1e-12)


def test_snr_loss_inapplicable_balanced_case():
    # b = 1/(m!(m-1)!) = 1/12 for 3x3; eps above it leaves the log form undefined
    c = ChannelConfig(3, 3, 0.0)
    r = snr_loss_approx(0.2, c)
    assert not r.applicable
    assert outage(r.x_eps, c) == pytest.approx(0.2, rel=1e-9)


def test_capacity_loss():
    c = ChannelConfig(2, 1, 0.0)
    loss = capacity_loss(1e-3, 1e8, c)
    assert loss.additive == pytest.approx(loss.additive_approx, abs=0.01)
    loss = capacity_loss(1e-3, 1e-2, c)
    assert loss.multiplicative == pytest.approx(loss.multiplicative_approx, rel=0.02)


def test_finite_snr_examples():
    p = finite_snr_dmt(1e4, 0.0, ChannelConfig(2, 1, 1.0))
    assert p.d == pytest.approx(1.0, abs=0.1)
    p11 = finite_snr_dmt(1e4, 0.0, ChannelConfig(1, 1, 1.0))
    assert p11.d == pytest.approx(1 - math.log(1 + math.log(1e4)) / math.log(1e4), abs=0.05)
    ratio = outage(1e-4, ChannelConfig(1, 1, 1.0)) / outage(1e-4, ChannelConfig(2, 1, 1.0))
    assert 7 <= ratio <= 14


def test_finite_snr_threshold_conventions():
    assert dmt_threshold(1e4, 0.0) == pytest.approx(1e-4)
    assert dmt_threshold(1e4, 0.5, exact=True) == pytest.approx(99 / 1e4)
    with pytest.raises(DomainError):
        finite_snr_dmt(0.5, 0.0, ChannelConfig())
    with pytest.raises(DomainError):
        finite_snr_dmt(10.0, 1.0, ChannelConfig())


def test_saturation_flag():
    p = finite_snr_dmt(1e200, 0.0, ChannelConfig(3, 3, 0.0))
    assert p.saturated and p.d == pytest.approx(-math.log(1e-300) / math.log(1e200))


def test_finite_snr_converges():
    # 2x1 reaches the asymptote; with a ln(gamma) factor in the outage
    # (1x1, 2x2) the gap is ln(ln gamma)/ln gamma-sized and shrinks slowly
    for r in (0.0, 0.5):
        c = ChannelConfig(2, 1, 0.0)
        assert abs(finite_snr_dmt(1e12, r, c).d - asymptotic_dmt(1, 1, r)) <= 0.05
    for shape in ((1, 1), (2, 2)):
        c = ChannelConfig(*shape, 0.0)
        d_s, d_d = c.diversity_orders()
        for r in (0.0, 0.5):
            gaps = [abs(finite_snr_dmt(g, r, c).d - asymptotic_dmt(d_s, d_d, r)) for g in (1e6, 1e12, 1e24, 1e48)]
            assert all(a > b for a, b in zip(gaps, gaps[1:]))
            assert gaps[-1] <= 0.05
            g = 1e12
            predicted = math.log(math.log(g ** (1 - r))) / math.log(g)
            assert gaps[1] == pytest.approx(predicted, abs=0.04)


def test_af_df_same_asymptotics():
    for shape in ((2, 1), (1, 2), (3, 1)):
        c = ChannelConfig(*shape, 1.0)
        assert abs(finite_snr_dmt(1e10, 0.0, c).d - finite_snr_dmt(1e10, 0.0, c, "df").d) <= 0.1
    for shape in ((1, 1), (2, 2)):
        c = ChannelConfig(*shape, 1.0)
        gaps = [abs(finite_snr_dmt(g, 0.0, c).d - finite_snr_dmt(g, 0.0, c, "df").d) for g in (1e10, 1e40, 1e160)]
        assert gaps[0] < 0.12 and gaps[-1] < 0.05


def test_asymptotic_examples():
    assert asymptotic_dmt(2, 3, 0.5) == 1.0
    assert asymptotic_dmt(2.5, 7, 1.0) == 0.0
    assert asymptotic_dmt(r=0.0, relays=[(1, 1)] * 3) == 3.0
    with pytest.raises(DomainError):
        asymptotic_dmt(0, 1, 0.0)
    with pytest.raises(DomainError):
        asymptotic_dmt(1, 1, 1.5)


@given(st.floats(0.1, 10), st.floats(0.1, 10), st.floats(0, 1))
def test_asymptotic_properties(ds, dd, r):
    assert asymptotic_dmt(ds, dd, r) == asymptotic_dmt(dd, ds, r)
    assert asymptotic_dmt(ds, dd, r) == pytest.approx((1 - r) * asymptotic_dmt(ds, dd, 0.0))
    assert isinstance(DmtPoint(r, 1.0), DmtPoint)
