"""Outage capacity, SNR loss and diversity-multiplexing tradeoff."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .analytic import lowout, outage
from .channel import ChannelConfig
from .errors import DomainError, NumericalError, OutOfRangeError

INVERT_RTOL = 1e-9
INVERT_TARGET = 1e-12
X_MIN = 1e-300
X_MAX = 1e300
P_FLOOR = 1e-300


def invert_outage(eps: float, p_of_x: Callable[[float], float], x0: float = 1e-2) -> float:
    """x with p_of_x(x) = eps, by bisection in ln x.

    Bisection aims at |P(x) - eps| <= 1e-12 eps and keeps going until the
    bracket collapses; a result within ``INVERT_RTOL`` (1e-9) relative is
    accepted.  The bracket is grown by factors of 10 from ``x0``; an eps the
    evaluator cannot reach raises OutOfRangeError.
    """
    if not 0 < eps < 1:
        raise DomainError(f"eps must be in (0, 1), got {eps}")
    lo = hi = x0
    p_lo = p_hi = p_of_x(x0)
    while p_lo >= eps:
        lo /= 10.0
        if lo < X_MIN:
            raise OutOfRangeError(f"eps={eps} is below the evaluator's range")
        p_lo = p_of_x(lo)
    while p_hi <= eps:
        hi *= 10.0
        if hi > X_MAX:
            raise OutOfRangeError(f"eps={eps} is above the evaluator's range")
        p_hi = p_of_x(hi)

    best_x, best_err = (lo, abs(p_lo - eps)) if abs(p_lo - eps) < abs(p_hi - eps) else (hi, abs(p_hi - eps))
    u_lo, u_hi = math.log(lo), math.log(hi)
    for _ in range(400):
        if best_err <= INVERT_TARGET * eps:
            break
        u = 0.5 * (u_lo + u_hi)
        if not u_lo < u < u_hi:
            break
        x = math.exp(u)
        p = p_of_x(x)
        if abs(p - eps) < best_err:
            best_x, best_err = x, abs(p - eps)
        if p < eps:
            u_lo = u
        else:
            u_hi = u
    if best_err <= INVERT_RTOL * eps:
        return best_x
    raise NumericalError("outage inversion stalled", eps=eps, x=best_x, abs_error=best_err)


@dataclass(frozen=True)
class OutageCapacity:
    eps: float
    gamma: float
    x_eps: float
    exact: float
    high_snr: float
    low_snr: float


def outage_capacity(eps: float, gamma: float, config: ChannelConfig, protocol: str = "af") -> OutageCapacity:
    """C_eps = ln(1 + gamma x_eps) in nats/s/Hz with its two asymptotes."""
    if not gamma > 0:
        raise DomainError(f"gamma must be > 0, got {gamma}")
    x_eps = invert_outage(eps, lambda x: outage(x, config, protocol))
    gx = gamma * x_eps
    return OutageCapacity(eps, gamma, x_eps, math.log1p(gx), math.log(gx), gx)


@dataclass(frozen=True)
class SnrLoss:
    x_eps: Optional[float]
    applicable: bool
    branch: str


def snr_loss_approx(eps: float, config: ChannelConfig) -> SnrLoss:
    """Low-outage estimate of x_eps from the leading expansion coefficients.

    For m = n the log form needs b > 0 and eps < b; otherwise the exact
    inversion is returned and the result is flagged as not applicable.
    """
    if not 0 < eps < 1:
        raise DomainError(f"eps must be in (0, 1), got {eps}")
    lo = lowout(config)
    p = lo.leading_power
    a, b = lo.coeff_poly, lo.coeff_log
    if config.m != config.n:
        branch = "m<n" if config.m < config.n else "m>n"
        return SnrLoss((eps / a) ** (1.0 / p), True, branch)
    if b > 0 and eps < b:
        denom = a + b * math.log(b / eps)
        if denom > 0:
            return SnrLoss((eps * config.m / denom) ** (1.0 / config.m), True, "m=n")
    exact = invert_outage(eps, lambda x: outage(x, config))
    return SnrLoss(exact, False, "m=n")


@dataclass(frozen=True)
class CapacityLoss:
    additive: float  # C_eps - C_awgn, nats
    multiplicative: float  # C_eps / C_awgn
    additive_approx: float  # ln x_eps (high SNR)
    multiplicative_approx: float  # x_eps (low SNR)


def capacity_loss(eps: float, gamma: float, config: ChannelConfig) -> CapacityLoss:
    """Loss against the AWGN capacity ln(1 + gamma), exact at ``gamma`` and asymptotic."""
    cap = outage_capacity(eps, gamma, config)
    awgn = math.log1p(gamma)
    approx = snr_loss_approx(eps, config).x_eps
    return CapacityLoss(cap.exact - awgn, cap.exact / awgn, math.log(approx), approx)


@dataclass(frozen=True)
class DmtPoint:
    r: float
    d: float
    gamma: Optional[float] = None  # None marks the asymptotic curve
    saturated: bool = False


def dmt_threshold(gamma: float, r: float, exact: bool = False) -> float:
    """Normalized threshold for multiplexing gain r.

    The default x = gamma^(r-1) keeps the leading e^R of R = r ln gamma; it is
    the exact threshold of R = ln(1 + gamma^r), one bit at r = 0.  ``exact``
    uses (e^R - 1)/gamma with R = r ln gamma, which is 0 at r = 0.
    """
    if exact:
        return math.expm1(r * math.log(gamma)) / gamma
    return gamma ** (r - 1.0)


def finite_snr_dmt(gamma: float, r: float, config: ChannelConfig, protocol: str = "af", exact_threshold: bool = False) -> DmtPoint:
    """d = -ln P / ln gamma with the exact analytic outage."""
    if not gamma > 1:
        raise DomainError(f"gamma must be > 1, got {gamma}")
    if not 0 <= r < 1:
        raise DomainError(f"r must be in [0, 1), got {r}")
    x = dmt_threshold(gamma, r, exact_threshold)
    p = outage(x, config, protocol)
    saturated = p < P_FLOOR
    d = -math.log(max(p, P_FLOOR)) / math.log(gamma)
    return DmtPoint(r, d, gamma, saturated)


def asymptotic_dmt(d_s: Optional[float] = None, d_d: Optional[float] = None, r: float = 0.0, relays: Optional[Sequence] = None) -> float:
    """min(d_s, d_d)(1 - r); with ``relays`` the selection sum over (d_s_i, d_d_i).

    AF and DF share this curve.
    """
    if not 0 <= r <= 1:
        raise DomainError(f"r must be in [0, 1], got {r}")
    pairs = list(relays) if relays is not None else [(d_s, d_d)]
    if not pairs:
        raise DomainError("need at least one relay")
    total = 0.0
    for ds, dd in pairs:
        if ds is None or dd is None or not (ds > 0 and dd > 0):
            raise DomainError(f"diversity orders must be > 0, got {(ds, dd)}")
        total += min(ds, dd)
    return total * (1.0 - r)
