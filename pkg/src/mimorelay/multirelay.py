"""Selection relaying over N independent relays."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .analytic import LowOutageExpansion, lowout_iid, outage
from .channel import ChannelConfig
from .errors import ValidationError


@dataclass(frozen=True)
class RelaySet:
    """Independent relay links, each with its own statistics, and an optional
    direct-link outage probability multiplied in at the end."""

    links: tuple = field(default_factory=tuple)
    direct_link_outage: Optional[float] = None

    def __post_init__(self):
        links = tuple(self.links)
        if not links:
            raise ValidationError("a relay set needs at least one link")
        for c in links:
            if not isinstance(c, ChannelConfig):
                raise ValidationError(f"relay links must be ChannelConfig, got {type(c).__name__}")
        object.__setattr__(self, "links", links)
        if self.direct_link_outage is not None:
            _check_prob(self.direct_link_outage)

    @classmethod
    def identical(cls, config: ChannelConfig, n_relays: int, direct_link_outage=None) -> "RelaySet":
        if n_relays < 1:
            raise ValidationError(f"need at least one relay, got {n_relays}")
        return cls((config,) * n_relays, direct_link_outage)

    def __len__(self):
        return len(self.links)

    def outage(self, x: float, protocol: str = "af") -> float:
        """Analytic selection outage at threshold x."""
        return selection_outage([outage(x, c, protocol) for c in self.links], self.direct_link_outage)

    def diversity_orders(self):
        return [c.diversity_orders() for c in self.links]


def _check_prob(p):
    if not (0.0 <= p <= 1.0):
        raise ValidationError(f"probability must be in [0, 1], got {p}")


def selection_outage(per_link_p: Sequence[float], direct_p: Optional[float] = None) -> float:
    """All relay links in outage: the product of per-link probabilities."""
    per_link_p = list(per_link_p)
    if not per_link_p:
        raise ValidationError("need at least one per-link probability")
    for p in per_link_p:
        _check_prob(p)
    if all(p == per_link_p[0] for p in per_link_p):
        # identical links: one rounding instead of N - 1
        total = per_link_p[0] ** len(per_link_p)
    else:
        total = math.prod(per_link_p)
    if direct_p is not None:
        _check_prob(direct_p)
        total *= direct_p
    return total


def selection_lowout(x: Optional[float], alpha: float, m: int, n: int, N: int) -> LowOutageExpansion:
    """Leading small-x form of N identical i.i.d. links: (single-link form)^N."""
    if N < 1:
        raise ValidationError(f"need at least one relay, got {N}")
    single = lowout_iid(x, alpha, m, n)
    return LowOutageExpansion(
        single.leading_power, single.coeff_poly, single.coeff_log, single.validity_hint, exponent=N
    )


def selection_lowout_simple(x: float, alpha: float, m: int, n: int, N: int) -> float:
    """The displayed per-shape forms: x^N (alpha + ln 1/x)^N, x^N (1 + alpha)^N, x^N.

    Only 1x1, 1x2 and 2x1 have one; they drop the constant that
    :func:`selection_lowout` keeps for balanced links.
    """
    if (m, n) == (1, 1):
        return (x * (alpha + math.log(1.0 / x))) ** N
    if (m, n) == (1, 2):
        return (x * (1.0 + alpha)) ** N
    if (m, n) == (2, 1):
        return x**N
    raise ValidationError(f"no simple selection form for {m}x{n}")
