"""Seeded Monte-Carlo estimates of outage and diversity.

Trials are grouped in fixed blocks of ``BLOCK`` draws.  Block b of a run
with seed s draws from a Philox stream keyed on (s, b), so a partition is
just a contiguous range of blocks and the total outage count does not depend
on how the blocks are split between workers.

Complex Gaussians come from the polar form of Box-Muller applied to two
uniforms in (0, 1]: h = sqrt(-ln u1) exp(2 pi i u2), which is CN(0, 1).
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .channel import ChannelConfig, FadingModel, sampling_factor
from .errors import DomainError, InsufficientDataError, ValidationError
from .multirelay import RelaySet

log = logging.getLogger(__name__)

BLOCK = 1 << 16
SEED_MASK = (1 << 64) - 1
MIN_EVENTS = 100
MIN_POINTS = 4
PROTOCOLS = ("af", "df", "af-selection", "df-selection")


@dataclass(frozen=True)
class McEstimate:
    p_hat: float
    trials: int
    stderr: float
    seed: int
    partitions: int
    outages: int

    def within(self, value: float, k: float = 4.0) -> bool:
        return abs(self.p_hat - value) <= k * self.stderr


def block_rng(seed: int, block: int) -> np.random.Generator:
    key = np.array([seed & SEED_MASK, block], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _block_sizes(trials):
    full, rest = divmod(trials, BLOCK)
    return [BLOCK] * full + ([rest] if rest else [])


def _partition_ranges(n_blocks, partitions):
    # contiguous, as even as possible
    bounds = np.linspace(0, n_blocks, partitions + 1).round().astype(int)
    return [(int(a), int(b)) for a, b in zip(bounds, bounds[1:])]


def _complex_gaussian(rng, shape):
    u1 = 1.0 - rng.random(shape)
    u2 = rng.random(shape)
    return np.sqrt(-np.log(u1)) * np.exp(2j * np.pi * u2)


def _uniform_phase(rng, shape):
    return np.exp(2j * np.pi * rng.random(shape))


def draw_channel(model: FadingModel, k: int, factor: Optional[np.ndarray], rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
    """Unit-power fading vector(s) of length k; shape (size, k), or (k,) if size is None."""
    if k < 1:
        raise ValidationError(f"antenna count must be >= 1, got {k}")
    shape = (1 if size is None else size, k)
    fam = model.family
    if factor is not None:
        factor = np.asarray(factor)
        if factor.shape != (k, k):
            raise ValidationError(f"sampling factor has shape {factor.shape}, expected {(k, k)}")
        if fam != "rayleigh":
            raise ValidationError("a sampling factor applies to Rayleigh links only")
    if fam == "rayleigh":
        h = _complex_gaussian(rng, shape)
        if factor is not None:
            h = h @ factor.T
    elif fam == "rician":
        K = model.param
        h = math.sqrt(K / (K + 1.0)) + math.sqrt(1.0 / (K + 1.0)) * _complex_gaussian(rng, shape)
    elif fam == "nakagami":
        mf = model.param
        power = rng.gamma(mf, 1.0 / mf, shape)
        h = np.sqrt(power) * _uniform_phase(rng, shape)
    else:
        kappa = model.param
        scale = 1.0 / math.sqrt(math.gamma(1.0 + 2.0 / kappa))
        u = 1.0 - rng.random(shape)
        h = scale * (-np.log(u)) ** (1.0 / kappa) * _uniform_phase(rng, shape)
    return h[0] if size is None else h


def snr_af(h_sr, h_rd, alpha: float, gamma: float, csi_at_source: bool = True):
    """Instantaneous end-to-end AF SNR; vectorized over leading axes."""
    h_sr = np.asarray(h_sr)
    h_rd = np.asarray(h_rd)
    g_s = np.sum(np.abs(h_sr) ** 2, axis=-1)
    g_d = np.sum(np.abs(h_rd) ** 2, axis=-1)
    snr = gamma * g_s * g_d / (1.0 + alpha * g_d)
    if not csi_at_source:
        snr = snr / h_sr.shape[-1]
    return snr


class _LinkSampler:
    """Draws both hops of one relay link for a block."""

    def __init__(self, config: ChannelConfig):
        self.config = config
        self.f_sr = None if config.corr_sr is None or config.corr_sr.is_identity() else sampling_factor(config.corr_sr)
        self.f_rd = None if config.corr_rd is None or config.corr_rd.is_identity() else sampling_factor(config.corr_rd)

    def draw(self, rng, size):
        c = self.config
        h_sr = draw_channel(c.fading_sr, c.m, self.f_sr, rng, size)
        h_rd = draw_channel(c.fading_rd, c.n, self.f_rd, rng, size)
        return h_sr, h_rd

    def af_snr(self, rng, size, gamma):
        h_sr, h_rd = self.draw(rng, size)
        return snr_af(h_sr, h_rd, self.config.alpha, gamma, self.config.csi_at_source)

    def df_snr(self, rng, size, gamma):
        h_sr, h_rd = self.draw(rng, size)
        g_s = np.sum(np.abs(h_sr) ** 2, axis=-1)
        if not self.config.csi_at_source:
            g_s = g_s / self.config.m
        g_d = np.sum(np.abs(h_rd) ** 2, axis=-1)
        return gamma * np.minimum(g_s, g_d)


def _resolve(target, protocol):
    protocol = protocol.lower()
    if protocol not in PROTOCOLS:
        raise DomainError(f"protocol must be one of {PROTOCOLS}, got {protocol!r}")
    if isinstance(target, ChannelConfig):
        if protocol.endswith("selection"):
            target = RelaySet((target,))
        else:
            return [target], protocol, None
    if not isinstance(target, RelaySet):
        raise ValidationError(f"expected ChannelConfig or RelaySet, got {type(target).__name__}")
    if not protocol.endswith("selection"):
        protocol = protocol + "-selection"
    return list(target.links), protocol, target.direct_link_outage


def _block_outages(samplers, protocol, direct_p, rate, gamma, rng, size):
    # outage iff ln(1 + snr) < R on every relay (selection picks the best)
    best = None
    for s in samplers:
        snr = s.af_snr(rng, size, gamma) if protocol.startswith("af") else s.df_snr(rng, size, gamma)
        best = snr if best is None else np.maximum(best, snr)
    out = np.log1p(best) < rate
    if direct_p is not None:
        out &= rng.random(size) < direct_p
    return int(np.count_nonzero(out))


def estimate_outage(
    target: Union[ChannelConfig, RelaySet],
    R_nats: float,
    gamma: float,
    trials: int,
    seed: int = 0,
    protocol: str = "af",
    partitions: int = 1,
    workers: int = 1,
) -> McEstimate:
    """Monte-Carlo outage estimate.

    A RelaySet (or an ``*-selection`` protocol) uses selection: AF picks the
    relay with the largest end-to-end SNR, DF is in outage only when every
    relay's weaker hop is.
    """
    if int(trials) != trials or trials < 1:
        raise ValidationError(f"trials must be a positive integer, got {trials}")
    if not R_nats >= 0 or not gamma > 0:
        raise DomainError(f"need R >= 0 and gamma > 0, got R={R_nats}, gamma={gamma}")
    if partitions < 1:
        raise ValidationError(f"partitions must be >= 1, got {partitions}")
    trials = int(trials)
    links, protocol, direct_p = _resolve(target, protocol)
    samplers = [_LinkSampler(c) for c in links]
    sizes = _block_sizes(trials)

    def run(bounds):
        lo, hi = bounds
        return sum(
            _block_outages(samplers, protocol, direct_p, R_nats, gamma, block_rng(seed, b), sizes[b])
            for b in range(lo, hi)
        )

    ranges = _partition_ranges(len(sizes), partitions)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            count = sum(pool.map(run, ranges))
    else:
        count = sum(map(run, ranges))
    p = count / trials
    return McEstimate(p, trials, math.sqrt(p * (1.0 - p) / trials), seed, partitions, count)


def sample_effective_gain(config: ChannelConfig, trials: int, seed: int = 0) -> np.ndarray:
    """Draws of Z = g_s g_d / (1 + alpha g_d); AF outage at threshold x is P{Z < x}.

    Without source CSI g_s is divided by m.
    """
    sampler = _LinkSampler(config)
    out = []
    for b, size in enumerate(_block_sizes(int(trials))):
        out.append(sampler.af_snr(block_rng(seed, b), size, 1.0))
    return np.concatenate(out)


def empirical_outage_curve(config: ChannelConfig, xs: Sequence[float], trials: int, seed: int = 0):
    """MC outage at many thresholds from one sample set; returns (p_hat, stderr) arrays."""
    z = np.sort(sample_effective_gain(config, trials, seed))
    p = np.searchsorted(z, np.asarray(xs, dtype=float), side="left") / z.size
    return p, np.sqrt(p * (1.0 - p) / z.size)


@dataclass(frozen=True)
class DiversityFit:
    slope: float
    intercept: float
    used_db: tuple
    excluded_db: tuple
    p_hat: tuple


def _point_seed(seed, i):
    return int(np.random.SeedSequence([seed & SEED_MASK, i]).generate_state(1, np.uint64)[0])


def diversity_fit(
    config: ChannelConfig,
    r: float,
    gamma_list_db: Sequence[float],
    trials: int,
    seed: int = 0,
    protocol: str = "af",
    min_events: int = MIN_EVENTS,
) -> DiversityFit:
    """Least-squares fit of -ln p_hat against ln gamma.

    The rate at each point is R = ln(1 + gamma^r), the same threshold
    x = gamma^(r-1) the analytic finite-SNR diversity uses.  Points with
    fewer than ``min_events`` outages are dropped and listed in the result.
    """
    if not 0 <= r < 1:
        raise DomainError(f"r must be in [0, 1), got {r}")
    used, excluded, ps = [], [], []
    for i, db in enumerate(gamma_list_db):
        gamma = 10.0 ** (db / 10.0)
        est = estimate_outage(config, math.log1p(gamma**r), gamma, trials, _point_seed(seed, i), protocol)
        if est.outages < min_events:
            excluded.append(db)
            continue
        used.append(db)
        ps.append(est.p_hat)
    if excluded:
        log.info("diversity fit: %d point(s) below %d events excluded: %s", len(excluded), min_events, excluded)
    if len(used) < MIN_POINTS:
        raise InsufficientDataError(
            f"only {len(used)} SNR point(s) with >= {min_events} outage events; need {MIN_POINTS}"
        )
    ln_g = np.array(used) * (math.log(10.0) / 10.0)
    slope, intercept = np.polyfit(ln_g, -np.log(ps), 1)
    return DiversityFit(float(slope), float(intercept), tuple(used), tuple(excluded), tuple(ps))


def diversity_slope(config, r, gamma_list_db, trials, seed=0, protocol="af") -> float:
    return diversity_fit(config, r, gamma_list_db, trials, seed, protocol).slope
