"""Outage probability of the single-relay AF and DF channels.

Everything here is a function of the normalized threshold x = (e^R - 1)/gamma.
``outage_af_quadrature`` integrates the defining probability numerically and
is the reference every closed form is checked against.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

from scipy import integrate, special

from . import specfun
from .channel import (
    DISTINCT_RTOL,
    ChannelConfig,
    Eigenspectrum,
    ExponentialMixture,
    GainDistribution,
    GammaGain,
    partial_fraction_coeffs,
)
from .errors import DegeneracyError, DomainError, NumericalError
from .series import outage_series_iid

log = logging.getLogger(__name__)

QUAD_ABS_TOL = 1e-10
SERIES_SWITCH = 0.1
SMALL_P = 1e-7
PERTURBATION = 1e-4
PERTURBATION_CHECK_RTOL = 1e-6


@dataclass(frozen=True)
class OutageQuery:
    """Target rate (nats/s/Hz) and average SNR (linear)."""

    rate_nats: float
    snr_linear: float

    def __post_init__(self):
        if not self.rate_nats >= 0:
            raise DomainError(f"rate must be >= 0, got {self.rate_nats}")
        if not self.snr_linear > 0:
            raise DomainError(f"SNR must be > 0, got {self.snr_linear}")

    @classmethod
    def from_bits_db(cls, rate_bits: float, snr_db: float) -> "OutageQuery":
        return cls(rate_bits * math.log(2.0), 10.0 ** (snr_db / 10.0))

    @property
    def x(self) -> float:
        return threshold(self.rate_nats, self.snr_linear)


def threshold(rate_nats: float, snr_linear: float) -> float:
    """x = (e^R - 1) / gamma."""
    return math.expm1(rate_nats) / snr_linear


def _check_x_alpha(x, alpha):
    if not x >= 0 or math.isinf(x):
        raise DomainError(f"x must be finite and >= 0, got {x}")
    if not alpha >= 0 or math.isinf(alpha):
        raise DomainError(f"alpha must be finite and >= 0, got {alpha}")


# ---------------------------------------------------------------------------
# quadrature oracle
# ---------------------------------------------------------------------------


def _lower_tail_point(dist: GainDistribution) -> float:
    # F_d(t) <~ t^d for small t, so t^d = 1e-18 leaves a negligible remainder
    d = max(dist.diversity, 0.05)
    return math.exp(-41.5 / d)


def _upper_tail_point(dist: GainDistribution) -> float:
    if isinstance(dist, GammaGain):
        return float(special.gammainccinv(dist.shape, 1e-18)) * dist.scale_
    if isinstance(dist, ExponentialMixture):
        weight = sum(abs(a) for a in dist.coefficients)
        return dist.eigenvalues[0] * (math.log(weight) + 42.0)
    hi = dist.scale()
    while 1.0 - dist.cdf(hi) > 1e-16 and hi < 1e12:
        hi *= 2.0
    return hi * 4.0


def outage_af_quadrature(x: float, alpha: float, dist_s: GainDistribution, dist_d: GainDistribution) -> float:
    """P{g_s g_d / (1 + alpha g_d) < x} by adaptive quadrature over g_d.

    Integrates f_d(t) F_s(x (1 + alpha t) / t) in u = ln t, which spreads
    the transition near t ~ x and the density's behavior at 0 evenly.
    """
    _check_x_alpha(x, alpha)
    if x == 0:
        return 0.0

    def integrand(u):
        t = math.exp(u)
        return dist_d.pdf(t) * dist_s.cdf(x * (1.0 + alpha * t) / t) * t

    t_lo = _lower_tail_point(dist_d)
    u_hi = math.log(_upper_tail_point(dist_d))
    lx = math.log(x)

    def run(epsabs):
        u_lo = math.log(t_lo)
        inner = sorted({p for p in (lx - 4.0, lx, lx + 4.0, 0.0, math.log(dist_d.scale())) if u_lo < p < u_hi})
        edges = [u_lo] + inner + [u_hi]
        total = abserr = 0.0
        for a, b in zip(edges, edges[1:]):
            val, err = integrate.quad(integrand, a, b, epsabs=epsabs, epsrel=1e-11, limit=400, full_output=1)[:2]
            total += val
            abserr += err
        return total, abserr

    total, abserr = run(1e-17)
    if 0 < total < 1e-5:
        # tiny probabilities: the dropped lower tail and the absolute target
        # both have to shrink with the estimate to keep ~1e-10 relative
        while t_lo > 1e-300 and dist_d.cdf(t_lo) > 1e-13 * total:
            t_lo *= 1e-2
        total, abserr = run(max(total * 1e-12, 1e-300))
    if not abserr <= QUAD_ABS_TOL or not math.isfinite(total):
        raise NumericalError(
            "outage quadrature did not converge",
            x=x,
            alpha=alpha,
            estimate=total,
            abserr=abserr,
        )
    return min(1.0, max(0.0, total))


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------


def outage_af_iid(x: float, alpha: float, m: int, n: int) -> float:
    """Closed form for i.i.d. Rayleigh links (finite double sum of K_N)."""
    _check_x_alpha(x, alpha)
    if m < 1 or n < 1:
        raise DomainError(f"antenna counts must be >= 1, got m={m}, n={n}")
    if x == 0:
        return 0.0
    z = math.sqrt(4.0 * x)
    terms = []
    for k in range(m):
        for i in range(k + 1):
            order = abs(n + i - k)
            terms.append(
                alpha**i
                * x ** ((k + i + n) / 2.0)
                / (math.factorial(i) * math.factorial(k - i))
                * specfun.bessel_k(order, z)
            )
    s = 2.0 * math.exp(-alpha * x) / math.factorial(n - 1) * math.fsum(terms)
    return min(1.0, max(0.0, 1.0 - s))


def _one_minus_zk1(z: float) -> float:
    """1 - z K_1(z), summed as a series for small z to avoid cancellation."""
    if z > 2.0:
        return 1.0 - z * specfun.bessel_k(1, z)
    q = 0.25 * z * z
    lq = math.log(q)
    total = 0.0
    power = q  # q^(s+1) / (s! (s+1)!)
    for s in range(200):
        if s > 0:
            power *= q / (s * (s + 1))
        term = power * (lq - specfun.psi_pair(s + 1))
        total -= term
        if abs(term) < 1e-17 * abs(total):
            break
    return total


def _correlated_closed_form(x, alpha, lam, a_coef, eta, b_coef):
    # sum A_k B_j = 1 turns 1 - sum(...) into sum A_k B_j (1 - ...), which
    # keeps each bracket O(x ln x) instead of cancelling O(1) terms
    terms = []
    for lk, ak in zip(lam, a_coef):
        decay = math.exp(-alpha * x / lk)
        loss = -math.expm1(-alpha * x / lk)
        for ej, bj in zip(eta, b_coef):
            z = math.sqrt(4.0 * x / (lk * ej))
            terms.append(ak * bj * (loss + decay * _one_minus_zk1(z)))
    return math.fsum(terms)


def perturb_degenerate(eigs: Eigenspectrum, delta: float = PERTURBATION) -> Eigenspectrum:
    """Split each cluster of repeated eigenvalues symmetrically by +-delta (relative).

    The cluster sum is preserved, so the first-order effect on any symmetric
    function of the spectrum cancels.
    """
    if eigs.distinct:
        return eigs
    vals = list(eigs.values)
    clusters = []
    start = 0
    for i in range(1, len(vals) + 1):
        if i == len(vals) or vals[start] - vals[i] > DISTINCT_RTOL * vals[start]:
            clusters.append(vals[start:i])
            start = i
    out = []
    for cl in clusters:
        c = len(cl)
        mean = math.fsum(cl) / c
        if c == 1:
            out.append(mean)
            continue
        for j in range(c):
            out.append(mean * (1.0 + delta * (c - 1 - 2 * j) / (c - 1)))
    perturbed = Eigenspectrum.from_values(out)
    if not perturbed.distinct:
        raise DegeneracyError(f"spectrum stays degenerate after perturbation: {eigs.values}")
    return perturbed


def outage_af_correlated(x: float, alpha: float, eigs_sr, eigs_rd) -> float:
    """Closed form for correlated Rayleigh links with distinct eigenvalues.

    The relay-noise exponential carries the source-relay eigenvalue,
    exp(-alpha x / lambda_k).  Repeated eigenvalues: unit spectra on both
    links go to :func:`outage_af_iid`; otherwise every repeated cluster is
    split by a +-1e-4 relative perturbation and the result is checked
    against the quadrature oracle on the same spectrum, whose value is
    returned instead when the two differ by more than 1e-6 relative.
    """
    _check_x_alpha(x, alpha)
    if not isinstance(eigs_sr, Eigenspectrum):
        eigs_sr = Eigenspectrum.from_values(eigs_sr)
    if not isinstance(eigs_rd, Eigenspectrum):
        eigs_rd = Eigenspectrum.from_values(eigs_rd)
    if x == 0:
        return 0.0
    if eigs_sr.all_equal(1.0) and eigs_rd.all_equal(1.0):
        return outage_af_iid(x, alpha, len(eigs_sr), len(eigs_rd))

    perturbed = not (eigs_sr.distinct and eigs_rd.distinct)
    sr = perturb_degenerate(eigs_sr)
    rd = perturb_degenerate(eigs_rd)
    pa = partial_fraction_coeffs(sr)
    pb = partial_fraction_coeffs(rd)
    p = _correlated_closed_form(x, alpha, pa.eigenvalues, pa.coefficients, pb.eigenvalues, pb.coefficients)
    p = min(1.0, max(0.0, p))
    if perturbed:
        try:
            ref = outage_af_quadrature(x, alpha, ExponentialMixture(sr), ExponentialMixture(rd))
        except NumericalError as e:
            raise DegeneracyError(f"no usable value for the perturbed spectrum: {e}") from e
        if abs(p - ref) > max(1e-12, PERTURBATION_CHECK_RTOL * ref):
            # split clusters make the A_k B_j weights large and the double sum
            # cancels; the quadrature keeps its accuracy, so it wins
            log.debug("perturbed closed form %r vs quadrature %r; using quadrature", p, ref)
            return ref
    return p


def outage_df(x: float, dist_s: GainDistribution, dist_d: GainDistribution) -> float:
    """DF outage with equal average SNR on both hops: 1 - (1 - F_s)(1 - F_d)."""
    if not x >= 0:
        raise DomainError(f"x must be >= 0, got {x}")
    if x == 0:
        return 0.0
    fs = dist_s.cdf(x)
    fd = dist_d.cdf(x)
    return min(1.0, fs + fd - fs * fd)


def outage_af(x: float, config: ChannelConfig) -> float:
    """Exact AF outage for a scenario, picking the closed form when one applies.

    Below ``SMALL_P`` the closed forms lose relative accuracy to the
    ``1 - sum`` cancellation; there the i.i.d. case switches to the small-x
    series and the correlated case to the quadrature oracle.
    """
    if config.is_iid_rayleigh:
        if 0 < x <= SERIES_SWITCH:
            return outage_series_iid(x, config.alpha, config.m, config.n)[0]
        return outage_af_iid(x, config.alpha, config.m, config.n)
    if config.is_rayleigh:
        p = outage_af_correlated(x, config.alpha, config.spectrum_sr(), config.spectrum_rd())
        if p >= SMALL_P or x == 0:
            return p
    return outage_af_quadrature(x, config.alpha, *link_gains(config))


def link_gains(config: ChannelConfig):
    """|h|^2 distributions of both hops, with repeated Rayleigh eigenvalue
    clusters split as in :func:`perturb_degenerate`."""

    def one(spectrum, fading, getter):
        if fading.family != "rayleigh":
            return getter()
        s = spectrum()
        if len(s) == 1 or s.all_equal():
            return GammaGain(len(s), s.values[0])
        return ExponentialMixture(perturb_degenerate(s))

    return (
        one(config.spectrum_sr, config.fading_sr, config.gain_sr),
        one(config.spectrum_rd, config.fading_rd, config.gain_rd),
    )


def outage(x: float, config: ChannelConfig, protocol: str = "af") -> float:
    """Outage at threshold x for either protocol, honoring ``csi_at_source``.

    Without source CSI the source spreads its power isotropically, which
    divides the source-relay gain by m.
    """
    protocol = protocol.lower()
    shift = 1.0 if config.csi_at_source else float(config.m)
    if protocol == "af":
        return outage_af(x * shift, config)
    if protocol == "df":
        _check_x_alpha(x, 0.0)
        if x == 0:
            return 0.0
        g_s, g_d = link_gains(config)
        fs = g_s.cdf(x * shift)
        fd = g_d.cdf(x)
        return min(1.0, fs + fd - fs * fd)
    raise DomainError(f"unknown protocol {protocol!r}")


# ---------------------------------------------------------------------------
# low-outage expansions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LowOutageExpansion:
    """P ~ ((a + b ln(1/x)) x^p)^exponent as x -> 0.

    ``coeff_log`` is nonzero only for balanced links (m = n).  ``exponent``
    is 1 for a single relay and N for N identical relays under selection.
    """

    leading_power: int
    coeff_poly: float
    coeff_log: float = 0.0
    validity_hint: tuple = (0.0, 1.0)
    exponent: int = 1

    def single(self, x: float) -> float:
        return (self.coeff_poly + self.coeff_log * math.log(1.0 / x)) * x**self.leading_power

    def __call__(self, x: float) -> float:
        if x == 0:
            return 0.0
        return self.single(x) ** self.exponent


def _validity(a, b):
    if b > 0 and a < 0:
        return (0.0, min(1.0, math.exp(a / b)))
    return (0.0, 1.0)


def lowout_iid(x: Optional[float], alpha: float, m: int, n: int) -> LowOutageExpansion:
    """Leading small-x term for i.i.d. links.  ``x`` is accepted for symmetry
    with the other evaluators; the coefficients do not depend on it."""
    if m < 1 or n < 1:
        raise DomainError(f"antenna counts must be >= 1, got m={m}, n={n}")
    f = math.factorial
    if m < n:
        a = math.fsum(alpha**k * f(n - m + k - 1) / (f(m - k) * f(k)) for k in range(m + 1)) / f(n - 1)
        return LowOutageExpansion(m, a, 0.0, _validity(a, 0.0))
    if m > n:
        a = f(m - n - 1) / (f(n) * f(m - 1))
        return LowOutageExpansion(n, a, 0.0, _validity(a, 0.0))
    b_m = 1.0 / m + 2.0 * specfun.digamma_int(1)
    a = (math.fsum(alpha**k / (f(m - k) * f(k)) for k in range(1, m + 1)) + b_m / f(m)) / f(m - 1)
    b = 1.0 / (f(m) * f(m - 1))
    return LowOutageExpansion(m, a, b, _validity(a, b))


def _relay_noise_weight(k, l, alpha):
    # D_kl(alpha)
    f = math.factorial
    return (-1) ** (l - k) * alpha ** (l - k) / (f(l - k) * f(k - 1) * f(k))


def _log_moment(pf, k):
    return math.fsum(c * math.log(v) / v**k for c, v in zip(pf.coefficients, pf.eigenvalues))


def lowout_correlated(x: Optional[float], alpha: float, eigs_sr, eigs_rd) -> LowOutageExpansion:
    """Leading small-x term for correlated links with distinct spectra."""
    pa = partial_fraction_coeffs(eigs_sr)
    pb = partial_fraction_coeffs(eigs_rd)
    m, n = len(pa.eigenvalues), len(pb.eigenvalues)
    det_sr = math.prod(pa.eigenvalues)
    det_rd = math.prod(pb.eigenvalues)
    f = math.factorial

    def relay_side(p):
        # alpha-dependent sum over the relay-destination spectrum
        return (-1) ** (p + 1) / det_sr * math.fsum(
            _log_moment(pb, k) * _relay_noise_weight(k, p, alpha) for k in range(1, p + 1)
        )

    if m < n:
        a = alpha**m / (f(m) * det_sr) + relay_side(m)
        return LowOutageExpansion(m, a, 0.0, _validity(a, 0.0))
    if m > n:
        a = (-1) ** (n + 1) / (f(n) * f(n - 1) * det_rd) * _log_moment(pa, n)
        return LowOutageExpansion(n, a, 0.0, _validity(a, 0.0))
    b = 1.0 / (f(m) * f(m - 1) * det_sr * det_rd)
    a = (
        alpha**m / (f(m) * det_sr)
        + (-1) ** (m + 1) / (f(m) * f(m - 1) * det_rd) * _log_moment(pa, m)
        + b * specfun.psi_pair(m)
        + relay_side(m)
    )
    return LowOutageExpansion(m, a, b, _validity(a, b))


def lowout(config: ChannelConfig) -> LowOutageExpansion:
    """Low-outage expansion for a Rayleigh scenario (i.i.d. or correlated)."""
    if not config.is_rayleigh:
        raise DomainError("low-outage coefficients are available for Rayleigh links only")
    if config.is_iid_rayleigh:
        return lowout_iid(None, config.alpha, config.m, config.n)
    # the coefficients are continuous in the spectrum; split repeated clusters
    sr = perturb_degenerate(config.spectrum_sr())
    rd = perturb_degenerate(config.spectrum_rd())
    return lowout_correlated(None, config.alpha, sr, rd)


def two_by_one_corr_approx(x: float, rho: complex) -> float:
    """Low-outage form x ln((1+|rho|)/(1-|rho|)) / (2|rho|) for one correlated pair."""
    r = abs(rho)
    if r == 0:
        return x
    return x * math.log((1.0 + r) / (1.0 - r)) / (2.0 * r)
