"""Channel statistics: correlation matrices, eigen-spectra, partial fractions,
distributions of the link gain |h|^2, fading families and the link budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import special, stats

from .errors import DegeneracyError, ValidationError

DISTINCT_RTOL = 1e-6
HERMITIAN_TOL = 1e-12


# ---------------------------------------------------------------------------
# correlation matrices and spectra
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CorrelationMatrix:
    """Normalized (unit diagonal) Hermitian PSD correlation matrix."""

    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        r = np.array(self.entries, dtype=complex)
        if r.ndim != 2 or r.shape[0] != r.shape[1] or r.shape[0] == 0:
            raise ValidationError(f"correlation matrix must be square, got shape {r.shape}")
        dim = r.shape[0]
        if np.max(np.abs(r - r.conj().T)) > HERMITIAN_TOL:
            raise ValidationError("correlation matrix is not Hermitian")
        if np.max(np.abs(np.diag(r) - 1.0)) > HERMITIAN_TOL:
            raise ValidationError("correlation matrix must have unit diagonal")
        w = np.linalg.eigvalsh(r)
        if w[0] < -1e-12 * dim:
            raise ValidationError(f"correlation matrix is indefinite (min eigenvalue {w[0]:.3e})")
        r.setflags(write=False)
        object.__setattr__(self, "entries", r)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def identity(cls, dim: int) -> "CorrelationMatrix":
        return cls(np.eye(dim))

    def is_identity(self) -> bool:
        return bool(np.max(np.abs(self.entries - np.eye(self.dim))) <= HERMITIAN_TOL)


@dataclass(frozen=True)
class Eigenspectrum:
    values: tuple
    distinct: bool

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "Eigenspectrum":
        vals = tuple(sorted((float(v) for v in values), reverse=True))
        if not vals:
            raise ValidationError("empty eigenspectrum")
        if any(not (v > 0) or math.isinf(v) for v in vals):
            raise ValidationError(f"eigenvalues must be positive and finite: {vals}")
        return cls(vals, _is_distinct(vals))

    def __len__(self):
        return len(self.values)

    @property
    def det(self) -> float:
        return math.prod(self.values)

    def all_equal(self, value: Optional[float] = None) -> bool:
        ref = self.values[0] if value is None else value
        return all(abs(v - ref) <= DISTINCT_RTOL * ref for v in self.values)


def _is_distinct(vals):
    for a, b in zip(vals, vals[1:]):
        if (a - b) <= DISTINCT_RTOL * a:
            return False
    return True


def eigenvalues(r: CorrelationMatrix) -> Eigenspectrum:
    """Descending eigenvalues of ``r`` with (numerically) zero ones pruned."""
    if not isinstance(r, CorrelationMatrix):
        r = CorrelationMatrix(r)
    w = np.linalg.eigvalsh(r.entries)[::-1]
    kept = [float(v) for v in w if v >= 1e-12 * r.dim]
    return Eigenspectrum.from_values(kept)


def two_antenna_corr(rho: complex) -> CorrelationMatrix:
    if not abs(rho) < 1:
        raise ValidationError(f"|rho| must be < 1, got {abs(rho)}")
    return CorrelationMatrix(np.array([[1.0, rho], [np.conj(rho), 1.0]], dtype=complex))


def exponential_corr(rho: complex, dim: int) -> CorrelationMatrix:
    """Exponential model R[i, j] = rho^(j - i) for j >= i (Hermitian below)."""
    if dim < 1:
        raise ValidationError(f"dimension must be positive, got {dim}")
    if not abs(rho) < 1:
        raise ValidationError(f"|rho| must be < 1, got {abs(rho)}")
    r = np.eye(dim, dtype=complex)
    for i in range(dim):
        for j in range(i + 1, dim):
            r[i, j] = complex(rho) ** (j - i)
            r[j, i] = np.conj(r[i, j])
    return CorrelationMatrix(r)


@dataclass(frozen=True)
class PartialFraction:
    eigenvalues: tuple
    coefficients: tuple


def partial_fraction_coeffs(eigs) -> PartialFraction:
    """A_k = prod_{i != k} lam_k / (lam_k - lam_i)."""
    if not isinstance(eigs, Eigenspectrum):
        eigs = Eigenspectrum.from_values(eigs)
    if not eigs.distinct:
        raise DegeneracyError(f"eigenvalues are not distinct: {eigs.values}")
    lam = eigs.values
    coeffs = []
    for k, lk in enumerate(lam):
        a = 1.0
        for i, li in enumerate(lam):
            if i != k:
                a *= lk / (lk - li)
        coeffs.append(a)
    return PartialFraction(lam, tuple(coeffs))


def sampling_factor(r) -> np.ndarray:
    """Lower-triangular F with F @ F^H = R."""
    if not isinstance(r, CorrelationMatrix):
        r = CorrelationMatrix(r)
    try:
        return np.linalg.cholesky(r.entries)
    except np.linalg.LinAlgError as exc:
        raise ValidationError("correlation matrix is not positive definite") from exc


# ---------------------------------------------------------------------------
# distributions of the link gain g = |h|^2
# ---------------------------------------------------------------------------


class GainDistribution:
    """pdf/cdf of a link gain on scalars; ``diversity`` is the near-zero exponent."""

    diversity: float

    def pdf(self, t: float) -> float:
        raise NotImplementedError

    def cdf(self, t: float) -> float:
        raise NotImplementedError

    def scale(self) -> float:
        """Rough upper scale of the support, used to size integration ranges."""
        return 1.0


_SMALL_TERMS = 60


class ExponentialMixture(GainDistribution):
    """Generalized chi-square with distinct eigenvalues (partial fractions)."""

    def __init__(self, eigs):
        pf = partial_fraction_coeffs(eigs)
        self.eigenvalues = pf.eigenvalues
        self.coefficients = pf.coefficients
        self.diversity = float(len(pf.eigenvalues))
        self._terms = list(zip(pf.coefficients, pf.eigenvalues))

        n = len(pf.eigenvalues)
        self._det = math.prod(pf.eigenvalues)
        self._small = pf.eigenvalues[-1]
        # h_s(1/lam): complete homogeneous symmetric polynomials of the rates
        h = [1.0] + [0.0] * _SMALL_TERMS
        for lam in pf.eigenvalues:
            for s in range(1, _SMALL_TERMS + 1):
                h[s] += h[s - 1] / lam
        self._h = h
        self._n = n

    def _small_series(self, t, shift):
        # sum_k A_k e^{-t/lam_k} has its first n Taylor terms cancelled by the
        # partial-fraction moment identities; what is left is
        # t^(n-shift)/det * sum_s (-t)^s h_s / (n - shift + s)!
        base = self._n - shift
        total = 0.0
        term = t**base / math.factorial(base)
        for s in range(_SMALL_TERMS + 1):
            contrib = term * self._h[s]
            total += contrib
            if abs(contrib) < 1e-17 * abs(total):
                break
            term *= -t / (base + s + 1)
        return total / self._det

    def pdf(self, t):
        if t < 0:
            return 0.0
        if t < self._small:
            return self._small_series(t, 1)
        return math.fsum(a / lam * math.exp(-t / lam) for a, lam in self._terms)

    def cdf(self, t):
        if t <= 0:
            return 0.0
        if t < self._small:
            return self._small_series(t, 0)
        return min(1.0, max(0.0, -math.fsum(a * math.expm1(-t / lam) for a, lam in self._terms)))

    def scale(self):
        return self.eigenvalues[0] * (1.0 + len(self.eigenvalues))


class GammaGain(GainDistribution):
    """Gamma(shape, scale): i.i.d. Rayleigh (shape k) and Nakagami sums."""

    def __init__(self, shape: float, scale: float = 1.0):
        self.shape = float(shape)
        self.scale_ = float(scale)
        self.diversity = self.shape
        self._log_norm = -math.lgamma(self.shape) - self.shape * math.log(self.scale_)

    def pdf(self, t):
        if t <= 0:
            if t == 0 and self.shape == 1.0:
                return 1.0 / self.scale_
            return 0.0
        return math.exp(self._log_norm + (self.shape - 1.0) * math.log(t) - t / self.scale_)

    def cdf(self, t):
        if t <= 0:
            return 0.0
        return float(special.gammainc(self.shape, t / self.scale_))

    def scale(self):
        return self.scale_ * (self.shape + 1.0)


class RicianGain(GainDistribution):
    """Sum of k i.i.d. unit-power Rician |h|^2: scaled noncentral chi-square."""

    def __init__(self, k_factor: float, k: int):
        self.k_factor = float(k_factor)
        self.k = int(k)
        self.diversity = float(k)
        # 2(K+1) g ~ ncx2(df=2k, nc=2kK)
        self._c = 2.0 * (self.k_factor + 1.0)
        self._dist = stats.ncx2(2 * self.k, 2 * self.k * self.k_factor)

    def pdf(self, t):
        if t <= 0:
            if t == 0 and self.k == 1:
                return (self.k_factor + 1.0) * math.exp(-self.k_factor)
            return 0.0
        return float(self._c * self._dist.pdf(self._c * t))

    def cdf(self, t):
        if t <= 0:
            return 0.0
        return float(self._dist.cdf(self._c * t))

    def scale(self):
        return float(self.k) * 2.0 + 2.0


class WeibullGain(GainDistribution):
    """|h|^2 of one antenna with Weibull amplitude (shape kappa, E|h|^2 = 1)."""

    def __init__(self, kappa: float):
        self.kappa = float(kappa)
        self.diversity = self.kappa / 2.0
        # |h|^2 is Weibull with shape kappa/2 and scale 1/Gamma(1 + 2/kappa)
        self._dist = stats.weibull_min(self.kappa / 2.0, scale=1.0 / math.gamma(1.0 + 2.0 / self.kappa))

    def pdf(self, t):
        if t <= 0:
            return 0.0
        return float(self._dist.pdf(t))

    def cdf(self, t):
        if t <= 0:
            return 0.0
        return float(self._dist.cdf(t))

    def scale(self):
        return 4.0


def _gen_chi2_dist(eigs):
    if not isinstance(eigs, Eigenspectrum):
        eigs = Eigenspectrum.from_values(eigs)
    if len(eigs) == 1 or eigs.all_equal():
        return GammaGain(len(eigs), eigs.values[0])
    if not eigs.distinct:
        raise DegeneracyError(f"partially repeated eigenvalues: {eigs.values}")
    return ExponentialMixture(eigs)


def gen_chi2_pdf(x: float, eigs) -> float:
    """Density of |h|^2 for a correlated Rayleigh vector with spectrum ``eigs``."""
    return _gen_chi2_dist(eigs).pdf(x)


def gen_chi2_cdf(x: float, eigs) -> float:
    return _gen_chi2_dist(eigs).cdf(x)


# ---------------------------------------------------------------------------
# fading catalogue and scenario configuration
# ---------------------------------------------------------------------------

FAMILIES = ("rayleigh", "rician", "nakagami", "weibull")


@dataclass(frozen=True)
class FadingModel:
    """Fading family with unit mean power per antenna.

    ``param`` is the Rician K-factor, the Nakagami shape m_f, or the Weibull
    amplitude shape kappa; it is ignored for Rayleigh.
    """

    family: str = "rayleigh"
    param: float = 0.0

    def __post_init__(self):
        fam = self.family.lower()
        object.__setattr__(self, "family", fam)
        if fam not in FAMILIES:
            raise ValidationError(f"unknown fading family {self.family!r}")
        p = float(self.param)
        if fam == "rician" and not p >= 0:
            raise ValidationError("Rician K-factor must be >= 0")
        if fam == "nakagami" and not p >= 0.5:
            raise ValidationError("Nakagami shape must be >= 0.5")
        if fam == "weibull" and not p > 0:
            raise ValidationError("Weibull shape must be > 0")
        if fam == "rayleigh":
            p = 0.0
        object.__setattr__(self, "param", p)

    @classmethod
    def parse(cls, text: str) -> "FadingModel":
        """Parse ``rayleigh``, ``rician:5``, ``nakagami:2`` or ``weibull:1.5``."""
        name, _, arg = text.strip().partition(":")
        name = name.lower()
        if name == "rayleigh":
            if arg:
                raise ValidationError("rayleigh takes no parameter")
            return cls("rayleigh")
        if not arg:
            raise ValidationError(f"fading family {name!r} needs a parameter, e.g. {name}:2")
        try:
            value = float(arg)
        except ValueError:
            raise ValidationError(f"bad fading parameter {arg!r}") from None
        return cls(name, value)

    def __str__(self):
        if self.family == "rayleigh":
            return "rayleigh"
        return f"{self.family}:{self.param:g}"

    def gain_distribution(self, k: int) -> GainDistribution:
        """Distribution of |h|^2 for ``k`` i.i.d. antennas of this family."""
        if self.family == "rayleigh":
            return GammaGain(k, 1.0)
        if self.family == "nakagami":
            return GammaGain(k * self.param, 1.0 / self.param)
        if self.family == "rician":
            if self.param == 0:
                return GammaGain(k, 1.0)
            return RicianGain(self.param, k)
        if k != 1:
            raise NotImplementedError("Weibull link gains have a closed form for one antenna only")
        return WeibullGain(self.param)


def near_zero_exponent(model: FadingModel, k: int) -> float:
    """Exponent d with pdf(|h|^2) ~ t^(d-1) near zero for k i.i.d. antennas."""
    if k < 1:
        raise ValidationError("antenna count must be >= 1")
    if model.family in ("rayleigh", "rician"):
        return float(k)
    if model.family == "nakagami":
        return k * model.param
    return k * model.param / 2.0


@dataclass(frozen=True)
class ChannelConfig:
    """Single-relay scenario; correlation matrices default to identity."""

    m: int = 1
    n: int = 1
    alpha: float = 0.0
    corr_sr: Optional[CorrelationMatrix] = None
    corr_rd: Optional[CorrelationMatrix] = None
    fading_sr: FadingModel = FadingModel()
    fading_rd: FadingModel = FadingModel()
    csi_at_source: bool = True

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1 or int(self.n) != self.n or self.n < 1:
            raise ValidationError(f"antenna counts must be positive integers, got m={self.m}, n={self.n}")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "n", int(self.n))
        if not (math.isfinite(self.alpha) and self.alpha >= 0):
            raise ValidationError(f"alpha must be finite and >= 0, got {self.alpha}")
        for name, dim, fading in (
            ("corr_sr", self.m, self.fading_sr),
            ("corr_rd", self.n, self.fading_rd),
        ):
            corr = getattr(self, name)
            if corr is None:
                continue
            if not isinstance(corr, CorrelationMatrix):
                corr = CorrelationMatrix(corr)
                object.__setattr__(self, name, corr)
            if corr.dim != dim:
                raise ValidationError(f"{name} has dimension {corr.dim}, expected {dim}")
            if fading.family != "rayleigh" and not corr.is_identity():
                raise ValidationError("spatial correlation is supported for Rayleigh links only")

    @property
    def is_rayleigh(self) -> bool:
        return self.fading_sr.family == "rayleigh" and self.fading_rd.family == "rayleigh"

    @property
    def is_iid_rayleigh(self) -> bool:
        return self.is_rayleigh and self.spectrum_sr().all_equal(1.0) and self.spectrum_rd().all_equal(1.0)

    def spectrum_sr(self) -> Eigenspectrum:
        if self.corr_sr is None:
            return Eigenspectrum.from_values([1.0] * self.m)
        return eigenvalues(self.corr_sr)

    def spectrum_rd(self) -> Eigenspectrum:
        if self.corr_rd is None:
            return Eigenspectrum.from_values([1.0] * self.n)
        return eigenvalues(self.corr_rd)

    def gain_sr(self) -> GainDistribution:
        return self._gain(self.fading_sr, self.m, self.spectrum_sr)

    def gain_rd(self) -> GainDistribution:
        return self._gain(self.fading_rd, self.n, self.spectrum_rd)

    @staticmethod
    def _gain(fading, k, spectrum):
        if fading.family == "rayleigh":
            return _gen_chi2_dist(spectrum())
        return fading.gain_distribution(k)

    def diversity_orders(self) -> tuple:
        # full-rank correlation keeps the exponent; pruned zeros reduce the rank
        d_s = near_zero_exponent(self.fading_sr, len(self.spectrum_sr()))
        d_d = near_zero_exponent(self.fading_rd, len(self.spectrum_rd()))
        return d_s, d_d


def link_budget(K_r_db, G_rd_db, G_sr_db, sigma_r2, sigma_0_2, sigma_x2):
    """Relay-noise ratio alpha and average SNR gamma from physical parameters."""
    if not sigma_0_2 > 0 or not sigma_x2 > 0 or not sigma_r2 >= 0:
        raise ValidationError("noise and signal powers must be positive (relay noise may be 0)")
    k_r = 10.0 ** (K_r_db / 10.0)
    g_rd = 10.0 ** (G_rd_db / 10.0)
    g_sr = 10.0 ** (G_sr_db / 10.0)
    alpha = k_r * g_rd * sigma_r2 / sigma_0_2
    gamma = k_r * g_rd * g_sr * sigma_x2 / sigma_0_2
    return alpha, gamma
