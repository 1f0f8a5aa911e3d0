"""Small-x power/log series of the i.i.d. AF outage probability.

P = sum_l (f_l + g_l ln x) x^(l + min(m, n)).

Two routes produce the coefficients.  :func:`tabulated_coefficients`
evaluates the closed-form coefficient tables (including the alpha = 0
mu/beta/c form); :func:`expanded_coefficients` multiplies out the ascending
K_N series term by term inside the finite double sum.  Each is used to
check the other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .errors import DomainError, SeriesRangeError
from .specfun import digamma_int

SERIES_MAX_X = 0.5
SERIES_RTOL = 1e-12
DEFAULT_L_MAX = 60


@dataclass(frozen=True)
class SeriesTable:
    """Coefficients f_l, g_l for l = 0..L (``poly`` and ``log``).

    For m > n the tabulated route also keeps the split parts
    (f', f'', c', c'', g', g'') in ``parts``.
    """

    m: int
    n: int
    alpha: float
    poly: tuple
    log: tuple
    parts: dict = None

    @property
    def order(self) -> int:
        return len(self.poly) - 1

    @property
    def base_power(self) -> int:
        return min(self.m, self.n)

    def terms(self, x: float):
        lx = math.log(x)
        p0 = self.base_power
        for l, (f, g) in enumerate(zip(self.poly, self.log)):
            yield (f + g * lx) * x ** (l + p0)

    def evaluate(self, x: float) -> float:
        if x == 0:
            return 0.0
        return math.fsum(self.terms(x))


def _fact(k):
    return math.factorial(k)


@lru_cache(maxsize=None)
def _psi(k):
    return digamma_int(k)


# ---------------------------------------------------------------------------
# coefficient tables
# ---------------------------------------------------------------------------


def _omega(i, j, alpha, m, n):
    return alpha ** (i + j) * m / (_fact(i) * _fact(j) * _fact(n - 1) * _fact(m - i))


def _table_m_le_n(alpha, m, n, L):
    p = lambda i: abs(m - n - i)  # noqa: E731
    p0 = p(0)
    poly, log = [], []
    for l in range(L + 1):
        denom = l + m
        g = 0.0
        c = 0.0
        if l >= p0:
            for i in range(0, min(l - p0, m) + 1):
                for j in range(0, l - p0 - i + 1):
                    q = l - i - j
                    w = _omega(i, j, alpha, m, n) * (-1) ** (p(i) + j + 1) / (
                        _fact(q - p0) * _fact(l - j) * denom
                    )
                    g += w
                    c += w * (_psi(q - p0 + 1) + _psi(l - j + 1) + 1.0 / denom)
        f = 0.0
        i_start = 0 if m < n else 1
        for i in range(i_start, m + 1):
            for j in range(max(l + 1 - p(i), 0), l + 1):
                q = l - i - j
                f += _omega(i, j, alpha, m, n) * (-1) ** l * _fact(p0 - q - 1) / (_fact(l - j) * denom)
        poly.append(f - c)
        log.append(g)
    return poly, log, None


def _table_m_gt_n(alpha, m, n, L):
    p = lambda i: abs(m - n - i)  # noqa: E731
    p0 = p(0)
    names = ("f1", "f2", "c1", "c2", "g1", "g2")
    parts = {k: [] for k in names}
    poly, log = [], []
    for l in range(L + 1):
        denom = l + n

        def theta(i, j):
            return (-1) ** (p(i) + j + 1) / (_fact(l - i - j) * _fact(l - j - p0) * denom)

        def upsilon(i, j):
            return (_psi(l - i - j + 1) + _psi(l - j - p0 + 1) + 1.0 / denom) * theta(i, j)

        f1 = 0.0
        for i in range(0, min(l, p0 - 1) + 1):
            for j in range(max(l + 1 - p0, 0), l - i + 1):
                f1 += (
                    _omega(i, j, alpha, m, n)
                    * (-1) ** (l - i)
                    * _fact(p0 - (l - j) - 1)
                    / (_fact(l - i - j) * denom)
                )
        f2 = c2 = g2 = 0.0
        if l >= p0:
            for i in range(p0 + 1, m + 1):
                for j in range(max(l + 1 - i, 0), l - p0 + 1):
                    f2 += (
                        _omega(i, j, alpha, m, n)
                        * (-1) ** (l - p0)
                        * _fact(-(l - i - j) - 1)
                        / (_fact(l - j - p0) * denom)
                    )
            for i in range(0, p0 + 1):
                for j in range(0, l - p0 + 1):
                    c2 += upsilon(i, j) * _omega(i, j, alpha, m, n)
                    g2 += theta(i, j) * _omega(i, j, alpha, m, n)
        c1 = g1 = 0.0
        if l >= p0 + 1:
            for i in range(p0 + 1, min(l, m) + 1):
                for j in range(0, l - i + 1):
                    c1 += upsilon(i, j) * _omega(i, j, alpha, m, n)
                    g1 += theta(i, j) * _omega(i, j, alpha, m, n)
        for k, v in zip(names, (f1, f2, c1, c2, g1, g2)):
            parts[k].append(v)
        poly.append(f1 + f2 - c1 - c2)
        log.append(g1 + g2)
    return poly, log, {k: tuple(v) for k, v in parts.items()}


def _table_alpha_zero(m, n, L):
    # mu_i x^(i + min) for i < |n - m|, then beta_i x^(i + max) (ln x - c_i)
    lo, hi, d = min(m, n), max(m, n), abs(n - m)
    scale = _fact(n - 1) * _fact(m - 1)
    poly = [0.0] * (L + 1)
    log = [0.0] * (L + 1)
    for i in range(min(d, L + 1)):
        poly[i] += (-1) ** i * _fact(d - i - 1) / (_fact(i) * (lo + i) * scale)
    for i in range(0, L + 1 - d):
        beta = (-1) ** (d + 1) / (_fact(i) * (hi + i) * _fact(d + i) * scale)
        c = 1.0 / (hi + i) + _psi(i + 1) + _psi(d + i + 1)
        log[i + d] += beta
        poly[i + d] -= beta * c
    return poly, log, None


@lru_cache(maxsize=256)
def tabulated_coefficients(alpha: float, m: int, n: int, L: int) -> SeriesTable:
    """f_l, g_l from the closed-form coefficient tables, l = 0..L."""
    _check(alpha, m, n, L)
    if alpha == 0:
        poly, log, parts = _table_alpha_zero(m, n, L)
    elif m <= n:
        poly, log, parts = _table_m_le_n(alpha, m, n, L)
    else:
        poly, log, parts = _table_m_gt_n(alpha, m, n, L)
    return SeriesTable(m, n, alpha, tuple(poly), tuple(log), parts)


# ---------------------------------------------------------------------------
# direct expansion of the finite Bessel sum
# ---------------------------------------------------------------------------


def expanded_coefficients(alpha: float, m: int, n: int, L: int) -> SeriesTable:
    """f_l, g_l by expanding every K_N(2 sqrt(x)) term and e^(-alpha x) as series."""
    _check(alpha, m, n, L)
    base = min(m, n)
    top = base + L
    poly = [0.0] * (top + 1)
    log = [0.0] * (top + 1)
    exp_series = [(-alpha) ** r / _fact(r) for r in range(top + 1)]

    def add(power, cp, cl):
        # multiply by e^(-alpha x) while accumulating
        for r in range(0, top - power + 1):
            poly[power + r] += cp * exp_series[r]
            log[power + r] += cl * exp_series[r]

    for k in range(m):
        for i in range(k + 1):
            coef = 2.0 / _fact(n - 1) * alpha**i / (_fact(i) * _fact(k - i))
            nu = abs(n + i - k)
            twice_h = k + i + n
            low = (twice_h - nu) // 2
            high = (twice_h + nu) // 2
            for s in range(nu):
                if low + s <= top:
                    add(low + s, coef * 0.5 * (-1) ** s * _fact(nu - s - 1) / _fact(s), 0.0)
            sign = -1.0 if nu % 2 == 0 else 1.0
            for s in range(0, top - high + 1):
                w = coef * sign / (_fact(s) * _fact(nu + s))
                add(high + s, -0.5 * w * (_psi(s + 1) + _psi(nu + s + 1)), 0.5 * w)

    # P = 1 - (expansion); the constant and sub-leading powers cancel exactly
    out_poly = [-poly[base + l] for l in range(L + 1)]
    out_log = [-log[base + l] for l in range(L + 1)]
    return SeriesTable(m, n, alpha, tuple(out_poly), tuple(out_log), None)


def _check(alpha, m, n, L):
    if m < 1 or n < 1:
        raise DomainError(f"antenna counts must be >= 1, got m={m}, n={n}")
    if not alpha >= 0 or math.isinf(alpha):
        raise DomainError(f"alpha must be finite and >= 0, got {alpha}")
    if L < 0:
        raise DomainError(f"truncation order must be >= 0, got {L}")


def outage_series_iid(x: float, alpha: float, m: int, n: int, L_max: int = DEFAULT_L_MAX):
    """Truncated series value of the i.i.d. AF outage and the table used.

    Summation stops once two consecutive terms fall below ``SERIES_RTOL`` of
    the running total, or at ``L_max``.
    """
    if not 0 <= x <= SERIES_MAX_X:
        raise SeriesRangeError(f"series window is 0 <= x <= {SERIES_MAX_X}, got {x}")
    _check(alpha, m, n, L_max)
    alpha = float(alpha)
    L = min(16, L_max)
    while True:
        table = tabulated_coefficients(alpha, m, n, L)
        if x == 0:
            return 0.0, _truncate(table, 0)
        total = 0.0
        small = 0
        used = None
        for l, term in enumerate(table.terms(x)):
            total += term
            small = small + 1 if abs(term) < SERIES_RTOL * abs(total) else 0
            if small == 2:
                used = l
                break
        if used is not None or L == L_max:
            used = L if used is None else used
            trimmed = _truncate(table, used)
            return trimmed.evaluate(x), trimmed
        L = L_max


def _truncate(table, L):
    parts = None
    if table.parts is not None:
        parts = {k: v[: L + 1] for k, v in table.parts.items()}
    return SeriesTable(table.m, table.n, table.alpha, table.poly[: L + 1], table.log[: L + 1], parts)
