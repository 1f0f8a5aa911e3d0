"""Scalar special functions: integer-order K_N(x), digamma at integers.

Small arguments use the ascending series of K_N (finite part plus the
logarithmic series).  Above ``SERIES_SWITCH`` K_0 and K_1 come from Steed's
continued fraction (Temme's CF2 variant) and higher orders follow by upward
recurrence, which is stable for K.
"""

import math

from .errors import DomainError, SeriesRangeError, UnsupportedOrderError

EULER_GAMMA = 0.57721566490153286061

MAX_ORDER = 64
SERIES_SWITCH = 2.0
SERIES_MAX_X = 4.0
SERIES_MAX_TERMS = 200
SERIES_RTOL = 1e-16

_CF_MAXIT = 10000
_CF_EPS = 1e-17


def digamma_int(k):
    """psi(k) for a positive integer k."""
    if int(k) != k or k < 1:
        raise DomainError(f"digamma_int needs a positive integer, got {k!r}")
    k = int(k)
    return math.fsum([-EULER_GAMMA] + [1.0 / i for i in range(1, k)])


def psi_pair(k):
    """psi(k) + psi(k + 1)."""
    if int(k) != k or k < 1:
        raise DomainError(f"psi_pair needs a positive integer, got {k!r}")
    k = int(k)
    return 2.0 * digamma_int(k) + 1.0 / k


def _check_args(order, x):
    if isinstance(order, bool) or int(order) != order or order < 0:
        raise DomainError(f"order must be a nonnegative integer, got {order!r}")
    if order > MAX_ORDER:
        raise UnsupportedOrderError(f"order {order} exceeds the cap {MAX_ORDER}")
    if not x > 0 or math.isinf(x):
        raise DomainError(f"x must be positive and finite, got {x!r}")
    return int(order), float(x)


def bessel_k_series(order, x, k_max=None):
    """Ascending series of K_order(x).

    ``k_max`` is the number of terms kept from the infinite logarithmic sum
    (0 keeps only the finite part).  With ``k_max=None`` the sum stops once a
    term drops below ``SERIES_RTOL`` of the running total, or after
    ``SERIES_MAX_TERMS`` terms.
    """
    order, x = _check_args(order, x)
    if x > SERIES_MAX_X:
        raise SeriesRangeError(f"series regime is x <= {SERIES_MAX_X}, got {x}")
    if k_max is not None and (int(k_max) != k_max or k_max < 0):
        raise DomainError(f"k_max must be a nonnegative integer, got {k_max!r}")

    half = 0.5 * x
    finite = 0.0
    for k in range(order):
        finite += (
            (-1) ** k
            * math.factorial(order - k - 1)
            / math.factorial(k)
            * half ** (2 * k - order)
        )
    finite *= 0.5

    sign = -1.0 if order % 2 == 0 else 1.0
    log_half = math.log(half)
    # term_k = (x/2)^(N+2k) / (k! (N+k)!) built multiplicatively
    power = half**order / math.factorial(order)
    psi_a = -EULER_GAMMA
    psi_b = digamma_int(order + 1)
    total = finite
    n_terms = SERIES_MAX_TERMS if k_max is None else int(k_max)
    for k in range(n_terms):
        if k > 0:
            power *= half * half / (k * (order + k))
            psi_a += 1.0 / k
            psi_b += 1.0 / (order + k)
        term = sign * power * (log_half - 0.5 * psi_a - 0.5 * psi_b)
        total += term
        if k_max is None and abs(term) < SERIES_RTOL * abs(total):
            break
    return total


def _k0_k1_continued_fraction(x):
    # Steed's algorithm for the CF2 of Temme, order mu = 0.
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = delh = d
    q1, q2 = 0.0, 1.0
    a1 = 0.25
    q = c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(1, _CF_MAXIT):
        a -= 2 * i
        c = -a * c / (i + 1.0)
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < _CF_EPS:
            break
    h *= a1
    k0 = math.sqrt(math.pi / (2.0 * x)) * math.exp(-x) / s
    k1 = k0 * (x + 0.5 - h) / x
    return k0, k1


def bessel_k(order, x):
    """Modified Bessel function of the second kind K_order(x), integer order."""
    order, x = _check_args(order, x)
    if x <= SERIES_SWITCH:
        k0 = bessel_k_series(0, x)
        k1 = bessel_k_series(1, x)
    else:
        k0, k1 = _k0_k1_continued_fraction(x)
    if order == 0:
        return k0
    prev, cur = k0, k1
    for nu in range(1, order):
        prev, cur = cur, prev + (2.0 * nu / x) * cur
    return cur
