"""Independent high-precision references built on mpmath only."""

import mpmath as mp

mp.mp.dps = 40


def bessel_k(order, x):
    return float(mp.besselk(order, x))


def k_series_direct(order, x, terms):
    # ascending series summed in mpmath, independent of the library's loop
    x = mp.mpf(x)
    h = x / 2
    fin = mp.mpf(0)
    for k in range(order):
        fin += (-1) ** k * mp.factorial(order - k - 1) / mp.factorial(k) * h ** (2 * k - order)
    fin /= 2
    s = mp.mpf(0)
    for k in range(terms):
        s += h ** (order + 2 * k) / (mp.factorial(k) * mp.factorial(order + k)) * (
            mp.log(h) - (mp.digamma(k + 1) + mp.digamma(order + k + 1)) / 2
        )
    return float(fin + (-1) ** (order + 1) * s)


def gain_cdf_iid(t, k):
    # sum of k unit exponentials
    return mp.gammainc(k, 0, t, regularized=True)


def gain_pdf_iid(t, k):
    return t ** (k - 1) * mp.exp(-t) / mp.factorial(k - 1)


def af_outage_iid(x, alpha, m, n):
    """P{g_s g_d/(1 + alpha g_d) < x} for Gamma(m), Gamma(n) gains by mpmath quadrature."""
    x = mp.mpf(x)
    f = lambda t: gain_pdf_iid(t, n) * gain_cdf_iid(x * (1 + alpha * t) / t, m)  # noqa: E731
    return float(mp.quad(f, [0, x / 10, x, 10 * x, 1, 10, mp.inf]))


def mixture_coeffs(eigs):
    eigs = [mp.mpf(v) for v in eigs]
    out = []
    for k, lk in enumerate(eigs):
        c = mp.mpf(1)
        for i, li in enumerate(eigs):
            if i != k:
                c *= lk / (lk - li)
        out.append(c)
    return eigs, out


def mixture_cdf(t, eigs):
    lam, a = mixture_coeffs(eigs)
    return 1 - mp.fsum(ak * mp.exp(-mp.mpf(t) / lk) for ak, lk in zip(a, lam))


def af_outage_correlated(x, alpha, eigs_sr, eigs_rd):
    """Defining integral with mixture densities, evaluated in mpmath."""
    lam_d, b = mixture_coeffs(eigs_rd)
    x = mp.mpf(x)

    def pdf_d(t):
        return mp.fsum(bj / lj * mp.exp(-t / lj) for bj, lj in zip(b, lam_d))

    f = lambda t: pdf_d(t) * mixture_cdf(x * (1 + alpha * t) / t, eigs_sr)  # noqa: E731
    return float(mp.quad(f, [0, x / 10, x, 10 * x, 1, 10, mp.inf]))
