"""Outage probability, outage capacity and diversity of MIMO relay channels."""

from .capacity import (
    DmtPoint,
    OutageCapacity,
    asymptotic_dmt,
    capacity_loss,
    finite_snr_dmt,
    invert_outage,
    outage_capacity,
    snr_loss_approx,
)
from .channel import (
    ChannelConfig,
    CorrelationMatrix,
    Eigenspectrum,
    FadingModel,
    PartialFraction,
    eigenvalues,
    exponential_corr,
    gen_chi2_cdf,
    gen_chi2_pdf,
    link_budget,
    near_zero_exponent,
    partial_fraction_coeffs,
    sampling_factor,
    two_antenna_corr,
)
from .errors import (
    DegeneracyError,
    DomainError,
    InsufficientDataError,
    NumericalError,
    OutOfRangeError,
    RelayError,
    SeriesRangeError,
    UnsupportedOrderError,
    ValidationError,
)
from .mcsim import McEstimate, diversity_slope, draw_channel, estimate_outage, snr_af
from .multirelay import RelaySet, selection_lowout, selection_outage
from .analytic import (
    LowOutageExpansion,
    OutageQuery,
    lowout,
    lowout_correlated,
    lowout_iid,
    outage,
    outage_af,
    outage_af_correlated,
    outage_af_iid,
    outage_af_quadrature,
    outage_df,
)
from .series import SeriesTable, outage_series_iid, tabulated_coefficients
from .specfun import bessel_k, bessel_k_series, digamma_int, psi_pair

__version__ = "0.1.0"
