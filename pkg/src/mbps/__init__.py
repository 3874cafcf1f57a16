"""Market-based (volume-weighted) moments of securities and portfolios.

Computes VWAP-style means and variances of prices and returns from trade
series, aggregates a portfolio into one synthetic trade series, and
decomposes the portfolio variance into a quartic polynomial in portfolio
weights alongside the classical quadratic form.
"""

from .decomposition import (
    PortfolioStats,
    VarianceDecomposition,
    markowitz_variance,
    mean_price_decomposition,
    per_trade_portfolio_return,
    portfolio_mean_price,
    portfolio_mean_return,
    portfolio_price_variance,
    portfolio_return_variance,
    price_variance_decomposition,
    return_variance_decomposition,
)
from .pairs import (
    PairStats,
    coefficient_matrices,
    normalized_coefficients,
    price_covariance,
    price_covariance_normalized_form,
    return_covariance,
)
from .portfolio import Portfolio, PortfolioSeries, aggregate, compose_portfolio, normalize_to_holdings
from .security import (
    ReturnStats,
    SecurityStats,
    mean_return,
    price_variance,
    return_variance,
    vwap,
)
from .trades import (
    AveragingWindow,
    ConsistencyError,
    MBPSError,
    TradeSeries,
    TradeTick,
    covariance,
    raw_moment,
    rescale,
    total,
)

__version__ = "0.1.0"
