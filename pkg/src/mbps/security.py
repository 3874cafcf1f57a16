"""Market-based (volume-weighted) and frequency-based moments of one security.

The market-based mean price is the VWAP, weighted by ``U / sum U``. The
price variance is centred on the VWAP but weighted by ``U**2 / sum U**2``;
mixing the two weight sequences is deliberate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .trades import ConsistencyError, MBPSError, TradeSeries, covariance, raw_moment, variance

#: Negative variances smaller than this fraction of ``mean**2`` are rounding noise.
NEGATIVE_VARIANCE_RTOL = 1e-12


def clamp_variance(value: float, scale: float) -> float:
    """Clamp tiny negative round-off to zero; raise on genuine negatives."""
    if value >= 0:
        return value
    if -value < NEGATIVE_VARIANCE_RTOL * scale:
        return 0.0
    raise ConsistencyError(f"negative variance {value!r} (scale {scale!r})")


def _check_reference_price(p0: float) -> None:
    if not (p0 > 0 and np.isfinite(p0)):
        raise MBPSError(f"invalid reference price {p0!r}")


@dataclass(frozen=True)
class SecurityStats:
    mean_price: float
    price_variance: float
    value_variance: float
    volume_variance: float
    value_volume_cov: float
    second_volume_moment: float
    weights_1: np.ndarray
    weights_2: np.ndarray


@dataclass(frozen=True)
class ReturnStats:
    reference_price: float
    mean_return: float
    return_variance: float
    past_values: np.ndarray
    past_value_variance: float
    current_past_cov: float
    second_past_moment: float


def volume_weights(series: TradeSeries, order: int = 1) -> np.ndarray:
    """``U**order / sum(U**order)``; order 1 weighs the mean, order 2 the variance."""
    w = series.volumes**order
    return w / w.sum()


def vwap(series: TradeSeries) -> float:
    return float(series.values.sum() / series.volumes.sum())


def price_variance(series: TradeSeries) -> float:
    """Market-based price variance from value/volume moments.

    ``[Psi_C + p**2 Psi_U - 2 p cov(C, U)] / U(t;2)`` with ``p`` the VWAP.
    """
    p = vwap(series)
    psi_c = variance(series.values)
    psi_u = variance(series.volumes)
    cov_cu = covariance(series.values, series.volumes)
    u2 = raw_moment(series, "volume", 2)
    return clamp_variance((psi_c + p * p * psi_u - 2.0 * p * cov_cu) / u2, p * p)


def security_stats(series: TradeSeries) -> SecurityStats:
    return SecurityStats(
        mean_price=vwap(series),
        price_variance=price_variance(series),
        value_variance=variance(series.values),
        volume_variance=variance(series.volumes),
        value_volume_cov=covariance(series.values, series.volumes),
        second_volume_moment=raw_moment(series, "volume", 2),
        weights_1=volume_weights(series, 1),
        weights_2=volume_weights(series, 2),
    )


def frequency_mean_price(series: TradeSeries) -> float:
    return float(np.mean(series.prices))


def frequency_price_variance(series: TradeSeries) -> float:
    return variance(series.prices)


def mean_return(series: TradeSeries, p0: float) -> float:
    """Market-based mean gross return ``VWAP / p0``."""
    _check_reference_price(p0)
    return vwap(series) / p0


def return_stats(series: TradeSeries, p0: float) -> ReturnStats:
    """Mean and variance of gross returns against the past-value series ``p0 * U``.

    The variance is computed from the current and past trade values:
    ``[Psi_C + R**2 Psi_C0 - 2 R cov(C, C0)] / C0(t;2)``.
    """
    _check_reference_price(p0)
    c = series.values
    c0 = p0 * series.volumes
    r = float(c.mean() / c0.mean())
    psi_c = variance(c)
    psi_c0 = variance(c0)
    cov_cc0 = covariance(c, c0)
    c0_2 = float(np.mean(c0 * c0))
    theta = clamp_variance((psi_c + r * r * psi_c0 - 2.0 * r * cov_cc0) / c0_2, r * r)
    c0.setflags(write=False)
    return ReturnStats(
        reference_price=p0,
        mean_return=r,
        return_variance=theta,
        past_values=c0,
        past_value_variance=psi_c0,
        current_past_cov=cov_cc0,
        second_past_moment=c0_2,
    )


def return_variance(series: TradeSeries, p0: float) -> float:
    return return_stats(series, p0).return_variance


def net_return_view(gross: float) -> float:
    return gross - 1.0


def frequency_mean_return(series: TradeSeries, p0: float) -> float:
    _check_reference_price(p0)
    return float(np.mean(series.prices / p0))


def frequency_return_variance(series: TradeSeries, p0: float) -> float:
    _check_reference_price(p0)
    return variance(series.prices / p0)
