"""Portfolio composition and its aggregation into one synthetic trade series.

Each security's trades are rescaled so the volume traded over the window
equals the shares held, then values and volumes are summed tick by tick.
The result trades like a single security with price ``Q / W``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .trades import AveragingWindow, MBPSError, TradeSeries, check_aligned, rescale

#: Warn when a security's traded volume is below this multiple of the holding.
DEFAULT_LIQUIDITY_FACTOR = 10.0


class LiquidityWarning(UserWarning):
    """Traded volume over the window is not much larger than the holding."""


@dataclass(frozen=True, eq=False)
class Portfolio:
    security_ids: tuple[str, ...]
    holdings: np.ndarray
    prices: np.ndarray

    def __post_init__(self) -> None:
        ids = tuple(self.security_ids)
        holdings = np.array(self.holdings, dtype=float)
        prices = np.array(self.prices, dtype=float)
        if not ids:
            raise MBPSError("empty security set")
        if len(set(ids)) != len(ids):
            raise MBPSError("duplicate security in portfolio")
        if holdings.shape != (len(ids),) or prices.shape != (len(ids),):
            raise MBPSError("holdings and prices must match the security list")
        for sid, h, p in zip(ids, holdings, prices):
            if not (h > 0 and np.isfinite(h)):
                raise MBPSError(f"{sid}: nonpositive holding {h!r}")
            if not (p > 0 and np.isfinite(p)):
                raise MBPSError(f"{sid}: nonpositive price {p!r}")
        holdings.setflags(write=False)
        prices.setflags(write=False)
        object.__setattr__(self, "security_ids", ids)
        object.__setattr__(self, "holdings", holdings)
        object.__setattr__(self, "prices", prices)

    @property
    def size(self) -> int:
        return len(self.security_ids)

    @property
    def values(self) -> np.ndarray:
        return self.prices * self.holdings

    @property
    def total_value(self) -> float:
        return float(self.values.sum())

    @property
    def total_volume(self) -> float:
        return float(self.holdings.sum())

    @property
    def price(self) -> float:
        """Price per portfolio share, ``s(t0) = Q / W``."""
        return self.total_value / self.total_volume

    @property
    def share_weights(self) -> np.ndarray:
        return self.holdings / self.total_volume

    @property
    def value_weights(self) -> np.ndarray:
        return self.values / self.total_value


def compose_portfolio(
    holdings: Mapping[str, float] | Sequence[float],
    prices_at_t0: Mapping[str, float] | Sequence[float],
    security_ids: Sequence[str] | None = None,
) -> Portfolio:
    """Build a portfolio from holdings and composition prices.

    Mappings are keyed by security id; plain sequences need ``security_ids``
    (or default to ``"0", "1", ...``).
    """
    if isinstance(holdings, Mapping):
        ids = tuple(holdings)
        if not isinstance(prices_at_t0, Mapping) or set(prices_at_t0) != set(ids):
            raise MBPSError("holdings and prices must cover the same securities")
        return Portfolio(ids, [holdings[i] for i in ids], [prices_at_t0[i] for i in ids])
    h = list(holdings)
    ids = tuple(security_ids) if security_ids is not None else tuple(str(i) for i in range(len(h)))
    return Portfolio(ids, h, list(prices_at_t0))


def liquidity_message(series: TradeSeries, holding: float, factor: float) -> str | None:
    traded = float(series.volumes.sum())
    if traded < factor * holding:
        return (
            f"{series.security_id}: traded volume {traded:g} is less than "
            f"{factor:g}x the holding {holding:g}"
        )
    return None


def normalize_to_holdings(
    series: TradeSeries,
    holding: float,
    liquidity_factor: float | None = DEFAULT_LIQUIDITY_FACTOR,
) -> tuple[float, TradeSeries]:
    """Rescale ``series`` so its total volume equals ``holding``.

    Returns ``(scale, normalized_series)``. Emits :class:`LiquidityWarning`
    when the traded volume is below ``liquidity_factor * holding``.
    """
    if not (holding > 0 and np.isfinite(holding)):
        raise MBPSError(f"{series.security_id}: nonpositive holding {holding!r}")
    traded = float(series.volumes.sum())
    if traded <= 0:
        raise MBPSError(f"{series.security_id}: zero total traded volume")
    if liquidity_factor is not None:
        msg = liquidity_message(series, holding, liquidity_factor)
        if msg:
            warnings.warn(msg, LiquidityWarning, stacklevel=2)
    scale = holding / traded
    return scale, rescale(series, scale)


@dataclass(frozen=True, eq=False)
class PortfolioSeries:
    portfolio: Portfolio
    normalized: tuple[TradeSeries, ...]
    scales: np.ndarray
    values: np.ndarray  # Q(t_i)
    volumes: np.ndarray  # W(t_i)
    warnings: tuple[str, ...] = field(default=())

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def prices(self) -> np.ndarray:
        return self.values / self.volumes

    def as_series(self, security_id: str = "portfolio") -> TradeSeries:
        return TradeSeries(security_id, self.values, self.volumes, self.normalized[0].window)


def order_like(portfolio: Portfolio, series: Sequence[TradeSeries]) -> list[TradeSeries]:
    """Reorder ``series`` to the portfolio's security order."""
    by_id = {s.security_id: s for s in series}
    if len(by_id) != len(series):
        raise MBPSError("duplicate security in trade data")
    missing = [sid for sid in portfolio.security_ids if sid not in by_id]
    extra = sorted(set(by_id) - set(portfolio.security_ids))
    if missing or extra:
        raise MBPSError(
            f"security-set mismatch: missing trades for {missing}, no holding for {extra}"
        )
    return [by_id[sid] for sid in portfolio.security_ids]


def aggregate(
    portfolio: Portfolio,
    raw_series: Sequence[TradeSeries],
    liquidity_factor: float | None = DEFAULT_LIQUIDITY_FACTOR,
    window: AveragingWindow | None = None,
) -> PortfolioSeries:
    """Normalize every security to its holding and sum into ``Q(t_i), W(t_i)``.

    Liquidity shortfalls are collected in ``PortfolioSeries.warnings``
    rather than emitted as Python warnings.
    """
    ordered = order_like(portfolio, raw_series)
    n = check_aligned(ordered)
    if window is not None and window.n != n:
        raise MBPSError(f"window mismatch: expected {window.n} ticks, series have {n}")
    notes = []
    scales = []
    normalized = []
    for s, h in zip(ordered, portfolio.holdings):
        if liquidity_factor is not None:
            msg = liquidity_message(s, float(h), liquidity_factor)
            if msg:
                notes.append(msg)
        lam, ns = normalize_to_holdings(s, float(h), liquidity_factor=None)
        scales.append(lam)
        normalized.append(ns)
    # Summation runs in portfolio order so the reduction is reproducible.
    q = np.sum([ns.values for ns in normalized], axis=0)
    w = np.sum([ns.volumes for ns in normalized], axis=0)
    scales_arr = np.array(scales)
    for arr in (q, w, scales_arr):
        arr.setflags(write=False)
    return PortfolioSeries(portfolio, tuple(normalized), scales_arr, q, w, tuple(notes))
