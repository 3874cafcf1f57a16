"""Trade time series over an averaging window and their raw moments.

A series stores trade values ``C(t_i)`` and volumes ``U(t_i)`` on a uniform
grid of ``N`` ticks. Prices are always derived as ``C / U``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Literal, Sequence

import numpy as np

Field = Literal["value", "volume"]


class MBPSError(ValueError):
    """Base error for invalid inputs."""


class ConsistencyError(ArithmeticError):
    """Two computational paths that must agree did not."""


@dataclass(frozen=True)
class AveragingWindow:
    """``n`` ticks spaced ``spacing`` apart around an opaque ``label``."""

    n: int
    spacing: float = 1.0
    label: str = "t"

    def __post_init__(self) -> None:
        if int(self.n) != self.n or self.n < 1:
            raise MBPSError(f"tick count must be a positive integer, got {self.n!r}")
        if not self.spacing > 0:
            raise MBPSError(f"tick spacing must be positive, got {self.spacing!r}")

    @property
    def length(self) -> float:
        return self.n * self.spacing


@dataclass(frozen=True)
class TradeTick:
    value: float
    volume: float

    @property
    def price(self) -> float:
        return self.value / self.volume


def _readonly(a: Sequence[float] | np.ndarray) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class TradeSeries:
    """Aligned trade values and volumes of one security.

    Volumes must be strictly positive; values must be finite. The window
    defaults to ``AveragingWindow(len(values))``.
    """

    security_id: str
    values: np.ndarray
    volumes: np.ndarray
    window: AveragingWindow = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        values = _readonly(self.values)
        volumes = _readonly(self.volumes)
        if values.ndim != 1 or volumes.ndim != 1:
            raise MBPSError("values and volumes must be one-dimensional")
        if values.size == 0:
            raise MBPSError("empty window")
        if values.shape != volumes.shape:
            raise MBPSError(
                f"{self.security_id}: {values.size} values but {volumes.size} volumes"
            )
        if not np.all(np.isfinite(values)) or not np.all(np.isfinite(volumes)):
            raise MBPSError(f"{self.security_id}: non-finite trade data")
        bad = np.flatnonzero(volumes <= 0)
        if bad.size:
            raise MBPSError(
                f"{self.security_id}: nonpositive volume at tick {int(bad[0]) + 1}"
            )
        window = self.window if self.window is not None else AveragingWindow(values.size)
        if window.n != values.size:
            raise MBPSError(
                f"{self.security_id}: window expects {window.n} ticks, got {values.size}"
            )
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "volumes", volumes)
        object.__setattr__(self, "window", window)

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def prices(self) -> np.ndarray:
        return self.values / self.volumes

    @property
    def ticks(self) -> tuple[TradeTick, ...]:
        return tuple(TradeTick(float(c), float(u)) for c, u in zip(self.values, self.volumes))

    def __iter__(self) -> Iterator[TradeTick]:
        return iter(self.ticks)

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TradeSeries):
            return NotImplemented
        return (
            self.security_id == other.security_id
            and self.window == other.window
            and np.array_equal(self.values, other.values)
            and np.array_equal(self.volumes, other.volumes)
        )

    __hash__ = None  # type: ignore[assignment]

    def column(self, which: Field) -> np.ndarray:
        if which == "value":
            return self.values
        if which == "volume":
            return self.volumes
        raise MBPSError(f"unknown field {which!r}")

    @classmethod
    def from_prices(
        cls,
        security_id: str,
        prices: Sequence[float],
        volumes: Sequence[float],
        window: AveragingWindow | None = None,
    ) -> "TradeSeries":
        p = np.asarray(prices, dtype=float)
        u = np.asarray(volumes, dtype=float)
        return cls(security_id, p * u, u, window)


def raw_moment(series: TradeSeries, which: Field, n: int = 1) -> float:
    """Population moment ``(1/N) sum x_i**n`` of trade values or volumes."""
    if n < 1:
        raise MBPSError(f"moment order must be >= 1, got {n}")
    x = series.column(which)
    if x.size == 0:
        raise MBPSError("empty window")
    return float(np.mean(x**n))


def total(series: TradeSeries, which: Field) -> float:
    return float(np.sum(series.column(which)))


def covariance(a: Sequence[float] | np.ndarray, b: Sequence[float] | np.ndarray) -> float:
    """Population covariance, centred before multiplying."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise MBPSError(f"length mismatch: {a.size} vs {b.size}")
    if a.size == 0:
        raise MBPSError("empty window")
    return float(np.mean((a - a.mean()) * (b - b.mean())))


def variance(a: Sequence[float] | np.ndarray) -> float:
    return covariance(a, a)


def rescale(series: TradeSeries, scale: float) -> TradeSeries:
    """Multiply every value and volume by ``scale``; prices are unchanged."""
    if not (scale > 0 and np.isfinite(scale)):
        raise MBPSError(f"invalid scale {scale!r}")
    return TradeSeries(
        series.security_id, series.values * scale, series.volumes * scale, series.window
    )


def check_aligned(series: Sequence[TradeSeries]) -> int:
    """Return the common tick count or raise if windows differ."""
    if not series:
        raise MBPSError("no securities")
    n = series[0].n
    for s in series[1:]:
        if s.n != n or s.window.spacing != series[0].window.spacing:
            raise MBPSError(
                f"window mismatch: {series[0].security_id} has {n} ticks, "
                f"{s.security_id} has {s.n}"
            )
    return n
