"""CSV trade/portfolio files and deterministic synthetic trade data.

Trades: ``security_id,tick,value,volume`` with ticks ``1..N`` for every
security. Portfolio: ``security_id,holding,price_at_t0``. Floats are written
with ``repr`` so a write/read round trip is exact.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from .portfolio import Portfolio
from .trades import AveragingWindow, MBPSError, TradeSeries

TRADE_HEADER = ["security_id", "tick", "value", "volume"]
PORTFOLIO_HEADER = ["security_id", "holding", "price_at_t0"]


class InputError(MBPSError):
    """Malformed input file."""


def _positive(text: str, what: str, row: int) -> float:
    try:
        x = float(text)
    except (TypeError, ValueError):
        raise InputError(f"row {row}: {what} {text!r} is not a number") from None
    if not math.isfinite(x) or x <= 0:
        raise InputError(f"row {row}: {what} must be positive, got {text!r}")
    return x


def _reader(path: str | Path, header: list[str]):
    f = open(path, newline="")
    rows = csv.reader(f)
    first = next(rows, None)
    if first is None or [h.strip() for h in first] != header:
        f.close()
        raise InputError(f"{path}: expected header {','.join(header)}")
    return f, rows


def ingest_csv(path: str | Path) -> list[TradeSeries]:
    """Read an aligned trade file; securities keep their first-seen order."""
    f, rows = _reader(path, TRADE_HEADER)
    data: dict[str, dict[int, tuple[float, float]]] = {}
    with f:
        for row_no, row in enumerate(rows, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 4:
                raise InputError(f"row {row_no}: expected 4 fields, got {len(row)}")
            sid = row[0].strip()
            if not sid:
                raise InputError(f"row {row_no}: empty security_id")
            try:
                tick = int(row[1])
            except ValueError:
                raise InputError(f"row {row_no}: tick {row[1]!r} is not an integer") from None
            if tick < 1:
                raise InputError(f"row {row_no}: tick must be >= 1, got {tick}")
            value = _positive(row[2], "value", row_no)
            volume = _positive(row[3], "volume", row_no)
            ticks = data.setdefault(sid, {})
            if tick in ticks:
                raise InputError(f"row {row_no}: duplicate tick {tick} for {sid}")
            ticks[tick] = (value, volume)
    if not data:
        raise InputError(f"{path}: no trades")
    n = max(max(t) for t in data.values())
    gaps = [
        f"{sid}:{i}" for sid, ticks in data.items() for i in range(1, n + 1) if i not in ticks
    ]
    if gaps:
        raise InputError("unaligned grid, missing " + ", ".join(gaps))
    window = AveragingWindow(n)
    out = []
    for sid, ticks in data.items():
        vals = [ticks[i][0] for i in range(1, n + 1)]
        vols = [ticks[i][1] for i in range(1, n + 1)]
        out.append(TradeSeries(sid, vals, vols, window))
    return out


def trades_to_csv(series: Sequence[TradeSeries]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRADE_HEADER)
    for s in series:
        for i, (c, u) in enumerate(zip(s.values, s.volumes), start=1):
            w.writerow([s.security_id, i, repr(float(c)), repr(float(u))])
    return buf.getvalue()


def write_trades_csv(series: Sequence[TradeSeries], path: str | Path) -> None:
    Path(path).write_text(trades_to_csv(series))


def read_portfolio_csv(path: str | Path) -> Portfolio:
    f, rows = _reader(path, PORTFOLIO_HEADER)
    ids, holdings, prices = [], [], []
    with f:
        for row_no, row in enumerate(rows, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise InputError(f"row {row_no}: expected 3 fields, got {len(row)}")
            sid = row[0].strip()
            if sid in ids:
                raise InputError(f"row {row_no}: duplicate security {sid}")
            ids.append(sid)
            holdings.append(_positive(row[1], "holding", row_no))
            prices.append(_positive(row[2], "price_at_t0", row_no))
    if not ids:
        raise InputError(f"{path}: empty portfolio")
    return Portfolio(tuple(ids), holdings, prices)


def portfolio_to_csv(portfolio: Portfolio) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PORTFOLIO_HEADER)
    for sid, h, p in zip(portfolio.security_ids, portfolio.holdings, portfolio.prices):
        w.writerow([sid, repr(float(h)), repr(float(p))])
    return buf.getvalue()


def write_portfolio_csv(portfolio: Portfolio, path: str | Path) -> None:
    Path(path).write_text(portfolio_to_csv(portfolio))


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters for :func:`generate_synthetic`.

    ``holding_fraction`` bounds the holding as a share of each security's
    traded volume; the defaults keep the liquidity condition satisfied.
    """

    j: int = 3
    n: int = 32
    seed: int = 0
    volume_mode: Literal["constant", "random"] = "random"
    value_range: tuple[float, float] = (0.1, 10.0)
    volume_range: tuple[float, float] = (0.1, 10.0)
    holding_fraction: tuple[float, float] = field(default=(0.01, 0.1))

    def __post_init__(self) -> None:
        if int(self.j) != self.j or self.j < 1:
            raise MBPSError(f"J must be a positive integer, got {self.j!r}")
        if int(self.n) != self.n or self.n < 1:
            raise MBPSError(f"N must be a positive integer, got {self.n!r}")
        if self.volume_mode not in ("constant", "random"):
            raise MBPSError(f"volume_mode must be constant or random, got {self.volume_mode!r}")
        for name in ("value_range", "volume_range", "holding_fraction"):
            lo, hi = getattr(self, name)
            if not (0 < lo <= hi and math.isfinite(hi)):
                raise MBPSError(f"invalid {name} [{lo}, {hi}]")
            object.__setattr__(self, name, (float(lo), float(hi)))

    @classmethod
    def from_dict(cls, d: dict) -> "SyntheticSpec":
        keys = {"J": "j", "N": "n", "j": "j", "n": "n"}
        known = {"seed", "volume_mode", "value_range", "volume_range", "holding_fraction"}
        kwargs = {}
        for k, v in d.items():
            if k in keys:
                kwargs[keys[k]] = v
            elif k in known:
                kwargs[k] = tuple(v) if isinstance(v, list) else v
            else:
                raise MBPSError(f"unknown synthetic spec field {k!r}")
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path: str | Path) -> "SyntheticSpec":
        try:
            d = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: {exc}") from None
        if not isinstance(d, dict):
            raise InputError(f"{path}: expected a JSON object")
        return cls.from_dict(d)


def generate_synthetic(spec: SyntheticSpec) -> tuple[list[TradeSeries], Portfolio]:
    """Random trades plus a portfolio composed at the first tick's prices.

    Constant mode fixes each security's volume over the window (levels still
    differ across securities).
    """
    rng = np.random.default_rng(spec.seed)
    window = AveragingWindow(spec.n)
    series = []
    for k in range(spec.j):
        values = rng.uniform(*spec.value_range, spec.n)
        if spec.volume_mode == "constant":
            volumes = np.full(spec.n, rng.uniform(*spec.volume_range))
        else:
            volumes = rng.uniform(*spec.volume_range, spec.n)
        series.append(TradeSeries(f"S{k + 1}", values, volumes, window))
    holdings = [float(s.volumes.sum()) * rng.uniform(*spec.holding_fraction) for s in series]
    prices = [float(s.prices[0]) for s in series]
    return series, Portfolio(tuple(s.security_id for s in series), holdings, prices)
