import warnings

import numpy as np
import pytest

from mbps import MBPSError, TradeSeries, aggregate, compose_portfolio, normalize_to_holdings
from mbps.decomposition import (
    portfolio_mean_price,
    portfolio_mean_return,
    portfolio_price_variance,
    portfolio_return_variance,
)
from mbps.portfolio import AveragingWindow, LiquidityWarning, order_like


@pytest.fixture
def hand():
    s1 = TradeSeries("S1", [1.0, 4.0], [1.0, 1.0])
    s2 = TradeSeries("S2", [6.0, 12.0], [2.0, 2.0])
    portfolio = compose_portfolio({"S1": 2.0, "S2": 2.0}, {"S1": 1.0, "S2": 3.0})
    return portfolio, [s1, s2]


def test_compose():
    pf = compose_portfolio([2.0, 2.0], [1.0, 3.0], ["A", "B"])
    assert pf.total_value == 8.0
    assert pf.total_volume == 4.0
    assert pf.price == 2.0
    assert pf.share_weights.tolist() == [0.5, 0.5]
    assert pf.value_weights.tolist() == [0.25, 0.75]


def test_compose_rejects_bad_input():
    with pytest.raises(MBPSError):
        compose_portfolio([0.0, 1.0], [1.0, 1.0])
    with pytest.raises(MBPSError):
        compose_portfolio([1.0], [-1.0])
    with pytest.raises(MBPSError):
        compose_portfolio({"A": 1.0}, {"B": 1.0})
    with pytest.raises(MBPSError, match="duplicate"):
        compose_portfolio([1.0, 1.0], [1.0, 1.0], ["A", "A"])


def test_normalize_to_holding():
    s = TradeSeries("A", [3.0, 8.0, 6.0], [1.0, 2.0, 2.0])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        lam, ns = normalize_to_holdings(s, 10.0, liquidity_factor=0.1)
    assert lam == 2.0
    assert ns.volumes.tolist() == [2.0, 4.0, 4.0]
    assert ns.volumes.sum() == 10.0
    assert ns.prices.tolist() == s.prices.tolist()


def test_liquidity_warning():
    s = TradeSeries("A", [3.0, 8.0], [1.0, 2.0])
    with pytest.warns(LiquidityWarning, match="less than 10x"):
        normalize_to_holdings(s, 1.0)


def test_hand_instance(hand):
    portfolio, raw = hand
    ps = aggregate(portfolio, raw)
    assert ps.scales.tolist() == [1.0, 0.5]
    assert ps.values.tolist() == [4.0, 10.0]
    assert ps.volumes.tolist() == [2.0, 2.0]
    assert ps.prices.tolist() == [2.0, 5.0]
    assert portfolio_mean_price(ps) == 3.5
    phi, _ = portfolio_price_variance(ps)
    assert phi == pytest.approx(2.25, rel=1e-14)
    assert portfolio_return_variance(portfolio, ps) == pytest.approx(0.5625, rel=1e-14)
    direct, decomposed = portfolio_mean_return(portfolio, ps)
    assert direct == 1.75
    assert decomposed == pytest.approx(1.75, rel=1e-14)
    assert len(ps.warnings) == 2


def test_aggregate_reorders_and_checks(hand):
    portfolio, raw = hand
    assert aggregate(portfolio, raw[::-1]).values.tolist() == [4.0, 10.0]
    with pytest.raises(MBPSError, match="security-set mismatch"):
        aggregate(portfolio, raw[:1])
    with pytest.raises(MBPSError, match="window mismatch"):
        aggregate(portfolio, raw, window=AveragingWindow(3))
    extra = TradeSeries("S3", [1.0, 1.0], [1.0, 1.0])
    with pytest.raises(MBPSError, match="security-set mismatch"):
        order_like(portfolio, raw + [extra])


def test_aggregate_conserves_volume(rng):
    j, n = 4, 30
    series = [TradeSeries(str(i), rng.uniform(0.1, 10, n), rng.uniform(0.1, 10, n)) for i in range(j)]
    holdings = rng.uniform(0.5, 5, j)
    pf = compose_portfolio(holdings, rng.uniform(1, 5, j), [s.security_id for s in series])
    ps = aggregate(pf, series, liquidity_factor=None)
    assert ps.volumes.sum() == pytest.approx(holdings.sum(), rel=1e-12)
    for ns, h in zip(ps.normalized, holdings):
        assert ns.volumes.sum() == pytest.approx(h, rel=1e-12)
    assert ps.warnings == ()
    assert np.all(ps.volumes > 0)


def test_as_series(hand):
    portfolio, raw = hand
    s = aggregate(portfolio, raw).as_series()
    assert s.security_id == "portfolio"
    assert s.prices.tolist() == [2.0, 5.0]
