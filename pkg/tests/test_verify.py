import numpy as np
import pytest

from mbps import ConsistencyError, MBPSError, TradeSeries, aggregate
from mbps import decomposition as dec
from mbps import verify


def test_oracle_examples():
    assert verify.oracle_weighted_mean([10.0, 15.0], [1.0, 2.0]) == pytest.approx(40 / 3)
    assert verify.oracle_weighted_variance([10.0, 15.0], [1.0, 2.0], 40 / 3) == pytest.approx(
        40 / 9, rel=1e-14
    )
    assert verify.oracle_weighted_covariance(
        [10.0, 15.0], [4.0, 8.0], [1.0, 2.0], [2.0, 1.0], 40 / 3, 16 / 3
    ) == pytest.approx(40 / 9, rel=1e-14)
    with pytest.raises(MBPSError):
        verify.oracle_weighted_mean([1.0], [1.0, 2.0])


def test_frequency_suite_random_volume(two_tick):
    cmp = verify.frequency_moment_suite(two_tick)
    assert not cmp.constant_volume
    assert cmp.market_mean == pytest.approx(40 / 3)
    assert cmp.frequency_mean == 12.5
    assert cmp.mean_gap == pytest.approx(40 / 3 - 12.5)
    assert cmp.frequency_moments == (12.5, 162.5)
    assert cmp.reconstructed_moments is None


def test_frequency_suite_constant_volume():
    s = TradeSeries.from_prices("A", [3.0, 5.0, 10.0], [4.0, 4.0, 4.0])
    cmp = verify.frequency_moment_suite(s)
    assert cmp.constant_volume
    assert cmp.reconstructed_moments == pytest.approx(cmp.frequency_moments, rel=1e-14)
    assert cmp.variance_gap == pytest.approx(0.0, abs=1e-12)


def test_oracle_portfolio_variance_hand_instance():
    from mbps import compose_portfolio

    s1 = TradeSeries("S1", [1.0, 4.0], [1.0, 1.0])
    s2 = TradeSeries("S2", [6.0, 12.0], [2.0, 2.0])
    pf = compose_portfolio([2.0, 2.0], [1.0, 3.0], ["S1", "S2"])
    phi, theta = verify.oracle_portfolio_variance(aggregate(pf, [s1, s2], liquidity_factor=None))
    assert phi == 2.25
    assert theta == 0.5625


def test_check_tolerance_logic():
    assert verify.Check("a", 1.0, 1.0 + 1e-13, 1e-12).passed
    assert not verify.Check("a", 1.0, 1.1, 1e-12).passed
    assert verify.Check("a", 1e-20, 0.0, 1e-12, atol=1e-15).passed


def test_campaign_passes_and_is_deterministic():
    cfg = verify.CampaignConfig(instances=25, seed=7)
    a = verify.summarize(verify.randomized_identity_campaign(cfg))
    b = verify.summarize(verify.randomized_identity_campaign(cfg))
    assert a == b
    assert a["failed"] == 0
    assert a["instances"] == 25


def test_campaign_seed_changes_instances():
    r1 = verify.randomized_identity_campaign(verify.CampaignConfig(instances=3, seed=1))
    r2 = verify.randomized_identity_campaign(verify.CampaignConfig(instances=3, seed=2))
    assert [r.seed for r in r1] != [r.seed for r in r2]


def test_campaign_config_validation():
    with pytest.raises(MBPSError, match="empty campaign"):
        verify.CampaignConfig(instances=0)
    with pytest.raises(MBPSError):
        verify.CampaignConfig(min_j=3, max_j=2)
    with pytest.raises(MBPSError):
        verify.CampaignConfig(low=5.0, high=1.0)


def test_sign_flip_detected(monkeypatch):
    monkeypatch.setattr(dec, "CUBIC_SIGN", 2.0)
    summary = verify.summarize(
        verify.randomized_identity_campaign(verify.CampaignConfig(instances=10, seed=3, min_j=2))
    )
    assert summary["failed"] > 0


def test_random_instance_shapes():
    rng = np.random.default_rng(0)
    series, pf = verify.random_instance(rng, 3, 7)
    assert len(series) == 3 and pf.size == 3
    assert all(s.n == 7 for s in series)
    assert pf.prices.tolist() == [float(s.prices[0]) for s in series]


def test_constant_volume_violation_raises(monkeypatch):
    s = TradeSeries.from_prices("A", [3.0, 5.0], [2.0, 2.0])
    monkeypatch.setattr(verify.security, "frequency_mean_price", lambda _s: 0.0)
    with pytest.raises(ConsistencyError):
        verify.frequency_moment_suite(s)
