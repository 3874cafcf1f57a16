"""Acceptance criteria, each checked at its stated tolerance.

Every test appends one PASS/FAIL line; the lines are printed in the
terminal summary by ``conftest.py``.
"""

import json
import time

import numpy as np
import pytest

from mbps import aggregate
from mbps import decomposition as dec
from mbps import pairs
from mbps.cli import main
from mbps.io import SyntheticSpec, generate_synthetic, ingest_csv, write_trades_csv
from mbps.report import analyze
from mbps.security import price_variance, vwap
from mbps.trades import rescale
from mbps.verify import (
    oracle_portfolio_variance,
    oracle_weighted_covariance,
    oracle_weighted_mean,
    oracle_weighted_variance,
    random_instance,
)

from conftest import ACCEPTANCE_LINES

SEED = 20240601


def rel(a, b):
    """Pure relative error; exact agreement on zero counts as zero."""
    if a == b:
        return 0.0
    return abs(a - b) / abs(b) if b != 0 else float("inf")


def record(number, title, ok, detail):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} ({detail})")
    assert ok, detail


def make_instances(count, seed, constant, min_j=1, max_j=5, min_n=2, max_n=64):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        j = int(rng.integers(min_j, max_j + 1))
        n = int(rng.integers(min_n, max_n + 1))
        series, pf = random_instance(rng, j, n, 0.1, 10.0, constant_volume=constant)
        out.append((series, pf))
    return out


@pytest.fixture(scope="module")
def random_instances():
    return make_instances(200, SEED, constant=False)


@pytest.fixture(scope="module")
def constant_instances():
    return make_instances(50, SEED + 1, constant=True)


@pytest.fixture(scope="module")
def all_instances(random_instances, constant_instances):
    return random_instances + constant_instances


def test_criterion_1_quartic_identity(random_instances):
    start = time.perf_counter()
    worst_price = worst_return = 0.0
    for series, pf in random_instances:
        ps = aggregate(pf, series, liquidity_factor=None)
        a = dec.analyze_portfolio(ps)
        o_phi, o_theta = oracle_portfolio_variance(ps)
        worst_price = max(worst_price, rel(a.price_decomposition.total, o_phi))
        worst_return = max(worst_return, rel(a.return_decomposition.total, o_theta))
    elapsed = time.perf_counter() - start
    ok = worst_price <= 1e-10 and worst_return <= 1e-10 and elapsed <= 10.0
    record(1, "quartic identity, 200 instances", ok,
           f"price {worst_price:.2e}, return {worst_return:.2e}, {elapsed:.2f}s")


def test_criterion_2_markowitz_limit(constant_instances):
    worst = 0.0
    for series, pf in constant_instances:
        ps = aggregate(pf, series, liquidity_factor=None)
        a = dec.analyze_portfolio(ps)
        theta_f = pairs.frequency_return_covariance_matrix(series_in_order(pf, series), pf.prices)
        mk = dec.markowitz_variance(theta_f, pf.value_weights)
        worst = max(worst, rel(a.return_decomposition.total, mk))
    record(2, "Markowitz limit, 50 constant-volume instances", worst <= 1e-12, f"max rel {worst:.2e}")


def series_in_order(pf, series):
    by_id = {s.security_id: s for s in series}
    return [by_id[sid] for sid in pf.security_ids]


def test_criterion_3_moment_consistency():
    rng = np.random.default_rng(SEED + 2)
    worst_phi = worst_sigma = 0.0
    for _ in range(200):
        n = int(rng.integers(2, 65))
        (s,), _ = random_instance(rng, 1, n)
        prices, vols = s.prices.tolist(), s.volumes.tolist()
        m = oracle_weighted_mean(prices, vols)
        worst_phi = max(worst_phi, rel(price_variance(s), oracle_weighted_variance(prices, vols, m)))
    for series, _ in make_instances(200, SEED + 3, constant=False, min_j=2, max_j=2):
        sj, sk = series
        pj, pk = sj.prices.tolist(), sk.prices.tolist()
        uj, uk = sj.volumes.tolist(), sk.volumes.tolist()
        direct = oracle_weighted_covariance(
            pj, pk, uj, uk, oracle_weighted_mean(pj, uj), oracle_weighted_mean(pk, uk)
        )
        moment = pairs.price_covariance(sj, sk)
        coef = pairs.price_covariance_normalized_form(sj, sk)
        worst_sigma = max(worst_sigma, rel(moment, direct), rel(coef, moment))
    ok = worst_phi <= 1e-12 and worst_sigma <= 1e-12
    record(3, "moment consistency, 200 single + 200 pair instances", ok,
           f"phi {worst_phi:.2e}, sigma {worst_sigma:.2e}")


def test_criterion_4_conservation(all_instances):
    worst = 0.0
    for series, pf in all_instances:
        ps = aggregate(pf, series, liquidity_factor=None)
        for ns, h in zip(ps.normalized, pf.holdings):
            worst = max(worst, abs(float(ns.volumes.sum()) - h) / h)
        worst = max(worst, abs(float(ps.volumes.sum()) - pf.total_volume) / pf.total_volume)
    record(4, "volume conservation", worst <= 1e-12, f"max rel {worst:.2e}")


def test_criterion_5_per_trade_identity(all_instances, constant_instances):
    worst = 0.0
    for series, pf in all_instances:
        ps = aggregate(pf, series, liquidity_factor=None)
        for i in range(ps.n):
            worst = max(worst, rel(dec.per_trade_portfolio_return(pf, ps, i),
                                   dec.per_trade_return_direct(pf, ps, i)))
    worst_corr = 0.0
    for series, pf in constant_instances:
        ps = aggregate(pf, series, liquidity_factor=None)
        for i in range(ps.n):
            for s, h in zip(ps.normalized, pf.holdings):
                c = dec.volume_correction(s, i, float(ps.volumes[i]), pf.total_volume, float(h))
                worst_corr = max(worst_corr, abs(c - 1.0))
    ok = worst <= 1e-12 and worst_corr <= 1e-14
    record(5, "per-trade return identity", ok,
           f"max rel {worst:.2e}, correction deviation {worst_corr:.2e}")


def test_criterion_6_scale_invariance(random_instances):
    worst = 0.0
    for series, _ in random_instances[:100]:
        sj, sk = series[0], series[-1]
        base_sigma = pairs.price_covariance(sj, sk)
        for lam in (1e-3, 1.0, 1e3):
            r = rescale(sj, lam)
            worst = max(worst, rel(vwap(r), vwap(sj)), rel(price_variance(r), price_variance(sj)))
            for a, b in ((r, sk), (sj, rescale(sk, lam)), (r, rescale(sk, lam))):
                worst = max(worst, rel(pairs.price_covariance(a, b), base_sigma))
    record(6, "scale invariance, lambda in {1e-3, 1, 1e3}", worst <= 1e-12, f"max rel {worst:.2e}")


def test_criterion_7_dual_path_means(all_instances):
    worst = 0.0
    for series, pf in all_instances:
        ps = aggregate(pf, series, liquidity_factor=None)
        vwaps = [vwap(s) for s in ps.normalized]
        worst = max(worst, rel(dec.mean_price_decomposition(pf, vwaps), dec.portfolio_mean_price(ps)))
        direct, decomposed = dec.portfolio_mean_return(pf, ps)
        worst = max(worst, rel(decomposed, direct))
    record(7, "dual-path means", worst <= 1e-12, f"max rel {worst:.2e}")


def test_criterion_8_nonzero_discrepancy():
    nonzero = 0
    for seed in range(100):
        series, pf = generate_synthetic(SyntheticSpec(j=3, n=32, seed=seed, volume_mode="random"))
        d = analyze(series, pf).data["markowitz"]["relative_discrepancy"]
        if d is not None and abs(d) > 1e-12:
            nonzero += 1
    record(8, "nonzero Markowitz discrepancy under random volumes", nonzero >= 95,
           f"{nonzero}/100 nonzero")


def test_criterion_9_cli(tmp_path, monkeypatch):
    problems = []
    series, _ = generate_synthetic(SyntheticSpec(j=3, n=16, seed=9))
    trades = tmp_path / "t.csv"
    write_trades_csv(series, trades)
    if ingest_csv(trades) != series:
        problems.append("round-trip changed the series")

    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"J": 3, "N": 16, "seed": 9}))
    reports = []
    for k in range(2):
        t, p, out = tmp_path / f"t{k}.csv", tmp_path / f"p{k}.csv", tmp_path / f"r{k}.json"
        if main(["generate", "--spec", str(spec), "--out", str(t), "--portfolio-out", str(p)]) != 0:
            problems.append("generate failed")
        if main(["analyze", "--trades", str(t), "--portfolio", str(p), "--out", str(out)]) != 0:
            problems.append("analyze failed")
        reports.append(out.read_bytes())
    if reports[0] != reports[1]:
        problems.append("reports differ byte-wise")

    rc_ok = main(["verify", "--instances", "200", "--seed", "0"])
    if rc_ok != 0:
        problems.append(f"verify exit {rc_ok} on shipped build")
    monkeypatch.setattr(dec, "CUBIC_SIGN", 2.0)
    rc_bad = main(["verify", "--instances", "20", "--seed", "0"])
    if rc_bad != 2:
        problems.append(f"verify exit {rc_bad} with sign flip")
    record(9, "CLI round-trip, determinism, verify exit codes", not problems,
           "; ".join(problems) or f"verify exits {rc_ok}/{rc_bad}")
