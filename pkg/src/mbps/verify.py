"""Brute-force oracles and the randomized identity campaign.

Oracles work on plain Python floats with ``math.fsum`` and import nothing
from the computational modules, so a bug on the main path cannot hide in
shared code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import decomposition as dec
from . import pairs, security
from .portfolio import Portfolio, PortfolioSeries, aggregate
from .trades import MBPSError, TradeSeries


# -- oracles ---------------------------------------------------------------


def _same_length(*seqs: Sequence[float]) -> int:
    n = len(seqs[0])
    if any(len(s) != n for s in seqs):
        raise MBPSError("length mismatch")
    if n == 0:
        raise MBPSError("empty window")
    return n


def oracle_weighted_mean(prices: Sequence[float], volumes: Sequence[float]) -> float:
    _same_length(prices, volumes)
    return math.fsum(p * u for p, u in zip(prices, volumes)) / math.fsum(volumes)


def oracle_weighted_variance(
    prices: Sequence[float], volumes: Sequence[float], mean_price: float
) -> float:
    """``sum (p_i - mean)**2 * U_i**2 / sum U_i**2``."""
    _same_length(prices, volumes)
    u2 = [u * u for u in volumes]
    return math.fsum((p - mean_price) ** 2 * w for p, w in zip(prices, u2)) / math.fsum(u2)


def oracle_weighted_covariance(
    p_j: Sequence[float],
    p_k: Sequence[float],
    u_j: Sequence[float],
    u_k: Sequence[float],
    mean_j: float,
    mean_k: float,
) -> float:
    """``sum (p_j - m_j)(p_k - m_k) U_j U_k / sum U_j U_k``."""
    _same_length(p_j, p_k, u_j, u_k)
    w = [a * b for a, b in zip(u_j, u_k)]
    num = math.fsum((a - mean_j) * (b - mean_k) * c for a, b, c in zip(p_j, p_k, w))
    return num / math.fsum(w)


def oracle_portfolio_variance(ps: PortfolioSeries) -> tuple[float, float]:
    """``(Phi, Theta)`` from the aggregate series alone."""
    q = [float(v) for v in ps.values]
    w = [float(v) for v in ps.volumes]
    s_i = [a / b for a, b in zip(q, w)]
    s = oracle_weighted_mean(s_i, w)
    phi = oracle_weighted_variance(s_i, w, s)
    h = [float(v) for v in ps.portfolio.holdings]
    p0 = [float(v) for v in ps.portfolio.prices]
    s0 = math.fsum(a * b for a, b in zip(h, p0)) / math.fsum(h)
    return phi, phi / (s0 * s0)


# -- frequency vs market comparison ----------------------------------------


@dataclass(frozen=True)
class MomentComparison:
    security_id: str
    constant_volume: bool
    frequency_moments: tuple[float, float]  # pi(t;1), pi(t;2)
    reconstructed_moments: tuple[float, float] | None  # C(t;n) / U**n
    market_mean: float
    frequency_mean: float
    market_variance: float
    frequency_variance: float

    @property
    def mean_gap(self) -> float:
        return self.market_mean - self.frequency_mean

    @property
    def variance_gap(self) -> float:
        return self.market_variance - self.frequency_variance


def frequency_moment_suite(series: TradeSeries, rtol: float = 1e-12) -> MomentComparison:
    """Market-based vs frequency-based price mean and variance.

    Under constant volumes the two must coincide, and ``C(t;n) / U**n``
    reproduces the frequency moments ``pi(t;n)``; a violation raises.
    """
    prices = [float(p) for p in series.prices]
    n = len(prices)
    pi1 = math.fsum(prices) / n
    pi2 = math.fsum(p * p for p in prices) / n
    vols = series.volumes
    constant = bool(np.all(vols == vols[0]))
    recon = None
    m_mean = security.vwap(series)
    m_var = security.price_variance(series)
    f_mean = security.frequency_mean_price(series)
    f_var = security.frequency_price_variance(series)
    if constant:
        u = float(vols[0])
        recon = (
            math.fsum(float(c) for c in series.values) / n / u,
            math.fsum(float(c) ** 2 for c in series.values) / n / (u * u),
        )
        scale = max(pi2, 1e-300)
        checks = [
            (m_mean, f_mean),
            (m_var, f_var),
            (recon[0], pi1),
            (recon[1], pi2),
        ]
        for a, b in checks:
            if abs(a - b) > rtol * scale:
                raise dec.ConsistencyError(
                    f"{series.security_id}: constant-volume moments differ ({a!r} vs {b!r})"
                )
    return MomentComparison(
        security_id=series.security_id,
        constant_volume=constant,
        frequency_moments=(pi1, pi2),
        reconstructed_moments=recon,
        market_mean=m_mean,
        frequency_mean=f_mean,
        market_variance=m_var,
        frequency_variance=f_var,
    )


# -- reports ---------------------------------------------------------------


@dataclass
class Check:
    name: str
    main: float
    oracle: float
    tol: float
    atol: float = 0.0

    @property
    def rel_error(self) -> float:
        return dec.rel_err(self.main, self.oracle)

    @property
    def passed(self) -> bool:
        if not (math.isfinite(self.main) and math.isfinite(self.oracle)):
            return False
        return self.rel_error <= self.tol or abs(self.main - self.oracle) <= self.atol

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "main": self.main,
            "oracle": self.oracle,
            "rel_error": self.rel_error,
            "tol": self.tol,
            "passed": self.passed,
        }


@dataclass
class OracleReport:
    index: int
    j: int
    n: int
    seed: int
    family: str
    checks: list[Check] = field(default_factory=list)
    sigma_psd: bool = True
    error: str | None = None

    @property
    def passed(self) -> bool:
        return self.error is None and all(c.passed for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def add(self, name: str, main: float, oracle: float, tol: float, atol: float = 0.0) -> None:
        self.checks.append(Check(name, float(main), float(oracle), tol, atol))

    def as_dict(self) -> dict:
        return {
            "index": self.index,
            "J": self.j,
            "N": self.n,
            "seed": self.seed,
            "family": self.family,
            "passed": self.passed,
            "sigma_psd": self.sigma_psd,
            "error": self.error,
            "checks": [c.as_dict() for c in self.checks],
        }


# Absolute floors for quantities that may legitimately be ~0 (degenerate
# windows, cross covariances near zero); scaled by the natural magnitude.
_FLOOR = 1e-13


def check_instance(
    series: Sequence[TradeSeries],
    portfolio: Portfolio,
    report: OracleReport,
    constant_volume: bool = False,
) -> OracleReport:
    """Run every dual-path and oracle identity for one portfolio instance."""
    tol, itol = dec.DUAL_PATH_RTOL, dec.IDENTITY_RTOL
    ps = aggregate(portfolio, series, liquidity_factor=None)
    ordered = list(ps.normalized)
    raw = {s.security_id: s for s in series}
    raw_ordered = [raw[sid] for sid in portfolio.security_ids]
    p0 = portfolio.prices

    for s, s_raw, p0_j in zip(ordered, raw_ordered, p0):
        sid = s.security_id
        prices = [float(v) for v in s_raw.prices]
        vols = [float(v) for v in s_raw.volumes]
        m = oracle_weighted_mean(prices, vols)
        mag = m * m
        report.add(f"vwap[{sid}]", security.vwap(s_raw), m, tol)
        o_var = oracle_weighted_variance(prices, vols, m)
        phi = security.price_variance(s_raw)
        report.add(f"price_variance[{sid}]", phi, o_var, tol, _FLOOR * mag)
        theta = security.return_variance(s_raw, float(p0_j))
        report.add(f"return_variance[{sid}]", theta * p0_j**2, o_var, tol, _FLOOR * mag)
        report.add(
            f"mean_return[{sid}]", security.mean_return(s_raw, float(p0_j)), m / p0_j, tol
        )
        report.add(f"vwap_normalized[{sid}]", security.vwap(s), m, tol)
        report.add(
            f"price_variance_normalized[{sid}]", security.price_variance(s), o_var, tol,
            _FLOOR * mag,
        )
        report.add(
            f"holding_conservation[{sid}]",
            float(np.sum(s.volumes)),
            float(portfolio.holdings[portfolio.security_ids.index(sid)]),
            tol,
        )

    sigma = pairs.price_covariance_matrix(raw_ordered)
    theta_m = pairs.return_covariance_matrix(raw_ordered, p0)
    report.sigma_psd = pairs.is_psd(sigma)
    report.add("sigma_symmetry", pairs.symmetry_error(sigma), 0.0, 0.0, 1e-14)
    report.add("theta_symmetry", pairs.symmetry_error(theta_m), 0.0, 0.0, 1e-14)
    for a, sa in enumerate(raw_ordered):
        for b, sb in enumerate(raw_ordered):
            tag = f"[{sa.security_id},{sb.security_id}]"
            pa = [float(v) for v in sa.prices]
            pb = [float(v) for v in sb.prices]
            ua = [float(v) for v in sa.volumes]
            ub = [float(v) for v in sb.volumes]
            ma, mb = oracle_weighted_mean(pa, ua), oracle_weighted_mean(pb, ub)
            o_cov = oracle_weighted_covariance(pa, pb, ua, ub, ma, mb)
            mag = abs(ma * mb)
            report.add(f"sigma{tag}", sigma[a, b], o_cov, tol, _FLOOR * mag)
            report.add(
                f"sigma_normalized_form{tag}",
                pairs.price_covariance_normalized_form(sa, sb),
                sigma[a, b],
                tol,
                _FLOOR * mag,
            )
            th_past, _ = pairs.return_covariance_past_values(sa, sb, p0[a], p0[b])
            report.add(f"theta_past_values{tag}", th_past, theta_m[a, b], tol,
                       _FLOOR * mag / (p0[a] * p0[b]))
            # Normalization must not change the coefficients.
            for name, raw_c, norm_c in zip(
                ("psi", "phi", "chi"),
                pairs.normalized_coefficients(sa, sb),
                pairs.normalized_coefficients(ordered[a], ordered[b]),
            ):
                report.add(f"{name}_scale_invariance{tag}", norm_c, raw_c, tol, 1e-15)

    w_total = portfolio.total_volume
    report.add("volume_conservation", float(np.sum(ps.volumes)), w_total, tol)

    o_phi, o_theta = oracle_portfolio_variance(ps)
    s0 = portfolio.price
    s_mag = (float(np.sum(ps.values)) / w_total) ** 2
    analysis = dec.analyze_portfolio(ps)
    st = analysis.stats
    report.add("portfolio_price_variance", st.price_variance, o_phi, itol, _FLOOR * s_mag)
    report.add(
        "portfolio_return_variance_past_values", st.return_variance, o_theta, itol,
        _FLOOR * s_mag / s0**2,
    )
    report.add(
        "price_decomposition", analysis.price_decomposition.total, o_phi, itol,
        _FLOOR * s_mag,
    )
    report.add(
        "return_decomposition", analysis.return_decomposition.total, o_theta, itol,
        _FLOOR * s_mag / s0**2,
    )
    report.add(
        "return_price_link", st.return_variance * s0 * s0, st.price_variance, tol,
        _FLOOR * s_mag,
    )
    report.add(
        "chi2_components", dec.volume_variation_from_components(ps), dec.volume_variation(ps),
        tol, 1e-15,
    )

    mean_direct = dec.portfolio_mean_price(ps)
    report.add(
        "mean_price_decomposition",
        dec.mean_price_decomposition(portfolio, analysis.vwaps),
        mean_direct,
        tol,
    )
    r_direct, r_decomp = dec.portfolio_mean_return(portfolio, ps)
    report.add("mean_return_decomposition", r_decomp, r_direct, tol)

    if portfolio.size <= 4:
        x = portfolio.share_weights
        for basis, means, w_mean, d in (
            ("price", analysis.vwaps, x, analysis.price_decomposition),
            ("return", analysis.mean_returns, portfolio.value_weights,
             analysis.return_decomposition),
        ):
            quad, cub, quart = naive_loops(analysis.coeffs, means, w_mean, x)
            mag = abs(quad) + abs(cub) + abs(quart)
            report.add(f"{basis}_quadratic_naive", d.quadratic, quad, itol, _FLOOR * mag)
            report.add(f"{basis}_cubic_naive", d.cubic, cub, itol, _FLOOR * mag)
            report.add(f"{basis}_quartic_naive", d.quartic, quart, itol, _FLOOR * mag)

    for i in range(ps.n):
        report.add(
            f"per_trade_return[{i + 1}]",
            dec.per_trade_portfolio_return(portfolio, ps, i),
            dec.per_trade_return_direct(portfolio, ps, i),
            tol,
        )

    if constant_volume:
        theta_f = pairs.frequency_return_covariance_matrix(raw_ordered, p0)
        big_x = portfolio.value_weights
        markowitz = dec.markowitz_variance(theta_f, big_x)
        report.add(
            "markowitz_limit", analysis.return_decomposition.total, markowitz, tol,
            _FLOOR * s_mag / s0**2,
        )
        report.add(
            "theta_frequency_limit", float(np.max(np.abs(theta_m - theta_f))), 0.0, 0.0,
            1e-12 * max(float(np.max(np.abs(theta_f))), 1e-300),
        )
        for i in range(ps.n):
            w_i = float(ps.volumes[i])
            for s, h in zip(ordered, portfolio.holdings):
                report.add(
                    f"volume_correction[{s.security_id},{i + 1}]",
                    dec.volume_correction(s, i, w_i, w_total, float(h)),
                    1.0,
                    1e-14,
                )
    return report


def naive_loops(coeffs, means, w_mean, w_vol) -> tuple[float, float, float]:
    """Literal index loops over the quartic polynomial, plain floats."""
    j = coeffs.size
    psi = coeffs.psi.tolist()
    phi = coeffs.phi.tolist()
    chi = coeffs.chi.tolist()
    m = [float(v) for v in means]
    wm = [float(v) for v in w_mean]
    wv = [float(v) for v in w_vol]
    rng = range(j)
    quad = math.fsum(psi[a][b] * m[a] * m[b] * wm[a] * wm[b] for a in rng for b in rng)
    cub = math.fsum(
        phi[a][b] * m[a] * m[l] * wm[a] * wv[b] * wm[l] for a in rng for b in rng for l in rng
    )
    quart = math.fsum(
        chi[a][b] * m[l] * m[f] * wv[a] * wv[b] * wm[l] * wm[f]
        for a in rng
        for b in rng
        for l in rng
        for f in rng
    )
    return quad, -2.0 * cub, quart


# -- random instances ------------------------------------------------------


@dataclass(frozen=True)
class CampaignConfig:
    instances: int = 200
    seed: int = 0
    min_j: int = 1
    max_j: int = 5
    min_n: int = 1
    max_n: int = 64
    low: float = 0.1
    high: float = 10.0
    constant_volume_share: float = 0.25

    def __post_init__(self) -> None:
        if self.instances < 1:
            raise MBPSError("empty campaign")
        if not 1 <= self.min_j <= self.max_j:
            raise MBPSError(f"invalid J range [{self.min_j}, {self.max_j}]")
        if not 1 <= self.min_n <= self.max_n:
            raise MBPSError(f"invalid N range [{self.min_n}, {self.max_n}]")
        if not 0 < self.low < self.high:
            raise MBPSError(f"invalid value/volume range [{self.low}, {self.high}]")
        if not 0 <= self.constant_volume_share <= 1:
            raise MBPSError("constant_volume_share must lie in [0, 1]")


def random_instance(
    rng: np.random.Generator,
    j: int,
    n: int,
    low: float = 0.1,
    high: float = 10.0,
    constant_volume: bool = False,
) -> tuple[list[TradeSeries], Portfolio]:
    """Uniform values/volumes; holdings a random fraction of traded volume.

    Composition prices are each security's first trade price, so share and
    value weights differ.
    """
    series = []
    for k in range(j):
        values = rng.uniform(low, high, n)
        if constant_volume:
            volumes = np.full(n, rng.uniform(low, high))
        else:
            volumes = rng.uniform(low, high, n)
        series.append(TradeSeries(f"S{k + 1}", values, volumes))
    holdings = [float(s.volumes.sum()) * rng.uniform(0.01, 0.1) for s in series]
    prices = [float(s.prices[0]) for s in series]
    return series, Portfolio(tuple(s.security_id for s in series), holdings, prices)


def randomized_identity_campaign(config: CampaignConfig) -> list[OracleReport]:
    """Deterministic for a given config; failures are recorded, not raised."""
    reports = []
    for idx in range(config.instances):
        inst_seed = config.seed * 1_000_003 + idx
        rng = np.random.default_rng(inst_seed)
        j = int(rng.integers(config.min_j, config.max_j + 1))
        n = int(rng.integers(config.min_n, config.max_n + 1))
        constant = bool(rng.random() < config.constant_volume_share)
        family = "constant" if constant else "random"
        report = OracleReport(idx, j, n, inst_seed, family)
        try:
            series, portfolio = random_instance(
                rng, j, n, config.low, config.high, constant_volume=constant
            )
            check_instance(series, portfolio, report, constant_volume=constant)
        except (MBPSError, ArithmeticError) as exc:
            report.error = f"{type(exc).__name__}: {exc}"
        reports.append(report)
    return sorted(reports, key=lambda r: r.index)


def summarize(reports: Sequence[OracleReport]) -> dict:
    failed = [r for r in reports if not r.passed]
    worst: dict[str, float] = {}
    for r in reports:
        for c in r.checks:
            key = c.name.split("[", 1)[0]
            worst[key] = max(worst.get(key, 0.0), c.rel_error)
    return {
        "instances": len(reports),
        "passed": len(reports) - len(failed),
        "failed": len(failed),
        "checks": sum(len(r.checks) for r in reports),
        "non_psd_sigma": sum(not r.sigma_psd for r in reports),
        "worst_rel_error": dict(sorted(worst.items())),
        "failures": [
            {
                "index": r.index,
                "seed": r.seed,
                "error": r.error,
                "checks": [c.as_dict() for c in r.failures()[:10]],
            }
            for r in failed
        ],
    }


__all__ = [
    "Check",
    "CampaignConfig",
    "MomentComparison",
    "OracleReport",
    "check_instance",
    "frequency_moment_suite",
    "oracle_portfolio_variance",
    "oracle_weighted_covariance",
    "oracle_weighted_mean",
    "oracle_weighted_variance",
    "random_instance",
    "randomized_identity_campaign",
    "summarize",
]
