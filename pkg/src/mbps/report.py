"""Full portfolio analysis report: market-based stats vs the Markowitz form."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import decomposition as dec
from . import pairs, security
from .portfolio import DEFAULT_LIQUIDITY_FACTOR, Portfolio, aggregate
from .trades import TradeSeries
from .verify import OracleReport, check_instance


@dataclass(frozen=True)
class AnalysisConfig:
    liquidity_factor: float = DEFAULT_LIQUIDITY_FACTOR
    rtol: float = dec.IDENTITY_RTOL
    output_format: str = "json"


@dataclass
class AnalysisReport:
    data: dict
    warnings: list[str] = field(default_factory=list)
    failed: bool = False

    def to_json(self) -> str:
        return json.dumps(self.data, indent=2, allow_nan=False) + "\n"

    def to_csv(self) -> str:
        """Long format: one ``quantity,security_j,security_k,value`` row per number."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["quantity", "security_j", "security_k", "value"])
        ids = self.data["securities"]
        for sid, st in zip(ids, self.data["security_stats"]):
            for k, v in st.items():
                if k != "security_id":
                    w.writerow([k, sid, "", _fmt(v)])
        for name in ("sigma", "theta_market", "theta_frequency"):
            m = self.data["pairs"][name]
            for a, sa in enumerate(ids):
                for b, sb in enumerate(ids):
                    w.writerow([name, sa, sb, _fmt(m[a][b])])
        for k, v in self.data["portfolio"].items():
            if not isinstance(v, (list, dict)):
                w.writerow([f"portfolio.{k}", "", "", _fmt(v)])
        for basis in ("price_decomposition", "return_decomposition"):
            for k, v in self.data[basis].items():
                if k != "basis":
                    w.writerow([f"{basis}.{k}", "", "", _fmt(v)])
        for k, v in self.data["markowitz"].items():
            w.writerow([f"markowitz.{k}", "", "", _fmt(v)])
        w.writerow(["oracle.passed", "", "", self.data["oracle"]["passed"]])
        w.writerow(["failed", "", "", self.failed])
        return buf.getvalue()

    def render(self, fmt: str) -> str:
        return self.to_csv() if fmt == "csv" else self.to_json()


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else str(v)


def _finite(x: float) -> float | None:
    return float(x) if math.isfinite(x) else None


def relative_discrepancy(market: float, markowitz: float) -> float | None:
    """``(market - markowitz) / market``; ``None`` when undefined."""
    if market == 0:
        return 0.0 if markowitz == 0 else None
    return (market - markowitz) / market


def analyze(
    series: Sequence[TradeSeries],
    portfolio: Portfolio,
    config: AnalysisConfig = AnalysisConfig(),
) -> AnalysisReport:
    ps = aggregate(portfolio, series, liquidity_factor=config.liquidity_factor)
    raw = {s.security_id: s for s in series}
    ordered = [raw[sid] for sid in portfolio.security_ids]
    p0 = portfolio.prices
    ids = list(portfolio.security_ids)

    sec = []
    for s, p in zip(ordered, p0):
        st = security.security_stats(s)
        rs = security.return_stats(s, float(p))
        sec.append(
            {
                "security_id": s.security_id,
                "vwap": st.mean_price,
                "price_variance": st.price_variance,
                "frequency_mean_price": security.frequency_mean_price(s),
                "frequency_price_variance": security.frequency_price_variance(s),
                "price_at_t0": float(p),
                "mean_return": rs.mean_return,
                "return_variance": rs.return_variance,
                "frequency_mean_return": security.frequency_mean_return(s, float(p)),
                "frequency_return_variance": security.frequency_return_variance(s, float(p)),
                "value_variance": st.value_variance,
                "volume_variance": st.volume_variance,
                "value_volume_cov": st.value_volume_cov,
                "scale": float(ps.scales[len(sec)]),
            }
        )

    sigma = pairs.price_covariance_matrix(ordered)
    theta_m = pairs.return_covariance_matrix(ordered, p0)
    theta_f = pairs.frequency_return_covariance_matrix(ordered, p0)

    analysis = dec.analyze_portfolio(ps)
    st = analysis.stats
    big_x = portfolio.value_weights
    theta_total = analysis.return_decomposition.total
    mk_freq = dec.markowitz_variance(theta_f, big_x)
    mk_market = dec.markowitz_variance(theta_m, big_x)
    r_direct, r_decomp = dec.portfolio_mean_return(portfolio, ps)

    oracle = check_instance(series, portfolio, OracleReport(0, portfolio.size, ps.n, 0, "input"))
    reconciles = dec.isclose(theta_total, st.return_variance, config.rtol, 1e-13 * st.mean_return**2)
    failed = not reconciles or not oracle.passed

    warnings = list(ps.warnings)
    sigma_psd = pairs.is_psd(sigma)
    if not sigma_psd:
        warnings.append("market-based price covariance matrix is not positive semidefinite")

    data = {
        "securities": ids,
        "window": {"N": ps.n},
        "weights": {
            "share": [float(v) for v in portfolio.share_weights],
            "value": [float(v) for v in big_x],
        },
        "security_stats": sec,
        "pairs": {
            "sigma": sigma.tolist(),
            "theta_market": theta_m.tolist(),
            "theta_frequency": theta_f.tolist(),
            "psi": analysis.coeffs.psi.tolist(),
            "phi": analysis.coeffs.phi.tolist(),
            "chi": analysis.coeffs.chi.tolist(),
            "sigma_psd": sigma_psd,
        },
        "portfolio": {
            "price_at_t0": portfolio.price,
            "total_value_t0": portfolio.total_value,
            "total_volume_t0": portfolio.total_volume,
            "mean_price": st.mean_price,
            "mean_price_decomposition": dec.mean_price_decomposition(portfolio, analysis.vwaps),
            "price_variance": st.price_variance,
            "mean_return": r_direct,
            "mean_return_decomposition": r_decomp,
            "return_variance": st.return_variance,
            "psi2": st.psi2,
            "phi": st.phi,
            "chi2": st.chi2,
        },
        "price_decomposition": analysis.price_decomposition.as_dict(),
        "return_decomposition": analysis.return_decomposition.as_dict(),
        "markowitz": {
            "return_variance": mk_freq,
            "return_variance_market_theta": mk_market,
            "relative_discrepancy": relative_discrepancy(theta_total, mk_freq),
        },
        "oracle": {
            "passed": oracle.passed,
            "checks": len(oracle.checks),
            "failures": [c.as_dict() for c in oracle.failures()],
        },
        "reconciles": reconciles,
        "failed": failed,
        "warnings": warnings,
    }
    return AnalysisReport(_clean(data), warnings, failed)


def _clean(obj):
    """Replace non-finite floats with ``None`` so the JSON stays strict."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return _finite(float(obj))
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj
