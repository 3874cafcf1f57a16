"""Portfolio means and variances and their decompositions by security.

The price variance of the aggregated portfolio series is a 4th-degree
polynomial in the share weights ``x_j``:

    Phi = [ sum_jk psi_jk a_j a_k
            - 2 (sum_jk phi_jk a_j x_k) (sum_l a_l)
            + (sum_jk chi_jk x_j x_k) (sum_l a_l)**2 ] / (1 + chi**2)

with ``a_j = p_j(t) x_j``. The cubic and quartic sums factor into a matrix
contraction times a vector sum, so evaluation is O(J**2).

For returns, ``a_j = s(t0) R_j X_j``, which gives ``Theta = Phi / s(t0)**2``
as a polynomial in the value weights ``X_j``. The ``phi`` and ``chi``
contractions keep the share weights ``x_j``: those coefficients are
normalized by volume means, which are proportional to ``x_j`` and not to
``X_j``. :func:`return_variance_decomposition_value_weighted` evaluates the
variant with ``X_j`` throughout; it agrees only when all composition prices
are equal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .pairs import CoefficientMatrices, coefficient_matrices
from .portfolio import Portfolio, PortfolioSeries
from .security import clamp_variance, vwap
from .trades import ConsistencyError, MBPSError, covariance

#: Sign of the cubic term. Module-level so a negative-control test can flip it.
CUBIC_SIGN = -2.0

IDENTITY_RTOL = 1e-10
DUAL_PATH_RTOL = 1e-12


def rel_err(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def isclose(a: float, b: float, rtol: float, atol: float) -> bool:
    return abs(a - b) <= rtol * max(abs(a), abs(b)) + atol


@dataclass(frozen=True)
class PortfolioStats:
    mean_price: float
    price_variance: float
    mean_return: float
    return_variance: float
    value_variance: float
    volume_variance: float
    value_volume_cov: float
    psi2: float
    chi2: float
    phi: float
    past_values: np.ndarray
    past_value_variance: float
    current_past_cov: float
    second_past_moment: float


@dataclass(frozen=True)
class VarianceDecomposition:
    basis: Literal["price", "return"]
    quadratic: float
    cubic: float
    quartic: float
    prefactor: float

    @property
    def bracket(self) -> float:
        return self.quadratic + self.cubic + self.quartic

    @property
    def total(self) -> float:
        return self.prefactor * self.bracket

    def as_dict(self) -> dict:
        return {
            "basis": self.basis,
            "quadratic": self.quadratic,
            "cubic": self.cubic,
            "quartic": self.quartic,
            "prefactor": self.prefactor,
            "total": self.total,
        }


def portfolio_mean_price(ps: PortfolioSeries) -> float:
    return float(ps.values.sum() / ps.portfolio.total_volume)


def mean_price_decomposition(portfolio: Portfolio, vwaps: Sequence[float]) -> float:
    v = np.asarray(vwaps, dtype=float)
    if v.shape != (portfolio.size,):
        raise MBPSError(f"expected {portfolio.size} mean prices, got {v.size}")
    return float(v @ portfolio.share_weights)


def volume_variation(ps: PortfolioSeries) -> float:
    """Squared coefficient of variation of the aggregate volumes ``W(t_i)``."""
    w = ps.volumes
    return covariance(w, w) / float(w.mean()) ** 2


def volume_variation_from_components(ps: PortfolioSeries) -> float:
    w1 = float(ps.volumes.mean())
    u = [s.volumes for s in ps.normalized]
    return sum(covariance(a, b) for a in u for b in u) / (w1 * w1)


def _portfolio_stats(ps: PortfolioSeries, s0: float) -> PortfolioStats:
    q, w = ps.values, ps.volumes
    s = portfolio_mean_price(ps)
    psi_q = covariance(q, q)
    psi_w = covariance(w, w)
    cov_qw = covariance(q, w)
    w2 = float(np.mean(w * w))
    phi_price = clamp_variance((psi_q + s * s * psi_w - 2.0 * s * cov_qw) / w2, s * s)

    q1, w1 = float(q.mean()), float(w.mean())
    q0 = s0 * w
    r = s / s0
    psi_q0 = covariance(q0, q0)
    cov_qq0 = covariance(q, q0)
    q0_2 = float(np.mean(q0 * q0))
    theta = clamp_variance((psi_q + r * r * psi_q0 - 2.0 * r * cov_qq0) / q0_2, r * r)
    q0.setflags(write=False)
    return PortfolioStats(
        mean_price=s,
        price_variance=phi_price,
        mean_return=r,
        return_variance=theta,
        value_variance=psi_q,
        volume_variance=psi_w,
        value_volume_cov=cov_qw,
        psi2=psi_q / (q1 * q1),
        chi2=psi_w / (w1 * w1),
        phi=cov_qw / (q1 * w1),
        past_values=q0,
        past_value_variance=psi_q0,
        current_past_cov=cov_qq0,
        second_past_moment=q0_2,
    )


def portfolio_stats(ps: PortfolioSeries) -> PortfolioStats:
    return _portfolio_stats(ps, ps.portfolio.price)


def portfolio_price_variance(
    ps: PortfolioSeries, rtol: float = IDENTITY_RTOL
) -> tuple[float, PortfolioStats]:
    """Portfolio price variance, cross-checked three ways.

    The moment form is returned; the coefficient-of-variation form and the
    direct ``W**2``-weighted sum must agree with it or
    :class:`ConsistencyError` is raised.
    """
    st = portfolio_stats(ps)
    s = st.mean_price
    coef_form = (st.psi2 - 2.0 * st.phi + st.chi2) / (1.0 + st.chi2) * s * s
    w2 = ps.volumes**2
    direct = float(np.sum((ps.prices - s) ** 2 * w2) / np.sum(w2))
    atol = 1e-12 * s * s
    for name, other in (("coefficient form", coef_form), ("weighted sum", direct)):
        if not isclose(st.price_variance, other, rtol, atol):
            raise ConsistencyError(
                f"portfolio price variance {st.price_variance!r} disagrees with "
                f"{name} {other!r}"
            )
    return st.price_variance, st


def portfolio_mean_return(portfolio: Portfolio, ps: PortfolioSeries) -> tuple[float, float]:
    """``(s(t)/s(t0), sum_j R_j X_j)``; the second is the value-weighted average return."""
    s0 = portfolio.price
    if not (s0 > 0):
        raise MBPSError(f"invalid portfolio price {s0!r}")
    direct = portfolio_mean_price(ps) / s0
    r_j = np.array([vwap(s) for s in ps.normalized]) / portfolio.prices
    return direct, float(r_j @ portfolio.value_weights)


def portfolio_return_variance(
    portfolio: Portfolio, ps: PortfolioSeries, rtol: float = DUAL_PATH_RTOL
) -> float:
    """``Phi / s(t0)**2``, checked against the past-value form with ``Q0 = s(t0) W``."""
    s0 = portfolio.price
    if not (s0 > 0):
        raise MBPSError(f"invalid portfolio price {s0!r}")
    phi, st = portfolio_price_variance(ps)
    theta = phi / (s0 * s0)
    r = st.mean_return
    if not isclose(theta, st.return_variance, rtol, 1e-12 * r * r):
        raise ConsistencyError(
            f"return variance {theta!r} disagrees with past-value form {st.return_variance!r}"
        )
    return theta


def _check_dims(coeffs: CoefficientMatrices, *vectors: np.ndarray) -> None:
    j = coeffs.size
    for m in (coeffs.psi, coeffs.phi, coeffs.chi):
        if m.shape != (j, j):
            raise MBPSError("coefficient matrices must be square and equal-sized")
    for v in vectors:
        if v.shape != (j,):
            raise MBPSError(f"dimension mismatch: {v.shape} vs {j} securities")


def _polynomial(
    coeffs: CoefficientMatrices,
    a: np.ndarray,
    x: np.ndarray,
    chi2: float,
    basis: Literal["price", "return"],
) -> VarianceDecomposition:
    mean = float(a.sum())
    quadratic = float(a @ coeffs.psi @ a)
    cubic = CUBIC_SIGN * float(a @ coeffs.phi @ x) * mean
    quartic = float(x @ coeffs.chi @ x) * mean * mean
    return VarianceDecomposition(basis, quadratic, cubic, quartic, 1.0 / (1.0 + chi2))


def price_variance_decomposition(
    portfolio: Portfolio,
    coeffs: CoefficientMatrices,
    vwaps: Sequence[float],
    chi2: float,
) -> VarianceDecomposition:
    """Quartic decomposition of the portfolio price variance in share weights.

    ``coeffs`` must come from the normalized series; ``vwaps`` are the
    securities' market-based mean prices over the same window.
    """
    p = np.asarray(vwaps, dtype=float)
    x = portfolio.share_weights
    _check_dims(coeffs, p, x)
    return _polynomial(coeffs, p * x, x, chi2, "price")


def return_variance_decomposition(
    portfolio: Portfolio,
    coeffs: CoefficientMatrices,
    mean_returns: Sequence[float],
    chi2: float,
) -> VarianceDecomposition:
    """Quartic decomposition of the portfolio return variance.

    Quadratic and mean factors use ``R_j X_j``; the ``phi`` and ``chi``
    contractions use share weights ``x_j`` (see module docstring).
    """
    r = np.asarray(mean_returns, dtype=float)
    big_x = portfolio.value_weights
    x = portfolio.share_weights
    _check_dims(coeffs, r, big_x)
    return _polynomial(coeffs, r * big_x, x, chi2, "return")


def return_variance_decomposition_value_weighted(
    portfolio: Portfolio,
    coeffs: CoefficientMatrices,
    mean_returns: Sequence[float],
    chi2: float,
) -> VarianceDecomposition:
    """Variant with value weights ``X_j`` in every contraction.

    Equals :func:`return_variance_decomposition` when all composition prices
    coincide (then ``x == X``); otherwise it is not the portfolio variance.
    """
    r = np.asarray(mean_returns, dtype=float)
    big_x = portfolio.value_weights
    _check_dims(coeffs, r, big_x)
    return _polynomial(coeffs, r * big_x, big_x, chi2, "return")


def markowitz_variance(theta: np.ndarray, weights: Sequence[float], sym_tol: float = 1e-9) -> float:
    """Quadratic form ``sum_jk theta_jk X_j X_k``."""
    m = np.asarray(theta, dtype=float)
    w = np.asarray(weights, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] != w.size:
        raise MBPSError("dimension mismatch")
    scale = max(float(np.max(np.abs(m))), 1e-300)
    if np.max(np.abs(m - m.T)) > sym_tol * scale:
        raise MBPSError("covariance matrix is not symmetric")
    if abs(w.sum() - 1.0) > 1e-9:
        raise MBPSError(f"weights sum to {w.sum()!r}, expected 1")
    return float(w @ m @ w)


def per_trade_portfolio_return(portfolio: Portfolio, ps: PortfolioSeries, tick: int) -> float:
    """Portfolio gross return at one tick (0-based), summed over securities.

    Each security contributes ``R_j(t_i) X_j`` times the volume correction
    ``u_j(t_i) W_total / (W(t_i) U_j(t0))``, which is 1 under constant volumes.
    """
    if not 0 <= tick < ps.n:
        raise MBPSError(f"tick {tick} outside window of {ps.n}")
    total = 0.0
    w_i = float(ps.volumes[tick])
    for s, p0, big_x, h in zip(
        ps.normalized, portfolio.prices, portfolio.value_weights, portfolio.holdings
    ):
        r_ji = float(s.prices[tick]) / p0
        total += r_ji * big_x * volume_correction(s, tick, w_i, portfolio.total_volume, h)
    return total


def volume_correction(s, tick: int, w_i: float, w_total: float, holding: float) -> float:
    return float(s.volumes[tick]) / w_i * (w_total / holding)


def per_trade_return_direct(portfolio: Portfolio, ps: PortfolioSeries, tick: int) -> float:
    return float(ps.values[tick] / (portfolio.price * ps.volumes[tick]))


@dataclass(frozen=True)
class PortfolioAnalysis:
    stats: PortfolioStats
    coeffs: CoefficientMatrices
    vwaps: np.ndarray
    mean_returns: np.ndarray
    price_decomposition: VarianceDecomposition
    return_decomposition: VarianceDecomposition


def analyze_portfolio(ps: PortfolioSeries) -> PortfolioAnalysis:
    """Coefficients on normalized series, both decompositions, and direct stats."""
    portfolio = ps.portfolio
    coeffs = coefficient_matrices(ps.normalized)
    vwaps = np.array([vwap(s) for s in ps.normalized])
    mean_returns = vwaps / portfolio.prices
    chi2 = volume_variation(ps)
    _, st = portfolio_price_variance(ps)
    return PortfolioAnalysis(
        stats=st,
        coeffs=coeffs,
        vwaps=vwaps,
        mean_returns=mean_returns,
        price_decomposition=price_variance_decomposition(portfolio, coeffs, vwaps, chi2),
        return_decomposition=return_variance_decomposition(
            portfolio, coeffs, mean_returns, chi2
        ),
    )
