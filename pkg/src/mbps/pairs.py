"""Market-based covariances between two securities traded on the same grid."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .security import vwap
from .trades import MBPSError, TradeSeries, check_aligned, covariance

SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class PairStats:
    value_value_cov: float
    value_volume_cov: float  # cov(C_j, U_k)
    volume_value_cov: float  # cov(U_j, C_k)
    volume_volume_cov: float
    joint_volume_moment: float
    psi: float
    phi: float
    chi: float
    price_cov: float
    return_cov: float | None = None
    joint_past_value_moment: float | None = None


@dataclass(frozen=True)
class CoefficientMatrices:
    """Normalized covariance coefficients for every ordered pair ``(j, k)``.

    ``psi`` and ``chi`` are symmetric; ``phi[j, k] = cov(c_j, u_k) / (c_j u_k)``
    generally is not.
    """

    psi: np.ndarray
    phi: np.ndarray
    chi: np.ndarray

    @property
    def size(self) -> int:
        return self.psi.shape[0]


def _pair(sj: TradeSeries, sk: TradeSeries) -> None:
    check_aligned([sj, sk])


def _check_p0(*p0: float) -> None:
    for p in p0:
        if not (p > 0 and np.isfinite(p)):
            raise MBPSError(f"invalid reference price {p!r}")


def joint_volume_moment(sj: TradeSeries, sk: TradeSeries) -> float:
    _pair(sj, sk)
    return float(np.mean(sj.volumes * sk.volumes))


def price_covariance(sj: TradeSeries, sk: TradeSeries) -> float:
    """Price covariance from value/volume covariances, cross terms kept apart."""
    _pair(sj, sk)
    pj, pk = vwap(sj), vwap(sk)
    num = (
        covariance(sj.values, sk.values)
        - pk * covariance(sj.values, sk.volumes)
        - pj * covariance(sj.volumes, sk.values)
        + pj * pk * covariance(sj.volumes, sk.volumes)
    )
    return num / joint_volume_moment(sj, sk)


def normalized_coefficients(sj: TradeSeries, sk: TradeSeries) -> tuple[float, float, float]:
    """``(psi, phi, chi)``: covariances of values/volumes normalized to unit means."""
    _pair(sj, sk)
    cj, ck = sj.values.mean(), sk.values.mean()
    uj, uk = sj.volumes.mean(), sk.volumes.mean()
    if cj == 0 or ck == 0 or uj == 0 or uk == 0:
        raise MBPSError("degenerate normalization")
    psi = covariance(sj.values, sk.values) / (cj * ck)
    phi = covariance(sj.values, sk.volumes) / (cj * uk)
    chi = covariance(sj.volumes, sk.volumes) / (uj * uk)
    return float(psi), float(phi), float(chi)


def price_covariance_normalized_form(sj: TradeSeries, sk: TradeSeries) -> float:
    """``(psi_jk - phi_jk - phi_kj + chi_jk) / (1 + chi_jk) * p_j p_k``.

    Both value-volume cross coefficients appear; they coincide only for
    ``j == k``, where this is ``(psi - 2 phi + chi) / (1 + chi) * p**2``.
    """
    psi, phi_jk, chi = normalized_coefficients(sj, sk)
    phi_kj = normalized_coefficients(sk, sj)[1]
    if abs(1.0 + chi) < SINGULAR_TOL:
        raise MBPSError("singular joint volume moment")
    return (psi - phi_jk - phi_kj + chi) / (1.0 + chi) * vwap(sj) * vwap(sk)


def price_covariance_merged_cross_terms(sj: TradeSeries, sk: TradeSeries) -> float:
    """``(psi - 2 phi_jk + chi) / (1 + chi) * p_j p_k`` with one cross coefficient.

    Equals :func:`price_covariance` on the diagonal only; kept to measure the
    error of collapsing the two cross terms into one.
    """
    psi, phi, chi = normalized_coefficients(sj, sk)
    if abs(1.0 + chi) < SINGULAR_TOL:
        raise MBPSError("singular joint volume moment")
    return (psi - 2.0 * phi + chi) / (1.0 + chi) * vwap(sj) * vwap(sk)


def return_covariance(sj: TradeSeries, sk: TradeSeries, p0_j: float, p0_k: float) -> float:
    _check_p0(p0_j, p0_k)
    return price_covariance(sj, sk) / (p0_j * p0_k)


def return_covariance_past_values(
    sj: TradeSeries, sk: TradeSeries, p0_j: float, p0_k: float
) -> tuple[float, float]:
    """Return covariance built from past values ``C0 = p0 * U``.

    Returns ``(theta_jk, C0_jk)`` where ``C0_jk = E[C0_j C0_k]``.
    """
    _pair(sj, sk)
    _check_p0(p0_j, p0_k)
    c0j = p0_j * sj.volumes
    c0k = p0_k * sk.volumes
    rj = sj.values.mean() / c0j.mean()
    rk = sk.values.mean() / c0k.mean()
    c0jk = float(np.mean(c0j * c0k))
    num = (
        covariance(sj.values, sk.values)
        - rk * covariance(sj.values, c0k)
        - rj * covariance(c0j, sk.values)
        + rj * rk * covariance(c0j, c0k)
    )
    return num / c0jk, c0jk


def pair_stats(
    sj: TradeSeries, sk: TradeSeries, p0_j: float | None = None, p0_k: float | None = None
) -> PairStats:
    psi, phi, chi = normalized_coefficients(sj, sk)
    sigma = price_covariance(sj, sk)
    theta = c0jk = None
    if p0_j is not None and p0_k is not None:
        theta, c0jk = return_covariance_past_values(sj, sk, p0_j, p0_k)
    return PairStats(
        value_value_cov=covariance(sj.values, sk.values),
        value_volume_cov=covariance(sj.values, sk.volumes),
        volume_value_cov=covariance(sj.volumes, sk.values),
        volume_volume_cov=covariance(sj.volumes, sk.volumes),
        joint_volume_moment=joint_volume_moment(sj, sk),
        psi=psi,
        phi=phi,
        chi=chi,
        price_cov=sigma,
        return_cov=theta,
        joint_past_value_moment=c0jk,
    )


def frequency_price_covariance(sj: TradeSeries, sk: TradeSeries) -> float:
    _pair(sj, sk)
    return covariance(sj.prices, sk.prices)


def frequency_return_covariance(
    sj: TradeSeries, sk: TradeSeries, p0_j: float, p0_k: float
) -> float:
    _pair(sj, sk)
    _check_p0(p0_j, p0_k)
    return covariance(sj.prices / p0_j, sk.prices / p0_k)


def coefficient_matrices(series: Sequence[TradeSeries]) -> CoefficientMatrices:
    check_aligned(series)
    j = len(series)
    psi = np.empty((j, j))
    phi = np.empty((j, j))
    chi = np.empty((j, j))
    for a in range(j):
        for b in range(j):
            psi[a, b], phi[a, b], chi[a, b] = normalized_coefficients(series[a], series[b])
    return CoefficientMatrices(psi, phi, chi)


def _all_pairs(series: Sequence[TradeSeries], cell) -> np.ndarray:
    check_aligned(series)
    j = len(series)
    out = np.empty((j, j))
    for a in range(j):
        for b in range(j):
            out[a, b] = cell(a, b)
    return out


def price_covariance_matrix(series: Sequence[TradeSeries]) -> np.ndarray:
    """Every ordered cell is computed; symmetry is checked by callers, not assumed."""
    return _all_pairs(series, lambda a, b: price_covariance(series[a], series[b]))


def return_covariance_matrix(series: Sequence[TradeSeries], p0: Sequence[float]) -> np.ndarray:
    return _all_pairs(
        series, lambda a, b: return_covariance(series[a], series[b], p0[a], p0[b])
    )


def frequency_price_covariance_matrix(series: Sequence[TradeSeries]) -> np.ndarray:
    return _all_pairs(series, lambda a, b: frequency_price_covariance(series[a], series[b]))


def frequency_return_covariance_matrix(
    series: Sequence[TradeSeries], p0: Sequence[float]
) -> np.ndarray:
    return _all_pairs(
        series,
        lambda a, b: frequency_return_covariance(series[a], series[b], p0[a], p0[b]),
    )


def symmetry_error(m: np.ndarray) -> float:
    """Largest ``|m - m.T|`` relative to the largest entry."""
    scale = float(np.max(np.abs(m))) if m.size else 0.0
    if scale == 0:
        return 0.0
    return float(np.max(np.abs(m - m.T)) / scale)


def is_psd(m: np.ndarray, rtol: float = 1e-10) -> bool:
    sym = 0.5 * (m + m.T)
    eig = np.linalg.eigvalsh(sym)
    scale = max(float(np.max(np.abs(eig))), 1e-300)
    return bool(eig.min() >= -rtol * scale)
