"""Observables of the heralded states: photon numbers, moment matrix, Schmidt spectrum."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .detection import JointDistribution
from .errors import ContractError
from .fock import check_normalized

EIGEN_FLOOR = 1e-14


def _probabilities(dist) -> np.ndarray:
    p = dist.probabilities if isinstance(dist, JointDistribution) else np.asarray(dist, dtype=float)
    if abs(p.sum() - 1.0) > 1e-9:
        raise ContractError(f"distribution sums to {p.sum():.12g}, expected 1")
    return p


def mean_total_photons(dist) -> float:
    """``2 <n>`` with ``<n>`` the mean count at port c."""
    p = _probabilities(dist)
    n = np.arange(p.shape[1])
    return float(2.0 * np.sum(p * n[None, :]))


def falling_factorial(n: np.ndarray, k: int) -> np.ndarray:
    out = np.ones_like(n, dtype=float)
    for i in range(k):
        out = out * (n - i)
    return out


def factorial_moment(dist, u: int, v: int) -> float:
    """Normally ordered moment ``<:m_a^u m_c^v:>`` of the count distribution."""
    if u < 0 or v < 0:
        raise ValueError("moment orders must be non-negative")
    p = _probabilities(dist)
    fa = falling_factorial(np.arange(p.shape[0]), u)
    fc = falling_factorial(np.arange(p.shape[1]), v)
    return float(fa @ p @ fc)


def det3(m: np.ndarray) -> float:
    return float(
        m[0, 0] * (m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
        - m[0, 1] * (m[1, 0] * m[2, 2] - m[1, 2] * m[2, 0])
        + m[0, 2] * (m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0])
    )


@dataclass(frozen=True)
class MomentMatrix:
    """Second-order matrix of moments, rows and columns ordered (1, m_a, m_c)."""

    entries: np.ndarray
    determinant: float
    params: dict[str, Any] = field(default_factory=dict)

    @property
    def nonclassical(self) -> bool:
        return self.determinant < 0


def moment_matrix(dist) -> MomentMatrix:
    fm = lambda u, v: factorial_moment(dist, u, v)  # noqa: E731
    m = np.array(
        [
            [fm(0, 0), fm(1, 0), fm(0, 1)],
            [fm(1, 0), fm(2, 0), fm(1, 1)],
            [fm(0, 1), fm(1, 1), fm(0, 2)],
        ]
    )
    params = dict(dist.params) if isinstance(dist, JointDistribution) else {}
    return MomentMatrix(m, det3(m), params)


@dataclass(frozen=True)
class SchmidtSpectrum:
    """Schmidt coefficients (non-increasing) and the inverse purity of either reduced state."""

    coefficients: np.ndarray
    participation_ratio: float

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.coefficients**2


def participation_ratio(psi: np.ndarray, traced_mode: str = "c") -> SchmidtSpectrum:
    """Participation ratio ``1 / sum p_i^2`` of a normalized two-mode pure state.

    ``psi[n_a, n_c]``; the reduced state of the mode that is *not*
    ``traced_mode`` is diagonalized.
    """
    psi = np.asarray(psi, dtype=np.complex128)
    check_normalized(psi)
    if traced_mode == "c":
        rho = psi @ psi.conj().T
    elif traced_mode == "a":
        rho = psi.T @ psi.conj()
    else:
        raise ValueError("traced_mode must be 'a' or 'c'")
    p = np.linalg.eigvalsh(rho)[::-1]
    p = np.where(p < EIGEN_FLOOR, 0.0, p)
    return SchmidtSpectrum(np.sqrt(p), float(1.0 / np.sum(p**2)))
