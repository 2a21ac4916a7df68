"""Waveguide trimer: mode-mixing matrix and coupling-length design."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DivergenceError, DomainError

SQRT2 = math.sqrt(2.0)
#: center/outer intensity ratio used for the subtraction tap (10/90)
DEFAULT_SPLIT_RATIO = 1.0 / 9.0


@dataclass(frozen=True)
class CouplerConfig:
    """Uniform trimer with nearest-neighbour coupling ``kappa`` and length ``z``.

    ``beta`` is kept for bookkeeping only. With identical propagation
    constants it contributes a phase ``exp(-i beta z T)`` to the block of
    total photon number ``T``, which no number-basis observable can see, so
    neither evolution path applies it.
    """

    kappa: float = 1.0
    z: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        if not self.kappa > 0:
            raise DomainError(f"kappa must be positive, got {self.kappa}")
        if not self.z >= 0:
            raise DomainError(f"z must be non-negative, got {self.z}")

    @property
    def theta(self) -> float:
        return SQRT2 * self.kappa * self.z

    @classmethod
    def from_theta(cls, theta: float, kappa: float = 1.0, beta: float = 0.0) -> "CouplerConfig":
        return cls(kappa=kappa, z=theta / (SQRT2 * kappa), beta=beta)


@dataclass(frozen=True)
class TrimerUnitary:
    entries: np.ndarray
    theta: float

    def __post_init__(self):
        m = np.array(self.entries, dtype=np.complex128)
        if m.shape != (3, 3):
            raise ValueError("trimer unitary must be 3x3")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def row_a(self) -> tuple[complex, complex, complex]:
        return tuple(complex(x) for x in self.entries[0])

    @property
    def row_c(self) -> tuple[complex, complex, complex]:
        return tuple(complex(x) for x in self.entries[2])

    def __getitem__(self, ij):
        return self.entries[ij]


def unitary_from_theta(theta: float) -> TrimerUnitary:
    c, s = math.cos(theta), math.sin(theta)
    outer = -1j * s / SQRT2
    m = np.array(
        [
            [0.5 + 0.5 * c, outer, -0.5 + 0.5 * c],
            [outer, c, outer],
            [-0.5 + 0.5 * c, outer, 0.5 + 0.5 * c],
        ]
    )
    return TrimerUnitary(m, theta)


def build_unitary(config: CouplerConfig) -> TrimerUnitary:
    """Mixing matrix of the trimer at ``theta = sqrt(2) * kappa * z``.

    Acts on the column of creation operators: ``a_in^dag -> sum_k U[0, k] o_k^dag``.
    """
    return unitary_from_theta(config.theta)


def solve_zf(kappa: float, target_ratio: float = DEFAULT_SPLIT_RATIO) -> float:
    """Shortest coupling length with ``I_center / I_outer = target_ratio``."""
    if target_ratio < 0 or not math.isfinite(target_ratio):
        raise DomainError(f"intensity ratio must be finite and >= 0, got {target_ratio}")
    if not kappa > 0:
        raise DomainError(f"kappa must be positive, got {kappa}")
    return math.atan(math.sqrt(target_ratio)) / (SQRT2 * kappa)


def output_intensities(config: CouplerConfig) -> tuple[float, float]:
    """(I_center, I_outer) for the symmetric single-excitation input (1, 0, 1)/sqrt(2)."""
    field = build_unitary(config).entries @ (np.array([1.0, 0.0, 1.0]) / SQRT2)
    power = np.abs(field) ** 2
    return float(power[1]), float(power[0] + power[2])


def intensity_ratio(config: CouplerConfig) -> float:
    if abs(math.cos(config.theta)) < 1e-12:
        raise DivergenceError(f"all light is in the center waveguide at theta = {config.theta}")
    center, outer = output_intensities(config)
    return center / outer
