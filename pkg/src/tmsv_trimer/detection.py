"""Photon-number-resolving detection: heralding on mode b and counting at a and c."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.special import gammaln
from scipy.stats import binom

from .errors import DomainError, HeraldImpossibleError, NumericalConsistencyError
from .fock import ThreeModeState, TwoModeDensity, partial_trace_b

NEGATIVE_DUST = 1e-12
HERALD_FLOOR = 1e-300


def _check_efficiency(eta: float, what: str = "efficiency") -> None:
    if not 0 < eta <= 1:
        raise DomainError(f"{what} must lie in (0, 1], got {eta}")


@dataclass(frozen=True)
class PnrPovm:
    """Outcome "``subtracted`` clicks" of a PNR detector with efficiency ``efficiency``."""

    subtracted: int
    efficiency: float = 1.0

    def __post_init__(self):
        if self.subtracted < 0:
            raise DomainError("detected photon number must be non-negative")
        _check_efficiency(self.efficiency)


def detection_matrix(eta: float, size: int) -> np.ndarray:
    """``B[m, j]``: probability that ``j`` photons produce ``m`` counts."""
    _check_efficiency(eta)
    j = np.arange(size)
    return binom.pmf(j[:, None], j[None, :], eta)


def povm_weights(povm: PnrPovm, j_max: int) -> np.ndarray:
    """Diagonal of the POVM element over ``j = 0..j_max`` true photons."""
    if j_max < povm.subtracted:
        raise DomainError(f"j_max = {j_max} is below the detected count {povm.subtracted}")
    return binom.pmf(povm.subtracted, np.arange(j_max + 1), povm.efficiency)


@dataclass(frozen=True)
class ConditionalState:
    """Normalized two-mode state ``amplitudes[n_a, n_c]`` heralded by ``subtracted`` clicks."""

    amplitudes: np.ndarray
    success_probability: float
    subtracted: int


def conditional_pure_state(out: ThreeModeState, N: int) -> ConditionalState:
    """Project mode b on ``|N>`` (ideal detector) and renormalize."""
    psi = partial_trace_b(out, N)
    prob = float(np.vdot(psi, psi).real)
    if prob <= HERALD_FLOOR:
        raise HeraldImpossibleError(f"no amplitude with {N} photons in the central mode")
    return ConditionalState(psi / np.sqrt(prob), prob, N)


def subtracted_density(out: ThreeModeState, povm: PnrPovm) -> TwoModeDensity:
    """Unnormalized heralded state of modes (a, c); its trace is the herald probability."""
    weights = povm_weights(povm, max(out.cutoff, povm.subtracted))
    keep = [j for j in range(len(weights)) if weights[j] > 0]
    slices = np.array([partial_trace_b(out, j) for j in keep]).reshape(len(keep), out.cutoff + 1, out.cutoff + 1)
    rho = TwoModeDensity(weights[keep], slices)
    if rho.trace <= HERALD_FLOOR:
        raise HeraldImpossibleError(
            f"detecting {povm.subtracted} photons at efficiency {povm.efficiency} has zero probability"
        )
    return rho


@dataclass(frozen=True)
class JointDistribution:
    """Counting statistics at ports a (rows) and c (columns) after heralding.

    ``probabilities`` is normalized; ``raw`` holds the unnormalized weights
    whose sum is ``success_probability``.
    """

    probabilities: np.ndarray
    raw: np.ndarray
    success_probability: float
    params: dict[str, Any] = field(default_factory=dict)

    def extent(self, coverage: float = 1 - 1e-8) -> int:
        """Smallest ``K`` with ``probabilities[:K, :K]`` holding at least ``coverage``."""
        p = self.probabilities
        for k in range(1, p.shape[0] + 1):
            if p[:k, :k].sum() >= coverage:
                return k
        return p.shape[0]

    def trimmed(self, coverage: float = 1 - 1e-8) -> np.ndarray:
        k = self.extent(coverage)
        return self.probabilities[:k, :k]


def counting_statistics(rho: TwoModeDensity, eta_a: float, eta_c: float) -> np.ndarray:
    """Unnormalized ``P_N(m, n)`` from the populations of ``rho`` and binomial loss."""
    diag = rho.diagonal()
    dim = diag.shape[0]
    ba = detection_matrix(eta_a, dim)
    bc = detection_matrix(eta_c, dim)
    return ba @ diag @ bc.T


def joint_distribution(
    out: ThreeModeState,
    povm_b: PnrPovm,
    eta_outer: float = 1.0,
    *,
    eta_a: float | None = None,
    eta_c: float | None = None,
    params: dict[str, Any] | None = None,
) -> JointDistribution:
    """Joint photon-number distribution at the outer ports given the herald.

    ``eta_a`` and ``eta_c`` default to ``eta_outer``.
    """
    eta_a = eta_outer if eta_a is None else eta_a
    eta_c = eta_outer if eta_c is None else eta_c
    _check_efficiency(eta_a, "eta_a")
    _check_efficiency(eta_c, "eta_c")
    raw = counting_statistics(subtracted_density(out, povm_b), eta_a, eta_c)
    if raw.min(initial=0.0) < -NEGATIVE_DUST:
        raise NumericalConsistencyError(f"joint distribution entry {raw.min():.3e} is negative beyond rounding")
    raw = np.clip(raw, 0.0, None)
    total = float(raw.sum())
    if total <= HERALD_FLOOR:
        raise HeraldImpossibleError("herald has zero probability")
    info = {"N": povm_b.subtracted, "eta_b": povm_b.efficiency, "eta_a": eta_a, "eta_c": eta_c}
    info.update(params or {})
    return JointDistribution(raw / total, raw, total, info)


def closed_form_density(r: complex, unitary, povm: PnrPovm, l_max: int) -> np.ndarray:
    """Heralded density from the explicit multinomial double sum, densified.

    Independent of the state containers: every matrix element is summed
    directly over ``(l, p, v1, v3)`` and ``(l', p', v1', v3')`` with the
    detector weight on the shared ``j``. Intended for ``l_max <= 4``.
    Row/column index is ``v1 * dim + v3`` with ``dim = 2 * l_max + 1``.
    """
    u11, u12, u13 = (complex(x) for x in unitary.entries[0])
    dim = 2 * l_max + 1
    lf = lambda n: np.exp(gammaln(n + 1))  # noqa: E731
    # amp[(l, j)] -> {(v1, v3): coefficient}
    amps: dict[tuple[int, int], dict[tuple[int, int], complex]] = {}
    for l in range(l_max + 1):
        for p1 in range(l + 1):
            for p2 in range(l - p1 + 1):
                p3 = l - p1 - p2
                for v1 in range(p1, 2 * l + 1):
                    for j in range(p2, 2 * l - v1 + 1):
                        v3 = 2 * l - v1 - j
                        if v3 < p3:
                            continue
                        s = (
                            r**l
                            / (lf(p1) * lf(p2) * lf(p3))
                            * lf(l)
                            / (lf(v1 - p1) * lf(j - p2) * lf(v3 - p3))
                            * u11 ** (p1 + v3 - p3)
                            * u12**j
                            * u13 ** (p3 + v1 - p1)
                            * np.sqrt(lf(v1) * lf(j) * lf(v3))
                        )
                        cell = amps.setdefault((l, j), {})
                        cell[(v1, v3)] = cell.get((v1, v3), 0) + s
    weights = povm_weights(povm, 2 * l_max)
    rho = np.zeros((dim * dim, dim * dim), dtype=complex)
    pref = 1 - abs(r) ** 2
    for (l, j), ket in amps.items():
        for (lp, jp), bra in amps.items():
            if jp != j or weights[j] == 0:
                continue
            for (v1, v3), a in ket.items():
                for (w1, w3), b in bra.items():
                    rho[v1 * dim + v3, w1 * dim + w3] += pref * weights[j] * a * np.conj(b)
    return rho
