"""End-to-end evaluation of one parameter point, shared by the CLI and tests."""

from __future__ import annotations

from functools import lru_cache

from .analysis import mean_total_photons, moment_matrix, participation_ratio
from .detection import PnrPovm, conditional_pure_state, joint_distribution
from .errors import DomainError
from .evolution import DEFAULT_TAIL_TOLERANCE, SqueezeSource, evolve_multinomial, prepare_input
from .fock import ThreeModeState
from .optics import unitary_from_theta

OBSERVABLES = ("meanphoton", "detM", "xi")


@lru_cache(maxsize=32)
def output_state(
    r: complex, theta: float, l_max: int | None = None, tail_tolerance: float = DEFAULT_TAIL_TOLERANCE
) -> ThreeModeState:
    source = SqueezeSource(r, l_max, tail_tolerance)
    return evolve_multinomial(prepare_input(source), unitary_from_theta(theta))


def distribution(
    r: complex,
    N: int,
    theta: float,
    eta_b: float = 1.0,
    eta_outer: float = 1.0,
    l_max: int | None = None,
    tail_tolerance: float = DEFAULT_TAIL_TOLERANCE,
):
    out = output_state(r, theta, l_max, tail_tolerance)
    params = {"r": abs(r), "theta": theta, "l_max": out.cutoff // 2}
    return joint_distribution(out, PnrPovm(N, eta_b), eta_outer, params=params)


def observable(
    name: str,
    r: complex,
    N: int,
    theta: float,
    eta_b: float = 1.0,
    eta_outer: float = 1.0,
    l_max: int | None = None,
    tail_tolerance: float = DEFAULT_TAIL_TOLERANCE,
) -> float:
    """Value of ``meanphoton`` (2<n>), ``detM`` (Det M) or ``xi`` at one point."""
    if name == "xi":
        if eta_b != 1.0 or eta_outer != 1.0:
            raise DomainError("the participation ratio is defined for ideal detection (eta = 1) only")
        state = conditional_pure_state(output_state(r, theta, l_max, tail_tolerance), N)
        return participation_ratio(state.amplitudes).participation_ratio
    dist = distribution(r, N, theta, eta_b, eta_outer, l_max, tail_tolerance)
    if name == "meanphoton":
        return mean_total_photons(dist)
    if name == "detM":
        return moment_matrix(dist).determinant
    raise ValueError(f"unknown observable {name!r}; choose from {OBSERVABLES}")
