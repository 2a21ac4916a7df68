"""Squeezed-vacuum input and its propagation through the trimer.

Two independent routes produce the output state:

* :func:`evolve_multinomial` expands the transformed creation operators with
  the multinomial theorem (compiled kernel, NumPy fallback).
* :func:`evolve_oracle` exponentiates the second-quantized hopping
  Hamiltonian on each total-photon-number block by dense diagonalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .errors import ContractError, DomainError, ResourceError
from .fock import ThreeModeState, triangle_index, triangle_size, triangle_triples
from .optics import CouplerConfig, TrimerUnitary

DEFAULT_TAIL_TOLERANCE = 1e-10
MAX_ORACLE_BLOCK_DIM = 2000


def tail_mass(r_abs: float, l_max: int) -> float:
    """Probability dropped by truncating the squeeze sum at ``l_max``.

    ``(1 - |r|^2) * sum_{l > l_max} |r|^(2l)`` sums to ``|r|^(2 (l_max + 1))``.
    """
    return r_abs ** (2 * (l_max + 1))


def default_lmax(r_abs: float, tail_tolerance: float = DEFAULT_TAIL_TOLERANCE) -> int:
    """Smallest ``l_max`` whose :func:`tail_mass` is below ``tail_tolerance``."""
    if not 0 <= r_abs < 1:
        raise DomainError(f"|r| must lie in [0, 1), got {r_abs}")
    if r_abs == 0:
        return 0
    l_max = max(0, math.ceil(math.log(tail_tolerance) / (2 * math.log(r_abs))) - 1)
    while tail_mass(r_abs, l_max) >= tail_tolerance:
        l_max += 1
    while l_max > 0 and tail_mass(r_abs, l_max - 1) < tail_tolerance:
        l_max -= 1
    return l_max


@dataclass(frozen=True)
class SqueezeSource:
    """Two-mode squeezed vacuum ``sqrt(1-|r|^2) sum_l r^l |l, 0, l>``.

    ``l_max=None`` picks the truncation from ``tail_tolerance``.
    """

    r: complex
    l_max: int | None = None
    tail_tolerance: float = DEFAULT_TAIL_TOLERANCE

    def __post_init__(self):
        if not abs(self.r) < 1:
            raise DomainError(f"squeeze parameter needs |r| < 1, got |r| = {abs(self.r)}")
        if self.l_max is not None and self.l_max < 0:
            raise DomainError("l_max must be non-negative")
        if not self.tail_tolerance > 0:
            raise DomainError("tail tolerance must be positive")

    @property
    def resolved_lmax(self) -> int:
        if self.l_max is not None:
            return self.l_max
        return default_lmax(abs(self.r), self.tail_tolerance)

    @property
    def tail(self) -> float:
        return tail_mass(abs(self.r), self.resolved_lmax)


def prepare_input(source: SqueezeSource) -> ThreeModeState:
    l_max = source.resolved_lmax
    pref = math.sqrt(1.0 - abs(source.r) ** 2)
    r = complex(source.r)
    blocks = {}
    for l in range(l_max + 1):
        amp = pref * r**l if l else pref
        if amp == 0:
            continue
        vec = np.zeros(triangle_size(2 * l), dtype=np.complex128)
        vec[triangle_index(2 * l, l, 0)] = amp
        blocks[2 * l] = vec
    return ThreeModeState(blocks, cutoff=2 * l_max)


def _pair_amplitudes(state: ThreeModeState) -> dict[int, complex]:
    """``{l: amplitude of |l, 0, l>}``; raises if the state has other support."""
    out = {}
    for total, vec in state.blocks.items():
        l, odd = divmod(total, 2)
        k = triangle_index(total, l, 0) if not odd else None
        mask = np.ones(len(vec), dtype=bool)
        if k is not None:
            mask[k] = False
        if np.any(vec[mask]):
            raise ContractError("evolve_multinomial needs input supported on (l, 0, l) only; use evolve_oracle")
        if k is not None and vec[k] != 0:
            out[l] = complex(vec[k])
    return out


def evolve_multinomial(state: ThreeModeState, unitary: TrimerUnitary, backend: str | None = None) -> ThreeModeState:
    """Output state from the multinomial expansion of the transformed pair operators."""
    kern = kernels.get_backend(backend)
    blocks = {}
    for l, amp in _pair_amplitudes(state).items():
        blocks[2 * l] = amp * kern.multinomial_block(l, unitary.row_a, unitary.row_c)
    return ThreeModeState(blocks, cutoff=max(state.cutoff, max(blocks, default=0)), norm_tolerance=state.norm_tolerance)


def output_slice(state: ThreeModeState, unitary: TrimerUnitary, n_b: int, backend: str | None = None) -> np.ndarray:
    """Output amplitudes ``psi[n_a, n_c]`` at fixed ``n_b`` without building the full state.

    Equals ``partial_trace_b(evolve_multinomial(state, unitary), n_b)``.
    """
    kern = kernels.get_backend(backend)
    pairs = _pair_amplitudes(state)
    dim = max(state.cutoff, 2 * max(pairs, default=0)) + 1
    psi = np.zeros((dim, dim), dtype=np.complex128)
    for l, amp in pairs.items():
        if n_b > 2 * l:
            continue
        row = amp * kern.multinomial_slice(l, n_b, unitary.row_a, unitary.row_c)
        n_a = np.arange(len(row))
        psi[n_a, 2 * l - n_b - n_a] = row
    return psi


def cancellation_bound(state: ThreeModeState, unitary: TrimerUnitary, backend: str | None = None) -> float:
    """Largest sum of term magnitudes feeding any output amplitude.

    Rounding error of :func:`evolve_multinomial` is roughly machine epsilon
    times this number. Obtained by running the expansion with ``|U|``, where
    no term cancels.
    """
    kern = kernels.get_backend(backend)
    ra = tuple(abs(x) for x in unitary.row_a)
    rc = tuple(abs(x) for x in unitary.row_c)
    worst = 0.0
    for l, amp in _pair_amplitudes(state).items():
        worst = max(worst, abs(amp) * float(np.max(np.abs(kern.multinomial_block(l, ra, rc)))))
    return worst


@lru_cache(maxsize=128)
def hopping_block(total: int) -> np.ndarray:
    """``a^dag b + b^dag a + b^dag c + c^dag b`` on the block of total ``total``."""
    trip = triangle_triples(total)
    dim = len(trip)
    h = np.zeros((dim, dim))
    for k, (na, nb, nc) in enumerate(trip):
        if nb > 0:
            # a^dag b and c^dag b
            h[triangle_index(total, na + 1, nb - 1), k] += math.sqrt((na + 1) * nb)
            h[triangle_index(total, na, nb - 1), k] += math.sqrt(nb * (nc + 1))
        if na > 0:
            h[triangle_index(total, na - 1, nb + 1), k] += math.sqrt(na * (nb + 1))
        if nc > 0:
            h[triangle_index(total, na, nb + 1), k] += math.sqrt((nb + 1) * nc)
    h.setflags(write=False)
    return h


@lru_cache(maxsize=128)
def _hopping_eig(total: int) -> tuple[np.ndarray, np.ndarray]:
    w, v = np.linalg.eigh(hopping_block(total))
    w.setflags(write=False)
    v.setflags(write=False)
    return w, v


def evolve_oracle(
    state: ThreeModeState,
    config: CouplerConfig,
    max_block_dim: int = MAX_ORACLE_BLOCK_DIM,
) -> ThreeModeState:
    """Apply ``exp(-i z kappa H)`` block by block, ``H`` the hopping operator."""
    blocks = {}
    for total, vec in state.blocks.items():
        if triangle_size(total) > max_block_dim:
            raise ResourceError(f"block of total {total} has dimension {triangle_size(total)} > {max_block_dim}")
        w, v = _hopping_eig(total)
        phase = np.exp(-1j * config.kappa * config.z * w)
        blocks[total] = v @ (phase * (v.T @ vec))
    return state.with_blocks(blocks)
