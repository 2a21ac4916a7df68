"""Truncated three-mode Fock states stored block-wise by total photon number.

A block of total ``T`` is a flat complex vector over all triples
``(n_a, n_b, n_c)`` with ``n_a + n_b + n_c = T``, ordered with ``n_a`` as the
slow index and ``n_b`` as the fast one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Mapping

import numpy as np

from .errors import ContractError, ZeroStateError

PRUNE_THRESHOLD = 1e-16
DEFAULT_NORM_TOLERANCE = 1e-10


@dataclass(frozen=True, order=True)
class OccupationTriple:
    n_a: int
    n_b: int
    n_c: int

    def __post_init__(self):
        if min(self.n_a, self.n_b, self.n_c) < 0:
            raise ValueError(f"negative occupation in {self}")

    @property
    def total(self) -> int:
        return self.n_a + self.n_b + self.n_c


def triangle_size(total: int) -> int:
    return (total + 1) * (total + 2) // 2


def triangle_index(total: int, n_a, n_b):
    """Position of ``(n_a, n_b, total - n_a - n_b)`` inside its block."""
    return n_a * (total + 1) - (n_a * (n_a - 1)) // 2 + n_b


@lru_cache(maxsize=512)
def triangle_triples(total: int) -> np.ndarray:
    """``(size, 3)`` integer array of the triples in block order."""
    n_a = np.repeat(np.arange(total + 1), np.arange(total + 1, 0, -1))
    n_b = np.concatenate([np.arange(total - k + 1) for k in range(total + 1)])
    out = np.stack([n_a, n_b, total - n_a - n_b], axis=1)
    out.setflags(write=False)
    return out


def _frozen(vec) -> np.ndarray:
    arr = np.array(vec, dtype=np.complex128)
    arr[np.abs(arr) < PRUNE_THRESHOLD] = 0.0
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ThreeModeState:
    """Pure state of modes (a, b, c) truncated at ``cutoff`` photons per mode.

    ``blocks`` maps a total photon number to its flat amplitude vector.
    Missing totals are zero.
    """

    blocks: Mapping[int, np.ndarray]
    cutoff: int
    norm_tolerance: float = DEFAULT_NORM_TOLERANCE
    _sorted: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        clean = {}
        for total, vec in self.blocks.items():
            total = int(total)
            if total < 0:
                raise ValueError("negative total photon number")
            if len(vec) != triangle_size(total):
                raise ValueError(f"block {total} has length {len(vec)}, expected {triangle_size(total)}")
            arr = _frozen(vec)
            if total > self.cutoff:
                # only triples with every count within the cutoff survive
                trip = triangle_triples(total)
                arr = arr.copy()
                arr[(trip > self.cutoff).any(axis=1)] = 0.0
                arr.setflags(write=False)
            if np.any(arr):
                clean[total] = arr
        object.__setattr__(self, "blocks", clean)
        object.__setattr__(self, "_sorted", tuple(sorted(clean)))

    @classmethod
    def from_amplitudes(cls, amplitudes: Mapping, cutoff: int, norm_tolerance: float = DEFAULT_NORM_TOLERANCE):
        """Build from ``{(n_a, n_b, n_c): amplitude}``; keys may be tuples or triples."""
        blocks: dict[int, np.ndarray] = {}
        for key, amp in amplitudes.items():
            t = key if isinstance(key, OccupationTriple) else OccupationTriple(*key)
            if max(t.n_a, t.n_b, t.n_c) > cutoff:
                raise ValueError(f"{t} exceeds cutoff {cutoff}")
            vec = blocks.setdefault(t.total, np.zeros(triangle_size(t.total), dtype=np.complex128))
            vec[triangle_index(t.total, t.n_a, t.n_b)] += amp
        return cls(blocks, cutoff, norm_tolerance)

    @property
    def totals(self) -> tuple[int, ...]:
        return self._sorted

    def block(self, total: int) -> np.ndarray:
        vec = self.blocks.get(total)
        if vec is None:
            vec = np.zeros(triangle_size(total), dtype=np.complex128)
            vec.setflags(write=False)
        return vec

    def amplitude(self, triple) -> complex:
        t = triple if isinstance(triple, OccupationTriple) else OccupationTriple(*triple)
        vec = self.blocks.get(t.total)
        if vec is None:
            return 0j
        return complex(vec[triangle_index(t.total, t.n_a, t.n_b)])

    def items(self) -> Iterator[tuple[OccupationTriple, complex]]:
        """Nonzero amplitudes in (total, n_a, n_b) order."""
        for total in self._sorted:
            vec = self.blocks[total]
            trip = triangle_triples(total)
            for k in np.flatnonzero(vec):
                yield OccupationTriple(*map(int, trip[k])), complex(vec[k])

    def to_dict(self) -> dict[tuple[int, int, int], complex]:
        return {(t.n_a, t.n_b, t.n_c): a for t, a in self.items()}

    def block_weights(self) -> dict[int, float]:
        return {t: float(np.vdot(v, v).real) for t, v in self.blocks.items()}

    def norm_squared(self) -> float:
        return float(sum(self.block_weights().values()))

    def is_normalized(self) -> bool:
        return abs(self.norm_squared() - 1.0) <= self.norm_tolerance

    def with_blocks(self, blocks: Mapping[int, np.ndarray]) -> "ThreeModeState":
        return ThreeModeState(blocks, self.cutoff, self.norm_tolerance)


def normalize(state: ThreeModeState) -> ThreeModeState:
    norm2 = state.norm_squared()
    if norm2 <= 0.0:
        raise ZeroStateError("cannot normalize the zero state")
    scale = 1.0 / np.sqrt(norm2)
    return state.with_blocks({t: v * scale for t, v in state.blocks.items()})


def block_by_total(state: ThreeModeState) -> list[tuple[int, np.ndarray]]:
    return [(t, state.blocks[t]) for t in state.totals]


def partial_trace_b(state: ThreeModeState, fixed_b: int) -> np.ndarray:
    """Unnormalized two-mode amplitudes ``psi[n_a, n_c]`` at ``n_b = fixed_b``.

    Returns an all-zero array when no amplitude has ``fixed_b`` photons in b.
    """
    dim = state.cutoff + 1
    psi = np.zeros((dim, dim), dtype=np.complex128)
    if fixed_b < 0 or fixed_b > state.cutoff:
        return psi
    for total, vec in state.blocks.items():
        if total < fixed_b:
            continue
        n_a = np.arange(0, total - fixed_b + 1)
        n_c = total - fixed_b - n_a
        ok = (n_a <= state.cutoff) & (n_c <= state.cutoff)
        psi[n_a[ok], n_c[ok]] = vec[triangle_index(total, n_a[ok], fixed_b)]
    return psi


@dataclass(frozen=True)
class TwoModeDensity:
    """Mixture ``sum_j weights[j] |psi_j><psi_j|`` over modes (a, c).

    ``vectors[j]`` is a two-mode amplitude array indexed ``[n_a, n_c]``. The
    mixture form is exact and keeps memory linear in the number of components;
    :meth:`matrix` densifies it for small cutoffs.
    """

    weights: np.ndarray
    vectors: np.ndarray
    norm_tolerance: float = DEFAULT_NORM_TOLERANCE

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).copy()
        v = np.asarray(self.vectors, dtype=np.complex128).copy()
        if v.ndim != 3 or v.shape[1] != v.shape[2] or v.shape[0] != w.shape[0]:
            raise ValueError("vectors must be (components, dim, dim) matching weights")
        if np.any(w < 0):
            raise ValueError("mixture weights must be non-negative")
        w.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "vectors", v)

    @classmethod
    def pure(cls, psi: np.ndarray) -> "TwoModeDensity":
        return cls(np.ones(1), np.asarray(psi)[None])

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @property
    def trace(self) -> float:
        return float(np.einsum("j,jmn->", self.weights, np.abs(self.vectors) ** 2))

    def diagonal(self) -> np.ndarray:
        """Populations ``<m, n| rho |m, n>`` as a ``(dim, dim)`` real array."""
        return np.einsum("j,jmn->mn", self.weights, np.abs(self.vectors) ** 2)

    def element(self, bra: tuple[int, int], ket: tuple[int, int]) -> complex:
        """``<bra| rho |ket>`` with bra/ket given as (n_a, n_c)."""
        return complex(np.sum(self.weights * self.vectors[:, bra[0], bra[1]] * self.vectors[:, ket[0], ket[1]].conj()))

    def matrix(self) -> np.ndarray:
        """Dense ``(dim**2, dim**2)`` matrix, row index ``n_a * dim + n_c``."""
        flat = self.vectors.reshape(len(self.weights), -1)
        return np.einsum("j,jx,jy->xy", self.weights, flat, flat.conj())

    def normalized(self) -> "TwoModeDensity":
        tr = self.trace
        if tr <= 0.0:
            raise ZeroStateError("density has zero trace")
        return TwoModeDensity(self.weights / tr, self.vectors, self.norm_tolerance)


def partial_trace_c(density: TwoModeDensity) -> np.ndarray:
    """Reduced one-mode density of mode a."""
    return np.einsum("j,jmk,jnk->mn", density.weights, density.vectors, density.vectors.conj())


def partial_trace_a(density: TwoModeDensity) -> np.ndarray:
    """Reduced one-mode density of mode c."""
    return np.einsum("j,jkm,jkn->mn", density.weights, density.vectors, density.vectors.conj())


def check_normalized(psi: np.ndarray, tol: float = 1e-9) -> None:
    norm2 = float(np.vdot(psi, psi).real)
    if abs(norm2 - 1.0) > tol:
        raise ContractError(f"state is not normalized (norm^2 = {norm2:.3e})")
