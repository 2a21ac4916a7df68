"""NumPy fallback for the multinomial kernels.

Same contract as the compiled module. Accumulation happens in extended
precision (``np.clongdouble``) in place of compensated summation.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.special import gammaln


@lru_cache(maxsize=256)
def _compositions(l: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    p1, p2 = np.array([(i, j) for i in range(l + 1) for j in range(l - i + 1)], dtype=np.int64).reshape(-1, 2).T
    return p1, p2, l - p1 - p2


def _powers(u: complex, k: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(log|u|^k, (u/|u|)^k) with 0^0 = 1 and 0^k = 0."""
    mag = abs(u)
    if mag == 0.0:
        return np.where(k == 0, 0.0, -np.inf), (k == 0).astype(complex)
    return k * np.log(mag), (u / mag) ** k


def _row_coefficients(l: int, row) -> np.ndarray:
    p1, p2, p3 = _compositions(l)
    log_mag = gammaln(l + 1) - gammaln(p1 + 1) - gammaln(p2 + 1) - gammaln(p3 + 1)
    phase = np.ones(p1.shape, dtype=complex)
    for u, p in zip(row, (p1, p2, p3)):
        lm, ph = _powers(complex(u), p)
        log_mag = log_mag + lm
        phase = phase * ph
    return np.exp(log_mag) * phase


def _log_sqrt_factorial(v: np.ndarray) -> np.ndarray:
    return 0.5 * gammaln(v + 1)


def multinomial_block(l: int, row_a, row_c) -> np.ndarray:
    T = 2 * l
    A = _row_coefficients(l, row_a)
    B = _row_coefficients(l, row_c).astype(np.clongdouble)
    p1, p2, _ = _compositions(l)
    acc = np.zeros((T + 1) * (T + 2) // 2, dtype=np.clongdouble)
    for a, i1, i2 in zip(A, p1, p2):
        if a == 0:
            continue
        v1 = i1 + p1
        v2 = i2 + p2
        idx = v1 * (T + 1) - (v1 * (v1 - 1)) // 2 + v2
        np.add.at(acc, idx, np.clongdouble(a) * B)
    n_a = np.repeat(np.arange(T + 1), np.arange(T + 1, 0, -1))
    n_b = np.concatenate([np.arange(T - k + 1) for k in range(T + 1)])
    n_c = T - n_a - n_b
    scale = np.exp(_log_sqrt_factorial(n_a) + _log_sqrt_factorial(n_b) + _log_sqrt_factorial(n_c) - gammaln(l + 1))
    return acc.astype(np.complex128) * scale


def multinomial_slice(l: int, nb: int, row_a, row_c) -> np.ndarray:
    T = 2 * l
    if nb < 0 or nb > T:
        return np.zeros(0, dtype=np.complex128)
    width = T - nb + 1
    A = _row_coefficients(l, row_a)
    B = _row_coefficients(l, row_c).astype(np.clongdouble)
    p1, p2, _ = _compositions(l)
    acc = np.zeros(width, dtype=np.clongdouble)
    for a, i1, i2 in zip(A, p1, p2):
        if a == 0 or i2 > nb or nb - i2 > l:
            continue
        sel = p2 == nb - i2
        np.add.at(acc, i1 + p1[sel], np.clongdouble(a) * B[sel])
    v1 = np.arange(width)
    scale = np.exp(
        _log_sqrt_factorial(v1) + _log_sqrt_factorial(np.full(width, nb)) + _log_sqrt_factorial(T - nb - v1) - gammaln(l + 1)
    )
    return acc.astype(np.complex128) * scale
