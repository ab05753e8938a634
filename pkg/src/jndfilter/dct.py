"""Orthonormal 8x8 type-II DCT and the zigzag low/high-frequency partition.

The transform is the orthonormal (unitary) DCT-II, so Parseval holds exactly:
the coefficient energy of a block equals its pixel energy. A constant block
of value c maps to DC = 8c with all AC terms zero. Functions accept a single
(8, 8) block or any stack (..., 8, 8) and transform the trailing two axes.

For 8x8 blocks the direct separable matrix product is both the definition
and the fastest practical implementation under numpy's batched matmul, so no
FFT factorization is used.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

N = 8


def _basis_matrix() -> np.ndarray:
    k, n = np.mgrid[0:N, 0:N].astype(np.float64)
    m = np.sqrt(2.0 / N) * np.cos((2 * n + 1) * k * np.pi / (2 * N))
    m[0, :] = np.sqrt(1.0 / N)
    m.setflags(write=False)
    return m


DCT_MATRIX = _basis_matrix()


def dct8_forward(block: np.ndarray) -> np.ndarray:
    block = np.asarray(block, dtype=np.float64)
    _check_shape(block)
    return DCT_MATRIX @ block @ DCT_MATRIX.T


def dct8_inverse(coeffs: np.ndarray) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=np.float64)
    _check_shape(coeffs)
    return DCT_MATRIX.T @ coeffs @ DCT_MATRIX


def _check_shape(arr: np.ndarray) -> None:
    if arr.ndim < 2 or arr.shape[-2:] != (N, N):
        raise ValueError(f"expected trailing axes ({N}, {N}), got shape {arr.shape}")


def transform_matrix() -> np.ndarray:
    """The 64x64 matrix mapping a flattened block to its flattened coefficients."""
    basis = dct8_forward(np.eye(N * N).reshape(N * N, N, N))
    return basis.reshape(N * N, N * N).T


def _zigzag_order() -> tuple[tuple[int, int], ...]:
    # Walk anti-diagonals u+v = 0..14, alternating direction; standard JPEG scan.
    order = []
    for s in range(2 * N - 1):
        indices = [(u, s - u) for u in range(max(0, s - N + 1), min(s, N - 1) + 1)]
        if s % 2 == 0:
            indices.reverse()
        order.extend(indices)
    return tuple(order)


ZIGZAG_ORDER: tuple[tuple[int, int], ...] = _zigzag_order()

# position of each (u, v) in the zigzag scan
ZIGZAG_POSITION: np.ndarray = np.empty((N, N), dtype=np.intp)
for _pos, (_u, _v) in enumerate(ZIGZAG_ORDER):
    ZIGZAG_POSITION[_u, _v] = _pos
ZIGZAG_POSITION.setflags(write=False)
del _pos, _u, _v


@dataclass(frozen=True)
class FreqPartition:
    """Split of the 64 coefficient positions into LF (first K zigzag slots,
    DC included) and HF (the rest)."""

    k: int
    lf_mask: np.ndarray
    hf_mask: np.ndarray

    @property
    def lf_size(self) -> int:
        return int(np.count_nonzero(self.lf_mask))

    @property
    def hf_size(self) -> int:
        return int(np.count_nonzero(self.hf_mask))


def partition(k: int) -> FreqPartition:
    """Build the LF/HF partition for zigzag cutoff ``k`` (1..63)."""
    if not 1 <= k <= 63:
        raise ValueError(f"zigzag cutoff must be in 1..63, got {k}")
    lf = ZIGZAG_POSITION < k
    lf.setflags(write=False)
    hf = ~lf
    hf.setflags(write=False)
    return FreqPartition(k=k, lf_mask=lf, hf_mask=hf)
