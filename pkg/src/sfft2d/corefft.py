"""Dense 2D FFT kernels and modular arithmetic helpers.

The forward transform follows the unscaled convention

    X[i, j] = sum_{u, v} x[u, v] * w ** (i*u + j*v),   w = exp(-2j*pi/n)

and the inverse carries the full ``1/n**2`` factor, so a forward/inverse
round trip is the identity.  ``fft2d`` is an iterative radix-2 row-column
decomposition with per-size twiddle tables; ``dft2d_naive`` evaluates the
defining quadruple sum and serves as the small-size correctness oracle and
nothing else.

All functions are pure and thread-safe; the plan cache is append-only.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "is_power_of_two",
    "as_complex_matrix",
    "fft2d",
    "ifft2d",
    "dft2d_naive",
    "mod_inverse",
]

# size -> (bit-reversal permutation, per-stage twiddle tables)
_PLANS: dict[int, tuple[np.ndarray, list[np.ndarray]]] = {}


def is_power_of_two(n: int) -> bool:
    """True for 1, 2, 4, 8, ..."""
    return n >= 1 and (n & (n - 1)) == 0


def as_complex_matrix(x, *, require_pow2: bool = True) -> np.ndarray:
    """Validate and return ``x`` as a square complex128 matrix.

    Raises ``ValueError`` for non-square input, NaN/Inf entries, or (by
    default) a side that is not a power of two.
    """
    a = np.asarray(x, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if require_pow2 and not is_power_of_two(a.shape[0]):
        raise ValueError(f"side {a.shape[0]} is not a power of 2")
    if not np.isfinite(a).all():
        raise ValueError("matrix contains NaN or Inf")
    return a


def _bit_reverse_indices(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    rev = np.zeros(n, dtype=np.intp)
    for i in range(1, n):
        rev[i] = (rev[i >> 1] >> 1) | ((i & 1) << (bits - 1))
    return rev


def _plan(n: int) -> tuple[np.ndarray, list[np.ndarray]]:
    plan = _PLANS.get(n)
    if plan is None:
        rev = _bit_reverse_indices(n)
        stages = []
        m = 2
        while m <= n:
            half = m // 2
            stages.append(np.exp(-2j * np.pi * np.arange(half) / m))
            m *= 2
        plan = (rev, stages)
        _PLANS[n] = plan
    return plan


def _fft1d_batch(a: np.ndarray, inverse: bool = False) -> np.ndarray:
    """Radix-2 DIT transform along the last axis of ``a`` (length power of 2).

    Returns a new array; no normalization is applied in either direction.
    """
    n = a.shape[-1]
    if n == 1:
        return a.copy()
    rev, stages = _plan(n)
    y = np.ascontiguousarray(a[..., rev])
    flat = y.reshape(-1, n)
    for tw in stages:
        half = tw.shape[0]
        m = 2 * half
        if inverse:
            tw = np.conj(tw)
        v = flat.reshape(flat.shape[0], n // m, m)
        t = v[..., half:] * tw
        u = v[..., :half]
        v[..., half:] = u - t
        v[..., :half] = u + t
    return y


def fft2d(x) -> np.ndarray:
    """Unscaled forward 2D DFT of a square power-of-2 matrix.

    Row-column decomposition: radix-2 along rows, then along columns.
    """
    a = as_complex_matrix(x)
    y = _fft1d_batch(a)
    y = _fft1d_batch(y.T).T
    return np.ascontiguousarray(y)


def ifft2d(xhat) -> np.ndarray:
    """Inverse of :func:`fft2d`, carrying the ``1/n**2`` normalization."""
    a = as_complex_matrix(xhat)
    n = a.shape[0]
    y = _fft1d_batch(a, inverse=True)
    y = _fft1d_batch(y.T, inverse=True).T
    return np.ascontiguousarray(y) / (n * n)


def dft2d_naive(x) -> np.ndarray:
    """Quadruple-sum evaluation of the defining 2D DFT.

    O(n^4); intended as a test oracle for sides <= 64.  Accepts any square
    side (not restricted to powers of two).
    """
    a = as_complex_matrix(x, require_pow2=False)
    n = a.shape[0]
    grid = np.arange(n)
    w = np.exp(-2j * np.pi * np.outer(grid, grid) / n)
    # unoptimized einsum keeps the literal sum-over-(u, v) structure
    return np.einsum("uv,iu,jv->ij", a, w, w, optimize=False)


def mod_inverse(a: int, n: int) -> int:
    """Inverse of ``a`` modulo the power-of-2 ``n``.

    ``a`` must be odd (coprime with ``n``).  Returns ``b`` in ``[0, n)``
    with ``a*b % n == 1``.
    """
    if not is_power_of_two(n):
        raise ValueError(f"modulus {n} is not a power of 2")
    a = a % n
    if n > 1 and a % 2 == 0:
        raise ValueError(f"{a} is even and has no inverse modulo {n}")
    return pow(a, -1, n)
