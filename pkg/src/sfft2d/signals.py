"""Synthetic exactly-sparse test signals with known spectra, and the error metric.

A planted signal has ``k`` unit-magnitude coefficients at distinct random
frequency coordinates (random phase by default); its space-domain samples
are synthesized directly from the sparse spectrum, which equals the inverse
transform of the dense ground-truth matrix.  Signals round-trip through a
small binary format for cross-implementation comparison.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .corefft import is_power_of_two

__all__ = [
    "PlantedSignal",
    "generate_planted",
    "error_metric",
    "save_signal",
    "load_signal",
]

_MAGIC = b"SF2D"
_HEADER = struct.Struct("<4sIIQ")


@dataclass(frozen=True)
class PlantedSignal:
    """Space-domain samples plus exact frequency-domain ground truth."""

    n: int
    k: int
    seed: int
    x: np.ndarray
    truth: dict | None  # (i, j) -> complex; None for signals loaded from disk


def generate_planted(n: int, k: int, seed: int, *, random_phase: bool = True) -> PlantedSignal:
    """Draw ``k`` distinct unit-magnitude spikes and synthesize the image.

    x[u, v] = (1/n**2) * sum_m c_m * exp(+2j*pi*(i_m*u + j_m*v)/n), the
    inverse transform of the spike spectrum.  Deterministic per seed.
    """
    if not is_power_of_two(n):
        raise ValueError(f"side {n} is not a power of 2")
    if k < 0 or k > n * n:
        raise ValueError(f"sparsity {k} out of range for side {n}")
    rng = np.random.default_rng(seed)
    if k == 0:
        return PlantedSignal(n, 0, seed, np.zeros((n, n), dtype=np.complex128), {})
    flat = rng.choice(n * n, size=k, replace=False)
    ii = flat // n
    jj = flat % n
    phases = rng.uniform(0.0, 2.0 * np.pi, size=k) if random_phase else np.zeros(k)
    coeffs = np.exp(1j * phases)
    grid = np.arange(n)
    ei = np.exp(2j * np.pi * np.outer(grid, ii) / n)  # (n, k)
    ej = np.exp(2j * np.pi * np.outer(jj, grid) / n)  # (k, n)
    x = (ei * coeffs) @ ej / (n * n)
    truth = {(int(i), int(j)): complex(c) for i, j, c in zip(ii, jj, coeffs)}
    return PlantedSignal(n, k, seed, x, truth)


def error_metric(approx: dict, exact, k: int) -> float:
    """Average L1 spectral error: (1/k) * sum over all coordinates of
    |approx(i, j) - exact(i, j)|, absent sparse entries reading as zero.

    ``exact`` may be a sparse dict or a dense matrix.  With ``k == 0`` the
    metric is 0 for an exact match and infinity otherwise.
    """
    if isinstance(exact, dict):
        keys = set(approx) | set(exact)
        total = sum(abs(approx.get(key, 0.0) - exact.get(key, 0.0)) for key in keys)
    else:
        dense = np.asarray(exact, dtype=np.complex128)
        total = float(np.abs(dense).sum())
        for (i, j), v in approx.items():
            total += abs(v - dense[i, j]) - abs(dense[i, j])
    if k <= 0:
        return 0.0 if total == 0.0 else float("inf")
    return float(total) / k


def save_signal(sig: PlantedSignal, path) -> None:
    """Write header (magic, n, k, seed) and row-major little-endian
    float64 re/im pairs."""
    x = np.ascontiguousarray(sig.x, dtype=np.complex128)
    pairs = np.empty((sig.n * sig.n, 2), dtype="<f8")
    pairs[:, 0] = x.real.ravel()
    pairs[:, 1] = x.imag.ravel()
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, sig.n, sig.k, sig.seed))
        fh.write(pairs.tobytes())


def load_signal(path) -> PlantedSignal:
    """Read a signal written by :func:`save_signal`.

    The ground truth is not stored in the file (it may come from another
    implementation), so ``truth`` is None.
    """
    with open(path, "rb") as fh:
        magic, n, k, seed = _HEADER.unpack(fh.read(_HEADER.size))
        if magic != _MAGIC:
            raise ValueError(f"bad magic {magic!r}")
        raw = np.frombuffer(fh.read(), dtype="<f8")
    if raw.size != 2 * n * n:
        raise ValueError(f"payload holds {raw.size} floats, expected {2 * n * n}")
    pairs = raw.reshape(n * n, 2)
    x = (pairs[:, 0] + 1j * pairs[:, 1]).reshape(n, n)
    return PlantedSignal(int(n), int(k), int(seed), x, None)
