"""Fixed-sparsity 2D sparse FFT: location loops with voting, estimation loops
with per-coordinate median.

Each location loop hashes the image into bins under a fresh random
permutation, keeps the ``d_factor * k`` largest-magnitude bins, and
reverse-hashes them into candidate coordinates.  Coordinates seen in at
least ``vote_threshold`` loops survive.  Each estimation loop recovers a
coefficient for every survivor by reading its hashed bin, undoing the
permutation phase, and dividing by the window gain at its offset; the loops
are combined by componentwise median and near-zero medians are pruned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .corefft import as_complex_matrix, is_power_of_two
from .hashing import (
    FlatWindow,
    PermutationParams,
    WindowCache,
    _unhash_grid,
    binned_spectrum,
    draw_permutation,
)

__all__ = [
    "ConfigurationError",
    "SfftConfig",
    "seek_location_once",
    "vote_and_select",
    "estimate_once",
    "median_combine",
    "sfft2d",
]

# SparseSpectrum: dict mapping (i, j) -> complex coefficient

_WINDOWS = WindowCache()


class ConfigurationError(ValueError):
    """Raised when a transform configuration cannot be executed."""


def _nearest_pow2(v: float) -> int:
    lo = 1 << max(int(math.floor(math.log2(v))), 0) if v >= 1 else 1
    hi = lo * 2
    return lo if (v - lo) <= (hi - v) else hi


def default_bins(n: int, k: int) -> int:
    """Default bin count per axis for sparsity ``k`` at side ``n``.

    Power of 2 nearest to sqrt(min(n, 256) * k), clamped to [4, n].  Capping
    the side at 256 keeps the bin grid (and with it the window support,
    which scales with the bin count) from growing with the image once the
    grid is already large enough to make collisions rare.
    """
    if k < 1:
        k = 1
    b = _nearest_pow2(math.sqrt(min(n, 256) * k))
    return max(4, min(b, n))


@dataclass
class SfftConfig:
    """Inputs of the fixed-sparsity transform.

    ``b_bins`` and ``vote_threshold`` default from ``k`` and ``loops``;
    ``d_factor`` scales how many bins each location loop keeps.
    """

    n: int
    k: int
    loops: int = 8
    d_factor: int = 2
    vote_threshold: int | None = None
    b_bins: int | None = None
    window_delta_pass: float = 1e-3
    window_delta_stop: float = 1e-8
    gain_floor: float = 1e-6
    prune_rel: float = 1e-3

    def __post_init__(self):
        if not is_power_of_two(self.n):
            raise ConfigurationError(f"side {self.n} is not a power of 2")
        if self.k < 0 or self.k > self.n * self.n:
            raise ConfigurationError(f"sparsity {self.k} out of range for n={self.n}")
        if self.loops < 1:
            raise ConfigurationError("loops must be >= 1")
        if self.b_bins is None:
            self.b_bins = default_bins(self.n, self.k)
        b = self.b_bins
        if not is_power_of_two(b) or b > self.n or self.n % b != 0:
            raise ConfigurationError(f"bin count {b} must be a power of 2 dividing {self.n}")
        if self.vote_threshold is None:
            self.vote_threshold = (self.loops + 1) // 2
        if not 1 <= self.vote_threshold <= self.loops:
            raise ConfigurationError(
                f"vote_threshold {self.vote_threshold} outside [1, {self.loops}]"
            )
        if self.num_kept_bins > b * b:
            raise ConfigurationError(
                f"d_factor*k = {self.num_kept_bins} exceeds the {b}x{b} bin budget"
            )

    @property
    def num_kept_bins(self) -> int:
        return max(1, self.d_factor * self.k)

    def window(self, cache: WindowCache | None = None) -> FlatWindow:
        cache = cache or _WINDOWS
        return cache.get(
            self.n, self.b_bins, self.window_delta_stop, self.window_delta_pass
        )


def _top_bins(spectrum: np.ndarray, num: int) -> np.ndarray:
    """Flat indices of the ``num`` largest-magnitude bins, ties broken by
    lowest flat (row-major) index."""
    mags = np.abs(spectrum).ravel()
    order = np.argsort(-mags, kind="stable")
    return order[:num]


def seek_location_once(x, cfg: SfftConfig, window: FlatWindow, rng):
    """One location loop: hash, keep largest bins, reverse-hash.

    Returns the permutation used and an (m, 2) array of candidate
    coordinates.
    """
    rng = np.random.default_rng(rng)
    p = draw_permutation(cfg.n, rng)
    grid = binned_spectrum(x, p, window, cfg.b_bins)
    b = cfg.b_bins
    flat = _top_bins(grid.spectrum, cfg.num_kept_bins)
    # widen each bin's preimage by one boundary sample: a coefficient sitting
    # exactly between two bins can surface in either of them
    parts = [_unhash_grid(int(f) // b, int(f) % b, p, cfg.n, b, expand=1) for f in flat]
    keys = np.unique(np.concatenate([c[:, 0] * cfg.n + c[:, 1] for c in parts]))
    return p, np.stack([keys // cfg.n, keys % cfg.n], axis=1)


def vote_and_select(candidate_sets, cfg: SfftConfig) -> np.ndarray:
    """Coordinates appearing in at least ``vote_threshold`` candidate sets,
    as an (m, 2) array sorted in row-major order."""
    if len(candidate_sets) != cfg.loops:
        raise ValueError(f"expected {cfg.loops} candidate sets, got {len(candidate_sets)}")
    n = cfg.n
    keys = np.concatenate(
        [np.asarray(c[:, 0], dtype=np.int64) * n + np.asarray(c[:, 1], dtype=np.int64)
         for c in candidate_sets]
    )
    uniq, counts = np.unique(keys, return_counts=True)
    kept = uniq[counts >= cfg.vote_threshold]
    return np.stack([kept // n, kept % n], axis=1)


def _estimate_arrays(x, coords, p: PermutationParams, window: FlatWindow, cfg: SfftConfig):
    """Vectorized single-loop estimation: values and usability per coordinate."""
    n = cfg.n
    grid = binned_spectrum(x, p, window, cfg.b_bins)
    w = n // cfg.b_bins
    qi = (p.sigma1 * coords[:, 0]) % n
    qj = (p.sigma2 * coords[:, 1]) % n
    ui = (qi + w // 2) // w
    uj = (qj + w // 2) // w
    gains = window.freq_1d[(qi - w * ui) % n] * window.freq_1d[(qj - w * uj) % n]
    phase = np.exp(-2j * np.pi * ((p.tau1 * coords[:, 0] + p.tau2 * coords[:, 1]) % n) / n)
    vals = grid.spectrum[ui % cfg.b_bins, uj % cfg.b_bins] * phase
    usable = np.abs(gains) >= cfg.gain_floor
    vals = np.where(usable, vals / np.where(usable, gains, 1.0), 0.0)
    return vals, usable


def estimate_once(x, coords, p: PermutationParams, window: FlatWindow, cfg: SfftConfig):
    """One estimation loop over the given coordinates.

    Returns a dict mapping (i, j) to the recovered coefficient; coordinates
    whose window gain falls below ``gain_floor`` are left out of the dict
    for this loop (excluded from their median) rather than estimated badly.
    """
    coords = np.asarray(coords, dtype=np.int64).reshape(-1, 2)
    if coords.size == 0:
        return {}
    vals, usable = _estimate_arrays(x, coords, p, window, cfg)
    return {
        (int(coords[m, 0]), int(coords[m, 1])): complex(vals[m])
        for m in np.flatnonzero(usable)
    }


def median_combine(per_loop_estimates, coords=None) -> dict:
    """Componentwise (real/imag) median across loops, per coordinate.

    Coordinates with no usable estimate in any loop are dropped.
    """
    if coords is None:
        seen = {}
        for est in per_loop_estimates:
            for key in est:
                seen.setdefault(key, None)
        keys = list(seen)
    else:
        keys = [(int(i), int(j)) for i, j in np.asarray(coords).reshape(-1, 2)]
    out = {}
    for key in keys:
        vals = [est[key] for est in per_loop_estimates if key in est]
        if not vals:
            continue
        arr = np.asarray(vals)
        out[key] = complex(np.median(arr.real) + 1j * np.median(arr.imag))
    return out


def _prune(spectrum: dict, rel: float) -> dict:
    if not spectrum or rel <= 0:
        return dict(spectrum)
    peak = max(abs(v) for v in spectrum.values())
    floor = rel * peak
    return {key: v for key, v in spectrum.items() if abs(v) >= floor}


def _median_select(coords, loop_vals, loop_usable, k: int, prune_rel: float) -> dict:
    """Componentwise median across loops, then keep the k largest medians.

    The output is at most k-sparse: the error metric treats the result as a
    k-sparse approximation, and the cut discards voted-in phantom
    coordinates whose medians sit at leakage level.
    """
    vals = np.stack(loop_vals)
    usable = np.stack(loop_usable)
    counts = usable.sum(axis=0)
    alive = counts > 0
    if not alive.any():
        return {}
    data = np.where(usable, vals, np.nan)[:, alive]
    med = np.nanmedian(data.real, axis=0) + 1j * np.nanmedian(data.imag, axis=0)
    coords = coords[alive]
    mags = np.abs(med)
    if mags.shape[0] > k:
        # ties broken toward the lexicographically smaller coordinate
        order = np.lexsort((coords[:, 1], coords[:, 0], -mags))[:k]
        coords, med, mags = coords[order], med[order], mags[order]
    keep = mags >= prune_rel * mags.max() if prune_rel > 0 and mags.size else slice(None)
    return {
        (int(i), int(j)): complex(v)
        for (i, j), v in zip(coords[keep], med[keep])
    }


def sfft2d(x, cfg: SfftConfig, rng, *, cache: WindowCache | None = None) -> dict:
    """Full pipeline: location loops, vote, estimation loops, median, prune.

    ``rng`` may be a seed or a ``numpy.random.Generator``; per-loop streams
    are derived up front so results are reproducible for a given master
    seed.  Returns a dict mapping (i, j) to the estimated coefficient.
    """
    a = as_complex_matrix(x)
    if a.shape[0] != cfg.n:
        raise ConfigurationError(f"config built for n={cfg.n}, signal has n={a.shape[0]}")
    rng = np.random.default_rng(rng)
    window = cfg.window(cache)
    loop_rngs = [np.random.default_rng(int(rng.integers(2**63))) for _ in range(2 * cfg.loops)]

    candidate_sets = []
    for i in range(cfg.loops):
        _, cands = seek_location_once(a, cfg, window, loop_rngs[i])
        candidate_sets.append(cands)
    coords = vote_and_select(candidate_sets, cfg)
    if coords.shape[0] == 0:
        return {}

    loop_vals, loop_usable = [], []
    for i in range(cfg.loops):
        p = draw_permutation(cfg.n, loop_rngs[cfg.loops + i])
        vals, usable = _estimate_arrays(a, coords, p, window, cfg)
        loop_vals.append(vals)
        loop_usable.append(usable)
    return _median_select(coords, loop_vals, loop_usable, cfg.k, cfg.prune_rel)
