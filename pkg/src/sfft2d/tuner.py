"""Sparsity detection by adaptive tuning of the bin count.

The tuner repeats the hash pipeline while resizing the bin grid from the
trajectory of local-maximum counts: if the count barely moves the grid
shrinks, if it swings the grid doubles, and a count change inside the
configured band means the grid fits the spectrum and tuning stops.  Counts
can only undershoot the true sparsity (nearby coefficients merge into one
maximum), so the detected sparsity is the largest count seen along the
trajectory.  A revisited (bins, count) pair after the grid has moved marks
an update cycle and also terminates tuning.

After detection the transform completes exactly like the fixed-sparsity
engine: vote-select the accumulated candidates, estimate under fresh
permutations, combine by median.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .corefft import as_complex_matrix, is_power_of_two
from .engine import (
    ConfigurationError,
    SfftConfig,
    _estimate_arrays,
    _median_select,
    _nearest_pow2,
    default_bins,
)
from .hashing import WindowCache, _unhash_grid, binned_spectrum, draw_permutation

__all__ = [
    "TunerConfig",
    "TunerState",
    "count_local_maxima",
    "update_bins",
    "detect_sparsity",
    "atsfft2d",
]

_WINDOWS = WindowCache()


@dataclass
class TunerConfig:
    """Adaptive tuning parameters.

    The shrink/keep/grow bands follow the ratio rule with defaults
    eps1 = 1/2, eps2 = 1, delta1 = 2%, delta2 = 5%.
    """

    b0: int = 16
    eps1: float = 0.5
    eps2: float = 1.0
    delta1: float = 0.02
    delta2: float = 0.05
    max_tuning_iters: int | None = None
    mag_floor: float = 1e-3
    window_delta_pass: float = 1e-3
    window_delta_stop: float = 1e-8
    gain_floor: float = 1e-6
    prune_rel: float = 1e-3

    def __post_init__(self):
        if not (0.0 < self.delta1 < self.delta2 < 1.0):
            raise ConfigurationError("need 0 < delta1 < delta2 < 1")
        if not (0.0 < self.eps1 < 1.0) or self.eps2 <= 0.0:
            raise ConfigurationError("need 0 < eps1 < 1 and eps2 > 0")
        if not is_power_of_two(self.b0):
            raise ConfigurationError(f"b0 {self.b0} is not a power of 2")

    def iters(self, n: int) -> int:
        if self.max_tuning_iters is not None:
            return self.max_tuning_iters
        return 2 * max(int(math.log2(n)), 1)


@dataclass
class TunerState:
    """Trajectory of the adaptive iteration."""

    history: list = field(default_factory=list)  # (bins, count, ratio or None)
    converged: bool = False
    detected_k: int = 0
    b_detect: int = 0
    b_estimate: int = 0
    vote_passes: int = 0

    @property
    def passes(self) -> int:
        return len(self.history)


def count_local_maxima(bins, mag_floor: float):
    """Count bins strictly above all 8 toroidal neighbors and above the
    magnitude floor.

    Returns the count and an (m, 2) array of bin coordinates in row-major
    order.
    """
    spectrum = np.asarray(bins)
    if spectrum.ndim != 2 or spectrum.shape[0] != spectrum.shape[1]:
        raise ValueError(f"expected a square bin grid, got {spectrum.shape}")
    if spectrum.shape[0] < 4:
        raise ValueError("bin grid must be at least 4x4")
    mags = np.abs(spectrum)
    peak = mags.max()
    mask = mags >= mag_floor * peak if peak > 0 else np.zeros_like(mags, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            mask &= mags > np.roll(np.roll(mags, di, axis=0), dj, axis=1)
    coords = np.argwhere(mask)
    return int(mask.sum()), coords


def update_bins(b: int, r: float, cfg: TunerConfig, n: int) -> int:
    """Three-branch bin update: shrink below delta1, hold inside the band,
    grow at or above delta2; result snapped to a power of 2 in [4, n]."""
    if r < cfg.delta1:
        scaled = b * cfg.eps1
    elif r < cfg.delta2:
        scaled = float(b)
    else:
        scaled = b * (1.0 + cfg.eps2)
    return max(4, min(_nearest_pow2(scaled), n))


def _change_ratio(count: int, prev: int) -> float:
    """|1 - k_i / k_{i-1}| with the zero conventions: two zero counts read
    as in-band (handled by the caller), a fresh nonzero after zero forces
    growth."""
    if prev == 0:
        return math.inf
    return abs(1.0 - count / prev)


def detect_sparsity(x, cfg: TunerConfig, rng, *, cache: WindowCache | None = None):
    """Adaptive tuning loop: hash, count local maxima, resize bins.

    Every pass also reverse-hashes the local-maximum bins and accumulates
    coordinate votes.  Returns the tuner state and the votes as a pair of
    arrays (coordinates (m, 2), counts (m,)).
    """
    a = as_complex_matrix(x)
    n = a.shape[0]
    cache = cache or _WINDOWS
    rng = np.random.default_rng(rng)
    max_iters = cfg.iters(n)
    b = max(4, min(cfg.b0, n))

    state = TunerState()
    seen: dict[tuple[int, int], int] = {}
    moved = False
    vote_chunks: list[np.ndarray] = []
    vote_passes = 0
    last_pass = None
    prev_count: int | None = None
    # a pass whose bin preimages would blanket most of the grid carries no
    # location information; skip its votes and keep memory bounded
    vote_budget = max(n * n // 8, 1 << 16)

    def run_pass(bins: int):
        nonlocal vote_passes, last_pass
        window = cache.get(n, bins, cfg.window_delta_stop, cfg.window_delta_pass)
        p = draw_permutation(n, rng)
        grid = binned_spectrum(a, p, window, bins)
        count, max_bins = count_local_maxima(grid.spectrum, cfg.mag_floor)
        last_pass = (p, max_bins, bins)
        w = n // bins
        if count > 0 and count * (w + 2) ** 2 <= vote_budget:
            vote_passes += 1
            for bi, bj in max_bins:
                coords = _unhash_grid(int(bi), int(bj), p, n, bins, expand=1)
                vote_chunks.append(coords[:, 0] * n + coords[:, 1])
        return count

    for _ in range(max_iters):
        count = run_pass(b)
        if prev_count is None:
            ratio = None
        elif prev_count == 0 and count == 0:
            state.history.append((b, count, 0.0))
            state.converged = True
            break
        else:
            ratio = _change_ratio(count, prev_count)
        state.history.append((b, count, ratio))

        if ratio is not None and cfg.delta1 <= ratio < cfg.delta2:
            state.converged = True
            break
        seen[(b, count)] = seen.get((b, count), 0) + 1
        if seen[(b, count)] >= 3 and moved:
            # the update rule cycles; by now the cycle's top grid has been
            # sampled more than once, so the count trajectory has settled
            state.converged = True
            break
        prev_count = count
        if ratio is not None:
            b_next = update_bins(b, ratio, cfg, n)
            moved = moved or b_next != b
            b = b_next

    counts = [c for _, c, _ in state.history]
    if counts and max(counts) > 0:
        # nearby coefficients can merge into one maximum at every grid the
        # trajectory visited; two confirmation passes above its top grid
        # give undercounted spectra a chance to separate
        b_top = max(bb for bb, _, _ in state.history)
        for b_conf in (2 * b_top, 4 * b_top):
            if b_conf <= n:
                count = run_pass(b_conf)
                state.history.append((b_conf, count, None))
                counts.append(count)

    state.detected_k = max(counts) if counts else 0
    state.b_detect = max((bb for bb, _, _ in state.history), default=b)
    # estimation uses the bin budget the fixed-sparsity engine would pick
    # for the detected sparsity, not the exploration grids
    state.b_estimate = default_bins(n, state.detected_k)
    state.vote_passes = vote_passes

    if not vote_chunks and last_pass is not None and state.detected_k > 0:
        # every pass exceeded the budget: fall back to the final pass
        p, max_bins, bb = last_pass
        for bi, bj in max_bins:
            coords = _unhash_grid(int(bi), int(bj), p, n, bb, expand=1)
            vote_chunks.append(coords[:, 0] * n + coords[:, 1])
        state.vote_passes = 1
    if vote_chunks:
        keys = np.concatenate(vote_chunks)
        uniq, tallies = np.unique(keys, return_counts=True)
        votes = (np.stack([uniq // n, uniq % n], axis=1), tallies)
    else:
        votes = (np.empty((0, 2), dtype=np.int64), np.empty(0, dtype=np.int64))
    return state, votes


def atsfft2d(x, cfg: TunerConfig, est_loops: int, rng, *, cache: WindowCache | None = None):
    """Sparse transform without prior sparsity: detect, vote, estimate.

    Returns the recovered spectrum dict and the tuning trajectory.  A
    non-converged detection is flagged in the state but the result is still
    produced from the best trajectory.
    """
    a = as_complex_matrix(x)
    n = a.shape[0]
    cache = cache or _WINDOWS
    rng = np.random.default_rng(rng)
    state, (vote_coords, vote_counts) = detect_sparsity(a, cfg, rng, cache=cache)
    if state.detected_k == 0 or vote_coords.shape[0] == 0:
        return {}, state

    threshold = (max(state.vote_passes, 1) + 1) // 2
    coords = vote_coords[vote_counts >= threshold]
    if coords.shape[0] == 0:
        return {}, state

    ecfg = SfftConfig(
        n=n,
        k=state.detected_k,
        loops=max(est_loops, 1),
        b_bins=state.b_estimate,
        window_delta_pass=cfg.window_delta_pass,
        window_delta_stop=cfg.window_delta_stop,
        gain_floor=cfg.gain_floor,
        prune_rel=cfg.prune_rel,
    )
    window = ecfg.window(cache)
    loop_vals, loop_usable = [], []
    for _ in range(ecfg.loops):
        p = draw_permutation(n, rng)
        vals, usable = _estimate_arrays(a, coords, p, window, ecfg)
        loop_vals.append(vals)
        loop_usable.append(usable)
    spectrum = _median_select(coords, loop_vals, loop_usable, state.detected_k, cfg.prune_rel)
    return spectrum, state
