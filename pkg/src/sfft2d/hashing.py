"""Frequency-bin hashing front end: permutation, flat window, fold, coordinate maps.

The hash pipeline takes an n-by-n image, permutes its spectrum by reindexing
the space domain, multiplies by a flat window with truncated space support,
folds the result into a b-by-b grid by summing aliased translates, and takes
the small dense FFT.  A frequency coordinate (i, j) lands in the bin returned
by :func:`hash_coord`; :func:`offset_coord` gives its residual from the bin
center (the index at which the window attenuates it) and :func:`unhash_bin`
enumerates every coordinate mapping to a bin.

The window's frequency response is a boxcar smoothed by a Gaussian: flat
near the bin center, below ``delta_stop`` beyond one bin width.  Its space
support is the shortest one whose truncation tail stays within the tolerance
budget, clamped to the full period when the tolerances demand it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import erfc
from statistics import NormalDist

import numpy as np

from .corefft import _fft1d_batch, as_complex_matrix, fft2d, is_power_of_two, mod_inverse

__all__ = [
    "PermutationParams",
    "FlatWindow",
    "BinGrid",
    "draw_permutation",
    "identity_permutation",
    "build_flat_window",
    "all_pass_window",
    "WindowCache",
    "permute_filter",
    "subsample_sum",
    "binned_spectrum",
    "hash_coord",
    "offset_coord",
    "unhash_bin",
]


@dataclass(frozen=True)
class PermutationParams:
    """Spectrum permutation parameters and cached modular inverses.

    ``sigma1``/``sigma2`` are odd (invertible mod ``n``); ``tau1``/``tau2``
    are arbitrary residues.  Applying the permutation in the space domain
    moves the spectral coefficient at (i, j) to (sigma1*i, sigma2*j) mod n
    and twists its phase without changing its magnitude.
    """

    n: int
    sigma1: int
    sigma2: int
    tau1: int
    tau2: int
    sigma1_inv: int = field(default=-1)
    sigma2_inv: int = field(default=-1)

    def __post_init__(self):
        if self.sigma1 % 2 == 0 or self.sigma2 % 2 == 0:
            raise ValueError("sigma1 and sigma2 must be odd")
        if self.sigma1_inv < 0:
            object.__setattr__(self, "sigma1_inv", mod_inverse(self.sigma1, self.n))
        if self.sigma2_inv < 0:
            object.__setattr__(self, "sigma2_inv", mod_inverse(self.sigma2, self.n))


def draw_permutation(n: int, rng: np.random.Generator) -> PermutationParams:
    """Draw sigma uniformly over odd residues and tau uniformly over [0, n)."""
    if not is_power_of_two(n):
        raise ValueError(f"side {n} is not a power of 2")
    sigma1 = int(2 * rng.integers(0, n // 2) + 1) if n > 1 else 1
    sigma2 = int(2 * rng.integers(0, n // 2) + 1) if n > 1 else 1
    tau1 = int(rng.integers(0, n))
    tau2 = int(rng.integers(0, n))
    return PermutationParams(n, sigma1, sigma2, tau1, tau2)


def identity_permutation(n: int) -> PermutationParams:
    return PermutationParams(n, 1, 1, 0, 0)


def _inv_q(p: float) -> float:
    # z such that the upper Gaussian tail Q(z) equals p
    return -NormalDist().inv_cdf(p)


def _phi(z: np.ndarray) -> np.ndarray:
    return np.array([0.5 * erfc(-v / np.sqrt(2.0)) for v in np.atleast_1d(z)])


@dataclass(frozen=True)
class FlatWindow:
    """Separable flat window: space samples, frequency response, band metadata.

    ``space_1d`` holds one period of the 1D prototype (zeros outside the
    truncated support); the 2D window is its outer product.  ``freq_1d`` is
    the DC-normalized frequency response, so ``freq_1d[off % n]`` is the gain
    a permuted coefficient at that offset from its bin center experiences.
    """

    n: int
    b_bins: int
    support_w: int
    half_support: int
    pass_halfwidth: int
    delta_pass: float
    delta_stop: float
    space_1d: np.ndarray
    freq_1d: np.ndarray

    def gain(self, off_i, off_j):
        """Frequency-response gain at a 2D offset from the bin center."""
        g = self.freq_1d
        return g[np.asarray(off_i) % self.n] * g[np.asarray(off_j) % self.n]

    def support_offsets(self) -> np.ndarray:
        """Signed space offsets covered by the truncated support."""
        if self.support_w >= self.n:
            return np.arange(self.n)
        h = self.half_support
        return np.arange(-h, h + 1)

    def space_block(self) -> np.ndarray:
        """The support_w-by-support_w dense block of window samples."""
        g = self.space_1d[self.support_offsets() % self.n]
        return np.outer(g, g)

    def freq_response_2d(self) -> np.ndarray:
        """Full n-by-n frequency response (outer product of the 1D response)."""
        return np.outer(self.freq_1d, self.freq_1d)


def build_flat_window(
    n: int,
    b: int,
    delta_stop: float = 1e-8,
    *,
    delta_pass: float = 1e-6,
    max_support: int | None = None,
) -> FlatWindow:
    """Construct the flat window for an (n, b) hash configuration.

    The target frequency response is a width-``n/b`` boxcar convolved with a
    Gaussian whose standard deviation is sized so that the response is flat
    within ``delta_pass`` up to half a bin from the center and falls below
    ``delta_stop`` beyond one bin width (both measured on the 2D outer
    product, relative to the DC gain).  The space-domain prototype is the
    inverse transform of that response, truncated to the shortest support
    whose discarded tail keeps the bounds intact; if no truncation satisfies
    them the window keeps its full period.

    ``max_support`` optionally rejects configurations whose tolerance-driven
    support would exceed the given budget.
    """
    if not is_power_of_two(n) or not is_power_of_two(b):
        raise ValueError("n and b must be powers of 2")
    if b > n or n % b != 0:
        raise ValueError(f"bin count {b} must divide side {n}")
    if not (0.0 < delta_pass < 0.5 and 0.0 < delta_stop < 0.5):
        raise ValueError("tolerances must lie in (0, 0.5)")
    if b == n:
        # one sample per bin: the identity filter is exactly flat on the
        # (single-point) pass region and exactly zero beyond it
        win = all_pass_window(n)
        return FlatWindow(**{**win.__dict__, "delta_pass": delta_pass, "delta_stop": delta_stop})

    w = n // b
    p = w // 2
    # quarter/eighth budgets leave room for the truncation tail and for the
    # doubling when two 1D factors combine in the outer product
    z_pass = _inv_q(delta_pass / 8)
    z_stop = _inv_q(delta_stop / 4)
    sigma_f = (w - p) / (z_pass + z_stop)
    beta = p + z_pass * sigma_f

    freq = np.arange(n)
    dist = np.minimum(freq, n - freq).astype(float)
    gamma = _phi((beta - dist) / sigma_f) + _phi((beta + dist) / sigma_f) - 1.0

    g_full = _fft1d_batch(gamma.astype(np.complex128), inverse=True).real / n
    g_full = 0.5 * (g_full + np.roll(g_full[::-1], 1))  # exact symmetry

    # shortest half-support whose discarded tail stays within budget
    eps_t = min(delta_pass / 8, delta_stop / 4) * gamma[0]
    order = np.argsort(dist, kind="stable")
    sorted_dist = dist[order]
    suffix = np.concatenate([np.cumsum(np.abs(g_full)[order][::-1])[::-1], [0.0]])
    half = n // 2
    for h in range(0, n // 2 + 1):
        tail = suffix[np.searchsorted(sorted_dist, h + 0.5)]
        if tail <= eps_t:
            half = h
            break
    support_w = min(2 * half + 1, n)
    if max_support is not None and support_w > max_support:
        raise ValueError(
            f"tolerances need support {support_w} > budget {max_support} at n={n}, b={b}"
        )

    if support_w >= n:
        g1 = g_full.copy()
    else:
        g1 = np.where(dist <= half, g_full, 0.0)
    g1 *= n / g1.sum()

    ghat = _fft1d_batch(g1.astype(np.complex128)).real / n
    ghat = ghat / ghat[0]
    ghat = 0.5 * (ghat + np.roll(ghat[::-1], 1))

    return FlatWindow(
        n=n,
        b_bins=b,
        support_w=support_w,
        half_support=half if support_w < n else n // 2,
        pass_halfwidth=p,
        delta_pass=delta_pass,
        delta_stop=delta_stop,
        space_1d=g1,
        freq_1d=ghat,
    )


def all_pass_window(n: int) -> FlatWindow:
    """Identity filter: all-ones space window, delta frequency response.

    Useful for permutation-only processing and for the degenerate b == n
    pipeline where every coordinate is its own bin.
    """
    freq = np.zeros(n)
    freq[0] = 1.0
    return FlatWindow(
        n=n,
        b_bins=n,
        support_w=n,
        half_support=n // 2,
        pass_halfwidth=0,
        delta_pass=1e-12,
        delta_stop=1e-12,
        space_1d=np.ones(n),
        freq_1d=freq,
    )


class WindowCache:
    """Memoizes windows per (n, b, delta_pass, delta_stop)."""

    def __init__(self):
        self._built: dict[tuple, FlatWindow] = {}

    def get(self, n, b, delta_stop=1e-8, delta_pass=1e-6) -> FlatWindow:
        key = (n, b, delta_pass, delta_stop)
        win = self._built.get(key)
        if win is None:
            win = build_flat_window(n, b, delta_stop, delta_pass=delta_pass)
            self._built[key] = win
        return win


def permute_filter(x, p: PermutationParams, window: FlatWindow) -> np.ndarray:
    """Window times permuted image, embedded in an n-by-n matrix.

    z[u, v] = G[u, v] * x[(sigma1*u + tau1) mod n, (sigma2*v + tau2) mod n]
    for (u, v) in the window support, zero elsewhere.  Only support_w**2
    input samples are read.
    """
    a = as_complex_matrix(x)
    n = a.shape[0]
    if window.n != n:
        raise ValueError(f"window built for n={window.n}, signal has n={n}")
    ts = window.support_offsets()
    upos = ts % n
    rows = (p.sigma1 * upos + p.tau1) % n
    cols = (p.sigma2 * upos + p.tau2) % n
    gvals = window.space_1d[upos]
    block = a[np.ix_(rows, cols)] * np.outer(gvals, gvals)
    z = np.zeros((n, n), dtype=np.complex128)
    z[np.ix_(upos, upos)] = block
    return z


def subsample_sum(z, n: int, b: int) -> np.ndarray:
    """Fold an n-by-n matrix into b-by-b by summing aliased translates.

    y[i, j] = sum_{u, v} z[i + b*u, j + b*v]; the DFT of y equals the
    (n/b)-strided subsample of the DFT of z.
    """
    a = as_complex_matrix(z)
    if a.shape[0] != n:
        raise ValueError(f"expected side {n}, got {a.shape[0]}")
    if not is_power_of_two(b) or n % b != 0:
        raise ValueError(f"bin count {b} must be a power of 2 dividing {n}")
    return a.reshape(n // b, b, n // b, b).sum(axis=(0, 2))


@dataclass(frozen=True)
class BinGrid:
    """DFT of the permuted, filtered, folded signal."""

    b_bins: int
    spectrum: np.ndarray


def binned_spectrum(x, p: PermutationParams, window: FlatWindow, b: int) -> BinGrid:
    """Fused hash pipeline: gather support, window, fold, small FFT.

    Equivalent to ``fft2d(subsample_sum(permute_filter(x, p, window)))`` but
    reads only the support block and never materializes the n-by-n
    intermediate.
    """
    a = as_complex_matrix(x)
    n = a.shape[0]
    if window.n != n or b != window.b_bins:
        raise ValueError("window does not match the requested (n, b)")
    if window.support_w >= n:
        ts = np.arange(n)
    else:
        h = window.half_support
        # extend to whole b-blocks starting at a multiple of b so the fold
        # reduces to a reshape; the window is zero on the padding offsets
        lo = -b * ((h + b - 1) // b)
        hi = b * ((h + b) // b)
        ts = np.arange(lo, hi)
    upos = ts % n
    rows = (p.sigma1 * upos + p.tau1) % n
    cols = (p.sigma2 * upos + p.tau2) % n
    gvals = window.space_1d[upos]
    block = a[np.ix_(rows, cols)]
    block = block * gvals[:, None]
    block = block * gvals[None, :]
    m = ts.shape[0]
    y = block.reshape(m // b, b, m // b, b).sum(axis=(0, 2))
    return BinGrid(b_bins=b, spectrum=fft2d(y))


def _hash_axis(q, n: int, b: int):
    """Bin index and signed offset for already-permuted frequencies ``q``."""
    w = n // b
    unwrapped = (np.asarray(q) + w // 2) // w
    off = np.asarray(q) - w * unwrapped
    return unwrapped % b, off


def hash_coord(i, j, p: PermutationParams, n: int, b: int):
    """Bin of frequency coordinate (i, j): round-half-up per-axis bucketing
    of the permuted frequency."""
    bi, _ = _hash_axis((p.sigma1 * np.asarray(i)) % n, n, b)
    bj, _ = _hash_axis((p.sigma2 * np.asarray(j)) % n, n, b)
    if np.isscalar(i) or (isinstance(i, int) and isinstance(j, int)):
        return int(bi), int(bj)
    return bi, bj


def offset_coord(i, j, p: PermutationParams, n: int, b: int):
    """Residual of the permuted frequency from its bin center, in
    (-n/(2b), n/(2b)] per axis."""
    _, oi = _hash_axis((p.sigma1 * np.asarray(i)) % n, n, b)
    _, oj = _hash_axis((p.sigma2 * np.asarray(j)) % n, n, b)
    if np.isscalar(i) or (isinstance(i, int) and isinstance(j, int)):
        return int(oi), int(oj)
    return oi, oj


def _unhash_axis(bin_idx: int, sigma_inv: int, n: int, b: int, expand: int = 0) -> np.ndarray:
    w = n // b
    if w == 1 and expand == 0:
        ts = np.array([bin_idx])
    else:
        lo = bin_idx * w - w // 2 - expand
        hi = bin_idx * w + (w + 1) // 2 + expand
        ts = np.arange(lo, min(hi, lo + n)) % n
    return (sigma_inv * ts) % n


def _unhash_grid(bin_i: int, bin_j: int, p: PermutationParams, n: int, b: int,
                 expand: int = 0) -> np.ndarray:
    ii = _unhash_axis(bin_i, p.sigma1_inv, n, b, expand)
    jj = _unhash_axis(bin_j, p.sigma2_inv, n, b, expand)
    out = np.empty((ii.shape[0] * jj.shape[0], 2), dtype=np.int64)
    out[:, 0] = np.repeat(ii, jj.shape[0])
    out[:, 1] = np.tile(jj, ii.shape[0])
    return out


def unhash_bin(bin_i: int, bin_j: int, p: PermutationParams, n: int, b: int) -> np.ndarray:
    """All frequency coordinates hashing to (bin_i, bin_j), as an (m, 2) array.

    Inverts the per-axis hash: collects the permuted frequencies rounding to
    the bin and maps them back through the cached inverses of sigma.
    """
    return _unhash_grid(bin_i, bin_j, p, n, b)
