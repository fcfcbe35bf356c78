"""Self-contained verification suite behind ``bench verify``.

Each check prints one PASS/FAIL line; the suite exercises the transform
identities, the hash/window invariants, the bin-update branch table, and a
small end-to-end recovery, without depending on the test harness.
"""

from __future__ import annotations

import numpy as np

from .corefft import dft2d_naive, fft2d, ifft2d, mod_inverse
from .engine import SfftConfig, sfft2d
from .hashing import (
    all_pass_window,
    build_flat_window,
    draw_permutation,
    hash_coord,
    permute_filter,
    subsample_sum,
    unhash_bin,
)
from .signals import error_metric, generate_planted
from .tuner import TunerConfig, atsfft2d, update_bins

__all__ = ["run_checks"]


def _relerr(a, b):
    scale = np.linalg.norm(b)
    return np.linalg.norm(a - b) / scale if scale > 0 else np.linalg.norm(a - b)


def _check_fft_oracle():
    rng = np.random.default_rng(7)
    for n in (4, 8, 16, 32):
        x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        if _relerr(fft2d(x), dft2d_naive(x)) > 1e-9:
            return False
    return True


def _check_round_trip():
    rng = np.random.default_rng(11)
    x = rng.normal(size=(32, 32)) + 1j * rng.normal(size=(32, 32))
    return _relerr(ifft2d(fft2d(x)), x) <= 1e-10


def _check_parseval():
    rng = np.random.default_rng(13)
    x = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
    lhs = np.sum(np.abs(fft2d(x)) ** 2)
    rhs = 16 * 16 * np.sum(np.abs(x) ** 2)
    return abs(lhs - rhs) <= 1e-6 * rhs


def _check_mod_inverse():
    return all(mod_inverse(a, 16) * a % 16 == 1 for a in range(1, 16, 2))


def _check_permutation_identity():
    n = 16
    rng = np.random.default_rng(17)
    x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    xhat = dft2d_naive(x)
    win = all_pass_window(n)
    for _ in range(5):
        p = draw_permutation(n, rng)
        phat = dft2d_naive(permute_filter(x, p, win))
        i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        twist = xhat * np.exp(2j * np.pi * ((p.tau1 * i + p.tau2 * j) % n) / n)
        if np.abs(phat[(p.sigma1 * i) % n, (p.sigma2 * j) % n] - twist).max() > 1e-9 * np.abs(xhat).max():
            return False
    return True


def _check_fold_identity():
    n, b = 16, 4
    rng = np.random.default_rng(19)
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    lhs = fft2d(subsample_sum(z, n, b))
    rhs = dft2d_naive(z)[:: n // b, :: n // b]
    return np.abs(lhs - rhs).max() <= 1e-9 * np.abs(rhs).max()


def _check_hash_round_trip():
    n, b = 32, 8
    rng = np.random.default_rng(23)
    for _ in range(3):
        p = draw_permutation(n, rng)
        for i in range(n):
            for j in range(n):
                bi, bj = hash_coord(i, j, p, n, b)
                cands = unhash_bin(bi, bj, p, n, b)
                if not ((cands[:, 0] == i) & (cands[:, 1] == j)).any():
                    return False
    return True


def _check_window_bands():
    for n, b in ((64, 8), (256, 16)):
        win = build_flat_window(n, b)
        g2 = win.freq_response_2d()
        dist = np.minimum(np.arange(n), n - np.arange(n))
        dd = np.maximum.outer(dist, dist)
        if np.abs(g2[dd <= win.pass_halfwidth] - 1.0).max() > win.delta_pass:
            return False
        if np.abs(g2[dd >= n // b]).max() > win.delta_stop:
            return False
    return True


def _check_bin_update_branches():
    cfg = TunerConfig()
    table = {0.0: 32, 0.019: 32, 0.02: 64, 0.049: 64, 0.05: 128, 1.0: 128}
    return all(update_bins(64, r, cfg, 1 << 12) == b for r, b in table.items())


def _check_recovery():
    sig = generate_planted(64, 4, seed=101)
    out = sfft2d(sig.x, SfftConfig(n=64, k=4), rng=202)
    return set(out) == set(sig.truth) and error_metric(out, sig.truth, 4) <= 1e-6


def _check_detection():
    sig = generate_planted(64, 2, seed=303)
    out, state = atsfft2d(sig.x, TunerConfig(b0=8), est_loops=8, rng=404)
    return state.detected_k == 2 and error_metric(out, sig.truth, 2) <= 1e-6


def _check_determinism():
    sig = generate_planted(64, 4, seed=505)
    a = sfft2d(sig.x, SfftConfig(n=64, k=4), rng=606)
    b = sfft2d(sig.x, SfftConfig(n=64, k=4), rng=606)
    return a == b


_CHECKS = (
    ("dense fft matches naive dft", _check_fft_oracle),
    ("fft/ifft round trip", _check_round_trip),
    ("parseval under the unscaled convention", _check_parseval),
    ("modular inverses mod 16", _check_mod_inverse),
    ("spectrum permutation phase twist", _check_permutation_identity),
    ("fold equals strided spectrum subsample", _check_fold_identity),
    ("hash/unhash round trip", _check_hash_round_trip),
    ("window pass/stop bands", _check_window_bands),
    ("bin update branch table", _check_bin_update_branches),
    ("sparse recovery, planted k=4", _check_recovery),
    ("sparsity detection, planted k=2", _check_detection),
    ("seeded determinism", _check_determinism),
)


def run_checks(out=print) -> bool:
    """Run every check, print one line each, return overall success."""
    all_ok = True
    for name, fn in _CHECKS:
        try:
            ok = fn()
        except Exception as exc:  # a crashed check is a failed check
            ok = False
            out(f"FAIL {name} ({type(exc).__name__}: {exc})")
            all_ok = False
            continue
        out(f"{'PASS' if ok else 'FAIL'} {name}")
        all_ok = all_ok and ok
    return all_ok
