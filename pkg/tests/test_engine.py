import numpy as np
import pytest

import sfft2d.engine as engine
from sfft2d.corefft import fft2d, ifft2d
from sfft2d.engine import (
    ConfigurationError,
    SfftConfig,
    default_bins,
    estimate_once,
    median_combine,
    seek_location_once,
    sfft2d,
    vote_and_select,
)
from sfft2d.hashing import all_pass_window, build_flat_window, identity_permutation
from sfft2d.signals import error_metric, generate_planted


def spike_signal(n, entries):
    xhat = np.zeros((n, n), dtype=complex)
    for (i, j), c in entries.items():
        xhat[i, j] = c
    return ifft2d(xhat)


class TestConfig:
    def test_default_bins_examples(self):
        assert default_bins(256, 8) == 32
        assert default_bins(2048, 8) == 32
        assert default_bins(256, 16) == 64
        assert default_bins(256, 2) == 16

    def test_bin_budget_error(self):
        with pytest.raises(ConfigurationError):
            SfftConfig(n=16, k=200)

    def test_threshold_range(self):
        with pytest.raises(ConfigurationError):
            SfftConfig(n=64, k=2, loops=4, vote_threshold=5)

    def test_default_threshold_is_half(self):
        assert SfftConfig(n=64, k=2, loops=8).vote_threshold == 4
        assert SfftConfig(n=64, k=2, loops=5).vote_threshold == 3


class TestSeekLocation:
    def test_single_spike_found(self, rng):
        n = 64
        cfg = SfftConfig(n=n, k=1, b_bins=8)
        win = cfg.window()
        x = spike_signal(n, {(9, 33): 1.0})
        hits = 0
        for _ in range(100):
            _, cands = seek_location_once(x, cfg, win, rng)
            if ((cands[:, 0] == 9) & (cands[:, 1] == 33)).any():
                hits += 1
        assert hits >= 99

    def test_two_close_spikes_separate(self, rng):
        n = 64
        cfg = SfftConfig(n=n, k=2, b_bins=8)
        win = cfg.window()
        x = spike_signal(n, {(20, 20): 1.0, (21, 22): 1.0})
        _, cands = seek_location_once(x, cfg, win, rng)
        got = {(int(i), int(j)) for i, j in cands}
        assert (20, 20) in got and (21, 22) in got

    def test_zero_signal_still_returns_candidates(self, rng):
        n = 64
        cfg = SfftConfig(n=n, k=2, b_bins=8)
        _, cands = seek_location_once(np.zeros((n, n)), cfg, cfg.window(), rng)
        assert cands.shape[0] >= 1


class TestVoting:
    def _sets(self, coords_lists):
        return [np.array(c, dtype=np.int64).reshape(-1, 2) for c in coords_lists]

    def test_unanimous_selected(self):
        cfg = SfftConfig(n=16, k=1, loops=4)
        sets = self._sets([[(3, 4)], [(3, 4)], [(3, 4)], [(3, 4)]])
        assert [(3, 4)] == [tuple(c) for c in vote_and_select(sets, cfg)]

    def test_below_threshold_excluded(self):
        cfg = SfftConfig(n=16, k=1, loops=8, vote_threshold=4)
        sets = self._sets([[(3, 4)]] * 3 + [[(5, 5)]] * 5)
        kept = {tuple(c) for c in vote_and_select(sets, cfg)}
        assert kept == {(5, 5)}

    def test_raising_threshold_monotone(self, rng):
        n = 16
        sets = self._sets(
            [rng.integers(0, n, size=(6, 2)) for _ in range(8)]
        )
        previous = None
        for thr in range(1, 9):
            cfg = SfftConfig(n=n, k=1, loops=8, vote_threshold=thr)
            kept = {tuple(c) for c in vote_and_select(sets, cfg)}
            if previous is not None:
                assert kept <= previous
            previous = kept


class TestEstimation:
    def test_degenerate_full_pipeline_exact(self, rng):
        # bins == side, identity permutation, all-pass window: the estimate
        # is the exact transform coefficient
        n = 16
        x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        xhat = fft2d(x)
        cfg = SfftConfig(n=n, k=3, b_bins=n)
        coords = np.array([(0, 0), (3, 5), (15, 1)])
        est = estimate_once(x, coords, identity_permutation(n), all_pass_window(n), cfg)
        for i, j in coords:
            assert abs(est[(i, j)] - xhat[i, j]) <= 1e-9

    def test_single_spike_magnitude(self, rng):
        n = 64
        cfg = SfftConfig(n=n, k=1, b_bins=8)
        win = cfg.window()
        x = spike_signal(n, {(9, 33): 1.0})
        for _ in range(20):
            p = engine.draw_permutation(n, rng)
            est = estimate_once(x, np.array([(9, 33)]), p, win, cfg)
            assert abs(abs(est[(9, 33)]) - 1.0) <= 1e-3

    def test_two_spikes_distinct_bins(self, rng):
        n = 64
        cfg = SfftConfig(n=n, k=2, b_bins=8)
        win = cfg.window()
        truth = {(5, 10): 1.0 + 0j, (40, 50): -0.5 + 0.5j}
        x = spike_signal(n, truth)
        p = identity_permutation(n)
        est = estimate_once(x, np.array(list(truth)), p, win, cfg)
        for coord, c in truth.items():
            assert abs(est[coord] - c) <= 1e-3 * abs(c)


class TestMedianCombine:
    def test_identical_estimates(self):
        loops = [{(1, 2): 3 + 4j}] * 5
        assert median_combine(loops) == {(1, 2): 3 + 4j}

    def test_rejects_outlier(self):
        loops = [{(0, 0): 1 + 0j}, {(0, 0): 1 + 0j}, {(0, 0): 100 + 0j}]
        assert median_combine(loops) == {(0, 0): 1 + 0j}

    def test_drops_unestimated_coordinates(self):
        loops = [{(0, 0): 1.0 + 0j}, {}]
        out = median_combine(loops, coords=np.array([(0, 0), (5, 5)]))
        assert out == {(0, 0): 1.0 + 0j}

    def test_one_corrupted_loop_per_coordinate(self, rng):
        coords = [(1, 1), (2, 2), (3, 3)]
        clean = {c: complex(rng.normal(), rng.normal()) for c in coords}
        loops = []
        for loop in range(5):
            est = dict(clean)
            bad = coords[loop % len(coords)]
            est[bad] = clean[bad] + complex(rng.normal(0, 50), rng.normal(0, 50))
            loops.append(est)
        combined = median_combine(loops)
        for c in coords:
            assert abs(combined[c] - clean[c]) <= 1e-12


class TestSfft2d:
    def test_planted_recovery(self):
        n, k = 256, 8
        good = 0
        for s in range(20):
            sig = generate_planted(n, k, seed=100 + s)
            out = sfft2d(sig.x, SfftConfig(n=n, k=k), rng=200 + s)
            if set(out) == set(sig.truth) and error_metric(out, sig.truth, k) <= 1e-6:
                good += 1
        assert good >= 19

    def test_zero_signal(self):
        out = sfft2d(np.zeros((64, 64)), SfftConfig(n=64, k=2), rng=1)
        assert all(abs(v) == 0 for v in out.values())
        assert error_metric(out, {}, 0) <= 1e-9

    def test_output_at_most_k_entries(self):
        sig = generate_planted(64, 4, seed=9)
        out = sfft2d(sig.x, SfftConfig(n=64, k=4), rng=10)
        assert len(out) <= 4

    def test_degenerate_exactness(self, rng, monkeypatch):
        # bins == side and a pinned identity permutation reduce the whole
        # pipeline to the dense transform at the selected coordinates
        n = 16
        monkeypatch.setattr(engine, "draw_permutation", lambda nn, _r: identity_permutation(nn))
        x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        cfg = SfftConfig(n=n, k=2, loops=1, b_bins=n, prune_rel=0.0)
        out = sfft2d(x, cfg, rng=3)
        xhat = fft2d(x)
        assert len(out) == 2
        for (i, j), v in out.items():
            assert abs(v - xhat[i, j]) <= 1e-9

    def test_seeded_determinism(self):
        sig = generate_planted(128, 4, seed=77)
        a = sfft2d(sig.x, SfftConfig(n=128, k=4), rng=42)
        b = sfft2d(sig.x, SfftConfig(n=128, k=4), rng=42)
        assert a == b

    def test_wrong_side_rejected(self):
        with pytest.raises(ConfigurationError):
            sfft2d(np.zeros((32, 32)), SfftConfig(n=64, k=2), rng=0)
