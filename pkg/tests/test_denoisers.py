"""DWF, score thresholding, oracle scores and the dispatch entry point."""

from collections import deque

import numpy as np
import pytest

from src.denoisers import (
    DEFAULT_THRESHOLDS, DenoiserConfig, DenoiserVariant, Norm, ScoredStream, denoise, denoise_mask, dwf_denoise,
    dwf_mask, oracle_scores, threshold_denoise,
)
from src.errors import MissingLabelError
from src.labeled_metrics import confusion
from src.models import EventStream, Label, SensorGeometry


def reference_dwf(stream: EventStream, radius: int, size: int, support: int = 1, l1: bool = False) -> np.ndarray:
    """Plain re-scan of both FIFO windows for every event."""
    accepted: deque = deque(maxlen=size)
    rejected: deque = deque(maxlen=size)
    keep = []
    for x, y in zip(stream.x.tolist(), stream.y.tolist()):
        hits = 0
        for wx, wy in list(accepted) + list(rejected):
            d = abs(wx - x) + abs(wy - y) if l1 else max(abs(wx - x), abs(wy - y))
            hits += d <= radius
        ok = hits >= support
        keep.append(ok)
        (accepted if ok else rejected).append((x, y))
    return np.array(keep, dtype=bool)


class TestDenoiserConfig:

    def test_defaults(self):
        cfg = DenoiserConfig()
        assert (cfg.variant, cfg.dwf_search_radius, cfg.dwf_buffer_size, cfg.dwf_support_count) == (
            DenoiserVariant.DWF, 4, 200, 1)
        assert cfg.dwf_norm is Norm.CHEBYSHEV

    def test_accepts_strings(self):
        assert DenoiserConfig("threshold", threshold=0.3).variant is DenoiserVariant.SCORE_THRESHOLD

    @pytest.mark.parametrize("kwargs", [{"dwf_search_radius": 0}, {"dwf_buffer_size": 0}, {"threshold": 1.5}])
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(ValueError):
            DenoiserConfig(**kwargs)

    def test_radius_bounded_by_sensor(self, tiny_stream):
        with pytest.raises(ValueError):
            dwf_mask(tiny_stream, DenoiserConfig(dwf_search_radius=5))

    def test_default_thresholds(self):
        assert len(DEFAULT_THRESHOLDS) == 49
        assert DEFAULT_THRESHOLDS[0] == 0.02 and DEFAULT_THRESHOLDS[-1] == 0.98


class TestDwf:

    def test_first_event_rejected(self, tiny_stream):
        assert not dwf_mask(tiny_stream, DenoiserConfig(dwf_search_radius=4))[0]

    def test_same_pixel_second_event_accepted(self):
        s = EventStream.from_arrays(SensorGeometry(50, 50), [0, 1_000_000], [7, 7], [9, 9], [1, -1])
        np.testing.assert_array_equal(dwf_mask(s, DenoiserConfig(dwf_search_radius=1)), [False, True])

    def test_full_radius_accepts_all_but_first(self, rng, make_stream):
        s = make_stream(rng, 400)
        keep = dwf_mask(s, DenoiserConfig(dwf_search_radius=32))
        assert not keep[0]
        assert keep[1:].all()

    @pytest.mark.parametrize("radius,size,support,norm", [
        (2, 200, 1, Norm.CHEBYSHEV),
        (1, 8, 1, Norm.CHEBYSHEV),
        (3, 50, 2, Norm.CHEBYSHEV),
        (2, 30, 1, Norm.L1),
    ])
    def test_matches_reference(self, rng, make_stream, radius, size, support, norm):
        s = make_stream(rng, 1_500)
        cfg = DenoiserConfig(DenoiserVariant.DWF, radius, size, support, norm)
        expected = reference_dwf(s, radius, size, support, l1=norm is Norm.L1)
        np.testing.assert_array_equal(dwf_mask(s, cfg), expected)

    def test_output_is_subsequence(self, labeled_stream):
        out = dwf_denoise(labeled_stream, DenoiserConfig(dwf_search_radius=2))
        assert out.labeled
        confusion(labeled_stream, out)

    def test_rejects_other_variant(self, tiny_stream):
        with pytest.raises(ValueError):
            dwf_denoise(tiny_stream, DenoiserConfig(DenoiserVariant.PASSTHROUGH))


class TestThreshold:

    @pytest.fixture
    def five(self):
        s = EventStream.from_arrays(SensorGeometry(8, 8), [1, 2, 3, 4, 5], [0, 1, 2, 3, 4], [0] * 5, [1] * 5)
        return ScoredStream(s, [0.1, 0.5, 0.5, 0.9, 1.0])

    def test_keeps_score_at_or_above(self, five):
        np.testing.assert_array_equal(threshold_denoise(five, 0.5).t, [2, 3, 4, 5])

    def test_zero_keeps_all(self, five):
        assert len(threshold_denoise(five, 0.0)) == 5

    def test_above_max_removes_all(self):
        s = EventStream.from_arrays(SensorGeometry(8, 8), [1, 2], [0, 1], [0, 0], [1, 1])
        assert len(threshold_denoise(ScoredStream(s, [0.3, 0.94]), 0.95)) == 0

    def test_monotone(self, rng, make_stream):
        s = make_stream(rng, 1_000)
        scored = ScoredStream(s, rng.random(len(s)))
        previous = np.ones(len(s), dtype=bool)
        for tau in DEFAULT_THRESHOLDS:
            keep = scored.scores >= tau
            assert not np.any(keep & ~previous)
            previous = keep

    def test_scores_validated(self, tiny_stream):
        with pytest.raises(ValueError):
            ScoredStream(tiny_stream, [0.5] * 4)
        with pytest.raises(ValueError):
            ScoredStream(tiny_stream, [0.5, 0.5, 0.5, 0.5, 1.2])


class TestOracleScores:

    def test_sigma_zero_is_exact(self, labeled_stream):
        scored = oracle_scores(labeled_stream, 0.0, seed=1)
        np.testing.assert_array_equal(scored.scores, (labeled_stream.labels == Label.SIGNAL).astype(float))

    def test_sigma_zero_threshold_is_perfect(self, labeled_stream):
        kept = threshold_denoise(oracle_scores(labeled_stream, 0.0, seed=1), 0.5)
        counts = confusion(labeled_stream, kept)
        assert counts.fp == 0 and counts.fn == 0

    def test_deterministic(self, labeled_stream):
        a = oracle_scores(labeled_stream, 0.4, seed=7).scores
        b = oracle_scores(labeled_stream, 0.4, seed=7).scores
        np.testing.assert_array_equal(a, b)
        assert a.min() >= 0.0 and a.max() <= 1.0

    def test_needs_labels(self, tiny_stream):
        with pytest.raises(MissingLabelError):
            oracle_scores(tiny_stream, 0.1, seed=0)


class TestDispatch:

    def test_passthrough(self, tiny_stream):
        assert denoise(tiny_stream, DenoiserConfig(DenoiserVariant.PASSTHROUGH)) == tiny_stream

    def test_threshold_needs_scores(self, tiny_stream):
        with pytest.raises(ValueError):
            denoise_mask(tiny_stream, DenoiserConfig(DenoiserVariant.SCORE_THRESHOLD))

    def test_threshold_with_scores(self, tiny_stream):
        keep = denoise_mask(tiny_stream, DenoiserConfig(DenoiserVariant.SCORE_THRESHOLD, threshold=0.5),
                            scores=np.array([0.0, 0.6, 0.4, 0.5, 1.0]))
        np.testing.assert_array_equal(keep, [False, True, False, True, True])
