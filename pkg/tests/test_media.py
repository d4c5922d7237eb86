import random

import numpy as np
import pytest
from PIL import Image

from screenwright.errors import (
    EmptyInput,
    InconsistentInputs,
    MissingFile,
    NoAudioTrack,
    TimestampOutOfRange,
    UnorderedInput,
    UnreadableMedia,
)
from screenwright.media import (
    FrameStat,
    RawFileAdapter,
    Shot,
    detect_shots,
    encode_png,
    extract_frames,
    frame_stats,
    l1_distance,
    luma_histogram,
    pick_adapter,
    probe,
    read_audio,
    sample_shot_frames,
    with_sampled_timestamps,
    write_raw_fixture,
)
from screenwright.telemetry import FRAME_EXTRACTIONS, counters

import io


def grid_frame(rng: random.Random, height=8, width=16) -> np.ndarray:
    """Random frame with 128 pixels, so histogram entries are k/128 and L1
    distances sit on a grid no reasonable threshold can collide with."""
    data = [rng.randrange(256) for _ in range(height * width)]
    return np.array(data, dtype=np.uint8).reshape(height, width)


def oracle_boundaries(stats, threshold):
    """Brute-force pairwise L1 scan, plain Python arithmetic."""
    cuts = []
    for prev, cur in zip(stats, stats[1:]):
        dist = sum(
            abs(float(a) - float(b))
            for a, b in zip(prev.luma_histogram, cur.luma_histogram)
        )
        if dist > threshold:
            cuts.append(cur.timestamp)
    return cuts


def make_stats(rng: random.Random, length: int, rate: float = 2.0):
    return [
        FrameStat(timestamp=i / rate, luma_histogram=luma_histogram(grid_frame(rng)))
        for i in range(length)
    ]


class TestHistogram:
    def test_histogram_is_normalized(self):
        rng = random.Random(7)
        hist = luma_histogram(grid_frame(rng))
        assert hist.shape == (64,)
        assert hist.min() >= 0
        assert abs(hist.sum() - 1.0) < 1e-12

    def test_uniform_frame_hits_one_bin(self):
        hist = luma_histogram(np.full((4, 4), 255, dtype=np.uint8))
        assert hist[-1] == 1.0
        assert hist.sum() == 1.0
        hist = luma_histogram(np.zeros((4, 4), dtype=np.uint8))
        assert hist[0] == 1.0

    def test_black_white_distance_is_two(self):
        black = luma_histogram(np.zeros((4, 4), dtype=np.uint8))
        white = luma_histogram(np.full((4, 4), 255, dtype=np.uint8))
        assert l1_distance(black, white) == pytest.approx(2.0)
        assert l1_distance(white, black) == pytest.approx(2.0)
        assert l1_distance(black, black) == 0.0


class TestDetectShots:
    def test_agrees_with_bruteforce_oracle(self):
        rng = random.Random(2024)
        for case in range(1000):
            length = rng.randint(1, 20)
            threshold = rng.choice([0.15, 0.4, 0.7, 1.3])
            stats = make_stats(rng, length)
            end_time = stats[-1].timestamp + 0.5
            shots = detect_shots(stats, threshold, end_time=end_time)
            expected_cuts = oracle_boundaries(stats, threshold)
            got_cuts = [shot.start for shot in shots[1:]]
            assert got_cuts == expected_cuts, f"case {case} disagrees with oracle"

    def test_shots_tile_the_stat_range(self):
        rng = random.Random(99)
        for _ in range(300):
            stats = make_stats(rng, rng.randint(1, 20))
            end_time = stats[-1].timestamp + rng.uniform(0.1, 2.0)
            shots = detect_shots(stats, 0.4, end_time=end_time)
            assert shots[0].start == stats[0].timestamp
            assert shots[-1].end == end_time
            for shot in shots:
                assert shot.start < shot.end
            for prev, cur in zip(shots, shots[1:]):
                assert prev.end == cur.start
            assert [shot.shot_id for shot in shots] == list(range(len(shots)))

    def test_threshold_monotonicity(self):
        rng = random.Random(4242)
        for _ in range(300):
            stats = make_stats(rng, rng.randint(2, 20))
            end_time = stats[-1].timestamp + 0.5
            loose = {s.start for s in detect_shots(stats, 0.15, end_time=end_time)[1:]}
            strict = {s.start for s in detect_shots(stats, 0.7, end_time=end_time)[1:]}
            assert strict <= loose

    def test_distance_equal_to_threshold_is_not_a_cut(self):
        # Two histograms exactly 0.5 apart; threshold 0.5 must not cut.
        a = np.zeros(64)
        a[0] = 1.0
        b = np.zeros(64)
        b[0] = 0.75
        b[1] = 0.25
        stats = [FrameStat(0.0, a), FrameStat(0.5, b)]
        assert l1_distance(a, b) == pytest.approx(0.5)
        assert len(detect_shots(stats, 0.5, end_time=1.0)) == 1
        assert len(detect_shots(stats, 0.49, end_time=1.0)) == 2

    def test_single_stat_is_one_shot(self):
        stats = make_stats(random.Random(1), 1)
        shots = detect_shots(stats, 0.4, end_time=2.0)
        assert len(shots) == 1
        assert (shots[0].start, shots[0].end) == (0.0, 2.0)

    def test_input_validation(self):
        rng = random.Random(5)
        stats = make_stats(rng, 4)
        with pytest.raises(EmptyInput):
            detect_shots([], 0.4)
        for bad in (0.0, -0.1, 2.5):
            with pytest.raises(ValueError):
                detect_shots(stats, bad)
        shuffled = [stats[1], stats[0], stats[2], stats[3]]
        with pytest.raises(UnorderedInput):
            detect_shots(shuffled, 0.4)
        with pytest.raises(InconsistentInputs):
            detect_shots(stats, 0.4, end_time=stats[-1].timestamp - 0.1)


class TestSampling:
    def test_samples_step_by_interval(self):
        shot = Shot(shot_id=0, start=2.0, end=10.0)
        assert sample_shot_frames(shot, 3.0) == [2.0, 5.0, 8.0]

    def test_short_shot_still_sampled_once(self):
        shot = Shot(shot_id=0, start=4.0, end=4.4)
        assert sample_shot_frames(shot, 3.0) == [4.0]

    def test_sample_at_end_is_excluded(self):
        shot = Shot(shot_id=0, start=0.0, end=6.0)
        assert sample_shot_frames(shot, 3.0) == [0.0, 3.0]

    def test_no_cumulative_drift(self):
        shot = Shot(shot_id=0, start=0.0, end=10.0)
        times = sample_shot_frames(shot, 0.1)
        assert len(times) == 100
        assert times[73] == pytest.approx(7.3, abs=1e-9)

    def test_with_sampled_timestamps(self):
        shots = detect_shots(make_stats(random.Random(3), 8), 0.4, end_time=4.0)
        filled = with_sampled_timestamps(shots, 1.0)
        assert [s.shot_id for s in filled] == [s.shot_id for s in shots]
        for shot in filled:
            assert shot.sampled_timestamps
            assert all(shot.start <= t < shot.end for t in shot.sampled_timestamps)


class TestRawAdapter:
    def make_clip(self, tmp_path, frames=None, fps=4.0, audio=None):
        if frames is None:
            frames = [np.full((4, 4), k * 10 % 256, dtype=np.uint8) for k in range(8)]
        return write_raw_fixture(tmp_path / "clip.rawvid", frames, fps, audio)

    def test_probe(self, tmp_path):
        path = self.make_clip(tmp_path)
        info = probe(path)
        assert info.duration == pytest.approx(2.0)
        assert info.frame_rate == 4.0
        assert info.has_audio is False
        assert len(info.content_hash) == 64

    def test_probe_sees_audio_sidecar(self, tmp_path):
        samples = (np.zeros(800)).astype(np.int16)
        path = self.make_clip(tmp_path, audio=(samples, 8000))
        assert probe(path).has_audio is True
        wav = read_audio(path)
        assert wav[:4] == b"RIFF"

    def test_read_audio_without_sidecar_raises(self, tmp_path):
        with pytest.raises(NoAudioTrack):
            read_audio(self.make_clip(tmp_path))

    def test_content_hash_tracks_bytes(self, tmp_path):
        a = probe(self.make_clip(tmp_path)).content_hash
        frames = [np.full((4, 4), 9, dtype=np.uint8) for _ in range(8)]
        b = probe(write_raw_fixture(tmp_path / "other.rawvid", frames, 4.0)).content_hash
        assert a != b

    def test_frames_at_closed_interval(self, tmp_path):
        frames = [np.full((4, 4), k, dtype=np.uint8) for k in range(8)]
        path = self.make_clip(tmp_path, frames=frames)
        adapter = RawFileAdapter()
        got = adapter.frames_at(path, [0.0, 1.0, 2.0])
        assert got[0][0, 0] == 0
        assert got[1][0, 0] == 4
        # the final instant maps onto the last frame
        assert got[2][0, 0] == 7
        for bad in (-0.01, 2.01):
            with pytest.raises(TimestampOutOfRange):
                adapter.frames_at(path, [bad])

    def test_truncated_file_rejected(self, tmp_path):
        path = self.make_clip(tmp_path)
        data = path.read_bytes()
        path.write_bytes(data[:-3])
        with pytest.raises(UnreadableMedia):
            probe(path)

    def test_garbage_header_rejected(self, tmp_path):
        path = tmp_path / "bad.rawvid"
        path.write_bytes(b"not a header at all\n" + b"x" * 64)
        with pytest.raises(UnreadableMedia):
            probe(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(MissingFile):
            probe(tmp_path / "absent.rawvid")

    def test_frame_stats_spacing(self, tmp_path):
        path = self.make_clip(tmp_path)  # 2 s at 4 fps
        stats = frame_stats(path, 2.0)
        assert [s.timestamp for s in stats] == [0.0, 0.5, 1.0, 1.5]

    def test_inconsistent_fixture_shapes_rejected(self, tmp_path):
        frames = [np.zeros((4, 4), dtype=np.uint8), np.zeros((2, 4), dtype=np.uint8)]
        with pytest.raises(InconsistentInputs):
            write_raw_fixture(tmp_path / "clip.rawvid", frames, 4.0)


class TestExtraction:
    def test_extract_frames_counts(self, tmp_path, clip):
        counters.reset()
        frames = extract_frames(clip, [0.0, 5.0, 11.9])
        assert len(frames) == 3
        assert counters.get(FRAME_EXTRACTIONS) == 3

    def test_encode_png_round_trips(self):
        frame = np.arange(64, dtype=np.uint8).reshape(8, 8)
        png = encode_png(frame)
        image = Image.open(io.BytesIO(png))
        assert image.size == (8, 8)
        assert np.array_equal(np.asarray(image), frame)


def test_pick_adapter_by_suffix(tmp_path):
    assert isinstance(pick_adapter("x.rawvid"), RawFileAdapter)
    from screenwright.media import FfmpegAdapter

    assert isinstance(pick_adapter("x.mp4"), FfmpegAdapter)
