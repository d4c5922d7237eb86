"""Video probing, frame access and shot boundary detection.

All decoding goes through a small adapter interface so the pipeline can run
against two sources:

* ``FfmpegAdapter``: shells out to ``ffprobe`` / ``ffmpeg``. Probing uses
  ``ffprobe -print_format json -show_streams -show_format``; sampled frames
  come from ``ffmpeg -vf fps=...,format=gray -f rawvideo -``; single frames
  for captioning come from ``ffmpeg -ss <t> ... -vcodec png``; audio is
  demuxed to 16 kHz mono WAV on stdout.

* ``RawFileAdapter``: reads the uncompressed fixture format used by the test
  suite, so everything downstream is exercised without a codec stack. Layout
  is one ASCII header line ``"<width> <height> <fps> <frame_count>\\n"``
  followed by ``frame_count`` frames of ``width*height`` grayscale bytes,
  row-major. An optional audio track lives in a sidecar WAV at
  ``<path>.wav``; absence of the sidecar means no audio track.

Shot detection works on luma histograms: each sampled frame is reduced to a
64-bin normalized histogram, and a cut is declared wherever the L1 distance
between consecutive histograms exceeds the threshold. The returned shots
tile the sampled time range with no gaps or overlap.
"""

from __future__ import annotations

import dataclasses
import hashlib
import io
import json
import statistics
import struct
import subprocess
import wave
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np
from PIL import Image

from .errors import (
    DecoderFailure,
    EmptyInput,
    InconsistentInputs,
    MalformedDocument,
    MissingFile,
    NoAudioTrack,
    TimestampOutOfRange,
    UnorderedInput,
    UnreadableMedia,
)
from .telemetry import FRAME_EXTRACTIONS, counters

DEFAULT_STAT_RATE = 2.0  # histogram samples per second
DEFAULT_BINS = 64
DEFAULT_CUT_THRESHOLD = 0.4
DEFAULT_CAPTION_INTERVAL = 3.0  # seconds between captioned frames in a shot

RAW_SUFFIX = ".rawvid"


@dataclass(frozen=True)
class MediaInfo:
    duration: float
    frame_rate: float
    has_audio: bool
    content_hash: str

    def to_dict(self) -> dict:
        return {
            "duration": self.duration,
            "frame_rate": self.frame_rate,
            "has_audio": self.has_audio,
            "content_hash": self.content_hash,
        }

    @staticmethod
    def from_dict(data: dict) -> "MediaInfo":
        try:
            return MediaInfo(
                duration=float(data["duration"]),
                frame_rate=float(data["frame_rate"]),
                has_audio=bool(data["has_audio"]),
                content_hash=str(data["content_hash"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedDocument(f"bad media record: {exc}") from exc


@dataclass(frozen=True)
class FrameStat:
    """Timestamped luma histogram; bins are normalized to sum 1."""

    timestamp: float
    luma_histogram: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "luma_histogram", np.asarray(self.luma_histogram, dtype=np.float64)
        )


@dataclass(frozen=True)
class Shot:
    shot_id: int
    start: float
    end: float
    sampled_timestamps: tuple[float, ...] = ()

    @property
    def duration(self) -> float:
        return self.end - self.start


class DecoderAdapter(ABC):
    """Access to one media file's frames, metadata and audio."""

    @abstractmethod
    def probe(self, path: Path) -> MediaInfo: ...

    @abstractmethod
    def iter_gray_frames(self, path: Path, rate: float) -> Iterator[tuple[float, np.ndarray]]:
        """Yield (timestamp, HxW uint8 luma array) at ``rate`` samples/sec."""

    @abstractmethod
    def frames_at(self, path: Path, timestamps: Sequence[float]) -> list[np.ndarray]:
        """Decode one luma frame per timestamp in [0, duration]."""

    @abstractmethod
    def read_audio(self, path: Path) -> bytes:
        """Return the audio track as WAV bytes; raise NoAudioTrack if absent."""


def _hash_file(path: Path) -> str:
    hasher = hashlib.sha256()
    with path.open("rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            hasher.update(chunk)
    return hasher.hexdigest()


class RawFileAdapter(DecoderAdapter):
    """Decoder for the uncompressed fixture format (see module docstring)."""

    def _header(self, path: Path) -> tuple[int, int, float, int, int]:
        with path.open("rb") as handle:
            line = handle.readline(256)
            offset = handle.tell()
        fields = line.decode("ascii", "replace").split()
        if len(fields) != 4:
            raise UnreadableMedia(f"{path}: header must be 'W H FPS N', got {line!r}")
        try:
            width, height = int(fields[0]), int(fields[1])
            fps = float(fields[2])
            count = int(fields[3])
        except ValueError as exc:
            raise UnreadableMedia(f"{path}: bad header field: {exc}") from exc
        if width <= 0 or height <= 0 or fps <= 0 or count <= 0:
            raise UnreadableMedia(f"{path}: header values must be positive")
        expected = offset + width * height * count
        actual = path.stat().st_size
        if actual != expected:
            raise UnreadableMedia(f"{path}: expected {expected} bytes, file has {actual}")
        return width, height, fps, count, offset

    def probe(self, path: Path) -> MediaInfo:
        _, _, fps, count, _ = self._header(path)
        return MediaInfo(
            duration=count / fps,
            frame_rate=fps,
            has_audio=self._sidecar(path).exists(),
            content_hash=_hash_file(path),
        )

    def _sidecar(self, path: Path) -> Path:
        return path.with_name(path.name + ".wav")

    def _frame(self, handle, offset: int, size: int, index: int) -> bytes:
        handle.seek(offset + index * size)
        data = handle.read(size)
        if len(data) != size:
            raise UnreadableMedia("truncated frame data")
        return data

    def iter_gray_frames(self, path: Path, rate: float) -> Iterator[tuple[float, np.ndarray]]:
        width, height, fps, count, offset = self._header(path)
        size = width * height
        duration = count / fps
        with path.open("rb") as handle:
            k = 0
            while k / rate < duration:
                t = k / rate
                index = min(int(t * fps), count - 1)
                data = self._frame(handle, offset, size, index)
                yield t, np.frombuffer(data, dtype=np.uint8).reshape(height, width)
                k += 1

    def frames_at(self, path: Path, timestamps: Sequence[float]) -> list[np.ndarray]:
        width, height, fps, count, offset = self._header(path)
        size = width * height
        duration = count / fps
        frames = []
        with path.open("rb") as handle:
            for t in timestamps:
                if not 0.0 <= t <= duration:
                    raise TimestampOutOfRange(f"{t} outside [0, {duration}]")
                # The final instant maps onto the last frame.
                index = min(int(t * fps), count - 1)
                data = self._frame(handle, offset, size, index)
                frames.append(np.frombuffer(data, dtype=np.uint8).reshape(height, width))
        return frames

    def read_audio(self, path: Path) -> bytes:
        sidecar = self._sidecar(path)
        if not sidecar.exists():
            raise NoAudioTrack(f"{path} has no audio sidecar")
        return sidecar.read_bytes()


class FfmpegAdapter(DecoderAdapter):
    """Decoder backed by the ffmpeg/ffprobe binaries."""

    def __init__(self, ffmpeg: str = "ffmpeg", ffprobe: str = "ffprobe"):
        self.ffmpeg = ffmpeg
        self.ffprobe = ffprobe

    def _run(self, argv: list[str]) -> bytes:
        try:
            proc = subprocess.run(argv, capture_output=True, check=False)
        except OSError as exc:
            raise DecoderFailure(f"cannot launch {argv[0]}: {exc}") from exc
        if proc.returncode != 0:
            tail = proc.stderr.decode("utf-8", "replace")[-400:]
            raise DecoderFailure(f"{argv[0]} exited {proc.returncode}: {tail}")
        return proc.stdout

    def _probe_raw(self, path: Path) -> tuple[MediaInfo, int, int]:
        out = self._run([
            self.ffprobe, "-v", "error", "-print_format", "json",
            "-show_streams", "-show_format", str(path),
        ])
        try:
            meta = json.loads(out)
            video = next(s for s in meta["streams"] if s.get("codec_type") == "video")
            num, den = video["r_frame_rate"].split("/")
            fps = float(num) / float(den)
            duration = float(meta["format"]["duration"])
            width, height = int(video["width"]), int(video["height"])
        except (KeyError, StopIteration, ValueError, ZeroDivisionError) as exc:
            raise UnreadableMedia(f"{path}: unusable probe output: {exc}") from exc
        has_audio = any(s.get("codec_type") == "audio" for s in meta["streams"])
        info = MediaInfo(
            duration=duration,
            frame_rate=fps,
            has_audio=has_audio,
            content_hash=_hash_file(path),
        )
        return info, width, height

    def probe(self, path: Path) -> MediaInfo:
        info, _, _ = self._probe_raw(path)
        return info

    def iter_gray_frames(self, path: Path, rate: float) -> Iterator[tuple[float, np.ndarray]]:
        _, width, height = self._probe_raw(path)
        size = width * height
        argv = [
            self.ffmpeg, "-v", "error", "-i", str(path),
            "-vf", f"fps={rate},format=gray", "-f", "rawvideo", "-",
        ]
        try:
            proc = subprocess.Popen(argv, stdout=subprocess.PIPE, stderr=subprocess.PIPE)
        except OSError as exc:
            raise DecoderFailure(f"cannot launch {self.ffmpeg}: {exc}") from exc
        assert proc.stdout is not None
        k = 0
        try:
            while True:
                data = proc.stdout.read(size)
                if len(data) < size:
                    break
                yield k / rate, np.frombuffer(data, dtype=np.uint8).reshape(height, width)
                k += 1
        finally:
            proc.stdout.close()
            stderr = proc.stderr.read() if proc.stderr else b""
            if proc.wait() != 0:
                raise DecoderFailure(
                    f"{self.ffmpeg} exited {proc.returncode}: "
                    f"{stderr.decode('utf-8', 'replace')[-400:]}"
                )

    def frames_at(self, path: Path, timestamps: Sequence[float]) -> list[np.ndarray]:
        info = self.probe(path)
        frames = []
        for t in timestamps:
            if not 0.0 <= t <= info.duration:
                raise TimestampOutOfRange(f"{t} outside [0, {info.duration}]")
            # Seeking to the exact end yields no frame; back off to the last one.
            seek = min(t, max(0.0, info.duration - 1.0 / max(info.frame_rate, 1e-6)))
            out = self._run([
                self.ffmpeg, "-v", "error", "-ss", f"{seek:.6f}", "-i", str(path),
                "-frames:v", "1", "-f", "image2pipe", "-vcodec", "png", "-",
            ])
            with Image.open(io.BytesIO(out)) as img:
                frames.append(np.asarray(img.convert("L")))
        return frames

    def read_audio(self, path: Path) -> bytes:
        if not self.probe(path).has_audio:
            raise NoAudioTrack(f"{path} has no audio stream")
        return self._run([
            self.ffmpeg, "-v", "error", "-i", str(path),
            "-vn", "-acodec", "pcm_s16le", "-ar", "16000", "-ac", "1",
            "-f", "wav", "-",
        ])


def pick_adapter(path: str | Path) -> DecoderAdapter:
    if str(path).endswith(RAW_SUFFIX):
        return RawFileAdapter()
    return FfmpegAdapter()


def _resolve(path: str | Path) -> Path:
    resolved = Path(path)
    if not resolved.is_file():
        raise MissingFile(f"no such media file: {resolved}")
    return resolved


def probe(path: str | Path, adapter: DecoderAdapter | None = None) -> MediaInfo:
    resolved = _resolve(path)
    adapter = adapter or pick_adapter(resolved)
    return adapter.probe(resolved)


def luma_histogram(frame: np.ndarray, bins: int = DEFAULT_BINS) -> np.ndarray:
    """Normalized luma histogram; bins cover [0, 256) evenly."""
    counts, _ = np.histogram(frame, bins=bins, range=(0, 256))
    return counts.astype(np.float64) / frame.size


def l1_distance(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.abs(np.asarray(a) - np.asarray(b)).sum())


def frame_stats(
    path: str | Path,
    sampling_rate: float = DEFAULT_STAT_RATE,
    bins: int = DEFAULT_BINS,
    adapter: DecoderAdapter | None = None,
) -> list[FrameStat]:
    if sampling_rate <= 0:
        raise ValueError("sampling_rate must be positive")
    resolved = _resolve(path)
    adapter = adapter or pick_adapter(resolved)
    stats = [
        FrameStat(timestamp=t, luma_histogram=luma_histogram(frame, bins))
        for t, frame in adapter.iter_gray_frames(resolved, sampling_rate)
    ]
    if not stats:
        raise EmptyInput(f"{resolved}: no frames sampled")
    return stats


def detect_shots(
    stats: Sequence[FrameStat],
    threshold: float = DEFAULT_CUT_THRESHOLD,
    *,
    end_time: float | None = None,
) -> list[Shot]:
    """Cut wherever consecutive histograms differ by more than ``threshold``.

    The cut lands on the timestamp of the first sample past the change, and
    the returned shots partition the sampled time range with no gaps or
    overlap. ``end_time`` sets the exclusive end of the last shot (callers
    that know the media duration pass it); when omitted it is inferred as
    the last sample time plus the median sampling gap.
    """
    if not stats:
        raise EmptyInput("no frame stats")
    if not 0.0 < threshold <= 2.0:
        raise ValueError("threshold must be in (0, 2]; L1 of normalized histograms")
    times = [s.timestamp for s in stats]
    if any(later <= earlier for earlier, later in zip(times, times[1:])):
        raise UnorderedInput("frame stats must be strictly increasing in time")
    if end_time is None:
        gap = statistics.median(
            [later - earlier for earlier, later in zip(times, times[1:])]
        ) if len(times) > 1 else 1.0
        end_time = times[-1] + gap
    boundaries = [
        nxt.timestamp
        for prev, nxt in zip(stats, stats[1:])
        if l1_distance(prev.luma_histogram, nxt.luma_histogram) > threshold
    ]
    if end_time <= (boundaries[-1] if boundaries else times[0]):
        raise InconsistentInputs(f"end_time {end_time} does not cover the stat range")
    edges = [times[0], *boundaries, float(end_time)]
    return [Shot(shot_id=i, start=edges[i], end=edges[i + 1]) for i in range(len(edges) - 1)]


def sample_shot_frames(shot: Shot, interval: float = DEFAULT_CAPTION_INTERVAL) -> list[float]:
    """Caption timestamps for one shot: start, start+interval, ... < end.

    Always yields at least the shot start, so no shot goes caption-less.
    """
    if interval <= 0:
        raise ValueError("interval must be positive")
    timestamps = []
    k = 0
    while True:
        t = shot.start + k * interval
        if t >= shot.end and k > 0:
            break
        timestamps.append(t)
        if t >= shot.end:  # degenerate zero-length shot: the minimum-one rule
            break
        k += 1
    return timestamps


def with_sampled_timestamps(
    shots: Sequence[Shot], interval: float = DEFAULT_CAPTION_INTERVAL
) -> list[Shot]:
    return [
        dataclasses.replace(shot, sampled_timestamps=tuple(sample_shot_frames(shot, interval)))
        for shot in shots
    ]


def encode_png(frame: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(frame, mode="L").save(buf, format="PNG")
    return buf.getvalue()


def extract_frames(
    path: str | Path,
    timestamps: Sequence[float],
    adapter: DecoderAdapter | None = None,
) -> list[bytes]:
    """Decode and PNG-encode one frame per timestamp, order preserved."""
    resolved = _resolve(path)
    adapter = adapter or pick_adapter(resolved)
    frames = adapter.frames_at(resolved, timestamps)
    counters.increment(FRAME_EXTRACTIONS, len(frames))
    return [encode_png(frame) for frame in frames]


def read_audio(path: str | Path, adapter: DecoderAdapter | None = None) -> bytes:
    resolved = _resolve(path)
    adapter = adapter or pick_adapter(resolved)
    return adapter.read_audio(resolved)


def write_raw_fixture(
    path: str | Path,
    frames: Sequence[np.ndarray],
    fps: float,
    audio: tuple[np.ndarray, int] | None = None,
) -> Path:
    """Write a raw fixture clip (and optional 16-bit mono audio sidecar)."""
    if not frames:
        raise EmptyInput("fixture needs at least one frame")
    height, width = frames[0].shape
    out = Path(path)
    with out.open("wb") as handle:
        handle.write(f"{width} {height} {fps} {len(frames)}\n".encode("ascii"))
        for frame in frames:
            if frame.shape != (height, width):
                raise InconsistentInputs("all fixture frames must share one shape")
            handle.write(np.ascontiguousarray(frame, dtype=np.uint8).tobytes())
    if audio is not None:
        samples, sample_rate = audio
        pcm = np.asarray(samples, dtype=np.int16)
        with wave.open(str(out) + ".wav", "wb") as wav:
            wav.setnchannels(1)
            wav.setsampwidth(2)
            wav.setframerate(sample_rate)
            wav.writeframes(struct.pack(f"<{pcm.size}h", *pcm.tolist()))
    return out
