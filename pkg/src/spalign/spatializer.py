"""Mono-to-FOA spatialization and labeled dataset assembly.

Every output clip is exactly 10 s at 24 kHz (240000 samples per channel):
shorter material is repeated in whole copies and zero-padded, longer
material is chunked at a seeded random offset after convolution. Each mono
clip is placed at three positions inside one room, and every row of the
resulting manifest carries the exact direction label of its direct path.
"""

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import audioio, captions, room_sim
from .errors import EmptyClipError, SampleRateMismatchError
from .geometry import DirectionClass, cartesian_to_spherical, quantize_direction
from .room_sim import SRIR, Room

log = logging.getLogger(__name__)

SAMPLE_RATE = 24000
TARGET_SAMPLES = 240000
PEAK_CEILING = 0.95

MANIFEST_KEYS = (
    "clip_id", "source_id", "room_id", "wav_path", "azimuth_deg",
    "elevation_deg", "doa", "direction", "caption", "spatial_caption",
)


@dataclass
class MonoClip:
    samples: np.ndarray
    sample_rate: int
    source_id: str
    caption: str


@dataclass
class FoaClip:
    """Spatialized clip: (4, 240000) ACN samples plus its direction label."""

    samples: np.ndarray
    doa: np.ndarray
    direction: DirectionClass
    source_id: str
    room_id: str
    sample_rate: int = SAMPLE_RATE


def normalize_duration(clip, target: int = TARGET_SAMPLES, rng=None):
    """Force a clip to exactly ``target`` samples (last axis).

    Shorter clips are tiled in whole copies while the total stays within
    ``target`` and then zero-padded; longer clips keep a contiguous window
    whose offset comes from ``rng`` (offset 0 when no rng is given).
    """
    samples = np.asarray(clip.samples, dtype=np.float64)
    n = samples.shape[-1]
    if n == 0:
        raise EmptyClipError(f"clip {getattr(clip, 'source_id', '?')} has no samples")
    if n < target:
        reps = target // n
        tiled = np.concatenate([samples] * reps, axis=-1)
        pad = [(0, 0)] * (samples.ndim - 1) + [(0, target - tiled.shape[-1])]
        samples = np.pad(tiled, pad)
    elif n > target:
        offset = 0 if rng is None else int(rng.integers(0, n - target + 1))
        samples = samples[..., offset : offset + target]
    return replace(clip, samples=samples)


def fft_convolve(x: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Linear convolution of two 1-D signals via the FFT."""
    x = np.asarray(x, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    n = x.size + h.size - 1
    nfft = 1 << max(n - 1, 1).bit_length()
    return np.fft.irfft(np.fft.rfft(x, nfft) * np.fft.rfft(h, nfft), nfft)[:n]


def convolve_foa(x: MonoClip, h: SRIR, rng=None, room_id: str = "") -> FoaClip:
    """Spatialize a mono clip through an SRIR.

    The four channels share one FFT of the input; the result is duration-
    normalized and, only if its peak would exceed 0.95, scaled down to
    peak 0.95.
    """
    if x.sample_rate != h.sample_rate:
        raise SampleRateMismatchError(
            f"clip at {x.sample_rate} Hz vs SRIR at {h.sample_rate} Hz")
    mono = np.asarray(x.samples, dtype=np.float64)
    if mono.size == 0:
        raise EmptyClipError(f"clip {x.source_id} has no samples")
    n = mono.size + h.samples.shape[1] - 1
    nfft = 1 << max(n - 1, 1).bit_length()
    spec = np.fft.rfft(mono, nfft)
    wet = np.fft.irfft(spec[None, :] * np.fft.rfft(h.samples, nfft, axis=1), nfft, axis=1)[:, :n]

    clip = FoaClip(
        samples=wet,
        doa=h.doa.copy(),
        direction=quantize_direction(cartesian_to_spherical(h.doa).azimuth),
        source_id=x.source_id,
        room_id=room_id,
    )
    clip = normalize_duration(clip, rng=rng)
    peak = float(np.max(np.abs(clip.samples)))
    if peak > PEAK_CEILING:
        clip.samples = clip.samples * (PEAK_CEILING / peak)
    return clip


def _row_rng(seed: int, index: int):
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def _spatialize_one(args):
    """Worker: spatialize one mono clip at ``placements`` positions in one room."""
    index, clip, rooms, placements, seed, max_order, out_dir, caption_fn = args
    rng = _row_rng(seed, index)
    room_index = int(rng.integers(len(rooms)))
    room = rooms[room_index]
    room_id = f"room{room_index:04d}"
    mono = clip
    if mono.samples.shape[-1] < TARGET_SAMPLES:
        mono = normalize_duration(mono)  # repeat+pad before convolution
    rows, failures = [], []
    for p in range(placements):
        clip_id = f"{clip.source_id}__{room_id}_p{p}"
        try:
            src, sph = room_sim.sample_placement(room, rng)
            srir = room_sim.simulate_srir(room, src, room.mic_position, max_order)
            foa = convolve_foa(mono, srir, rng=rng, room_id=room_id)
            spatial_caption, _provenance = caption_fn(clip.caption, foa.direction)
            wav_path = f"{clip_id}.wav"
            audioio.write_wav(Path(out_dir) / wav_path, foa.samples, foa.sample_rate)
            rows.append({
                "clip_id": clip_id,
                "source_id": clip.source_id,
                "room_id": room_id,
                "wav_path": wav_path,
                "azimuth_deg": sph.azimuth,
                "elevation_deg": sph.elevation,
                "doa": foa.doa.tolist(),
                "direction": foa.direction.name,
                "caption": clip.caption,
                "spatial_caption": spatial_caption,
            })
        except Exception as exc:  # noqa: BLE001 - row failures must not kill the batch
            failures.append({"clip_id": clip_id, "error": f"{type(exc).__name__}: {exc}"})
    return index, rows, failures


def _template_caption(caption: str, direction: DirectionClass):
    return captions.fallback_caption(caption, direction), "template"


def build_dataset(clips, rooms, out_dir, placements_per_clip: int = 3,
                  seed: int = 0, max_order: int = 6, jobs: int = 1,
                  caption_fn=None):
    """Spatialize a corpus into ``out_dir`` and write ``manifest.jsonl``.

    Each clip gets ``placements_per_clip`` positions inside one seeded
    room. Rows are independent (per-row RNG streams), so results do not
    depend on ``jobs``. Failed rows are logged and returned, not raised.

    Returns (rows, failures).
    """
    if not clips:
        raise EmptyClipError("no input clips")
    if not rooms:
        raise ValueError("no rooms to place sources in")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    caption_fn = caption_fn or _template_caption
    tasks = [
        (i, clip, list(rooms), placements_per_clip, seed, max_order, str(out_dir), caption_fn)
        for i, clip in enumerate(clips)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_spatialize_one, tasks))
    else:
        results = [_spatialize_one(t) for t in tasks]
    results.sort(key=lambda r: r[0])

    rows, failures = [], []
    for _, r, f in results:
        rows.extend(r)
        failures.extend(f)
    for failure in failures:
        log.warning("row %s failed: %s", failure["clip_id"], failure["error"])
    write_manifest(rows, out_dir / "manifest.jsonl")
    return rows, failures


def write_manifest(rows, path) -> None:
    with open(path, "w") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")


def read_manifest(path):
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append(json.loads(line))
    return rows


def load_mono(path, source_id: str, caption: str) -> MonoClip:
    """Read one audio file as a 24 kHz mono clip (multichannel is averaged)."""
    samples, rate = audioio.read_audio(path)
    mono = samples.mean(axis=0) if samples.shape[0] > 1 else samples[0]
    if rate != SAMPLE_RATE:
        mono = audioio.resample(mono, rate, SAMPLE_RATE)
    return MonoClip(samples=mono, sample_rate=SAMPLE_RATE,
                    source_id=source_id, caption=caption)


def load_corpus(corpus_dir, captions_file):
    """Load a caption table (CSV or JSONL with file/caption columns) and its audio."""
    corpus_dir = Path(corpus_dir)
    entries = []
    captions_file = Path(captions_file)
    if captions_file.suffix.lower() == ".csv":
        import csv

        with open(captions_file, newline="") as fh:
            for record in csv.DictReader(fh):
                entries.append((record["file"], record["caption"]))
    else:
        with open(captions_file) as fh:
            for line in fh:
                line = line.strip()
                if line:
                    record = json.loads(line)
                    entries.append((record["file"], record["caption"]))
    clips = []
    for filename, caption in entries:
        source_id = Path(filename).stem
        clips.append(load_mono(corpus_dir / filename, source_id, caption))
    return clips
