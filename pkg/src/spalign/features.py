"""Audio frontend: log-mel spectrograms and mel-projected intensity vectors.

Analysis runs at 24 kHz with a 1024-point Hann window and a hop of 240
samples; frames start at sample 0 with no padding. The 64-band mel
filterbank (HTK scale, 50 Hz to 12 kHz, peak-1 triangles) is shared by the
spectral and intensity paths.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import TooShortError, ZeroVectorError

SAMPLE_RATE = 24000
FRAME_LENGTH = 1024
HOP_LENGTH = 240
N_FREQS = FRAME_LENGTH // 2 + 1
N_MELS = 64
MEL_FMIN = 50.0
MEL_FMAX = 12000.0
POWER_FLOOR = 1e-10  # -100 dB
INTENSITY_EPS = 1e-12


@dataclass
class FeatureStack:
    """Per-clip features: dB log-mels (4, T, 64) and intensity maps (3, T, 64)."""

    logmel: np.ndarray
    intensity: np.ndarray

    @property
    def n_frames(self) -> int:
        return self.logmel.shape[1]


def frame_count(n_samples: int) -> int:
    return 1 + (n_samples - FRAME_LENGTH) // HOP_LENGTH


def stft(x) -> np.ndarray:
    """One-sided spectra, one row per frame: (T, 513) complex."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"stft expects a 1-D signal, got shape {x.shape}")
    if x.size < FRAME_LENGTH:
        raise TooShortError(f"need >= {FRAME_LENGTH} samples, got {x.size}")
    frames = np.lib.stride_tricks.sliding_window_view(x, FRAME_LENGTH)[::HOP_LENGTH]
    return np.fft.rfft(frames * np.hanning(FRAME_LENGTH), axis=-1)


def _hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=float) / 700.0)


def _mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=float) / 2595.0) - 1.0)


@lru_cache(maxsize=2)
def mel_filterbank(n_mels=N_MELS, fmin=MEL_FMIN, fmax=MEL_FMAX) -> np.ndarray:
    """Triangular HTK-mel filters on the rfft grid: (n_mels, 513)."""
    points = _mel_to_hz(np.linspace(_hz_to_mel(fmin), _hz_to_mel(fmax), n_mels + 2))
    freqs = np.fft.rfftfreq(FRAME_LENGTH, d=1.0 / SAMPLE_RATE)
    bank = np.zeros((n_mels, freqs.size))
    for m in range(n_mels):
        left, center, right = points[m], points[m + 1], points[m + 2]
        rising = (freqs - left) / (center - left)
        falling = (right - freqs) / (right - center)
        bank[m] = np.clip(np.minimum(rising, falling), 0.0, 1.0)
    return bank


def logmel(spec: np.ndarray) -> np.ndarray:
    """64-band log-mel energies in dB from one-sided spectra: (T, 64)."""
    power = np.abs(np.asarray(spec)) ** 2
    mel = power @ mel_filterbank().T
    return 10.0 * np.log10(np.maximum(mel, POWER_FLOOR))


def intensity_vectors(foa_spec: np.ndarray) -> np.ndarray:
    """Mel-projected acoustic intensity from 4 aligned spectra (W, Y, Z, X).

    Per time-frequency bin: I = Re{conj(W) * (X, Y, Z)}, normalized to at
    most unit length, then projected through the shared mel filterbank.
    Returns (3, T, 64) ordered (x, y, z).
    """
    foa_spec = np.asarray(foa_spec)
    if foa_spec.ndim != 3 or foa_spec.shape[0] != 4:
        raise ValueError(f"expected (4, T, {N_FREQS}) spectra, got {foa_spec.shape}")
    w = np.conj(foa_spec[0])
    raw = np.real(np.stack([w * foa_spec[3], w * foa_spec[1], w * foa_spec[2]]))
    norm = np.linalg.norm(raw, axis=0, keepdims=True)
    unit = raw / (norm + INTENSITY_EPS)
    return unit @ mel_filterbank().T


def extract_features(clip) -> FeatureStack:
    """Feature stack for a duration-normalized FOA clip (or raw (4, T) array)."""
    samples = np.asarray(getattr(clip, "samples", clip), dtype=np.float64)
    if samples.ndim != 2 or samples.shape[0] != 4:
        raise ValueError(f"expected 4-channel audio, got shape {samples.shape}")
    specs = np.stack([stft(ch) for ch in samples])
    return FeatureStack(
        logmel=np.stack([logmel(s) for s in specs]),
        intensity=intensity_vectors(specs),
    )


def estimate_doa(stack: FeatureStack) -> np.ndarray:
    """Energy-weighted mean intensity direction over all frames and bands.

    Weights are the linear-power W-channel mel energies, so silent bins do
    not pull the estimate.
    """
    weights = 10.0 ** (stack.logmel[0] / 10.0)
    v = np.einsum("tm,ctm->c", weights, stack.intensity)
    norm = float(np.linalg.norm(v))
    if norm < 1e-12:
        raise ZeroVectorError("no intensity energy to estimate a direction from")
    return v / norm
