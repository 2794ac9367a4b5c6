"""Multichannel audio file I/O.

WAV files are read and written through scipy (32-bit float output,
channels-first arrays in memory). FLAC input works when the optional
``soundfile`` package is installed.
"""

import numpy as np
from scipy.io import wavfile
from scipy.signal import resample_poly

_PCM_SCALE = {np.dtype("int16"): 32768.0, np.dtype("int32"): 2147483648.0}


def write_wav(path, samples, sample_rate: int) -> None:
    """Write a (channels, time) or (time,) float array as 32-bit float WAV."""
    samples = np.asarray(samples)
    if samples.ndim == 1:
        data = samples.astype(np.float32)
    else:
        data = samples.T.astype(np.float32)
    wavfile.write(str(path), int(sample_rate), data)


def read_audio(path):
    """Read WAV or FLAC audio as (samples, sample_rate).

    Returns a float64 array shaped (channels, time); integer PCM is scaled
    to [-1, 1).
    """
    path = str(path)
    if path.lower().endswith(".flac"):
        return _read_flac(path)
    rate, data = wavfile.read(path)
    data = np.atleast_2d(data.T if data.ndim > 1 else data)
    scale = _PCM_SCALE.get(data.dtype)
    if scale is not None:
        data = data.astype(np.float64) / scale
    elif data.dtype == np.dtype("uint8"):
        data = (data.astype(np.float64) - 128.0) / 128.0
    else:
        data = data.astype(np.float64)
    return data, int(rate)


def _read_flac(path):
    try:
        import soundfile
    except ImportError as exc:  # pragma: no cover - depends on extras
        raise ImportError(
            "reading FLAC requires the optional 'soundfile' package "
            "(pip install spalign[flac])"
        ) from exc
    data, rate = soundfile.read(path, dtype="float64", always_2d=True)
    return data.T, int(rate)


def resample(x: np.ndarray, sr_from: int, sr_to: int) -> np.ndarray:
    """Windowed-sinc polyphase resampling along the last axis."""
    if sr_from == sr_to:
        return np.asarray(x, dtype=np.float64)
    g = np.gcd(int(sr_from), int(sr_to))
    return resample_poly(np.asarray(x, dtype=np.float64), sr_to // g, sr_from // g, axis=-1)
