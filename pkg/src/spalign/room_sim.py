"""Shoebox image-source simulator producing first-order Ambisonics SRIRs.

Channels use ACN order (W, Y, Z, X) with SN3D normalization. Every image
source is rendered with a 16-tap windowed-sinc fractional delay, 1/d
distance attenuation, and a linear-phase octave filterbank realizing the
per-surface frequency-dependent wall absorption. The direct-path direction
of arrival is stored alongside the impulse response as ground truth.
"""

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import audioio
from .errors import (
    CoincidentSourceMicError,
    RoomTooSmallError,
    SourceOutsideRoomError,
    ZeroVectorError,
)
from .geometry import SphericalDir, cartesian_to_spherical

SAMPLE_RATE = 24000
SPEED_OF_SOUND = 343.0
BAND_CENTERS_HZ = (125.0, 250.0, 500.0, 1000.0, 2000.0, 4000.0)
N_BANDS = len(BAND_CENTERS_HZ)
MIN_DISTANCE = 0.1
# Windowed-sinc fractional delay: 16 taps spanning +-8 samples.
SINC_HALF_WIDTH = 8
FILTER_TAPS = 511
AMPLITUDE_CUTOFF = 1e-3  # -60 dB relative to the direct path
MIN_PLACEMENT_MARGIN = 0.5

# Wall order for absorption rows: x-low, x-high, y-low, y-high, z-low, z-high.
WALL_NAMES = ("x_lo", "x_hi", "y_lo", "y_hi", "z_lo", "z_hi")


@dataclass
class Room:
    """Shoebox room: dimensions in meters plus per-wall, per-band absorption."""

    dims: np.ndarray
    absorption: np.ndarray
    seed: int = 0

    def __post_init__(self):
        self.dims = np.asarray(self.dims, dtype=float)
        if self.dims.shape != (3,) or not np.all(self.dims > 0.5):
            raise ValueError(f"room dims must be 3 positive lengths > 0.5 m, got {self.dims}")
        absorption = np.asarray(self.absorption, dtype=float)
        if absorption.ndim == 0:
            absorption = np.full((6, N_BANDS), float(absorption))
        if absorption.shape != (6, N_BANDS):
            raise ValueError(f"absorption must be (6, {N_BANDS}), got {absorption.shape}")
        if not np.all((absorption > 0.0) & (absorption <= 1.0)):
            raise ValueError("absorption coefficients must lie in (0, 1]")
        self.absorption = absorption

    @property
    def mic_position(self) -> np.ndarray:
        """Microphone sits at the room center."""
        return self.dims / 2.0


@dataclass
class ImageSource:
    position: np.ndarray
    order: int
    band_gains: np.ndarray = field(repr=False)


@dataclass
class SRIR:
    """Four-channel room impulse response with its direct-path DOA."""

    samples: np.ndarray  # (4, L), ACN order W, Y, Z, X
    sample_rate: int
    doa: np.ndarray
    mic_pos: np.ndarray
    src_pos: np.ndarray


def random_room(rng, dim_min=(4.0, 4.0, 2.5), dim_max=(9.0, 9.0, 4.0),
                absorption_min=0.2, absorption_max=0.9, seed=0) -> Room:
    """Draw a room with uniform dimensions and per-wall flat-ish absorption."""
    dims = rng.uniform(np.asarray(dim_min, dtype=float), np.asarray(dim_max, dtype=float))
    base = rng.uniform(absorption_min, absorption_max, size=(6, 1))
    tilt = rng.uniform(0.9, 1.1, size=(6, N_BANDS))
    absorption = np.clip(base * tilt, 1e-3, 1.0)
    return Room(dims=dims, absorption=absorption, seed=seed)


def _require_inside(room: Room, pos: np.ndarray, what: str) -> np.ndarray:
    pos = np.asarray(pos, dtype=float)
    if pos.shape != (3,):
        raise ValueError(f"{what} must be a 3-vector, got shape {pos.shape}")
    if np.any(pos <= 0.0) or np.any(pos >= room.dims):
        raise SourceOutsideRoomError(f"{what} {pos} outside room interior {room.dims}")
    return pos


def _axis_images(coord: float, length: float, max_order: int):
    """Per-axis mirror images as (position, order, low-wall count, high-wall count).

    Mirrored rooms tile the axis; the image in tile k is k*L + coord for even
    k and (k+1)*L - coord for odd k, reached through |k| wall reflections.
    """
    out = []
    for k in range(-max_order, max_order + 1):
        if k % 2 == 0:
            pos = k * length + coord
        else:
            pos = (k + 1) * length - coord
        n = abs(k)
        if k >= 0:
            hi, lo = (n + 1) // 2, n // 2
        else:
            lo, hi = (n + 1) // 2, n // 2
        out.append((pos, n, lo, hi))
    return out


def enumerate_image_sources(room: Room, src, max_order: int):
    """All mirror images of ``src`` with total reflection count <= max_order.

    Each image carries per-band gains: the product over walls of
    sqrt(1 - absorption) raised to that wall's bounce count.
    """
    src = _require_inside(room, src, "source")
    if max_order < 0:
        raise ValueError("max_order must be >= 0")
    reflect = np.sqrt(1.0 - room.absorption)  # (6, B)
    axes = [_axis_images(src[i], room.dims[i], max_order) for i in range(3)]
    images = []
    for px, nx, lox, hix in axes[0]:
        for py, ny, loy, hiy in axes[1]:
            if nx + ny > max_order:
                continue
            for pz, nz, loz, hiz in axes[2]:
                order = nx + ny + nz
                if order > max_order:
                    continue
                gains = (
                    reflect[0] ** lox * reflect[1] ** hix
                    * reflect[2] ** loy * reflect[3] ** hiy
                    * reflect[4] ** loz * reflect[5] ** hiz
                )
                images.append(ImageSource(
                    position=np.array([px, py, pz]),
                    order=order,
                    band_gains=gains,
                ))
    return images


def foa_encode_direction(direction) -> np.ndarray:
    """SN3D first-order panning gains in ACN order (W, Y, Z, X)."""
    direction = np.asarray(direction, dtype=float)
    norm = float(np.linalg.norm(direction))
    if norm < 1e-12:
        raise ZeroVectorError("cannot encode a zero direction")
    ux, uy, uz = (direction / norm).tolist()
    return np.array([1.0, uy, uz, ux])


@lru_cache(maxsize=4)
def _octave_filterbank(n_taps=FILTER_TAPS, sample_rate=SAMPLE_RATE):
    """Linear-phase complementary FIR bank, one row per octave band.

    Brick-wall band masks on the DFT grid with a shared linear phase,
    Hann-windowed in time. Rows sum exactly to a unit impulse at the
    group-delay center, so equal band gains reduce to a pure delay.
    """
    center = (n_taps - 1) // 2
    freqs = np.fft.rfftfreq(n_taps, d=1.0 / sample_rate)
    edges = [0.0]
    for c in BAND_CENTERS_HZ[1:]:
        edges.append(c / math.sqrt(2.0))
    edges.append(sample_rate / 2.0)
    phase = np.exp(-2j * np.pi * np.arange(len(freqs)) * center / n_taps)
    window = np.hanning(n_taps)
    bank = np.empty((N_BANDS, n_taps))
    for b in range(N_BANDS):
        mask = (freqs >= edges[b]) & (freqs < edges[b + 1])
        if b == N_BANDS - 1:
            mask |= freqs >= edges[b + 1]
        bank[b] = np.fft.irfft(mask.astype(float) * phase, n=n_taps) * window
    return bank


def _fractional_delay_kernel(frac: float) -> np.ndarray:
    """16-tap sinc interpolator for a delay of ``frac`` in [0, 1) samples."""
    offsets = np.arange(2 * SINC_HALF_WIDTH) - (SINC_HALF_WIDTH - 1) - frac
    window = np.where(
        np.abs(offsets) <= SINC_HALF_WIDTH,
        0.5 + 0.5 * np.cos(np.pi * offsets / SINC_HALF_WIDTH),
        0.0,
    )
    return np.sinc(offsets) * window


def simulate_srir(room: Room, src, mic, max_order: int = 6) -> SRIR:
    """Render the FOA room impulse response between ``src`` and ``mic``.

    Every image source contributes a fractional-delay impulse at
    distance/c, attenuated by 1/distance and its per-band reflection
    gains, panned by the SN3D gains of its arrival direction. Images more
    than 60 dB below the direct path are skipped.
    """
    src = _require_inside(room, src, "source")
    mic = _require_inside(room, mic, "microphone")
    direct_dist = float(np.linalg.norm(src - mic))
    if direct_dist < 1e-3:
        raise CoincidentSourceMicError(f"source and mic {direct_dist:.2e} m apart")

    images = enumerate_image_sources(room, src, max_order)
    bank = _octave_filterbank()
    fb_center = (FILTER_TAPS - 1) // 2
    direct_amp = 1.0 / max(direct_dist, MIN_DISTANCE)

    kept = []
    max_delay = 0.0
    for img in images:
        vec = img.position - mic
        dist = float(np.linalg.norm(vec))
        amp = 1.0 / max(dist, MIN_DISTANCE)
        if img.order > 0 and amp * float(img.band_gains.max()) < AMPLITUDE_CUTOFF * direct_amp:
            continue
        delay = dist / SPEED_OF_SOUND * SAMPLE_RATE
        max_delay = max(max_delay, delay)
        kept.append((img, vec, amp, delay))

    length = int(math.ceil(max_delay)) + SINC_HALF_WIDTH + fb_center + 2
    out = np.zeros((4, length))
    for img, vec, amp, delay in kept:
        n0 = int(math.floor(delay))
        kernel = _fractional_delay_kernel(delay - n0)
        start = n0 - (SINC_HALF_WIDTH - 1)
        if img.order > 0:
            kernel = np.convolve(kernel, img.band_gains @ bank)
            start -= fb_center
        gains4 = foa_encode_direction(vec)
        lo = max(start, 0)
        hi = min(length, start + kernel.size)
        if hi <= lo:
            continue
        out[:, lo:hi] += (amp * gains4)[:, None] * kernel[lo - start : hi - start]

    doa = (src - mic) / direct_dist
    return SRIR(samples=out, sample_rate=SAMPLE_RATE, doa=doa,
                mic_pos=mic.copy(), src_pos=src.copy())


def sample_placement(room: Room, rng):
    """Uniform source position with 0.5 m margins from walls and mic.

    Returns the position and its direction relative to the centered
    microphone. Raises RoomTooSmallError when no placement can satisfy
    the margins.
    """
    mic = room.mic_position
    lo = np.full(3, MIN_PLACEMENT_MARGIN)
    hi = room.dims - MIN_PLACEMENT_MARGIN
    if np.any(hi <= lo):
        raise RoomTooSmallError(f"margins leave no interior in room {room.dims}")
    corners = np.array([[x, y, z] for x in (lo[0], hi[0])
                        for y in (lo[1], hi[1]) for z in (lo[2], hi[2])])
    if np.max(np.linalg.norm(corners - mic, axis=1)) < MIN_PLACEMENT_MARGIN:
        raise RoomTooSmallError("every margin-respecting point is < 0.5 m from the mic")
    for _ in range(10000):
        src = rng.uniform(lo, hi)
        if np.linalg.norm(src - mic) >= MIN_PLACEMENT_MARGIN:
            return src, cartesian_to_spherical(src - mic)
    raise RoomTooSmallError("could not find a placement meeting the margins")


def save_srir(srir: SRIR, room: Room, wav_path) -> None:
    """Write an SRIR as 4-channel float WAV plus a JSON sidecar."""
    audioio.write_wav(wav_path, srir.samples, srir.sample_rate)
    sidecar = {
        "sample_rate": srir.sample_rate,
        "room_dims": room.dims.tolist(),
        "absorption": room.absorption.tolist(),
        "mic_pos": srir.mic_pos.tolist(),
        "src_pos": srir.src_pos.tolist(),
        "doa": srir.doa.tolist(),
        "channel_order": "ACN (W, Y, Z, X), SN3D",
    }
    with open(str(wav_path) + ".json", "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_srir(wav_path):
    """Read back a (SRIR, sidecar dict) pair written by ``save_srir``."""
    samples, rate = audioio.read_audio(wav_path)
    with open(str(wav_path) + ".json") as fh:
        sidecar = json.load(fh)
    srir = SRIR(
        samples=samples,
        sample_rate=rate,
        doa=np.asarray(sidecar["doa"], dtype=float),
        mic_pos=np.asarray(sidecar["mic_pos"], dtype=float),
        src_pos=np.asarray(sidecar["src_pos"], dtype=float),
    )
    return srir, sidecar
