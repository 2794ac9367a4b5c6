"""Direction math shared across the pipeline.

Coordinates: x forward, y left, z up. Azimuth is measured counterclockwise
from +x in the horizontal plane, elevation upward from the plane. The
eight-way compass quantization puts "north" at azimuth 0 and proceeds
counterclockwise in 45-degree arcs.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteError, ZeroVectorError

DIRECTION_NAMES = (
    "north",
    "northwest",
    "west",
    "southwest",
    "south",
    "southeast",
    "east",
    "northeast",
)

_ZERO_NORM = 1e-12


@dataclass(frozen=True)
class SphericalDir:
    """Azimuth in [-180, 180) degrees, elevation in [-90, 90] degrees."""

    azimuth: float
    elevation: float


@dataclass(frozen=True)
class DirectionClass:
    """One of the eight compass arcs, identified by index 0..7."""

    index: int

    @property
    def name(self) -> str:
        return DIRECTION_NAMES[self.index]

    @classmethod
    def from_name(cls, name: str) -> "DirectionClass":
        return cls(DIRECTION_NAMES.index(name))


def spherical_to_cartesian(d: SphericalDir) -> np.ndarray:
    """Unit vector for the given azimuth/elevation."""
    az = math.radians(d.azimuth)
    el = math.radians(d.elevation)
    return np.array(
        [math.cos(el) * math.cos(az), math.cos(el) * math.sin(az), math.sin(el)]
    )


def cartesian_to_spherical(v) -> SphericalDir:
    """Inverse of ``spherical_to_cartesian`` up to vector scale.

    At the poles (|elevation| = 90) the azimuth is reported as 0.
    """
    v = np.asarray(v, dtype=float)
    norm = float(np.linalg.norm(v))
    if norm < _ZERO_NORM:
        raise ZeroVectorError("cannot take the direction of a zero vector")
    x, y, z = (v / norm).tolist()
    horizontal = math.hypot(x, y)
    az = 0.0 if horizontal < _ZERO_NORM else math.degrees(math.atan2(y, x))
    if az >= 180.0:
        az -= 360.0
    el = math.degrees(math.asin(max(-1.0, min(1.0, z))))
    return SphericalDir(azimuth=az, elevation=el)


def angular_distance(a, b) -> float:
    """Angle in degrees between two nonzero vectors; symmetric, in [0, 180]."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na < _ZERO_NORM or nb < _ZERO_NORM:
        raise ZeroVectorError("angular distance needs two nonzero vectors")
    cos = float(np.dot(a, b)) / (na * nb)
    return math.degrees(math.acos(max(-1.0, min(1.0, cos))))


def quantize_direction(azimuth_deg: float) -> DirectionClass:
    """Map an azimuth to its compass arc.

    Arcs are half-open with the lower edge inclusive, centered on multiples
    of 45 degrees, so azimuth 22.5 already belongs to "northwest".
    """
    if not math.isfinite(azimuth_deg):
        raise NonFiniteError(f"azimuth must be finite, got {azimuth_deg!r}")
    index = int(math.floor(((azimuth_deg + 22.5) % 360.0) / 45.0)) % 8
    return DirectionClass(index)
