"""Q1.31 fixed-point angles and the quadratic sine approximation.

Angles are stored as 32-bit two's-complement integers scaled so that the
full range [-2^31, 2^31) maps onto [-pi, pi). Because sine and cosine are
periodic over exactly that interval, wrapping overflow is harmless: any
add that overflows lands on the correct angle.

The sine approximation is the parabola 4*(v - sign(v)*v^2) on v in [-1, 1)
(v in units of pi). It is exact at v in {-1, -0.5, 0, 0.5} and its maximum
absolute error against sin(v*pi) is about 0.056. Cosine is the same
parabola evaluated after a wrapping quarter-turn shift, so its error
profile is the sine profile translated by pi/2.
"""

import math
from dataclasses import dataclass

import numpy as np

_SCALE = float(2**31)
_MASK = 0xFFFFFFFF
QUARTER_TURN = 0x40000000  # pi/2


def _wrap32(raw: int) -> int:
    """Reduce an integer to two's-complement int32 range."""
    raw &= _MASK
    return raw - (1 << 32) if raw >= (1 << 31) else raw


@dataclass(frozen=True)
class Q31Angle:
    """A wrapping fixed-point angle; `raw / 2**31` is the angle in units of pi."""

    raw: int

    def __post_init__(self):
        object.__setattr__(self, "raw", _wrap32(int(self.raw)))

    @property
    def value(self) -> float:
        """Angle in units of pi, in [-1, 1)."""
        return self.raw / _SCALE

    @property
    def radians(self) -> float:
        return self.value * math.pi

    def __add__(self, other: "Q31Angle") -> "Q31Angle":
        return Q31Angle(self.raw + other.raw)

    def __sub__(self, other: "Q31Angle") -> "Q31Angle":
        return Q31Angle(self.raw - other.raw)

    def __neg__(self) -> "Q31Angle":
        return Q31Angle(-self.raw)


def q31_encode_angle(theta: float) -> Q31Angle:
    """Encode an angle in radians, wrapping into [-pi, pi)."""
    if not math.isfinite(theta):
        raise ValueError(f"non-finite angle: {theta}")
    # wrap theta/pi into [-1, 1); fmod keeps full precision for large inputs
    t = math.fmod(theta / math.pi, 2.0)
    if t >= 1.0:
        t -= 2.0
    elif t < -1.0:
        t += 2.0
    return Q31Angle(round(t * _SCALE))  # round to 2^31 wraps to -2^31


def _parabola(v):
    # 4*(v - sign(v)*v^2), vectorized; exact 1.0 peak at |v| = 0.5
    return 4.0 * (v - np.sign(v) * v * v)


def approx_sin(x: Q31Angle) -> float:
    """Quadratic approximation of sin(x); |error| <= 0.06 everywhere."""
    return float(_parabola(x.raw / _SCALE))


def approx_cos(x: Q31Angle) -> float:
    """approx_sin after a wrapping quarter-turn shift."""
    return approx_sin(x + Q31Angle(QUARTER_TURN))


def approx_sin_raw(raw) -> np.ndarray:
    """Vectorized approx_sin over int32 raw angle values."""
    v = np.asarray(raw, dtype=np.int32).astype(np.float64) / _SCALE
    return _parabola(v)


def approx_cos_raw(raw) -> np.ndarray:
    """Vectorized approx_cos over int32 raw angle values."""
    shifted = np.asarray(raw, dtype=np.int32) + np.int32(QUARTER_TURN)
    return approx_sin_raw(shifted)


def encode_normal(n) -> tuple[Q31Angle, Q31Angle]:
    """Encode a unit vector as (azimuth, elevation) fixed-point angles.

    Azimuth is measured from +X about +Z; elevation from the XY-plane.
    At the poles the azimuth is fixed to zero so encoding is bit-exact
    deterministic.
    """
    n = np.asarray(n, dtype=np.float64).reshape(3)
    norm = float(np.linalg.norm(n))
    if abs(norm - 1.0) > 1e-6:
        raise ValueError(f"normal must be unit length, got |n| = {norm}")
    z = min(1.0, max(-1.0, float(n[2])))
    if abs(z) > 1.0 - 1e-12:
        azimuth = 0.0
    else:
        azimuth = math.atan2(float(n[1]), float(n[0]))
    elevation = math.asin(z)
    return q31_encode_angle(azimuth), q31_encode_angle(elevation)


def _q31_encode_radians_array(theta: np.ndarray) -> np.ndarray:
    t = np.fmod(theta / np.pi, 2.0)
    t = np.where(t >= 1.0, t - 2.0, t)
    t = np.where(t < -1.0, t + 2.0, t)
    # int64 -> int32 cast wraps a rounded 2^31 onto -2^31, like the scalar path
    return np.round(t * _SCALE).astype(np.int64).astype(np.int32)


def encode_normal_raw(normals) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized encode_normal; returns (azimuth, elevation) int32 arrays."""
    n = np.asarray(normals, dtype=np.float64).reshape(-1, 3)
    norms = np.linalg.norm(n, axis=1)
    if np.any(np.abs(norms - 1.0) > 1e-6):
        raise ValueError("normals must be unit length")
    z = np.clip(n[:, 2], -1.0, 1.0)
    pole = np.abs(z) > 1.0 - 1e-12
    azimuth = np.where(pole, 0.0, np.arctan2(n[:, 1], n[:, 0]))
    return _q31_encode_radians_array(azimuth), _q31_encode_radians_array(np.arcsin(z))


def decode_normal(azimuth: Q31Angle, elevation: Q31Angle) -> np.ndarray:
    """Decode spherical angles back to a direction via the fast trig path.

    The result is generally not unit length; its direction deviates from
    the exact decode by at most ~0.15 rad.
    """
    ce = approx_cos(elevation)
    return np.array(
        [ce * approx_cos(azimuth), ce * approx_sin(azimuth), approx_sin(elevation)],
        dtype=np.float64,
    )


def decode_normal_raw(azimuth_raw, elevation_raw) -> np.ndarray:
    """Vectorized decode_normal; returns (..., 3) directions."""
    az = np.asarray(azimuth_raw, dtype=np.int32)
    el = np.asarray(elevation_raw, dtype=np.int32)
    ce = approx_cos_raw(el)
    return np.stack(
        [ce * approx_cos_raw(az), ce * approx_sin_raw(az), approx_sin_raw(el)], axis=-1
    )


def taylor_sin(x: float, terms: int) -> float:
    """Truncated Maclaurin series of sine, for error comparisons."""
    if terms < 1:
        raise ValueError("need at least one term")
    total = 0.0
    for k in range(terms):
        total += (-1.0) ** k * x ** (2 * k + 1) / math.factorial(2 * k + 1)
    return total
