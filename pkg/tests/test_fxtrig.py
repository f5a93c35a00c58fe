import math

import numpy as np
import pytest

from hullcache.fxtrig import (
    Q31Angle,
    QUARTER_TURN,
    approx_cos,
    approx_cos_raw,
    approx_sin,
    approx_sin_raw,
    decode_normal,
    encode_normal,
    q31_encode_angle,
    taylor_sin,
)


def test_encode_zero():
    assert q31_encode_angle(0.0).raw == 0


def test_encode_quarter():
    assert q31_encode_angle(math.pi / 2).raw == 0x40000000


def test_encode_three_pi_wraps():
    # 3*pi is congruent to pi, which the half-open range stores as -pi
    assert q31_encode_angle(3 * math.pi).raw == -(2**31)


def test_encode_rejects_nonfinite():
    with pytest.raises(ValueError):
        q31_encode_angle(float("nan"))
    with pytest.raises(ValueError):
        q31_encode_angle(float("inf"))


def test_encode_decode_roundtrip_error():
    rng = np.random.default_rng(0)
    for theta in rng.uniform(-math.pi, math.pi, size=2000):
        back = q31_encode_angle(theta).radians
        assert abs(back - theta) <= math.pi * 2.0**-31


def test_wrapping_addition():
    a = Q31Angle(0x7FFFFFFF)
    b = a + Q31Angle(1)
    assert b.raw == -(2**31)


def test_approx_sin_special_points():
    assert approx_sin(Q31Angle(0)) == 0.0
    assert approx_sin(Q31Angle(0x40000000)) == 1.0  # v = 0.5
    assert approx_sin(Q31Angle(-(2**30))) == -1.0
    assert approx_sin(Q31Angle(-(2**31))) == 0.0  # v = -1


def test_approx_sin_quarter_point_error():
    # v = 0.25: parabola gives 0.75, true sine ~0.7071
    got = approx_sin(q31_encode_angle(math.pi / 4))
    assert got == pytest.approx(0.75, abs=1e-9)
    assert abs(got - math.sin(math.pi / 4)) == pytest.approx(0.0429, abs=1e-3)


def test_approx_sin_global_error_bound():
    raw = np.linspace(-(2**31), 2**31 - 1, 1_000_001).astype(np.int64).astype(np.int32)
    approx = approx_sin_raw(raw)
    exact = np.sin(raw.astype(np.float64) / 2**31 * np.pi)
    assert float(np.max(np.abs(approx - exact))) <= 0.06
    assert float(np.max(np.abs(approx))) <= 1.0


def test_approx_sin_odd_symmetry():
    rng = np.random.default_rng(5)
    for raw in rng.integers(-(2**31) + 1, 2**31, size=1000):
        assert approx_sin(Q31Angle(-int(raw))) == -approx_sin(Q31Angle(int(raw)))


def test_approx_sin_wrapping_period():
    rng = np.random.default_rng(6)
    two_pi = q31_encode_angle(2 * math.pi)
    assert two_pi.raw == 0
    for raw in rng.integers(-(2**31), 2**31, size=100):
        x = Q31Angle(int(raw))
        assert approx_sin(x + two_pi) == approx_sin(x)


def test_approx_cos_values():
    assert approx_cos(Q31Angle(0)) == 1.0
    assert approx_cos(q31_encode_angle(math.pi / 2)) == 0.0
    # -pi wraps through 0x80000000 + 0x40000000 = 0xC0000000, v = -0.5
    assert approx_cos(Q31Angle(-(2**31))) == -1.0


def test_approx_cos_is_shifted_sin_bit_exact():
    rng = np.random.default_rng(7)
    raw = rng.integers(-(2**31), 2**31, size=10000, dtype=np.int64).astype(np.int32)
    shifted = raw + np.int32(QUARTER_TURN)  # int32 arrays wrap
    assert np.array_equal(approx_cos_raw(raw), approx_sin_raw(shifted))


def test_encode_normal_reference_directions():
    az, el = encode_normal([1.0, 0.0, 0.0])
    assert (az.raw, el.raw) == (0, 0)
    az, el = encode_normal([0.0, 1.0, 0.0])
    assert (az.raw, el.raw) == (0x40000000, 0)
    az, el = encode_normal([0.0, 0.0, 1.0])
    assert (az.raw, el.raw) == (0, 0x40000000)
    az, el = encode_normal([0.0, 0.0, -1.0])
    assert (az.raw, el.raw) == (0, -(2**30))


def test_encode_normal_rejects_non_unit():
    with pytest.raises(ValueError):
        encode_normal([1.0, 1.0, 0.0])


def test_decode_normal_exact_points():
    assert np.array_equal(decode_normal(Q31Angle(0), Q31Angle(0)), [1.0, 0.0, 0.0])
    got = decode_normal(q31_encode_angle(math.pi / 2), Q31Angle(0))
    assert np.array_equal(got, [0.0, 1.0, 0.0])


def test_decode_normal_known_approximation():
    got = decode_normal(q31_encode_angle(math.pi / 4), q31_encode_angle(math.pi / 4))
    assert np.allclose(got, [0.5625, 0.5625, 0.75], atol=1e-9)
    true_vec = np.array([0.5, 0.5, math.sqrt(2) / 2])
    cosang = (got / np.linalg.norm(got)) @ true_vec
    assert math.acos(min(1.0, cosang)) == pytest.approx(0.0294, abs=5e-4)


def test_roundtrip_angular_error_bound():
    rng = np.random.default_rng(99)
    vecs = rng.normal(size=(20000, 3))
    vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
    worst = 0.0
    for v in vecs:
        az, el = encode_normal(v)
        dec = decode_normal(az, el)
        dec /= np.linalg.norm(dec)
        worst = max(worst, math.acos(min(1.0, max(-1.0, float(dec @ v)))))
    assert worst <= 0.15


def test_encode_normal_raw_matches_scalar():
    from hullcache.fxtrig import encode_normal_raw

    rng = np.random.default_rng(3)
    vecs = rng.normal(size=(500, 3))
    vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
    vecs = np.vstack([vecs, [[0, 0, 1.0], [0, 0, -1.0], [1.0, 0, 0], [-1.0, 0, 0]]])
    az_v, el_v = encode_normal_raw(vecs)
    for vec, az_raw, el_raw in zip(vecs, az_v, el_v):
        az, el = encode_normal(vec)
        assert az.raw == int(az_raw)
        assert el.raw == int(el_raw)


def test_taylor_sin_values():
    assert taylor_sin(0.0, 5) == 0.0
    got = taylor_sin(math.pi / 2, 2)
    assert got == pytest.approx(math.pi / 2 - (math.pi / 2) ** 3 / 6, abs=1e-12)
    assert got == pytest.approx(0.9248, abs=1e-4)


def test_taylor_sin_bad_at_pi():
    # three Maclaurin terms blow past the parabola's bound at the interval edge
    err_taylor = abs(taylor_sin(math.pi, 3) - math.sin(math.pi))
    err_parabola = abs(approx_sin(q31_encode_angle(math.pi)) - math.sin(math.pi))
    assert err_taylor > 0.06
    assert err_parabola <= 0.06
