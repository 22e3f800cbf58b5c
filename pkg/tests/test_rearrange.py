import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracbody.core import AffineMap, FieldError, ball_indicator, bump, field_sum, gaussian, omega_n, validate_params
from fracbody.harness import burchard_triple, random_riesz_triples
from fracbody.rearrange import (
    RadialProfile,
    polya_szego_gap,
    rearranged_field,
    riesz_gap,
    schwarz_rearrange,
    superlevel_measure,
)
from fracbody.starbody import ball, ellipsoid, linear_image


def test_radial_profile_validation():
    with pytest.raises(ValueError):
        RadialProfile(2, np.array([0.0, 1.0]), np.array([0.0, 1.0]))
    with pytest.raises(ValueError):
        RadialProfile(2, np.array([0.1, 1.0]), np.array([1.0, 0.0]))
    prof = RadialProfile(2, np.array([0.0, 0.5, 1.0]), np.array([1.0, 0.5, 0.0]))
    assert prof(2.0) == 0.0
    assert prof(0.25) == pytest.approx(0.75, abs=0.05)
    assert RadialProfile.from_dict(prof.to_dict()).to_dict() == prof.to_dict()
    assert prof.to_csv().startswith("radius,value\r\n")


@given(c=st.lists(st.floats(-1.5, 1.5), min_size=2, max_size=2), w=st.floats(0.5, 1.5))
@settings(max_examples=10, deadline=None)
def test_gaussian_rearranges_to_centred_gaussian(c, w):
    prof = schwarz_rearrange(gaussian(2, w, center=c))
    r = np.linspace(0, 2 * w, 9)
    np.testing.assert_allclose(prof(r), np.exp(-((r / w) ** 2)), atol=5e-3)


def test_sheared_bump_rearranges_to_bump():
    phi = AffineMap.sl([[1.6, 0.9], [0.3, 0.8]], [0.4, -0.2])
    f = bump(2, 1.0).transformed(phi)
    prof = schwarz_rearrange(f)
    r = np.linspace(0, 0.95, 12)
    np.testing.assert_allclose(prof(r), bump(2, 1.0).value(np.c_[r, 0 * r]), atol=5e-3)


def test_level_measures_preserved():
    f = field_sum(bump(2, 1.0), bump(2, 0.5, center=[0.9, 0.0], scale=0.7))
    fs = rearranged_field(f)
    for t in (0.1, 0.4, 0.8):
        assert superlevel_measure(fs, t) == pytest.approx(superlevel_measure(f, t), rel=1e-2)


def test_superlevel_measure_exact():
    # {exp(-|x|^2) >= t} is the disc of radius sqrt(-log t)
    assert superlevel_measure(gaussian(2), 0.3) == pytest.approx(math.pi * -math.log(0.3), rel=2e-3)
    with pytest.raises(ValueError):
        superlevel_measure(gaussian(2), 0.0)


def test_indicator_rearranges_to_ball():
    f = ball_indicator(2, 1.0).transformed(AffineMap([[2.0, 0.0], [0.0, 0.5]], [1.0, 1.0]))
    fs = rearranged_field(f)
    assert fs.kind == "ball_indicator"
    assert omega_n(2) * fs.radius**2 == pytest.approx(math.pi, rel=5e-3)


def test_rearrange_rejects_signed():
    with pytest.raises(FieldError):
        schwarz_rearrange(gaussian(2, scale=-1.0))


def test_riesz_burchard_equality():
    lhs, rhs = riesz_gap(*burchard_triple(2))
    assert lhs == pytest.approx(rhs, rel=2e-3)


def test_riesz_random_triples_1d():
    for f, k, g in random_riesz_triples(5, seed=1, n=1):
        lhs, rhs = riesz_gap(f, k, g)
        assert lhs <= rhs * (1 + 1e-3)


def test_riesz_rejects():
    g3 = gaussian(3)
    with pytest.raises(ValueError):
        riesz_gap(g3, g3, g3)
    with pytest.raises(FieldError):
        riesz_gap(gaussian(2, scale=-1.0), gaussian(2), gaussian(2))


def test_polya_szego_equality_for_affine_radial(coarse):
    params = validate_params(2, 0.5, 2.0)
    A = np.array([[1.3, 0.4], [0.0, 1 / 1.3]])
    f = bump(2, 1.0).transformed(AffineMap(A, [0.2, 0.1]))
    K = linear_image(A, ball(coarse.grid(2)))
    lhs, rhs = polya_szego_gap(f, K, params, "sym", coarse)
    assert lhs == pytest.approx(rhs, rel=5e-3)


def test_polya_szego_strict_for_two_bumps(coarse):
    params = validate_params(2, 0.5, 2.0)
    f = field_sum(bump(2, 0.7, center=[-0.8, 0.0]), bump(2, 0.7, center=[0.8, 0.0], scale=0.5))
    K = ellipsoid(coarse.grid(2), np.diag([1.2, 1 / 1.2]))
    for variant in ("sym", "plus"):
        lhs, rhs = polya_szego_gap(f, K, params, variant, coarse)
        assert lhs > rhs * 1.02
    with pytest.raises(ValueError):
        polya_szego_gap(f, K, params, "minus", coarse)
