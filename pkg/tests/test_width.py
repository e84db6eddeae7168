import math

import numpy as np
import pytest

from curvex.errors import IdenticallyZero, NotConvex
from curvex.trig import TrigSeries, sin_series, cos_series, osculating_in_am
from curvex.width import (
    SupportFunction,
    a2_double_tangents,
    census_fn,
    clean_flexes,
    curve_point,
    curve_points,
    d_inflections,
    is_clean_flex,
    is_positive_clean_flex,
    limiting_function,
    theorem_c_certificates,
    width_reduction_eval,
)
from curvex.census import count_inflections_topological

PI3 = math.pi / 3


def test_convexity_guard():
    with pytest.raises(NotConvex):
        SupportFunction(10.0, sin_series(3))  # needs d > 16


def test_circle_case():
    sf = SupportFunction(8.0, TrigSeries.zero("antiperiodic"))
    for t in (0.0, 1.0, 2.5):
        p = curve_point(sf, t)
        assert np.linalg.norm(p) == pytest.approx(4.0)
    with pytest.raises(IdenticallyZero):
        d_inflections(sf)


def test_curve_point_example(sf_sin3):
    assert curve_point(sf_sin3, 0.0) == pytest.approx([3.0, -10.0])


def test_support_identity(sf_sin3):
    # distance from origin to the tangent line of direction t equals h(t)
    ts = np.linspace(0, 2 * math.pi, 33)
    pts = curve_points(sf_sin3, ts)
    h = 10.0 + sf_sin3.f(ts)
    n = np.stack([-np.sin(ts), np.cos(ts)], axis=-1)
    dist = -np.sum(pts * n, axis=1)
    assert np.allclose(dist, h, atol=1e-12)


def test_translation_invariance_of_support_difference(sf_sin3, sf_mix25):
    # translating two bodies together shifts both supports by the same
    # first harmonic, leaving the difference series unchanged
    shift = cos_series(1, -0.7) + sin_series(1, 1.3)
    d1 = sf_sin3.f - sf_mix25.f
    f1 = sf_sin3.f + shift
    f2 = sf_mix25.f + shift
    d2 = f1 - f2
    ts = np.linspace(0, 2 * math.pi, 50)
    assert np.allclose(d1(ts), d2(ts), atol=1e-12)
    moved = curve_points(SupportFunction(sf_sin3.d, f1),
                         np.array([0.3, 1.1]))
    base = curve_points(sf_sin3, np.array([0.3, 1.1]))
    assert np.allclose(moved - base, [[1.3, 0.7], [1.3, 0.7]], atol=1e-12)


def test_d_inflections_sin3(sf_sin3):
    pts = d_inflections(sf_sin3)
    assert pts == pytest.approx([k * PI3 for k in range(6)], abs=1e-10)
    for t in pts:
        assert sf_sin3.curvature_radius(t) == pytest.approx(10.0, abs=1e-9)


class TestLimitingFunction:
    def test_clean_point(self, sf_sin3):
        lf = limiting_function(sf_sin3, 0.0)
        assert lf.s0 == pytest.approx(3.0, abs=1e-12)
        assert lf.psi.harmonics == ((1, 0.0, 3.0),)
        assert len(lf.contact) == 2
        assert lf.contact.contains(0.0, 1e-9)
        assert lf.contact.contains(math.pi, 1e-9)

    def test_negative_clean_point(self, sf_sin3):
        # the osculant dips under f here; the limit has slope 1 and four
        # contact points
        lf = limiting_function(sf_sin3, PI3)
        assert lf.s0 == pytest.approx(1.0, abs=1e-10)
        assert len(lf.contact) == 4
        assert lf.touches[0] == pytest.approx(5 * math.pi / 6, abs=1e-8)

    def test_maximality_property(self, sf_sin3):
        for p in (0.4, 1.7, 3.0):
            lf = limiting_function(sf_sin3, p)
            ts = p + np.linspace(1e-3, math.pi - 1e-3, 2048)
            assert float(np.min(lf.psi(ts) - sf_sin3.f(ts))) >= -1e-8

    def test_contact_count_criterion(self, sf_sin3):
        for p in (0.0, 2 * PI3, 4 * PI3):
            assert is_positive_clean_flex(sf_sin3, p)
        for p in (PI3, math.pi, 5 * PI3, 0.8):
            assert not is_positive_clean_flex(sf_sin3, p)

    def test_nonclean_point_of_mixed_deviation(self, sf_mix25):
        lf = limiting_function(sf_mix25, 0.45)
        assert len(lf.contact) > 2


def test_unsigned_clean_flexes_sin3(sf_sin3):
    # every flex of this deviation is clean, of one sign or the other
    for k in range(6):
        assert is_clean_flex(sf_sin3, k * PI3)


def test_clean_flexes_locations_and_signs(sf_sin3):
    triple = clean_flexes(sf_sin3)
    assert triple.points == pytest.approx([0.0, PI3, 2 * PI3], abs=1e-10)
    assert triple.signs == (-1, +1, -1)
    # difference to the osculant flips sign as stated at each flex
    res = sf_sin3.f - osculating_in_am(sf_sin3.f, 0.0, 2)
    assert res(-0.1) > 0 > res(0.1)


class TestA2DoubleTangents:
    def test_sin3_has_none(self, sf_sin3):
        intervals, _ = a2_double_tangents(sf_sin3)
        assert intervals == []

    def test_mix4_has_one(self, sf_mix4):
        intervals, _ = a2_double_tangents(sf_mix4)
        assert len(intervals) >= 1
        iv = intervals[0]
        f = sf_mix4.f
        phi = osculating_in_am(f, iv.a, 2)
        assert f(iv.b) == pytest.approx(phi(iv.b), abs=1e-10)
        assert f.derivative()(iv.b) == pytest.approx(
            phi.derivative()(iv.b), abs=1e-9)

    def test_reversed_interval_fails_condition(self, sf_mix4):
        # equal curvature-defect signs at the ends flip on the complement
        from curvex.trig import apply_flex_operator
        intervals, _ = a2_double_tangents(sf_mix4)
        lf = apply_flex_operator(sf_mix4.f, 2)
        a, b = intervals[0].a, intervals[0].b
        assert lf(a) * lf(b) > 0
        assert lf(b) * lf(a + math.pi) < 0


class TestWidthCensus:
    @pytest.mark.parametrize("fixture,i,delta", [
        ("sf_sin3", 3, 0), ("sf_mix25", 3, 0), ("sf_mix4", 5, 1),
        ("sf_mix7", 7, 2)])
    def test_identity(self, fixture, i, delta, request):
        sf = request.getfixturevalue(fixture)
        rep = census_fn(sf)
        assert (rep.i, rep.delta) == (i, delta)
        assert rep.identity_holds
        assert "additivity_mismatch" not in rep.warnings
        assert "greedy_family_mismatch" not in rep.warnings

    def test_reduction_counts(self, sf_mix4):
        intervals, _ = a2_double_tangents(sf_mix4)
        a, b = intervals[0].a, intervals[0].b
        i1, _ = count_inflections_topological(
            width_reduction_eval(sf_mix4, a, b, outside=False))
        i2, _ = count_inflections_topological(
            width_reduction_eval(sf_mix4, a, b, outside=True))
        assert (i1, i2) == (3, 3)


class TestCertificates:
    def test_sin3_certificates(self, sf_sin3):
        certs = theorem_c_certificates(sf_sin3)
        assert len(certs) == 3
        for cert in certs:
            assert cert.circle.radius == 10.0
            assert cert.contact_components == 2
            assert cert.crossings == 2
            assert cert.curvature_radius == pytest.approx(10.0, abs=1e-8)

    def test_circle_centers_match_center_of_curvature(self, sf_sin3):
        for cert in theorem_c_certificates(sf_sin3):
            t = cert.flex
            p = curve_point(sf_sin3, t)
            n = np.array([-math.sin(t), math.cos(t)])
            center = p + 10.0 * n
            assert np.allclose(cert.circle.center, center, atol=1e-8)

    def test_truncation_convergence(self):
        # a small high-order tail must not move the certificates
        f = sin_series(3) + sin_series(5, 0.4) + sin_series(9, 1e-5)
        from curvex.trig import truncate
        low = SupportFunction(40.0, truncate(f, 4))
        high = SupportFunction(40.0, truncate(f, 6))
        flex_low = clean_flexes(low).points
        flex_high = clean_flexes(high).points
        assert max(abs(a - b) for a, b in zip(flex_low, flex_high)) < 1e-4
