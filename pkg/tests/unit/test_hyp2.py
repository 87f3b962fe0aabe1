"""
Test suite for the upper half-plane geometry module.

This module tests points, geodesics, isometry arithmetic, trace
classification and the nearest-point projections between geodesics.
"""

import math
import pytest
import sys
import os

import numpy as np

# Add project root to path
project_root = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

try:
    from services.hyp2 import (
        HPoint,
        I,
        INFINITY,
        BoundaryPoint,
        Geodesic,
        Isometry,
        classify,
        common_perpendicular,
        dist,
        nearest_point,
        project_point,
        random_isometry,
        random_point,
    )
    from services.errors import AsymptoticOrCrossing, DegenerateMatrix, GeometryError, NonPositiveImaginary
except ImportError as e:
    pytest.skip(f"Geometry module not available: {e}", allow_module_level=True)


def _rotation(theta):
    return Isometry(math.cos(theta), math.sin(theta), -math.sin(theta), math.cos(theta))


class TestPointsAndDistance:
    """Test cases for HPoint and dist."""

    @pytest.mark.unit
    def test_point_rejects_lower_half_plane(self):
        """Test that non-positive imaginary parts are refused."""
        with pytest.raises(NonPositiveImaginary):
            HPoint(0.0, 0.0)
        with pytest.raises(NonPositiveImaginary):
            HPoint(1.0, -2.0)

    @pytest.mark.unit
    def test_vertical_distance_is_log_ratio(self):
        """Test dist(i, e·i) = 1."""
        assert dist(I, HPoint(0.0, math.e)) == pytest.approx(1.0)
        assert dist(HPoint(3.0, 2.0), HPoint(3.0, 8.0)) == pytest.approx(math.log(4.0))

    @pytest.mark.unit
    def test_distance_symmetric_and_zero_on_diagonal(self, rng):
        """Test symmetry of dist and dist(p, p) = 0."""
        for _ in range(20):
            p, q = random_point(rng), random_point(rng)
            assert dist(p, q) == pytest.approx(dist(q, p))
            assert dist(p, p) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.unit
    def test_isometries_preserve_distance(self, rng):
        """Test dist(g p, g q) = dist(p, q) for orientation preserving and reversing maps."""
        for k in range(20):
            g = random_isometry(rng, reversing=bool(k % 2))
            p, q = random_point(rng), random_point(rng)
            assert dist(g.apply(p), g.apply(q)) == pytest.approx(dist(p, q), rel=1e-8, abs=1e-8)


class TestGeodesics:
    """Test cases for Geodesic construction and parametrization."""

    @pytest.mark.unit
    def test_endpoints_are_canonically_ordered(self):
        """Test that semicircle endpoints are sorted and infinity is kept as end."""
        g = Geodesic.from_endpoints(3.0, -1.0)
        assert g.start.value == -1.0
        assert g.end.value == 3.0
        assert g.center == pytest.approx(1.0)
        assert g.radius == pytest.approx(2.0)

        v = Geodesic.from_endpoints(INFINITY, 2.0)
        assert v.is_vertical
        assert v.foot == 2.0

    @pytest.mark.unit
    def test_equal_endpoints_rejected(self):
        """Test that a geodesic needs two distinct endpoints."""
        with pytest.raises(GeometryError):
            Geodesic.from_endpoints(1.0, 1.0)
        with pytest.raises(GeometryError):
            Geodesic(INFINITY, INFINITY)

    @pytest.mark.unit
    def test_point_at_and_parameter_of_agree(self):
        """Test that point_at is unit speed and inverted by parameter_of."""
        for g in (Geodesic.vertical(0.5), Geodesic.semicircle(2.0, 3.0)):
            p0, p1 = g.point_at(0.0), g.point_at(1.5)
            assert g.contains(p0) and g.contains(p1)
            assert dist(p0, p1) == pytest.approx(1.5)
            assert g.parameter_of(p1) == pytest.approx(1.5)

    @pytest.mark.unit
    def test_through_two_points(self):
        """Test the geodesic through two points contains both."""
        p, q = HPoint(-1.0, 1.0), HPoint(2.0, 0.5)
        g = Geodesic.through(p, q)
        assert g.contains(p)
        assert g.contains(q)
        assert Geodesic.through(HPoint(1.0, 1.0), HPoint(1.0, 4.0)).is_vertical

    @pytest.mark.unit
    def test_json_round_trip(self):
        """Test that geodesics survive to_json/from_json."""
        for g in (Geodesic.vertical(-2.0), Geodesic.semicircle(1.0, 0.25)):
            assert Geodesic.from_json(g.to_json()).close_to(g)

    @pytest.mark.unit
    def test_boundary_point_from_json(self):
        """Test parsing of infinity spellings."""
        assert BoundaryPoint.from_json("inf").is_infinite
        assert BoundaryPoint.from_json("oo").is_infinite
        assert BoundaryPoint.from_json(2).value == 2.0


class TestIsometryArithmetic:
    """Test cases for Isometry composition, inversion and powers."""

    @pytest.mark.unit
    def test_determinant_must_be_one(self):
        """Test DegenerateMatrix for det ≠ 1."""
        with pytest.raises(DegenerateMatrix):
            Isometry(2.0, 0.0, 0.0, 2.0)

    @pytest.mark.unit
    def test_from_matrix_normalizes(self):
        """Test that a positive determinant is rescaled on request."""
        g = Isometry.from_matrix([[2, 0], [0, 2]], normalize=True)
        assert g.is_identity()
        with pytest.raises(DegenerateMatrix):
            Isometry.from_matrix([[0, 1], [1, 0]], normalize=True)

    @pytest.mark.unit
    def test_inverse_and_compose(self, rng):
        """Test g ∘ g⁻¹ is the identity."""
        for k in range(10):
            g = random_isometry(rng, reversing=bool(k % 2))
            h = g @ g.inverse()
            assert h.is_identity(tol=1e-7)

    @pytest.mark.unit
    def test_power_of_translation(self):
        """Test that powers add translation amounts."""
        assert Isometry.translation(1.0).power(5).same_as(Isometry.translation(5.0))
        assert Isometry.translation(1.0).power(-3).same_as(Isometry.translation(-3.0))

    @pytest.mark.unit
    def test_psi_reflects(self):
        """Test ψ(z) = −conj(z) and ψ² = id."""
        p = Isometry.psi().apply(HPoint(1.0, 2.0))
        assert p.re == pytest.approx(-1.0)
        assert p.im == pytest.approx(2.0)
        assert (Isometry.psi() @ Isometry.psi()).is_identity()

    @pytest.mark.unit
    def test_compose_matches_pointwise_application(self, rng):
        """Test (g ∘ h)(p) = g(h(p)) including reversing factors."""
        for k in range(10):
            g = random_isometry(rng, reversing=bool(k % 2))
            h = random_isometry(rng, reversing=bool(k % 3 == 0))
            p = random_point(rng)
            lhs, rhs = (g @ h).apply(p), g.apply(h.apply(p))
            assert lhs.re == pytest.approx(rhs.re, rel=1e-7, abs=1e-7)
            assert lhs.im == pytest.approx(rhs.im, rel=1e-7, abs=1e-7)


class TestClassify:
    """Test cases for the trace classifier."""

    @pytest.mark.unit
    def test_identity(self):
        """Test the identity tag."""
        assert classify(Isometry.identity()).tag == "identity"

    @pytest.mark.unit
    def test_dilation_is_loxodromic(self):
        """Test z ↦ 4z has translation length ln 4, attracting ∞ and repelling 0."""
        c = classify(Isometry.dilation(4.0))
        assert c.tag == "loxodromic"
        assert c.translation_length == pytest.approx(math.log(4.0))
        assert c.attracting.is_infinite
        assert c.repelling.value == pytest.approx(0.0)
        assert c.axis.is_vertical

    @pytest.mark.unit
    def test_translation_is_parabolic(self):
        """Test z ↦ z + 1 is parabolic fixing ∞."""
        c = classify(Isometry.translation(1.0))
        assert c.tag == "parabolic"
        assert c.fixed_point.is_infinite
        assert not c.in_tolerance_band

    @pytest.mark.unit
    def test_rotation_is_elliptic_about_i(self):
        """Test a rotation about i is elliptic with fixed point i."""
        c = classify(_rotation(0.7))
        assert c.tag == "elliptic"
        assert c.fixed_point.re == pytest.approx(0.0, abs=1e-12)
        assert c.fixed_point.im == pytest.approx(1.0)

    @pytest.mark.unit
    def test_reflection(self):
        """Test ψ is a reflection in the imaginary axis."""
        c = classify(Isometry.psi())
        assert c.tag == "reversing_composite"
        assert c.reversing_kind == "reflection"
        assert c.axis.is_vertical
        assert c.axis.foot == pytest.approx(0.0)

    @pytest.mark.unit
    def test_glide_reflection_half_square_length(self):
        """Test a glide reflection has half the translation length of its square."""
        g = Isometry.dilation(4.0) @ Isometry.psi()
        c = classify(g)
        assert c.reversing_kind == "glide_reflection"
        assert c.square_class.tag == "loxodromic"
        assert c.translation_length == pytest.approx(math.log(4.0))

    @pytest.mark.unit
    def test_classification_is_conjugation_invariant(self, rng):
        """Test that conjugating keeps the tag and translation length."""
        g = Isometry.dilation(3.0)
        base = classify(g)
        for _ in range(10):
            h = random_isometry(rng)
            c = classify(g.conjugate(h))
            assert c.tag == base.tag
            assert c.translation_length == pytest.approx(base.translation_length, rel=1e-6)

    @pytest.mark.unit
    def test_to_json_keys(self):
        """Test the serialized classification."""
        out = classify(Isometry.dilation(4.0)).to_json()
        assert out["tag"] == "loxodromic"
        assert out["attracting"] == "inf"
        assert "axis" in out


class TestProjections:
    """Test cases for closest points and common perpendiculars."""

    @pytest.mark.unit
    def test_nearest_point_on_vertical(self):
        """Test the closest point of the imaginary axis to 3 + 4i is 5i."""
        p = nearest_point(Geodesic.vertical(0.0), HPoint(3.0, 4.0))
        assert p.re == pytest.approx(0.0, abs=1e-12)
        assert p.im == pytest.approx(5.0)

    @pytest.mark.unit
    def test_common_perpendicular_length(self):
        """Test cosh(d) = (v + u)/(v − u) for the axis and the semicircle on [u, v]."""
        alpha = Geodesic.vertical(0.0)
        beta = Geodesic.from_endpoints(4.0, 6.0)
        perp = common_perpendicular(alpha, beta)
        assert math.cosh(perp.length) == pytest.approx(5.0)
        assert alpha.contains(perp.foot_on_alpha)
        assert beta.contains(perp.foot_on_beta)
        assert perp.foot_on_alpha.im == pytest.approx(math.sqrt(24.0))

    @pytest.mark.unit
    def test_project_point_is_perpendicular_foot(self):
        """Test that project_point returns the foot on gamma."""
        gamma = Geodesic.vertical(0.0)
        alpha = Geodesic.from_endpoints(4.0, 6.0)
        p = project_point(gamma, alpha)
        perp = common_perpendicular(gamma, alpha)
        assert dist(p, perp.foot_on_alpha) == pytest.approx(0.0, abs=1e-9)

    @pytest.mark.unit
    def test_crossing_and_asymptotic_rejected(self):
        """Test AsymptoticOrCrossing for crossing or endpoint-sharing pairs."""
        axis = Geodesic.vertical(0.0)
        with pytest.raises(AsymptoticOrCrossing):
            common_perpendicular(axis, Geodesic.semicircle(0.0, 1.0))
        with pytest.raises(AsymptoticOrCrossing):
            common_perpendicular(axis, Geodesic.from_endpoints(0.0, 2.0))

    @pytest.mark.unit
    def test_perpendicular_is_equivariant(self, rng):
        """Test that the perpendicular length is an isometry invariant."""
        alpha = Geodesic.vertical(0.0)
        beta = Geodesic.from_endpoints(1.0, 3.0)
        base = common_perpendicular(alpha, beta).length
        for _ in range(5):
            g = random_isometry(rng, scale=1.0)
            moved = common_perpendicular(g.image_of_geodesic(alpha), g.image_of_geodesic(beta))
            assert moved.length == pytest.approx(base, rel=1e-6)
            assert np.isfinite(moved.length)
