"""
Test suite for the quasimorphisms module.

This module tests defect estimates, homogenization, Busemann
quasimorphisms, induction from finite-index subgroups and drift maps.
"""

import math
import pytest
import sys
import os
import itertools

# Add project root to path
project_root = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

try:
    from services.quasimorphisms import (
        QMap,
        busemann_qm,
        busemann_qmap,
        conjugation_defect,
        defect_estimate,
        dihedral_example,
        even_integers_example,
        floor_qm,
        hom_qm,
        homogenize,
        induce_from_finite_index,
        noisy_qm,
        qmap_from_descriptor,
        quasiline_drift,
    )
    from services.actions import anosov_action, coordinate_lineal
    from services.groups import dihedral_ops, integer_ops, lattice_ops
    from services.hyp2 import INFINITY, BoundaryPoint
    from services.errors import (ConfigError, DefectClaimViolated, NotFixed, NotHomogeneous,
                                 PowerNotInSubgroup)
except ImportError as e:
    pytest.skip(f"Quasimorphisms module not available: {e}", allow_module_level=True)


SQRT2 = math.sqrt(2.0)


def _lattice_pairs(bound=4):
    points = [(x, y) for x in range(-bound, bound + 1) for y in range(-bound, bound + 1)]
    return list(itertools.product(points[::3], points[::5]))


class TestDefectAndHomogenization:
    """Test cases for defect_estimate and homogenize."""

    @pytest.mark.unit
    def test_homomorphism_has_zero_defect(self):
        """Test a homomorphism has defect 0."""
        q = hom_qm(lambda g: 2.0 * g[0] - g[1], lattice_ops(2))
        est = defect_estimate(q, _lattice_pairs())
        assert est.value == pytest.approx(0.0, abs=1e-12)
        assert est.pairs == len(_lattice_pairs())

    @pytest.mark.unit
    def test_floor_defect_at_most_one(self):
        """Test ⌊√2·x⌋ stays within its claimed defect 1."""
        q = floor_qm(lambda g: SQRT2 * g[0], lattice_ops(2))
        est = defect_estimate(q, _lattice_pairs(6))
        assert 0.0 < est.value <= 1.0
        assert est.witness is not None

    @pytest.mark.unit
    def test_noisy_within_claim(self):
        """Test the bounded perturbation stays within 3·amplitude."""
        q = noisy_qm(lambda g: float(g[0]), lattice_ops(2), amplitude=0.5)
        est = defect_estimate(q, _lattice_pairs())
        assert est.value <= 1.5
        assert q((1, 2)) == q((1, 2))

    @pytest.mark.unit
    def test_claim_violation(self):
        """Test DefectClaimViolated when the claimed defect is too small."""
        floor = floor_qm(lambda g: SQRT2 * g[0], lattice_ops(2))
        q = QMap("overclaimed", floor.evaluate, 0.0, floor.group)
        with pytest.raises(DefectClaimViolated):
            defect_estimate(q, _lattice_pairs(6))

    @pytest.mark.unit
    def test_empty_pairs(self):
        """Test ConfigError for an empty pair sample."""
        with pytest.raises(ConfigError):
            defect_estimate(hom_qm(float, integer_ops()), [])

    @pytest.mark.unit
    def test_homogenize_floor(self):
        """Test q(gⁿ)/n approaches √2 within D/n."""
        q = floor_qm(lambda g: SQRT2 * g[0], lattice_ops(2))
        est = homogenize(q, (1, 0), 1000)
        assert abs(est.value - SQRT2) <= est.error_bound
        assert est.error_bound == pytest.approx(1e-3)
        with pytest.raises(ConfigError):
            homogenize(q, (1, 0), 0)

    @pytest.mark.unit
    def test_homogenize_without_claim(self):
        """Test the error bound is infinite without a defect claim."""
        q = QMap("unclaimed", float, None, integer_ops())
        assert math.isinf(homogenize(q, 3, 4).error_bound)
        assert homogenize(q, 3, 4).to_json()["error_bound"] == "inf"


class TestBusemann:
    """Test cases for Busemann quasimorphisms on H²."""

    @pytest.mark.unit
    def test_t_has_value_log_lambda(self, cat_data, cat_group):
        """Test β(t) = ln λ for the plus action and the point at infinity."""
        act = anosov_action(cat_data, "plus")
        assert busemann_qm(act, INFINITY, cat_group.t) == pytest.approx(math.log(cat_data.lam), abs=1e-5)

    @pytest.mark.unit
    def test_lattice_vanishes(self, cat_data, cat_group):
        """Test β(p) = 0 for lattice elements."""
        act = anosov_action(cat_data, "plus")
        for p in [(1, 0), (0, 1), (2, -3)]:
            assert busemann_qm(act, INFINITY, cat_group.lattice(*p)) == pytest.approx(0.0, abs=1e-5)

    @pytest.mark.unit
    def test_defect_claim(self, cat_data, cat_group, rng):
        """Test the Busemann quasimorphism meets its defect claim on samples."""
        act = anosov_action(cat_data, "plus")
        q = busemann_qmap(act)
        pairs = [(cat_group.random_element(rng, box=2, n_range=1), cat_group.random_element(rng, box=2, n_range=1))
                 for _ in range(10)]
        est = defect_estimate(q, pairs)
        assert est.value <= 1e-5

    @pytest.mark.unit
    def test_homogenized_t(self, cat_data, cat_group):
        """Test homogenizing at power 8 keeps ln λ."""
        q = busemann_qmap(anosov_action(cat_data, "plus"))
        assert homogenize(q, cat_group.t, 8).value == pytest.approx(math.log(cat_data.lam), abs=1e-5)

    @pytest.mark.unit
    def test_not_fixed(self, cat_data, cat_group):
        """Test NotFixed when g moves the boundary point."""
        act = anosov_action(cat_data, "plus")
        with pytest.raises(NotFixed):
            busemann_qm(act, BoundaryPoint.finite(0.0), cat_group.lattice(1, 0))

    @pytest.mark.unit
    def test_needs_h2_action(self):
        """Test ConfigError for an action on a line."""
        with pytest.raises(ConfigError):
            busemann_qm(coordinate_lineal(0), INFINITY, (1, 0))


class TestInduction:
    """Test cases for induce_from_finite_index and drift maps."""

    @pytest.mark.unit
    def test_even_integers(self):
        """Test the identity on 2Z induces the identity on Z."""
        q, in_sub = even_integers_example()
        for g in range(-5, 6):
            assert q(g) == pytest.approx(float(g))
        assert in_sub(4) and not in_sub(3)

    @pytest.mark.unit
    def test_dihedral_vanishes(self):
        """Test the induced translation length on D∞ is identically zero."""
        q = dihedral_example()
        samples = [(1, 3), (1, -2), (-1, 5), (-1, 0)]
        for g in samples:
            assert q(g) == pytest.approx(0.0)
        assert conjugation_defect(q, [dihedral_ops().identity, (-1, 0)], samples) == pytest.approx(0.0)

    @pytest.mark.unit
    def test_power_not_in_subgroup(self):
        """Test PowerNotInSubgroup for k = 1 over 2Z."""
        ops = integer_ops()
        q = induce_from_finite_index(hom_qm(float, ops), [0, 1], 1, lambda g: g % 2 == 0, ops)
        assert q(2) == pytest.approx(2.0)
        with pytest.raises(PowerNotInSubgroup):
            q(3)

    @pytest.mark.unit
    def test_induction_arguments(self):
        """Test ConfigError for k < 1 and empty representatives."""
        ops = integer_ops()
        with pytest.raises(ConfigError):
            induce_from_finite_index(hom_qm(float, ops), [0], 0, lambda g: True, ops)
        with pytest.raises(ConfigError):
            induce_from_finite_index(hom_qm(float, ops), [], 1, lambda g: True, ops)

    @pytest.mark.unit
    def test_induction_normalization(self):
        """Test average divides by k·|reps| and the plain form by k alone."""
        ops = integer_ops()
        even = lambda g: g % 2 == 0
        averaged = induce_from_finite_index(hom_qm(float, ops), [0, 1], 2, even, ops)
        summed = induce_from_finite_index(hom_qm(float, ops), [0, 1], 2, even, ops, average=False)
        assert averaged(3) == pytest.approx(3.0)
        assert summed(3) == pytest.approx(6.0)

    @pytest.mark.unit
    def test_drift_of_homomorphism_is_action(self):
        """Test a homomorphism gives an honest translation action."""
        q = hom_qm(lambda g: float(g[0]), lattice_ops(2))
        drift = quasiline_drift(q, [(1, 0), (0, 1), (2, 5)])
        assert drift.is_action
        assert drift.flags[(1, 0)] == "loxodromic"
        assert drift.flags[(0, 1)] == "elliptic"
        assert drift.translate((2, 5), 1.0) == 3.0

    @pytest.mark.unit
    def test_drift_rejects_inhomogeneous(self):
        """Test NotHomogeneous for ⌊√2·x⌋."""
        q = floor_qm(lambda g: SQRT2 * g[0], lattice_ops(2))
        with pytest.raises(NotHomogeneous):
            quasiline_drift(q, [(1, 0)])


class TestDescriptors:
    """Test cases for qmap_from_descriptor."""

    @pytest.mark.unit
    def test_known_kinds(self):
        """Test hom, floor, noisy, induced and busemann descriptors."""
        assert qmap_from_descriptor({"qm": "hom", "coeffs": [1, 0]}).defect == 0.0
        assert qmap_from_descriptor({"qm": "floor", "coeffs": [1.5]}).defect == 1.0
        assert qmap_from_descriptor({"qm": "noisy", "coeffs": [1], "amplitude": 2}).defect == 6.0
        assert qmap_from_descriptor({"qm": "induced", "example": "even_integers"})(3) == pytest.approx(3.0)
        busemann = qmap_from_descriptor({"qm": "busemann",
                                         "action": {"action": "anosov_plus", "phi": [[2, 1], [1, 1]]}})
        assert busemann.defect == pytest.approx(1e-5)

    @pytest.mark.unit
    def test_bad_descriptors(self):
        """Test ConfigError for unknown kinds and missing coefficients."""
        with pytest.raises(ConfigError):
            qmap_from_descriptor({"qm": "mystery"})
        with pytest.raises(ConfigError):
            qmap_from_descriptor({"qm": "hom"})
        with pytest.raises(ConfigError):
            qmap_from_descriptor({"qm": "induced", "example": "nope"})
