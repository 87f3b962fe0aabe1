"""
End-to-end checks across the geometry, group, projection and poset services.

These runs use the full default sizes and take longer than the unit suite;
select them with `pytest -m integration`.
"""

import math
import time
import pytest
import sys
import os

import numpy as np

# Add project root to path
project_root = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

try:
    from backend.cli import main
    from schemas.run_config import RunConfig
    from services.actions import anosov_action, cayley_action, qi_estimate
    from services.baumslag_solitar import distortion_witness
    from services.geodesic_families import ThetaConstants, family_from_config, random_disjoint_geodesics
    from services.groups import (abelianization, claim_density_instance, q_eps_generators, random_anosov,
                                 torus_bundle_universe, verify_confining, word_ball)
    from services.hyp2 import I, HPoint, dist
    from services.poset import anosov_poset
    from services.projection_complex import (bottleneck_check, build_projection_graph, build_quasi_tree,
                                             calibrate_K, modified_distance_violations, verify_axioms)
    from services.runner import run
except ImportError as e:
    pytest.skip(f"Service modules not available: {e}", allow_module_level=True)


def _config(subcommand, **values):
    values.setdefault("seed", 7)
    return RunConfig.build(subcommand=subcommand, **values)


def _generated_families(configs: int, counts=(20, 30, 40, 50), seed_offset: int = 0):
    """Seeded families cycling through the given geodesic counts at R = 0.1."""
    constants = ThetaConstants.compute(0.1)
    for seed in range(configs):
        count = counts[seed % len(counts)]
        yield family_from_config(random_disjoint_geodesics(count, 0.1, seed=seed_offset + seed), constants)


class TestGeometryAndGroups:
    """Acceptance checks for hyp2 and groups."""

    @pytest.mark.integration
    def test_distance_formula(self, rng):
        """Test dist(i, i + x) = 2·asinh(|x|/2) on 1000 samples."""
        for x in rng.uniform(-50.0, 50.0, size=1000):
            assert dist(I, HPoint(float(x), 1.0)) == pytest.approx(2.0 * math.asinh(abs(x) / 2.0), abs=1e-9)

    @pytest.mark.integration
    @pytest.mark.slow
    def test_classifier_agreement_sweep(self):
        """Test trace and orbit-growth classifiers agree on 500 random matrices."""
        report = run(_config("classify", samples=500, seed=2024))
        assert len(report.records) == 500
        assert report.passed

    @pytest.mark.integration
    def test_confinement(self, cat_data):
        """Test ε = 1, box 50: all conditions, k₀ = 1 and a re-verified strict witness."""
        result = verify_confining(1.0, cat_data, 50, 20)
        assert result.passed
        assert result.k0 == 1
        assert result.strict
        assert result.reverify(cat_data)

    @pytest.mark.integration
    @pytest.mark.slow
    def test_density_claim(self, cat_data):
        """Test the grown set is λa-dense in [0, λ²a]."""
        report = claim_density_instance(cat_data)
        assert report.passed
        assert report.uncovered == []

    @pytest.mark.integration
    @pytest.mark.slow
    def test_word_metric_quasi_isometric_to_orbit(self, cat_data, cat_group):
        """Test the Q₁ ∪ {t±1} word ball of radius 6 is QI to the H²⁺ orbit."""
        gens = q_eps_generators(cat_group, 1.0, box=20)
        table = word_ball(gens, 6, universe=torus_bundle_universe(20, 3))
        inner = [g for g in table if table[g] <= 3]
        elements = sorted(inner, key=lambda g: (table[g], repr(g)))[:300]
        estimate = qi_estimate(cayley_action(cat_group.ops, table), anosov_action(cat_data, "plus"), elements)
        assert math.isfinite(estimate.C)
        assert estimate.violations == 0
        assert estimate.samples > estimate.skipped

    @pytest.mark.integration
    def test_bs_distortion(self):
        """Test bᵏ a b⁻ᵏ = a^(2ᵏ) for k ≤ 20."""
        for k in range(21):
            element, expected = distortion_witness(2, k)
            assert element.tail == expected == 2 ** k

    @pytest.mark.integration
    def test_abelianization_sweep(self):
        """Test free rank 1 and torsion product |det(φ − I)| on 50 random Anosov maps."""
        rng = np.random.default_rng(50)
        for _ in range(50):
            phi = random_anosov(rng)
            ab = abelianization(phi)
            assert ab.free_rank == 1
            assert math.prod(ab.torsion) == abs(2 - phi.trace)


class TestProjectionComplexes:
    """Acceptance checks for generated families and quasi-trees."""

    @pytest.mark.integration
    @pytest.mark.slow
    def test_axiom_sweep(self):
        """Test 200 generated families of 20 to 50 geodesics have no P0 or P1 violations within 5 minutes."""
        start = time.perf_counter()
        checked = 0
        for fam in _generated_families(200):
            report = verify_axioms(fam)
            assert report.p0_violations == []
            assert report.p1_violations == []
            checked += 1
        assert checked == 200
        assert time.perf_counter() - start < 300.0

    @pytest.mark.integration
    @pytest.mark.slow
    def test_modified_distance_inequality(self):
        """Test d_Y ≤ dpi_Y on every triple."""
        for fam in _generated_families(4):
            assert modified_distance_violations(fam) == []

    @pytest.mark.integration
    @pytest.mark.slow
    def test_quasi_tree_certification(self):
        """Test 20 calibrated quasi-trees pass the exhaustive bottleneck check with stable Δ."""
        deltas = []
        for seed, fam in enumerate(_generated_families(20, counts=(20,), seed_offset=100)):
            cal = calibrate_K(fam, embed_pairs=50, seed=seed)
            tree = build_quasi_tree(fam, cal.K, cal.L, projection_graph=build_projection_graph(fam, cal.K))
            report = bottleneck_check(tree.anchor_graph(), 2.0 * cal.K)
            assert report.exhaustive
            assert report.passed
            # a tree-shaped complex has Δ = 0; below θ the constant is not resolved
            deltas.append(max(report.delta_pass, fam.theta))
        assert len(deltas) == 20
        assert max(deltas) / min(deltas) <= 4.0

    @pytest.mark.integration
    def test_cycle_control(self, cycle_graph):
        """Test C₁₂ fails the bottleneck check below Δ = 2."""
        assert not bottleneck_check(cycle_graph, 1.9).passed


class TestPosetAndLemmas:
    """Acceptance checks for posets, certificates, quasimorphisms and flip trees."""

    @pytest.mark.integration
    @pytest.mark.slow
    def test_poset_shape(self, cat_map):
        """Test four nodes, three verified witnesses and the fixed-point certificate."""
        diagram = anosov_poset(cat_map)
        assert len(diagram.nodes) == 4
        assert len(diagram.hasse_edges) == 3
        assert set(diagram.witnesses) == set(diagram.hasse_edges)
        assert diagram.incomparable[("H2+", "H2-")].strategy == "fixed_point_pattern"

    @pytest.mark.integration
    def test_main_lemma_instances(self):
        """Test Z² and BS(2,2) certify and a = b fails."""
        assert run(_config("mainlemma", instance="z2")).passed
        assert run(_config("mainlemma", instance="bs22")).passed
        assert not run(_config("mainlemma", instance="broken")).passed

    @pytest.mark.integration
    def test_busemann_values(self):
        """Test qm(t) = ln λ and qm(p) = 0 within 1e-5."""
        report = run(_config("qm", phi="2,1,1,1", samples=5))
        checks = {(r["key"], r["check"]): r["passed"] for r in report.records}
        assert checks[("busemann/t", "value")]
        assert checks[("busemann/lattice", "value")]

    @pytest.mark.integration
    @pytest.mark.slow
    def test_flip_tree_run(self):
        """Test the default flip run: tree, both families and the bounded scan."""
        report = run(_config("flip"))
        assert report.passed
        scan = [r for r in report.records if r["key"] == "flip/scan"][0]
        assert scan["scan"]["non_adjacent_contribution"] == 0.0


class TestCommandLine:
    """Acceptance checks for the command-line contract."""

    @pytest.mark.integration
    @pytest.mark.slow
    def test_poset_dot(self, capsys):
        """Test `poset --phi 2,1,1,1 --format dot` exits 0 with the diagram."""
        assert main(["poset", "--phi", "2,1,1,1", "--format", "dot"]) == 0
        out = capsys.readouterr().out
        assert out.startswith("digraph hyperbolic_structures {")
        assert '"R" -> "point";' in out

    @pytest.mark.integration
    def test_confining_run(self):
        """Test `confining --phi 2,1,1,1 --eps 1 --box 50` exits 0."""
        assert main(["confining", "--phi", "2,1,1,1", "--eps", "1", "--box", "50"]) == 0

    @pytest.mark.integration
    def test_malformed_phi(self):
        """Test a malformed φ exits 2."""
        assert main(["confining", "--phi", "2,1,1"]) == 2

    @pytest.mark.integration
    def test_reports_are_reproducible(self):
        """Test identical configuration and seed give byte-identical reports."""
        config = _config("axioms", samples=3, count=10, seed=5)
        assert run(config).to_jsonl() == run(config).to_jsonl()
