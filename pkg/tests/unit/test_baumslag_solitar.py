"""
Test suite for Baumslag-Solitar normal forms, Bass-Serre balls and braid images.
"""

import pytest
import sys
import os
from fractions import Fraction

# Add project root to path
project_root = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

try:
    from services.baumslag_solitar import (
        BSElement,
        BSGroup,
        bass_serre_ball,
        bs_normal_form,
        distortion_witness,
        is_metabelian_on_samples,
        parse_word,
    )
    from services.braids import SIGMA, TAU, braid_to_sl2, chirality_search
    from services.groups import IntMatrix2
    from services.errors import BallOverflow, ConfigError
except ImportError as e:
    pytest.skip(f"Baumslag-Solitar module not available: {e}", allow_module_level=True)


class TestNormalForm:
    """Test cases for bs_normal_form and BSGroup arithmetic."""

    @pytest.mark.unit
    def test_empty_word_is_identity(self):
        """Test the empty word."""
        assert bs_normal_form("", 1, 2) == BSElement(1, 2)
        assert str(bs_normal_form("", 1, 2)) == "1"

    @pytest.mark.unit
    def test_relation_pinches(self):
        """Test b a b⁻¹ = a² in BS(1,2)."""
        assert bs_normal_form("baB", 1, 2) == BSElement(1, 2, (), 2)

    @pytest.mark.unit
    def test_relation_general(self):
        """Test b a² b⁻¹ = a³ in BS(2,3)."""
        assert bs_normal_form("ba^2B", 2, 3) == bs_normal_form("a^3", 2, 3)

    @pytest.mark.unit
    @pytest.mark.parametrize("k", [0, 1, 5, 20])
    def test_distortion(self, k):
        """Test bᵏ a b⁻ᵏ = a^(2ᵏ) in BS(1,2)."""
        element, expected = distortion_witness(2, k)
        assert element.syllables == ()
        assert element.tail == expected

    @pytest.mark.unit
    def test_parse_word_forms(self):
        """Test string and pair inputs."""
        assert parse_word("a^3 B b^-2") == [("a", 3), ("b", -1), ("b", -2)]
        assert parse_word([("a", 2), ("b", -1)]) == [("a", 2), ("b", -1)]
        with pytest.raises(ConfigError):
            parse_word("abc")
        with pytest.raises(ConfigError):
            parse_word([("c", 1)])

    @pytest.mark.unit
    def test_zero_parameters_rejected(self):
        """Test ConfigError for m = 0 or n = 0."""
        with pytest.raises(ConfigError):
            bs_normal_form("a", 0, 2)
        with pytest.raises(ConfigError):
            BSGroup(2, 0)

    @pytest.mark.unit
    def test_idempotent_and_multiplicative(self):
        """Test nf(str(nf(w))) = nf(w) and nf(uv) = nf(u)·nf(v)."""
        group = BSGroup(2, 3)
        words = ["abAB", "b^2 a^5 B", "Aba^3b", "BBa", "a^7 b a^-4"]
        for u in words:
            g = group.element(u)
            assert group.element(str(g)) == g
            for v in words:
                assert group.element(u + v) == group.multiply(group.element(u), group.element(v))

    @pytest.mark.unit
    def test_inverse_and_associativity(self):
        """Test g·g⁻¹ = 1 and associativity on sample words."""
        group = BSGroup(2, -3)
        samples = [group.element(w) for w in ["ab", "Ba^2", "abAB", "b^3a"]]
        for x in samples:
            assert group.multiply(x, group.inverse(x)) == group.identity
            for y in samples:
                for z in samples:
                    assert group.multiply(group.multiply(x, y), z) == group.multiply(x, group.multiply(y, z))

    @pytest.mark.unit
    def test_affine_image(self):
        """Test the affine representation of BS(1,2)."""
        group = BSGroup(1, 2)
        assert group.affine_image(group.element("baB")) == (Fraction(1), Fraction(2))
        assert group.affine_image(group.b) == (Fraction(2), Fraction(0))

    @pytest.mark.unit
    def test_metabelian_samples(self):
        """Test BS(1,2) is metabelian on sample elements."""
        group = BSGroup(1, 2)
        assert is_metabelian_on_samples(group, [group.a, group.b, group.element("ab")])


class TestBassSerreBall:
    """Test cases for bass_serre_ball."""

    @pytest.mark.unit
    def test_root_degree(self):
        """Test the root of BS(2,3) has 3 outgoing and 2 incoming edges."""
        ball = bass_serre_ball(2, 3, 1)
        assert ball.degree(ball.root) == 5
        assert len(ball.vertices) == 6
        kinds = [kind for _, _, kind, _ in ball.edges]
        assert kinds.count("out") == 3
        assert kinds.count("in") == 2

    @pytest.mark.unit
    def test_ball_is_a_tree(self):
        """Test |E| = |V| − 1 and depth of every vertex."""
        ball = bass_serre_ball(2, 3, 3)
        assert len(ball.edges) == len(ball.vertices) - 1
        assert max(ball.depth.values()) == 3
        group = ball.group
        for key, rep in ball.vertices.items():
            assert group.tree_distance(group.identity, rep) == ball.depth[key]

    @pytest.mark.unit
    def test_a_fixes_root(self):
        """Test a⟨a⟩ = ⟨a⟩ in BS(1,2)."""
        ball = bass_serre_ball(1, 2, 2)
        assert ball.act(ball.group.a)[ball.root] == ball.root

    @pytest.mark.unit
    def test_b_moves_root(self):
        """Test b moves the root to a neighbor."""
        ball = bass_serre_ball(2, 3, 2)
        image = ball.act(ball.group.b)[ball.root]
        assert image is not None
        assert image in ball.neighbors(ball.root)

    @pytest.mark.unit
    def test_orbit_path_of_b_is_geodesic(self):
        """Test b^k⟨a⟩ lies at tree distance |k| from the root."""
        ball = bass_serre_ball(2, 3, 1)
        path = ball.orbit_path(ball.group.b, 3)
        assert [len(key) for key in path] == [3, 2, 1, 0, 1, 2, 3]

    @pytest.mark.unit
    def test_limits(self):
        """Test radius validation and the vertex cap."""
        with pytest.raises(ConfigError):
            bass_serre_ball(2, 3, 0)
        with pytest.raises(BallOverflow):
            bass_serre_ball(2, 3, 3, cap=10)

    @pytest.mark.unit
    def test_to_json_sorted_by_depth(self):
        """Test the serialized ball."""
        out = bass_serre_ball(1, 2, 2).to_json()
        depths = [v["depth"] for v in out["vertices"]]
        assert depths == sorted(depths)
        assert out["radius"] == 2


class TestBraids:
    """Test cases for braid_to_sl2 and chirality_search."""

    @pytest.mark.unit
    def test_generators(self):
        """Test σ and τ images."""
        assert braid_to_sl2("s") == IntMatrix2(1, 1, 0, 1)
        assert braid_to_sl2("t") == IntMatrix2(1, 0, -1, 1)
        assert braid_to_sl2("σ") == SIGMA
        assert braid_to_sl2("sS") == IntMatrix2.identity()

    @pytest.mark.unit
    def test_braid_relation(self):
        """Test F(στσ) = F(τστ)."""
        assert braid_to_sl2("sts") == braid_to_sl2("tst")
        assert braid_to_sl2(["s", "t", "s"]) == SIGMA @ TAU @ SIGMA

    @pytest.mark.unit
    def test_unknown_letter(self):
        """Test ConfigError on unknown letters."""
        with pytest.raises(ConfigError):
            braid_to_sl2("sx")

    @pytest.mark.unit
    def test_order_four_element(self):
        """Test [[0,−1],[1,0]] is only found symmetric at n = 2."""
        A = IntMatrix2(0, -1, 1, 0)
        assert not chirality_search(A, 1, 4).found
        result = chirality_search(A, 2, 4)
        assert result.found
        assert result.n == 2
        assert result.to_json()["status"] == "Found"

    @pytest.mark.unit
    def test_golden_matrix_is_achiral(self, cat_map):
        """Test a conjugator C with C φ C⁻¹ = φ⁻¹ is found."""
        result = chirality_search(cat_map, 1, 4)
        assert result.found
        C = result.conjugator
        assert C @ cat_map @ C.inverse() == cat_map.inverse()
        assert braid_to_sl2(result.conjugator_word) == C

    @pytest.mark.unit
    def test_bounds_validated(self, cat_map):
        """Test ConfigError for non-positive bounds and det ≠ 1."""
        with pytest.raises(ConfigError):
            chirality_search(cat_map, 0, 4)
        with pytest.raises(ConfigError):
            chirality_search(IntMatrix2(1, 1, 1, 0), 1, 1)
