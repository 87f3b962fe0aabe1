"""
Comprehensive test suite for the backend API module.

This module tests FastAPI endpoints, request/response handling and the
mapping of service errors to HTTP status codes.
"""

import pytest
import sys
import os
from unittest.mock import patch

# Add project root to path
project_root = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

try:
    from fastapi.testclient import TestClient
    from backend.backend import app
    from services.errors import ConfigError, PosetError
except ImportError as e:
    pytest.skip(f"Backend modules not available: {e}", allow_module_level=True)


class TestBackendAPI:
    """Test cases for backend API endpoints."""

    @pytest.fixture
    def client(self):
        """Create test client for FastAPI app."""
        return TestClient(app)

    @pytest.mark.unit
    @pytest.mark.api
    def test_health(self, client):
        """Test the health endpoint lists subcommands and settings."""
        response = client.get("/health")
        assert response.status_code == 200
        body = response.json()
        assert body["status"] == "ok"
        assert "poset" in body["subcommands"]
        assert body["settings"]["epsilon"] == pytest.approx(3.6)

    @pytest.mark.unit
    @pytest.mark.api
    def test_classify_isometry(self, client):
        """Test classifying a single dilation."""
        response = client.post("/classify", json={"isometry": [2.0, 0.0, 0.0, 0.5]})
        assert response.status_code == 200
        body = response.json()
        assert body["passed"] is True
        assert body["records"][0]["classification"]["tag"] == "loxodromic"

    @pytest.mark.unit
    @pytest.mark.api
    def test_classify_singular_matrix(self, client):
        """Test a singular matrix maps to 400."""
        response = client.post("/classify", json={"isometry": [1.0, 1.0, 1.0, 1.0]})
        assert response.status_code == 400
        assert "Invalid configuration" in response.json()["detail"]

    @pytest.mark.unit
    @pytest.mark.api
    def test_confining_requires_phi(self, client):
        """Test request validation for the confining endpoint."""
        response = client.post("/confining", json={"eps": 1.0})
        assert response.status_code == 422

    @pytest.mark.unit
    @pytest.mark.api
    def test_confining_non_anosov(self, client):
        """Test a non-Anosov φ maps to 400."""
        response = client.post("/confining", json={"phi": [1, 1, 0, 1]})
        assert response.status_code == 400

    @pytest.mark.unit
    @pytest.mark.api
    def test_axioms_posted_family(self, client, chain_family):
        """Test the axioms endpoint on a posted family."""
        response = client.post("/projection/axioms", json={"family": chain_family.to_json()})
        assert response.status_code == 200
        body = response.json()
        assert body["passed"] is True
        assert {r["check"] for r in body["records"]} == {"axioms", "modified_distance"}

    @pytest.mark.unit
    @pytest.mark.api
    def test_complex_dot(self, client, chain_family):
        """Test the complex endpoint returns DOT artifacts on request."""
        response = client.post("/projection/complex",
                               json={"family": chain_family.to_json(), "K": 4.0, "format": "dot"})
        assert response.status_code == 200
        dot = response.json()["dot"]
        assert dot["projection_graph"].startswith("graph P_K {")
        assert dot["quasi_tree"].startswith("graph C_K {")

    @pytest.mark.unit
    @pytest.mark.api
    def test_mainlemma(self, client):
        """Test the Z² instance passes and the broken one reports failure."""
        assert client.post("/lemmas/mainlemma", json={"instance": "z2"}).json()["passed"] is True
        assert client.post("/lemmas/mainlemma", json={"instance": "broken"}).json()["passed"] is False
        assert client.post("/lemmas/mainlemma", json={"instance": "nope"}).status_code == 400

    @pytest.mark.unit
    @pytest.mark.api
    def test_qm_descriptor(self, client):
        """Test the quasimorphism endpoint with a homomorphism descriptor."""
        response = client.post("/lemmas/qm", json={"qm": {"qm": "hom", "coeffs": [1, 0]}, "samples": 5})
        assert response.status_code == 200
        assert response.json()["passed"] is True

    @pytest.mark.unit
    @pytest.mark.api
    def test_poset_error_mapping(self, client):
        """Test service errors map to 400, 422 and 500."""
        payload = {"phi": [2, 1, 1, 1]}
        with patch("routers.poset.run", side_effect=ConfigError("bad", field="phi")):
            assert client.post("/poset", json=payload).status_code == 400
        with patch("routers.poset.run", side_effect=PosetError("cycle")) as mock_run:
            response = client.post("/poset", json=payload)
            assert response.status_code == 422
            assert "Poset assembly failed" in response.json()["detail"]
            mock_run.assert_called_once()
        with patch("routers.poset.run", side_effect=RuntimeError("boom")):
            assert client.post("/poset", json=payload).status_code == 500

    @pytest.mark.unit
    @pytest.mark.api
    def test_flip_invalid_depth(self, client):
        """Test a non-positive depth is rejected as configuration."""
        response = client.post("/flip", json={"depth": 0})
        assert response.status_code == 400

    @pytest.mark.unit
    @pytest.mark.api
    def test_flip_passes_format(self, client, mocker):
        """Test the flip endpoint forwards its request to the runner."""
        mock_run = mocker.patch("routers.flip.run")
        mock_run.return_value.passed = True
        mock_run.return_value.sorted_records.return_value = []
        mock_run.return_value.artifacts = {"flip_tree": "graph flip_tree {}"}
        response = client.post("/flip", json={"depth": 2, "format": "dot"})
        assert response.status_code == 200
        assert response.json()["dot"] == "graph flip_tree {}"
        config = mock_run.call_args[0][0]
        assert config.depth == 2
        assert config.subcommand == "flip"
