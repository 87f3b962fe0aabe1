"""
Shared pytest fixtures and configuration for the hypstructures test suite.

This module provides the golden Anosov matrices, seeded random generators,
small families and graphs, and the FastAPI test client used across modules.
"""

import os
import sys
import tempfile
import shutil
import pytest
from unittest.mock import patch

import networkx as nx
import numpy as np
from fastapi.testclient import TestClient

# Add the project root to Python path
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from services.groups import IntMatrix2, TorusBundleGroup, eigen
from services.projection_complex import synthetic_chain_family

# Import the FastAPI app
try:
    from backend.backend import app
except ImportError:
    # Fallback for when the HTTP stack is not installed
    app = None


@pytest.fixture
def temp_dir():
    """Create a temporary directory for report and input files."""
    temp_dir = tempfile.mkdtemp()
    yield temp_dir
    shutil.rmtree(temp_dir, ignore_errors=True)


@pytest.fixture
def cat_map():
    """The golden Anosov matrix [[2,1],[1,1]]."""
    return IntMatrix2(2, 1, 1, 1)


@pytest.fixture
def cat_data(cat_map):
    """Eigen-data of [[2,1],[1,1]]."""
    return eigen(cat_map)


@pytest.fixture
def cat_group(cat_data):
    """Z²⋊_φZ for the golden matrix."""
    return TorusBundleGroup(cat_data)


@pytest.fixture
def rng():
    """Seeded generator so sampled checks are reproducible."""
    return np.random.default_rng(12345)


@pytest.fixture
def chain_family():
    """Six domains on lines with π_j(k) = {0} below j and {10} above."""
    return synthetic_chain_family(6, theta=1.0, gap=10.0)


@pytest.fixture
def cycle_graph():
    """Unit-weight cycle on 12 vertices (not a quasi-tree at small scales)."""
    graph = nx.cycle_graph(12)
    nx.set_edge_attributes(graph, 1.0, "weight")
    return graph


@pytest.fixture
def test_client():
    """Create a test client for FastAPI app."""
    if app is None:
        pytest.skip("FastAPI app not available")
    return TestClient(app)


@pytest.fixture
def mock_environment_variables():
    """Mock HYPSTRUCT_* environment variables for testing."""
    with patch.dict(os.environ, {
        'HYPSTRUCT_SEED': '11',
        'HYPSTRUCT_ORBIT_POWERS': '32',
        'HYPSTRUCT_LOG_LEVEL': 'DEBUG',
    }):
        yield


@pytest.fixture(autouse=True)
def cleanup_test_files():
    """Automatically clean up report files after each test."""
    yield
    for file_path in ['test_report.jsonl', 'test_reports']:
        if os.path.exists(file_path):
            if os.path.isdir(file_path):
                shutil.rmtree(file_path)
            else:
                os.remove(file_path)
