"""Configure pytest fixtures and environment for tregsim tests."""

import sys
from pathlib import Path

import pytest
from dotenv import load_dotenv


def _ensure_package_on_path() -> None:
    """Ensure apps/tregsim is importable so ``tregsim`` resolves without installing."""
    # apps/tregsim/tests -> apps/tregsim
    package_root = Path(__file__).resolve().parents[1]
    if str(package_root) not in sys.path:
        sys.path.insert(0, str(package_root))


_ensure_package_on_path()


def pytest_sessionstart(session):
    """Load environment variables when the pytest session starts."""
    load_dotenv()


@pytest.fixture(scope="session")
def default_params():
    from tregsim.core.models import ScenarioParameters

    return ScenarioParameters()


@pytest.fixture(scope="session")
def default_run(default_params):
    """Full default lifetime, seed 1 (shared: it takes a few seconds)."""
    from tregsim.engine.simulation import run_simulation

    return run_simulation(default_params, seed=1)


@pytest.fixture
def short_params():
    """Ten-year scenario with a coarse grid for fast tests."""
    from tests.sample_data import short_scenario

    return short_scenario()
