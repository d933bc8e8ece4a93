"""Shared fixtures: shipped system descriptions, parsed models and DRM worlds."""

from pathlib import Path

import pytest

from core.behaviors import default_registry
from drm.crypto import DeterministicSuite
from drm.demo import build_demo_world
from sysdesc.system import parse_system_file


ROOT = Path(__file__).resolve().parent.parent
SYSTEMS = ROOT / "systems"
GOLDEN = Path(__file__).resolve().parent / "golden"

FIXTURES = ("drms_business_model", "fork_join", "chain", "retry_loop", "hw_only")


def load_system(name: str):
    return parse_system_file(SYSTEMS / f"{name}.f4ms", default_registry())


@pytest.fixture(scope="session")
def registry():
    return default_registry()


@pytest.fixture(scope="session")
def drms_model():
    return load_system("drms_business_model")


@pytest.fixture(scope="session")
def fork_join_model():
    return load_system("fork_join")


@pytest.fixture
def world():
    """Demo world on the deterministic suite: alice (desktop) and song-001."""
    return build_demo_world(DeterministicSuite(), seed=7)


@pytest.fixture
def service(world):
    return world.service
