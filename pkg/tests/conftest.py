import pytest

from transmission_lab.acceptance import mesh as cached_mesh


@pytest.fixture(scope="session")
def coarse():
    return cached_mesh(0.1)


@pytest.fixture(scope="session")
def fine():
    return cached_mesh(0.05)


@pytest.fixture(scope="session")
def rough():
    """Very coarse mesh for quick structural checks."""
    return cached_mesh(0.25)
