"""Shared fixtures."""

import pytest
import torch
from loguru import logger

from gpinn.config import GeometryConfig
from gpinn.mesh import generate_domain, structured_square


@pytest.fixture(autouse=True)
def _deterministic_torch(tmp_path, monkeypatch):
    torch.set_num_threads(1)
    torch.set_default_dtype(torch.float64)
    monkeypatch.setenv("GPINN_CACHE_DIR", str(tmp_path / "cache"))
    yield


@pytest.fixture
def log_messages():
    """Messages logged by gpinn during the test."""
    messages: list[str] = []
    handler_id = logger.add(lambda m: messages.append(m.record["message"]), level="DEBUG")
    yield messages
    logger.remove(handler_id)


@pytest.fixture
def square4():
    return structured_square(4)


@pytest.fixture(scope="session")
def house_mesh():
    return generate_domain(GeometryConfig(kind="house", h=0.1))


@pytest.fixture(scope="session")
def crack_mesh():
    return generate_domain(GeometryConfig(kind="crack_plate", h=0.1))


@pytest.fixture(scope="session")
def plate_mesh():
    return generate_domain(GeometryConfig(kind="plate", h=0.25))
