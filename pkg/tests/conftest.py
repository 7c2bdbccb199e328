import logging

import numpy as np
import pytest

from src import main as cli
from src.config import settings
from src.field import SpatialField


@pytest.fixture(autouse=True)
def quiet_progress(monkeypatch):
    monkeypatch.setattr(settings, "show_progress", False)


@pytest.fixture(autouse=True)
def restore_logging():
    yield
    root = logging.getLogger()
    while cli._handlers:
        handler = cli._handlers.pop()
        root.removeHandler(handler)
        handler.close()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_field(rng) -> SpatialField:
    coords = rng.uniform(0.0, 1.0, size=(40, 2))
    return SpatialField(coords=coords, values=rng.standard_normal(40))
