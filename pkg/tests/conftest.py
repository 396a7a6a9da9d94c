import json
import sys
from pathlib import Path

import numpy as np
import pytest

_src_dir = Path(__file__).resolve().parents[1] / "src"
if str(_src_dir) not in sys.path:
    sys.path.insert(0, str(_src_dir))

from pathmeasure.core.settings import SETTINGS_ENV, reload_settings


@pytest.fixture(autouse=True)
def default_settings(monkeypatch):
    monkeypatch.delenv(SETTINGS_ENV, raising=False)
    reload_settings()
    yield
    reload_settings()


@pytest.fixture
def override_settings(tmp_path, monkeypatch):
    """Write a settings file with the given values and make it current."""
    def apply(**values):
        path = tmp_path / "settings.json"
        path.write_text(json.dumps(values), encoding="utf-8")
        monkeypatch.setenv(SETTINGS_ENV, str(path))
        reload_settings()
        return path

    return apply


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
