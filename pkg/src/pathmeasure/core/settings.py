"""Numerical defaults, optionally overridden from a JSON settings file"""
from __future__ import annotations

import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional

logger = logging.getLogger(__name__)

SETTINGS_ENV = "PATHMEASURE_SETTINGS"

_cache: Optional[Dict[str, Any]] = None


def get_settings_path() -> Optional[Path]:
    """Path of the override file, if the environment names one."""
    path_str = os.environ.get(SETTINGS_ENV)
    if path_str:
        return Path(path_str)
    return None


def load_settings() -> Dict[str, Any]:
    """Defaults merged with the override file. A missing or corrupted
    file falls back to the defaults."""
    settings = _get_default_settings()
    settings_path = get_settings_path()
    if settings_path is None or not settings_path.exists():
        return settings

    try:
        with settings_path.open("r", encoding="utf-8") as f:
            overrides = json.load(f)
        if not isinstance(overrides, dict):
            raise ValueError("settings file is not a JSON object")
    except (json.JSONDecodeError, OSError, ValueError) as e:
        logger.warning("settings file %s is unusable (%s); using defaults", settings_path, e)
        return settings

    unknown = sorted(set(overrides) - set(settings))
    if unknown:
        logger.warning("ignoring unknown settings: %s", ", ".join(unknown))
    for key in settings:
        if key not in overrides:
            continue
        kind = type(settings[key])
        try:
            settings[key] = kind(overrides[key])
        except (TypeError, ValueError):
            logger.warning("setting %s expects %s, got %r; keeping default %r",
                           key, kind.__name__, overrides[key], settings[key])
    return settings


def get_setting(key: str, default: Any = None) -> Any:
    """Get a setting value by key"""
    global _cache
    if _cache is None:
        _cache = load_settings()
    return _cache.get(key, default)


def setting_or(value: Any, key: str) -> Any:
    """`value` unless it is None, then the setting `key`."""
    return get_setting(key) if value is None else value


def reload_settings() -> None:
    """Drop cached settings (tests and long-lived processes)."""
    global _cache
    _cache = None


def _get_default_settings() -> Dict[str, Any]:
    return {
        "nodes_per_axis": 64,
        "space_gauss_points": 8,
        "gauss_points": 16,
        "spectral_terms": 40,
        "max_tensor_nodes": 100_000_000,
        "mass_guard": 1.0e12,
        "drift_tolerance": 1.0e-10,
        "tolerance": 1.0e-6,
        "panel_phase": 8.0,  # radians of phase per Gauss panel
        "tail_threshold": 1.0e-17,  # damping factor at the half-line cutoff
        "positivity_slack": 1.0e-12,
        "weight_tail_fraction": 0.01,
    }
