"""
Configuration Module

This module loads the YAML configuration, fills in defaults for missing
keys and applies the ALQ_* environment overrides.
"""

import copy
import logging
import os
from typing import Any, Dict, Optional

import yaml

from .exceptions import ConfigError

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = "config/config.yaml"

DEFAULTS: Dict[str, Any] = {
    "data": {
        "dataset_dir": "data/published",
        "sandbox_dir": "data/sandbox",
        "expected_statuses": "data/expected/published_statuses.json",
        "output_dir": "output",
    },
    "fetch": {
        "endpoint": "https://www.lmfdb.org/api",
        "cache_dir": "data/cache",
        "newform_table": "mf_newforms",
        "hecke_table": "mf_hecke_charpolys",
        "charpoly_field": "charpoly_factorization",
        "int_prefix": "i",
        "max_prime": 30,
        "timeout": 30,
        "retries": 5,
        "backoff_factor": 0.5,
        "page_size": 100,
        "refresh_on_classify": False,
    },
    "engine": {
        "candidate_exceptions": [378],
        "count_primes": [2, 3, 5, 7],
        "count_max_exponent": 2,
        "tower_genus": 10,
        "workers": 1,
        "progress": False,
    },
    "report": {
        "formats": ["json", "md"],
        "report_file": "report.json",
        "traces_file": "traces.json",
        "markdown_file": "report.md",
    },
    "logging": {
        "level": "INFO",
        "format": "%(asctime)s %(levelname)s %(name)s: %(message)s",
    },
}


def _merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def apply_env(config: Dict[str, Any], environ: Optional[Dict[str, str]] = None) -> Dict[str, Any]:
    """Apply ALQ_DATA and ALQ_ENDPOINT on top of a loaded config."""
    environ = os.environ if environ is None else environ
    config = copy.deepcopy(config)
    if environ.get("ALQ_DATA"):
        config["data"]["dataset_dir"] = environ["ALQ_DATA"]
    if environ.get("ALQ_ENDPOINT"):
        config["fetch"]["endpoint"] = environ["ALQ_ENDPOINT"]
    return config


def load_config(config_path: Optional[str] = None, environ: Optional[Dict[str, str]] = None) -> Dict[str, Any]:
    """
    Load configuration from a YAML file.

    Args:
        config_path: Path of the file; ALQ_CONFIG, then config/config.yaml when None
        environ: Environment mapping (defaults to os.environ)

    Returns:
        Configuration dict with every section filled in

    Raises:
        ConfigError: if the file is missing or is not a mapping
    """
    environ = os.environ if environ is None else environ
    path = config_path or environ.get("ALQ_CONFIG") or DEFAULT_CONFIG_PATH
    try:
        with open(path, "r", encoding="utf-8") as f:
            loaded = yaml.safe_load(f) or {}
    except FileNotFoundError:
        raise ConfigError(f"Config file not found: {path}")
    except yaml.YAMLError as exc:
        raise ConfigError(f"Config file {path} is not valid YAML: {exc}")
    if not isinstance(loaded, dict):
        raise ConfigError(f"Config file {path} must hold a mapping")
    logger.debug("Loaded config from %s", path)
    return apply_env(_merge(DEFAULTS, loaded), environ)


def default_config() -> Dict[str, Any]:
    return copy.deepcopy(DEFAULTS)
