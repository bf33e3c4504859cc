"""Safe scalar-field mapping with GP confidence maps."""

import json
import os

from ._safemap import (
    ArgumentError,
    ConfigError,
    DomainError,
    EpisodeAbort,
    NumericalError,
    PlannerTimeout,
    analyze_run,
    beta,
    detect_disks,
    field_values,
    grid_points,
    info_spectrum,
    mutual_information,
    mvs_select,
    plan_path,
    posterior,
)
from . import _safemap

__all__ = [
    "ArgumentError",
    "ConfigError",
    "DomainError",
    "EpisodeAbort",
    "NumericalError",
    "PlannerTimeout",
    "analyze_run",
    "beta",
    "detect_disks",
    "field_values",
    "grid_points",
    "info_spectrum",
    "load_config",
    "mutual_information",
    "mvs_select",
    "plan_path",
    "posterior",
    "run_episode",
    "write_plan",
]


def _as_text(config):
    if isinstance(config, dict):
        return json.dumps(config)
    if isinstance(config, (str, os.PathLike)) and os.path.exists(config):
        with open(config) as f:
            return f.read()
    return str(config)


def load_config(config):
    """Validated, normalized config as a dict (accepts a dict, a path or JSON text)."""
    return json.loads(_safemap.validate_config(_as_text(config)))


def run_episode(config, out=None):
    """Run one episode; with `out`, also write the run directory."""
    return _safemap.run_episode(_as_text(config), out)


def write_plan(config, out):
    _safemap.write_plan(_as_text(config), out)
