"""Porous-media equation on the half-line and its reflected particle system."""

import json
from pathlib import Path

from . import _core
from ._core import (
    DensityField,
    Grid1D,
    MonotoneGraph,
    PdeTrajectory,
    StageError,
    ValidationError,
    compare,
    graphs,
    reflected_heat,
    solve,
)

PIPELINES = ("pde", "particle", "verify", "compare", "route-check", "sweep")


def _config_text(config):
    if isinstance(config, (str, Path)) and Path(config).is_file():
        return Path(config).read_text()
    if isinstance(config, dict):
        return json.dumps(config)
    return str(config)


def normalize_config(config):
    """Parsed config with every default filled in."""
    return json.loads(_core.normalize_config(_config_text(config)))


def config_hash(config):
    return _core.config_hash(_config_text(config))


def run(config, pipeline="pde", out=None, seed=None, threads=None):
    """Run a pipeline; returns the report as a dict (``report["passed"]``)."""
    if pipeline not in PIPELINES:
        raise ValueError(f"unknown pipeline {pipeline!r}")
    text = _core.run(_config_text(config), pipeline, None if out is None else str(out), seed, threads)
    return json.loads(text)


__all__ = [
    "DensityField",
    "Grid1D",
    "MonotoneGraph",
    "PdeTrajectory",
    "StageError",
    "ValidationError",
    "compare",
    "config_hash",
    "graphs",
    "normalize_config",
    "reflected_heat",
    "run",
    "solve",
]
