"""Corridor planning: edge inflation, dynamic roadmaps and shortest paths through convex sets."""

import csv
import io
import json

from ._core import (
    CorridorError,
    EizoParams,
    HPolytope,
    InflationReport,
    World,
    dist_gradient,
    dist_to_segment,
    gen_forest,
    hit_and_run,
    inflate_edge,
    lscs_shortest_path,
    set_worker_threads,
    unadaptive_sample_count,
)
from . import _core

__all__ = [
    "CorridorError",
    "EizoParams",
    "HPolytope",
    "InflationReport",
    "World",
    "dist_gradient",
    "dist_to_segment",
    "gen_forest",
    "hit_and_run",
    "inflate_edge",
    "lscs_shortest_path",
    "plan_forest",
    "run_benchmark",
    "set_worker_threads",
    "unadaptive_sample_count",
]


def plan_forest(env_seed, drm_nodes=400, drm_seed=0, seed=0, params=None):
    """Plans start to goal in a Forest scene; returns the plan as a dict."""
    params = params if params is not None else EizoParams()
    return json.loads(_core._plan_forest_json(env_seed, drm_nodes, drm_seed, seed, params))


def run_benchmark(config):
    """Runs the Forest benchmark for a config dict; returns (records, summary)."""
    text, summary = _core._run_benchmark_json(json.dumps(config))
    return list(csv.DictReader(io.StringIO(text))), json.loads(summary)
