"""Discrete-event simulator for the Megha federated scheduler and the
Sparrow, Eagle and Pigeon baselines.

Configs are plain dicts with the same layout as the CLI's JSON files;
omitted keys take their defaults.
"""

import json
import os

from ._meghasim import (
    ConfigError,
    InvariantViolation,
    TraceParseError,
    compute_load,
    generate_fixed_load,
    generate_mixed,
    parse_trace,
    percentile,
    resolve_topology,
    serialize_trace,
)
from . import _meghasim

__all__ = [
    "ConfigError",
    "InvariantViolation",
    "TraceParseError",
    "compare",
    "compute_load",
    "config_digest",
    "generate_fixed_load",
    "generate_mixed",
    "load_config",
    "normalize_config",
    "parse_trace",
    "percentile",
    "resolve_topology",
    "run",
    "serialize_trace",
    "sweep",
]


def load_config(path):
    """Read a JSON config file. Relative trace paths stay relative to it."""
    with open(path) as f:
        doc = json.load(f)
    return doc, os.path.dirname(os.path.abspath(path))


def _text(config):
    return json.dumps(config if config is not None else {})


def run(config=None, out_dir=None, base_dir=""):
    """Simulate one config.

    Returns a dict with "summary", "jobs" (one dict per job), "topology"
    as (gm_count, lm_count, workers_per_partition), "wfq_sequences" and the
    fully expanded "config". Writes the report files when out_dir is given.
    """
    return json.loads(_meghasim.run_json(_text(config), base_dir, os.fspath(out_dir) if out_dir else ""))


def compare(configs, threads=1, base_dir=""):
    """Run configs that share workload, seed and topology.

    Returns (results, csv_text) with results in input order.
    """
    rows, csv = _meghasim.compare_json([_text(c) for c in configs], base_dir, threads)
    return [json.loads(r) for r in rows], csv


def sweep(config, loads, sizes, threads=1):
    """One run per (load, target size) over the config's synthetic workload."""
    return json.loads(_meghasim.sweep_json(_text(config), list(loads), list(sizes), threads))


def normalize_config(config=None):
    """The config with every default filled in."""
    return json.loads(_meghasim.config_echo(_text(config)))


def config_digest(config=None):
    return _meghasim.config_digest(_text(config))
