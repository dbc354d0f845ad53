"""Lossless compression of sparse graphs, with graphon sampling and analysis helpers."""

import json

from ._sgc import (
    CapacityError,
    Graph,
    MalformedStream,
    VersionError,
    edge_set_rate,
    er_entropy_gap,
    rank_subset,
    s_of_d,
    unrank_subset,
)
from . import _sgc

__all__ = [
    "CapacityError",
    "Graph",
    "MalformedStream",
    "VersionError",
    "decode",
    "edge_set_rate",
    "encode",
    "er_entropy_gap",
    "graphon_entropy",
    "ls_fit",
    "rank_subset",
    "run_trend",
    "s_of_d",
    "sample",
    "unrank_subset",
]


def encode(graph, policy="an:log", mode="auto"):
    """Encode a graph. Returns (bytes, report dict)."""
    data, report = _sgc.encode(graph, policy, mode)
    return data, json.loads(report)


def decode(data):
    return _sgc.decode(bytes(data))


def sample(graphon, n, rho, seed):
    """Draw a W-random graph; graphon is a dict such as {"kind": "powerlaw", "a": 0.25}."""
    return _sgc.sample(json.dumps(graphon), n, rho, seed)


def graphon_entropy(graphon):
    return _sgc.graphon_entropy(json.dumps(graphon))


def ls_fit(graph, beta, seed=0):
    return _sgc.ls_fit(graph, beta, seed)


def run_trend(experiment, config):
    """Run a trend experiment. Returns a list of dicts, one per grid point."""
    columns, rows = _sgc.run_trend(experiment, json.dumps(config))
    return [dict(zip(columns, row)) for row in rows]
