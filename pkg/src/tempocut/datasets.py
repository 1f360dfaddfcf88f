"""Bundled example data."""
from importlib import resources

import numpy as np

from .cuts import TemporalCut
from .formats import parse_graph
from .graph import TemporalGraph

__all__ = ["fixture_path", "load_drift", "drift_cuts"]


def fixture_path(name: str = "drift.txt"):
    return resources.files("tempocut").joinpath("data").joinpath(name)


def load_drift() -> TemporalGraph:
    """Eight vertices, two snapshots: two 4-cliques with vertex 4 drifting.

    At unit swap cost the best cut moves vertex 4 across in the second
    snapshot (objective 4/31); at swap cost 2 keeping the sides fixed
    wins (5/32).
    """
    return parse_graph(fixture_path().read_text(encoding="utf-8"))


def drift_cuts() -> dict:
    """The two reference cuts of the fixture, keyed ``"I"`` and ``"II"``."""
    fixed = np.zeros((8, 2), dtype=int)
    fixed[:4, :] = 1
    moved = fixed.copy()
    moved[4, 1] = 1
    return {"I": TemporalCut(fixed), "II": TemporalCut(moved)}
