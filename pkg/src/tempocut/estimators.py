"""scikit-learn style wrappers around the functional API."""
from __future__ import annotations

import os

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin, TransformerMixin
from sklearn.exceptions import NotFittedError

from .baselines import BASELINES
from .cuts import KINDS, kway_cut, score_cut, stc_relax, sweep_round
from .eigen import EigenConfig
from .exceptions import ConfigInvalid, DimensionMismatch
from .formats import read_graph, read_signal
from .fstc import fstc_cut
from .graph import MultiplexParams, TemporalGraph
from .wavelets import (
    SignalSeries,
    compress,
    graph_fourier_basis,
    l2_error,
)

__all__ = [
    "METHODS",
    "check_temporal_graph",
    "check_signal",
    "run_method",
    "TemporalCutEstimator",
    "DynamicWaveletCompressor",
    "GraphFourierCompressor",
]

METHODS = ("stc", "fstc", "single", "union", "lap")


def check_temporal_graph(graph) -> TemporalGraph:
    """Accept a ``TemporalGraph`` or a path to a graph file."""
    if isinstance(graph, TemporalGraph):
        return graph
    if isinstance(graph, (str, os.PathLike)):
        return read_graph(graph)
    raise TypeError(f"expected a TemporalGraph or a file path, got {type(graph).__name__}")


def check_signal(signal, graph: TemporalGraph) -> np.ndarray:
    """Return the signal as an ``n x m`` float array matching ``graph``."""
    if isinstance(signal, (str, os.PathLike)):
        return read_signal(signal, graph.n, graph.m)
    vals = np.asarray(signal.values if isinstance(signal, SignalSeries) else signal, dtype=float)
    if vals.ndim == 1 and graph.m == 1:
        vals = vals[:, None]
    if vals.shape != (graph.n, graph.m):
        raise DimensionMismatch(f"signal is {vals.shape}, graph is {(graph.n, graph.m)}")
    if not np.all(np.isfinite(vals)):
        raise ValueError("signal values must be finite")
    return vals


def run_method(tg, params, method, kind, rank=None, k=2, seed=0, cfg=None):
    """Dispatch one cut method; returns ``(cut, report_or_None, diagnostics)``."""
    if method not in METHODS:
        raise ConfigInvalid(f"method must be one of {METHODS}")
    if kind not in KINDS:
        raise ConfigInvalid(f"objective must be one of {KINDS}")
    cfg = cfg or EigenConfig(seed=seed)
    if k != 2:
        if method != "stc":
            raise ConfigInvalid("k-way cuts are available with the stc method only")
        return kway_cut(tg, params, kind, k, seed=seed, cfg=cfg), None, {}
    if method == "stc":
        x, lam = stc_relax(tg, params, kind, cfg)
        cut, report = sweep_round(x, tg, params, kind)
        return cut, report, {"eigenvalue": lam}
    if method == "fstc":
        return fstc_cut(tg, params, kind, rank, cfg)
    cut = BASELINES[method](tg, params, kind, cfg)
    return cut, score_cut(tg, cut, params, kind), {}


class TemporalCutEstimator(ClusterMixin, BaseEstimator):
    """Fit a temporal cut to a graph; ``labels_`` has shape ``(n, m)``."""

    def __init__(self, method="stc", objective="sparsest", beta=1.0, rank=None, k=2,
                 seed=0, tol=1e-8):
        self.method = method
        self.objective = objective
        self.beta = beta
        self.rank = rank
        self.k = k
        self.seed = seed
        self.tol = tol

    def fit(self, X, y=None):
        tg = check_temporal_graph(X)
        params = MultiplexParams(float(self.beta))
        cfg = EigenConfig(tol=self.tol, seed=self.seed)
        cut, report, diag = run_method(tg, params, self.method, self.objective,
                                       self.rank, self.k, self.seed, cfg)
        self.cut_ = cut
        self.report_ = report
        self.diagnostics_ = diag
        self.labels_ = cut.labels
        self.n_snapshots_ = tg.m
        return self

    def score(self, X, y=None):
        """Negative objective of the fitted cut on ``X`` (higher is better)."""
        if not hasattr(self, "cut_"):
            raise NotFittedError("call fit first")
        if self.cut_.k != 2:
            raise ConfigInvalid("scoring needs a binary cut")
        tg = check_temporal_graph(X)
        return -score_cut(tg, self.cut_, MultiplexParams(float(self.beta)), self.objective).objective


class DynamicWaveletCompressor(TransformerMixin, BaseEstimator):
    """Piecewise-constant approximation of a dynamic signal by ``k`` parts.

    ``fit`` learns the partition; ``transform`` replaces every multiplex node
    by the mean of its part, computed on the signal passed in.
    """

    def __init__(self, graph=None, k=8, alpha=0.0, beta=0.0, seed=0):
        self.graph = graph
        self.k = k
        self.alpha = alpha
        self.beta = beta
        self.seed = seed

    def _graph(self):
        if self.graph is None:
            raise ConfigInvalid("a temporal graph is required")
        return check_temporal_graph(self.graph)

    def fit(self, X, y=None):
        tg = self._graph()
        vals = check_signal(X, tg)
        self.tree_ = compress(tg, vals, int(self.k), float(self.alpha),
                              MultiplexParams(float(self.beta)), EigenConfig(seed=self.seed))
        self.labels_ = self.tree_.labels()
        self.l2_error_ = self.tree_.error
        return self

    def transform(self, X):
        if not hasattr(self, "tree_"):
            raise NotFittedError("call fit first")
        tg = self._graph()
        vals = check_signal(X, tg)
        out = np.empty_like(vals)
        for part in np.unique(self.labels_):
            mask = self.labels_ == part
            out[mask] = vals[mask].mean()
        return out

    def score(self, X, y=None):
        return -l2_error(X, self.transform(X))


class GraphFourierCompressor(TransformerMixin, BaseEstimator):
    """Projection onto the ``k`` smoothest modes of the multiplex Laplacian."""

    def __init__(self, graph=None, k=8, beta=1.0):
        self.graph = graph
        self.k = k
        self.beta = beta

    def _graph(self):
        if self.graph is None:
            raise ConfigInvalid("a temporal graph is required")
        return check_temporal_graph(self.graph)

    def fit(self, X=None, y=None):
        tg = self._graph()
        if X is not None:
            check_signal(X, tg)
        self.basis_ = graph_fourier_basis(tg, MultiplexParams(float(self.beta)), int(self.k))
        return self

    def transform(self, X):
        if not hasattr(self, "basis_"):
            raise NotFittedError("call fit first")
        tg = self._graph()
        f = check_signal(X, tg).T.ravel()
        rec = self.basis_ @ (self.basis_.T @ f)
        return rec.reshape(tg.m, tg.n).T

    def score(self, X, y=None):
        return -l2_error(X, self.transform(X))
