"""Exhaustive ground truth for small instances and evaluation metrics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linear_sum_assignment

from .cuts import SPARSEST, TemporalCut, _check_kind, score_cut
from .exceptions import DegenerateCut, ShapeMismatch, TooLarge
from .graph import MultiplexParams, MultiplexView, TemporalGraph, multiplex_adjacency_matrix

__all__ = ["MAX_NODES", "brute_force_optimal", "KWayReport", "kway_metrics", "partition_agreement"]

MAX_NODES = 22
_CHUNK = 1 << 15


def brute_force_optimal(tg: TemporalGraph, params: MultiplexParams, kind: str):
    """Exact minimizer over all binary labelings of the ``n m`` multiplex nodes.

    Multiplex node 0 is pinned to label 0 (the objectives are flip
    invariant).  Among labelings within a relative ``1e-12`` of the optimum
    the lexicographically smallest label vector, in multiplex index order,
    wins.  Returns ``(TemporalCut, objective)``.
    """
    _check_kind(kind)
    params.check(tg)
    n, m = tg.n, tg.m
    size = n * m
    if size > MAX_NODES:
        raise TooLarge(f"n*m = {size} exceeds the enumeration cap of {MAX_NODES}")
    if size < 2:
        raise DegenerateCut("a single multiplex node has no cut")
    adj = sp.triu(multiplex_adjacency_matrix(MultiplexView(tg, params)), k=1).tocoo()
    ei, ej, ew = adj.row, adj.col, adj.data
    weights = np.ones(size) if kind == SPARSEST else np.concatenate([tg.degrees(t) for t in range(m)])
    layer_w = np.zeros((size, m))
    layer_w[np.arange(size), np.arange(size) // n] = weights
    totals = layer_w.sum(axis=0)
    # node i is bit (size - 1 - i), so increasing codes are lexicographic
    shifts = np.arange(size - 1, -1, -1, dtype=np.int64)
    total = 1 << (size - 1)
    objs = []
    for lo in range(0, total, _CHUNK):
        codes = np.arange(lo, min(total, lo + _CHUNK), dtype=np.int64)
        bits = ((codes[:, None] >> shifts) & 1).astype(float)
        num = np.abs(bits[:, ei] - bits[:, ej]) @ ew
        side = bits @ layer_w
        den = (side * (totals - side)).sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            obj = np.where(den > 0, num / np.where(den > 0, den, 1.0), np.inf)
        objs.append(obj)
    objs = np.concatenate(objs)
    best = float(objs.min())
    if not np.isfinite(best):
        raise DegenerateCut("no labeling has a positive denominator")
    code = int(np.flatnonzero(objs <= best * (1 + 1e-12) + 1e-300)[0])
    flat = (code >> shifts) & 1
    cut = TemporalCut.from_flat(flat, n, m)
    return cut, score_cut(tg, cut, params, kind).objective


@dataclass(frozen=True)
class KWayReport:
    k: int
    cut: float
    swaps: float
    sparsity: float
    n_sparsity: float

    def as_dict(self) -> dict:
        return {"k": self.k, "cut": self.cut, "swaps": self.swaps,
                "sparsity": self.sparsity, "n_sparsity": self.n_sparsity}


def kway_metrics(tg: TemporalGraph, cut: TemporalCut, params: MultiplexParams) -> KWayReport:
    """Cut weight, swap weight, and the k-way sums of both ratio objectives.

    Each cross edge is counted once.  The k-way ratios add, over parts ``i``,
    the binary objective of ``(X_i, complement)``.
    """
    if cut.labels.shape != (tg.n, tg.m):
        raise ShapeMismatch(f"cut has shape {cut.labels.shape}, graph is {(tg.n, tg.m)}")
    lab = cut.labels
    total_cut = 0.0
    for t in range(tg.m):
        u, v, w = tg.edges(t)
        total_cut += float(w[lab[u, t] != lab[v, t]].sum())
    s = params.transition_weights(tg).T
    swaps = float(s[lab[:, 1:] != lab[:, :-1]].sum())
    sparsity = 0.0
    nsparsity = 0.0
    for i in range(cut.k):
        part = TemporalCut((lab == i).astype(np.int64))
        try:
            sparsity += score_cut(tg, part, params, "sparsest").objective
            nsparsity += score_cut(tg, part, params, "normalized").objective
        except DegenerateCut as exc:
            raise DegenerateCut(f"part {i}: {exc}") from None
    return KWayReport(cut.k, total_cut, swaps, sparsity, nsparsity)


def partition_agreement(a: TemporalCut, b: TemporalCut) -> float:
    """Largest fraction of matching labels over relabelings of ``b``."""
    la, lb = np.asarray(a.labels), np.asarray(b.labels)
    if la.shape != lb.shape:
        raise ShapeMismatch(f"cuts differ in shape: {la.shape} vs {lb.shape}")
    k = max(a.k, b.k, int(la.max()) + 1, int(lb.max()) + 1)
    conf = np.zeros((k, k), dtype=np.int64)
    np.add.at(conf, (la.ravel(), lb.ravel()), 1)
    rows, cols = linear_sum_assignment(conf, maximize=True)
    return float(conf[rows, cols].sum() / la.size)
