"""Comparison methods: per-snapshot cuts, the union graph, and the plain multiplex Laplacian."""
from __future__ import annotations

import numpy as np

from .cuts import SPARSEST, TemporalCut, _check_kind, sweep_round
from .eigen import EigenConfig, extreme_eigs, sign_normalize
from .exceptions import NoFeasiblePrefix
from .graph import (
    MultiplexParams,
    MultiplexView,
    SpectralOperator,
    TemporalGraph,
    degree_vector,
    multiplex_laplacian_matrix,
    normalized_laplacian_matrix,
    snapshot_normalized_laplacian,
)

__all__ = ["single_baseline", "union_baseline", "lap_baseline", "align_orientations", "BASELINES"]


def _trivial_directions(deg: np.ndarray, kind: str) -> np.ndarray:
    """Null vectors of the (normalized) Laplacian that carry no cut information."""
    size = deg.size
    if kind == SPARSEST:
        return np.full((size, 1), 1.0 / np.sqrt(size))
    root = np.sqrt(deg)
    cols = []
    if root.any():
        cols.append(root / np.linalg.norm(root))
    for v in np.flatnonzero(deg == 0):
        e = np.zeros(size)
        e[v] = 1.0
        cols.append(e)
    return np.column_stack(cols)


def _fiedler(mat, deg, kind, cfg):
    size = mat.shape[0]
    defl = _trivial_directions(deg, kind)
    if defl.shape[1] >= size:
        return None
    op = SpectralOperator(size, lambda x: mat @ x)
    res = extreme_eigs(op, 1, "smallest", (cfg or EigenConfig()).replace(deflation_basis=defl))
    return sign_normalize(res.eigenvectors)[:, 0]


def _static_cut(graph: TemporalGraph, kind: str, cfg) -> np.ndarray | None:
    """Spectral bipartition of a one-snapshot graph; ``None`` if none is defined."""
    if graph.n < 2:
        return None
    mat = graph.laplacian(0) if kind == SPARSEST else snapshot_normalized_laplacian(graph, 0)
    vec = _fiedler(mat, graph.degrees(0), kind, cfg)
    if vec is None:
        return None
    try:
        cut, _ = sweep_round(vec, graph, MultiplexParams(0.0), kind)
    except NoFeasiblePrefix:
        return None
    return cut.labels[:, 0]


def align_orientations(labels: np.ndarray, tg: TemporalGraph, params: MultiplexParams) -> np.ndarray:
    """Flip snapshots left to right whenever that lowers the swap cost to the previous one."""
    out = np.array(labels, dtype=np.int64, copy=True)
    s = params.transition_weights(tg)
    for t in range(1, out.shape[1]):
        keep = float(s[t - 1][out[:, t] != out[:, t - 1]].sum())
        flip = float(s[t - 1][out[:, t] == out[:, t - 1]].sum())
        if flip < keep:
            out[:, t] = 1 - out[:, t]
    return out


def single_baseline(tg: TemporalGraph, params: MultiplexParams, kind: str,
                    cfg: EigenConfig | None = None) -> TemporalCut:
    """Best static cut of every snapshot, oriented greedily to limit swaps.

    A snapshot without a defined static cut (no edges under the normalized
    objective) copies its predecessor's labels.
    """
    _check_kind(kind)
    params.check(tg)
    labels = np.zeros((tg.n, tg.m), dtype=np.int64)
    for t in range(tg.m):
        lab = _static_cut(tg.snapshot(t), kind, cfg)
        if lab is None:
            lab = labels[:, t - 1] if t > 0 else np.zeros(tg.n, dtype=np.int64)
        labels[:, t] = lab
    return TemporalCut(align_orientations(labels, tg, params))


def union_baseline(tg: TemporalGraph, params: MultiplexParams, kind: str,
                   cfg: EigenConfig | None = None) -> TemporalCut:
    """One static cut of the summed-weight graph, repeated in every snapshot."""
    _check_kind(kind)
    params.check(tg)
    lab = _static_cut(tg.union(), kind, cfg)
    if lab is None:
        raise NoFeasiblePrefix("the union graph admits no cut with a finite objective")
    return TemporalCut(np.repeat(lab[:, None], tg.m, axis=1))


def lap_baseline(tg: TemporalGraph, params: MultiplexParams, kind: str,
                 cfg: EigenConfig | None = None) -> TemporalCut:
    """Fiedler vector of the multiplex Laplacian, swept with the temporal objective."""
    _check_kind(kind)
    params.check(tg)
    if kind == SPARSEST:
        mat = multiplex_laplacian_matrix(MultiplexView(tg, params))
    else:
        mat = normalized_laplacian_matrix(tg, params)
    vec = _fiedler(mat, degree_vector(tg), kind, cfg)
    if vec is None:
        raise NoFeasiblePrefix("no non-trivial Laplacian direction")
    cut, _ = sweep_round(vec, tg, params, kind)
    return cut


BASELINES = {"single": single_baseline, "union": union_baseline, "lap": lap_baseline}
