"""Temporal cut objectives and the exact spectral relaxations.

The production path builds ``M = K C - Lt`` (``Lt`` the multiplex Laplacian
or its degree-normalized form), takes its largest eigenvector and rounds it
with a sweep over the ``n * m`` multiplex nodes.  ``clc_relax`` is a slower
alternative relaxation kept for cross-validation.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .eigen import EigenConfig, extreme_eigs, sign_normalize
from .exceptions import DegenerateCut, NoFeasiblePrefix, ShapeMismatch
from .graph import (
    MultiplexParams,
    MultiplexView,
    SpectralOperator,
    TemporalGraph,
    c_operator,
    degree_vector,
    multiplex_adjacency_matrix,
    multiplex_laplacian_matrix,
    normalized_laplacian_matrix,
)

__all__ = [
    "SPARSEST",
    "NORMALIZED",
    "TemporalCut",
    "CutReport",
    "score_cut",
    "temporal_sparsity",
    "normalized_temporal_sparsity",
    "shift_constant",
    "relaxed_laplacian",
    "stc_operator",
    "stc_deflation",
    "stc_relax",
    "relaxation_bound",
    "clc_relax",
    "sweep_round",
    "kway_cut",
    "lloyd",
]

SPARSEST = "sparsest"
NORMALIZED = "normalized"
KINDS = (SPARSEST, NORMALIZED)


def _check_kind(kind: str) -> str:
    if kind not in KINDS:
        raise ValueError(f"objective kind must be one of {KINDS}, got {kind!r}")
    return kind


@dataclass(frozen=True)
class TemporalCut:
    """Partition id per ``(vertex, snapshot)``; ``labels`` has shape ``(n, m)``."""

    labels: np.ndarray
    k: int = 2

    def __post_init__(self):
        lab = np.array(self.labels, dtype=np.int64)
        if lab.ndim != 2:
            raise ShapeMismatch("labels must be an n x m array")
        if lab.size and (lab.min() < 0 or lab.max() >= self.k):
            raise ValueError(f"labels must lie in [0, {self.k})")
        lab.setflags(write=False)
        object.__setattr__(self, "labels", lab)

    @property
    def shape(self):
        return self.labels.shape

    @classmethod
    def from_flat(cls, flat, n: int, m: int, k: int = 2) -> "TemporalCut":
        """Build from a length ``n*m`` vector in multiplex index order."""
        flat = np.asarray(flat)
        return cls(flat.reshape(m, n).T, k)

    def flat(self) -> np.ndarray:
        return self.labels.T.ravel()

    def indicator(self) -> np.ndarray:
        """The +-1 vector (+1 on label 1) in multiplex index order."""
        return np.where(self.flat() == 1, 1.0, -1.0)

    def flipped(self) -> "TemporalCut":
        if self.k != 2:
            raise ValueError("flip is defined for binary cuts only")
        return TemporalCut(1 - self.labels, 2)

    def __eq__(self, other):
        if not isinstance(other, TemporalCut):
            return NotImplemented
        return self.k == other.k and np.array_equal(self.labels, other.labels)

    __hash__ = None


@dataclass(frozen=True)
class CutReport:
    cut_weight: float
    swaps: float  # vertex count for uniform swap cost, weighted otherwise
    swap_cost: float
    numerator: float
    denominator: float
    objective: float
    objective_kind: str
    beta: float
    extra: dict = field(default_factory=dict, compare=False)

    def as_dict(self) -> dict:
        return {
            "cut_weight": self.cut_weight,
            "swaps": self.swaps,
            "swap_cost": self.swap_cost,
            "numerator": self.numerator,
            "denominator": self.denominator,
            "objective": self.objective,
            "objective_kind": self.objective_kind,
            "beta": self.beta,
        }


def _check_cut(tg: TemporalGraph, cut: TemporalCut):
    if cut.labels.shape != (tg.n, tg.m):
        raise ShapeMismatch(f"cut has shape {cut.labels.shape}, graph is {(tg.n, tg.m)}")
    if cut.k != 2:
        raise ValueError("binary cut required")


def score_cut(tg: TemporalGraph, cut: TemporalCut, params: MultiplexParams, kind: str) -> CutReport:
    """Score a binary temporal cut under the sparsest or normalized objective."""
    _check_kind(kind)
    _check_cut(tg, cut)
    params.check(tg)
    lab = cut.labels
    cut_weight = 0.0
    den = 0.0
    for t in range(tg.m):
        u, v, w = tg.edges(t)
        x = lab[:, t]
        cut_weight += float(w[x[u] != x[v]].sum())
        if kind == SPARSEST:
            size = int(x.sum())
            den += size * (tg.n - size)
        else:
            d = tg.degrees(t)
            vol_x = float(d[x == 1].sum())
            vol_y = float(d[x == 0].sum())
            den += vol_x * vol_y
    moved = lab[:, 1:] != lab[:, :-1]
    s = params.transition_weights(tg).T  # (n, m-1)
    swap_cost = float(s[moved].sum())
    swaps = float(moved.sum()) if params.uniform else swap_cost
    num = cut_weight + swap_cost
    if den == 0:
        raise DegenerateCut(f"{kind} objective undefined: zero denominator")
    return CutReport(cut_weight, swaps, swap_cost, num, den, num / den, kind, float(params.beta))


def temporal_sparsity(tg: TemporalGraph, cut: TemporalCut, params: MultiplexParams) -> CutReport:
    """Cut plus swap weight over ``sum_t |X_t| |X_t^c|``."""
    return score_cut(tg, cut, params, SPARSEST)


def normalized_temporal_sparsity(tg: TemporalGraph, cut: TemporalCut, params: MultiplexParams) -> CutReport:
    """Cut plus swap weight over ``sum_t vol(X_t) vol(X_t^c)``."""
    return score_cut(tg, cut, params, NORMALIZED)


def shift_constant(tg: TemporalGraph, params: MultiplexParams, kind: str) -> float:
    """Multiplier ``K`` of ``C`` that dominates the relaxed Laplacian's spectrum.

    Sparsest: ``3 (B + 2 b)`` with ``B = max(n, max over edges of deg u + deg v)``
    (Anderson-Morley) and ``b`` the largest swap cost; for unit weights and
    ``deg u + deg v <= n`` this is ``3 (n + 2 beta)``.  Normalized:
    ``3 (2 + 2 b)``.
    """
    _check_kind(kind)
    b = params.max_swap()
    if kind == NORMALIZED:
        return 3.0 * (2.0 + 2.0 * b)
    bound = float(tg.n)
    for t in range(tg.m):
        u, v, _ = tg.edges(t)
        if u.size:
            d = tg.degrees(t)
            bound = max(bound, float((d[u] + d[v]).max()))
    return 3.0 * (bound + 2.0 * b)


def relaxed_laplacian(tg: TemporalGraph, params: MultiplexParams, kind: str) -> sp.csr_matrix:
    """Sparse multiplex Laplacian, degree-normalized for the normalized kind."""
    _check_kind(kind)
    if kind == SPARSEST:
        return multiplex_laplacian_matrix(MultiplexView(tg, params))
    return normalized_laplacian_matrix(tg, params)


def stc_operator(tg: TemporalGraph, params: MultiplexParams, kind: str, shift: float | None = None):
    """``(M, K)`` with ``M = K C - Lt`` as an implicit operator."""
    big_k = shift_constant(tg, params, kind) if shift is None else float(shift)
    lap = relaxed_laplacian(tg, params, kind)
    c = c_operator(tg.n, tg.m)
    return SpectralOperator(tg.n * tg.m, lambda x: big_k * c.matvec(x) - lap @ x, "M"), big_k


def _snapshot_constants(n: int, m: int) -> np.ndarray:
    e = np.zeros((n * m, m))
    for t in range(m):
        e[t * n:(t + 1) * n, t] = 1.0 / np.sqrt(n)
    return e


def stc_deflation(tg: TemporalGraph, params: MultiplexParams, kind: str,
                  cfg: EigenConfig | None = None, op: SpectralOperator | None = None) -> np.ndarray:
    """Orthonormal basis of the bottom invariant subspace of ``M``.

    ``M`` is ``-Lt`` on the per-snapshot constants and at least ``K n - |Lt|``
    on their complement, so its ``m`` lowest eigenpairs sit far below the rest.
    Removing them before the largest-eigenvector solve shrinks the spectral
    spread from about ``K n`` to ``|Lt|``.  For the sparsest kind with uniform
    swap costs that subspace is exactly the per-snapshot constants (the
    multiplex Laplacian commutes with ``C``).  Otherwise it is computed; the
    huge gap makes that solve cheap.
    """
    n, m = tg.n, tg.m
    if kind == SPARSEST and params.uniform:
        return _snapshot_constants(n, m)
    if op is None:
        op, _ = stc_operator(tg, params, kind)
    cfg = (cfg or EigenConfig()).replace(deflation_basis=None)
    low = extreme_eigs(op, m, "smallest", cfg.replace(tol=min(cfg.tol, 1e-11)))
    return low.eigenvectors


def stc_relax(tg: TemporalGraph, params: MultiplexParams, kind: str, cfg: EigenConfig | None = None):
    """Largest eigenpair ``(x, lam)`` of ``K C - Lt``."""
    _check_kind(kind)
    if tg.n * tg.m < 2:
        raise ValueError("need at least two multiplex nodes")
    op, _ = stc_operator(tg, params, kind)
    cfg = cfg or EigenConfig()
    cfg = cfg.replace(deflation_basis=stc_deflation(tg, params, kind, cfg, op))
    res = extreme_eigs(op, 1, "largest", cfg)
    return sign_normalize(res.eigenvectors)[:, 0], float(res.eigenvalues[0])


def relaxation_bound(tg: TemporalGraph, params: MultiplexParams, kind: str,
                     cfg: EigenConfig | None = None) -> float:
    """``(K n - lam_max(M)) / n``, the relaxed objective value."""
    big_k = shift_constant(tg, params, kind)
    _, lam = stc_relax(tg, params, kind, cfg)
    return (big_k * tg.n - lam) / tg.n


def clc_relax(tg: TemporalGraph, params: MultiplexParams, kind: str, cfg: EigenConfig | None = None):
    """Smallest eigenpair of ``C Lt C`` orthogonal to the per-snapshot constants."""
    _check_kind(kind)
    n, m = tg.n, tg.m
    if n < 2:
        raise ValueError("need at least two vertices per snapshot")
    lap = relaxed_laplacian(tg, params, kind)
    c = c_operator(n, m)
    op = SpectralOperator(n * m, lambda x: c.matvec(lap @ c.matvec(x)), "CLC")
    cfg = (cfg or EigenConfig()).replace(deflation_basis=_snapshot_constants(n, m))
    res = extreme_eigs(op, 1, "smallest", cfg)
    return res.eigenvectors[:, 0], float(res.eigenvalues[0])


def _within_layer_exclusive_cumsum(layer: np.ndarray, values: np.ndarray, m: int) -> np.ndarray:
    """For each position, the sum of ``values`` at earlier positions of the same layer."""
    order = np.argsort(layer, kind="stable")
    vals = values[order]
    csum = np.cumsum(vals) - vals
    counts = np.bincount(layer, minlength=m)
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    group_base = np.cumsum(np.concatenate([[0], vals]))[starts]
    out = np.empty_like(csum)
    out[order] = csum - np.repeat(group_base, counts)
    return out


def _sweep_profile(x: np.ndarray, tg: TemporalGraph, params: MultiplexParams, kind: str):
    """Numerator, denominator and feasibility of every prefix of the sorted nodes.

    Prefix ``p`` holds the ``p`` nodes with the smallest values (ties by node
    index).  Arrays are indexed by ``p = 0..N``.
    """
    n, m = tg.n, tg.m
    size = n * m
    order = np.lexsort((np.arange(size), x))
    pos = np.empty(size, dtype=np.int64)
    pos[order] = np.arange(size)

    adj = sp.triu(multiplex_adjacency_matrix(MultiplexView(tg, params)), k=1).tocoo()
    a, b = pos[adj.row], pos[adj.col]
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    diff = np.zeros(size + 2)
    np.add.at(diff, lo + 1, adj.data)
    np.add.at(diff, hi + 1, -adj.data)
    num = np.cumsum(diff)[: size + 1]

    layer = order // n
    if kind == SPARSEST:
        before = _within_layer_exclusive_cumsum(layer, np.ones(size, dtype=np.int64), m)
        inc = n - 2 * before - 1
        den = np.concatenate([[0], np.cumsum(inc)]).astype(float)
        feasible = den > 0
    else:
        deg = degree_vector(tg)[order]
        vol_b = _within_layer_exclusive_cumsum(layer, deg, m)
        total = np.bincount(layer, weights=deg, minlength=m)
        inc = deg * (total[layer] - 2 * vol_b - deg)
        den = np.concatenate([[0.0], np.cumsum(inc)])
        posdeg = (deg > 0).astype(np.int64)
        cnt_b = _within_layer_exclusive_cumsum(layer, posdeg, m)
        ptot = np.bincount(layer, weights=posdeg, minlength=m).astype(np.int64)[layer]
        act = np.where(posdeg == 1, ((cnt_b == 0) & (ptot > 1)).astype(int)
                       - ((cnt_b + 1 == ptot) & (ptot > 1)).astype(int), 0)
        feasible = np.concatenate([[0], np.cumsum(act)]) > 0
    return order, num, den, feasible


def sweep_round(eigvec, tg: TemporalGraph, params: MultiplexParams, kind: str):
    """Round a relaxed vector to the best feasible prefix cut.

    Returns ``(TemporalCut, CutReport)``; nodes above the threshold get label 1.
    """
    _check_kind(kind)
    x = np.asarray(eigvec, dtype=float)
    size = tg.n * tg.m
    if x.shape != (size,):
        raise ShapeMismatch(f"vector must have length {size}")
    if np.ptp(x) == 0:
        raise NoFeasiblePrefix("constant vector carries no sweep order")
    order, num, den, feasible = _sweep_profile(x, tg, params, kind)
    cand = np.flatnonzero(feasible[1:size]) + 1
    if cand.size == 0:
        raise NoFeasiblePrefix("every sweep prefix has a zero denominator")
    obj = num[cand] / den[cand]
    p = int(cand[np.argmin(obj)])
    flat = np.zeros(size, dtype=np.int64)
    flat[order[p:]] = 1
    cut = TemporalCut.from_flat(flat, tg.n, tg.m)
    return cut, score_cut(tg, cut, params, kind)


def lloyd(points: np.ndarray, k: int, seed: int = 0, max_iter: int = 100) -> np.ndarray:
    """k-means with seeded farthest-first initialization; returns labels."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    npts = pts.shape[0]
    if not 1 <= k <= npts:
        raise ValueError("need 1 <= k <= number of points")
    rng = np.random.default_rng(seed)
    centers = [int(rng.integers(npts))]
    dist = np.sum((pts - pts[centers[0]]) ** 2, axis=1)
    for _ in range(1, k):
        nxt = int(np.argmax(dist))
        centers.append(nxt)
        dist = np.minimum(dist, np.sum((pts - pts[nxt]) ** 2, axis=1))
    cent = pts[centers].copy()
    labels = None
    for _ in range(max_iter):
        d2 = ((pts[:, None, :] - cent[None, :, :]) ** 2).sum(axis=2)
        new = np.argmin(d2, axis=1)
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for j in range(k):
            members = labels == j
            if members.any():
                cent[j] = pts[members].mean(axis=0)
    return labels


def kway_cut(tg: TemporalGraph, params: MultiplexParams, kind: str, k: int, seed: int = 0,
             cfg: EigenConfig | None = None) -> TemporalCut:
    """k-way temporal cut from the top ``k - 1`` eigenvectors of ``M``."""
    _check_kind(kind)
    size = tg.n * tg.m
    if not 2 <= k <= size:
        raise ValueError(f"k must be in [2, {size}]")
    op, _ = stc_operator(tg, params, kind)
    cfg = cfg or EigenConfig(seed=seed)
    cfg = cfg.replace(deflation_basis=stc_deflation(tg, params, kind, cfg, op))
    res = extreme_eigs(op, k - 1, "largest", cfg)
    labels = lloyd(res.eigenvectors, k, seed=seed)
    return TemporalCut.from_flat(labels, tg.n, tg.m, k)
