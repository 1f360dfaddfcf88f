"""Dynamic graph wavelets and signal compression.

A temporal cut ``X`` splits a dynamic signal into two sides per snapshot.
With ``Theta_t = |X_t| sum(f over the complement) - |X^c_t| sum(f over X_t)``
the energy of the cut is

    (sum_t Theta_t^2 + sum_t Theta_t Theta_{t+1}) / sum_t |X_t| |X^c_t|.

``C S C`` with ``S_(t,h)[u, v] = (f_t[u] - f_h[v])^2`` on diagonal blocks and
half of that on the blocks ``h = t +- 1`` has the quadratic form
``-8`` times the numerator above on every +-1 indicator, so maximizing the
energy relaxes to the smallest generalized eigenvector of ``(C S C, C + a L)``.

Compression splits the multiplex nodes recursively.  Every split works on
the sub-multiplex induced by one part: its own per-snapshot vertex sets,
its intra-layer and temporal edges, and its own ``C``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from .cuts import TemporalCut
from .eigen import EigenConfig, dense_sym_eig, extreme_eigs, smallest_generalized
from .exceptions import DegenerateCut, DimensionMismatch, ShapeMismatch
from .graph import (
    MultiplexParams,
    MultiplexView,
    SpectralOperator,
    TemporalGraph,
    multiplex_adjacency_matrix,
    multiplex_laplacian_matrix,
)

__all__ = [
    "SignalSeries",
    "PartitionNode",
    "PartitionTree",
    "CSC_CONSTANT",
    "static_wavelet_energy",
    "dynamic_wavelet_energy",
    "theta",
    "csc_operator",
    "best_wavelet_cut",
    "compress",
    "reconstruct",
    "l2_error",
    "graph_fourier_basis",
    "graph_fourier_compress",
    "heat_signal",
]

# x . (C S C) x = CSC_CONSTANT * (energy numerator) for every +-1 indicator x
CSC_CONSTANT = -8.0
HEAT_DENSE_CAP = 2048
FOURIER_DENSE_CAP = 4096


@dataclass(frozen=True)
class SignalSeries:
    """Dynamic signal: ``values[v, t]`` is the value at vertex ``v``, snapshot ``t``."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim != 2:
            raise ShapeMismatch("signal must be an n x m array")
        if not np.all(np.isfinite(vals)):
            raise ValueError("signal values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def shape(self):
        return self.values.shape

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def flat(self) -> np.ndarray:
        return self.values.T.ravel()


def _values(signal, tg: TemporalGraph | None = None) -> np.ndarray:
    vals = signal.values if isinstance(signal, SignalSeries) else np.asarray(signal, dtype=float)
    if vals.ndim == 1:
        vals = vals[:, None]
    if tg is not None and vals.shape != (tg.n, tg.m):
        raise DimensionMismatch(f"signal is {vals.shape}, graph is {(tg.n, tg.m)}")
    return vals


def _side(cut, n, m) -> np.ndarray:
    lab = cut.labels if isinstance(cut, TemporalCut) else np.asarray(cut)
    if lab.ndim == 1:
        lab = lab[:, None]
    if lab.shape != (n, m):
        raise ShapeMismatch(f"cut is {lab.shape}, expected {(n, m)}")
    return lab == 1


def theta(signal, cut) -> np.ndarray:
    """Per-snapshot imbalance ``Theta_t`` of a binary cut (label 1 is ``X``)."""
    f = _values(signal)
    x = _side(cut, *f.shape)
    size = x.sum(axis=0)
    inside = np.where(x, f, 0.0).sum(axis=0)
    total = f.sum(axis=0)
    return size * (total - inside) - (f.shape[0] - size) * inside


def static_wavelet_energy(graph, f, cut) -> float:
    """Energy of a single-snapshot cut; ``graph`` fixes the vertex count."""
    vals = np.asarray(f, dtype=float).ravel()
    n = graph.n if isinstance(graph, TemporalGraph) else int(graph)
    if vals.size != n:
        raise DimensionMismatch(f"signal has {vals.size} entries, graph has {n} vertices")
    lab = cut.labels[:, 0] if isinstance(cut, TemporalCut) else np.asarray(cut).ravel()
    if lab.size != n:
        raise ShapeMismatch(f"cut has {lab.size} entries, expected {n}")
    x = lab == 1
    p = int(x.sum())
    if p == 0 or p == n:
        raise DegenerateCut("one side of the cut is empty")
    th = p * vals[~x].sum() - (n - p) * vals[x].sum()
    return float(th * th / (p * (n - p)))


def _energy_parts(f: np.ndarray, x: np.ndarray):
    n = f.shape[0]
    size = x.sum(axis=0)
    inside = np.where(x, f, 0.0).sum(axis=0)
    th = size * (f.sum(axis=0) - inside) - (n - size) * inside
    num = float((th ** 2).sum() + (th[:-1] * th[1:]).sum())
    den = float((size * (n - size)).sum())
    return num, den


def dynamic_wavelet_energy(tg: TemporalGraph, signal, cut) -> float:
    f = _values(signal, tg)
    num, den = _energy_parts(f, _side(cut, tg.n, tg.m))
    if den == 0:
        raise DegenerateCut("every snapshot has an empty side")
    return num / den


class _Part:
    """A set of multiplex nodes viewed as an induced sub-multiplex."""

    def __init__(self, nodes, n, m, f_flat, adj):
        self.nodes = np.asarray(nodes, dtype=np.int64)
        self.n, self.m = n, m
        self.layer = self.nodes // n
        self.f = f_flat[self.nodes]
        self.size = self.nodes.size
        self.counts = np.bincount(self.layer, minlength=m).astype(float)
        self.group = sp.csr_matrix(
            (np.ones(self.size), (np.arange(self.size), self.layer)), shape=(self.size, m)
        )
        self.adj = adj[self.nodes][:, self.nodes].tocsr()
        deg = np.asarray(self.adj.sum(axis=1)).ravel()
        self.lap = (sp.diags(deg) - self.adj).tocsr()

    def c_apply(self, x):
        sums = self.group.T @ x
        cnt = self.counts[self.layer]
        if x.ndim == 2:
            cnt = cnt[:, None]
        return cnt * x - self.group @ sums

    def s_apply(self, y):
        """``S y`` through the per-layer moments of ``y``."""
        g = self.group
        f = self.f if y.ndim == 1 else self.f[:, None]
        s0, s1, s2 = g.T @ y, g.T @ (f * y), g.T @ (f * f * y)

        def mix(a):
            out = a.copy()
            out[1:] += 0.5 * a[:-1]
            out[:-1] += 0.5 * a[1:]
            return out

        m0, m1, m2 = mix(s0), mix(s1), mix(s2)
        return f * f * (g @ m0) - 2.0 * f * (g @ m1) + g @ m2

    def csc(self) -> SpectralOperator:
        return SpectralOperator(self.size, lambda x: self.c_apply(self.s_apply(self.c_apply(x))), "CSC")

    def constants(self) -> np.ndarray:
        cols = []
        for t in np.flatnonzero(self.counts):
            e = (self.layer == t).astype(float)
            cols.append(e / np.sqrt(e.sum()))
        return np.column_stack(cols)


def _signal_adjacency(tg, params):
    return multiplex_adjacency_matrix(MultiplexView(tg, params))


def csc_operator(tg: TemporalGraph, signal) -> SpectralOperator:
    """``C S C`` applied in ``O(n m)`` from the rank-3 structure of each block of ``S``."""
    f = _values(signal, tg)
    flat = f.T.ravel()
    part = _Part(np.arange(tg.n * tg.m), tg.n, tg.m, flat, sp.csr_matrix((tg.n * tg.m,) * 2))
    return part.csc()


def _wavelet_sweep(x, part: _Part, alpha: float):
    """Best feasible prefix of ``x`` for the regularized energy.

    The score is ``numerator / (sum |X_t||X^c_t| + alpha * (cut + swap weight))``,
    which is the plain energy at ``alpha = 0``.  Returns ``(mask, energy)``
    with ``mask`` marking the side above the threshold, or ``None``.
    """
    size = part.size
    order = np.lexsort((np.arange(size), x))
    pos = np.empty(size, dtype=np.int64)
    pos[order] = np.arange(size)
    layer = part.layer[order]
    fv = part.f[order]
    m = part.m
    nt = part.counts
    total = np.bincount(part.layer, weights=part.f, minlength=m)

    steps = [np.flatnonzero(layer == t) for t in range(m)]
    cum = [np.concatenate([[0.0], np.cumsum(fv[s])]) for s in steps]

    def theta_at(t, q):
        if t < 0 or t >= m or not steps[t].size:
            return np.zeros(np.shape(q))
        c = np.searchsorted(steps[t], q, side="left")
        return c * total[t] - nt[t] * cum[t][c]

    delta = np.zeros(size)
    den_inc = np.zeros(size)
    for t in range(m):
        q = steps[t]
        if not q.size:
            continue
        old = theta_at(t, q)
        new = theta_at(t, q + 1)
        nb = theta_at(t - 1, q) + theta_at(t + 1, q)
        delta[q] = new * new - old * old + (new - old) * nb
        c = np.arange(q.size)
        den_inc[q] = nt[t] - 2 * c - 1
    num = np.concatenate([[0.0], np.cumsum(delta)])
    den = np.concatenate([[0.0], np.cumsum(den_inc)])
    reg = den.copy()
    if alpha > 0:
        adj = sp.triu(part.adj, k=1).tocoo()
        a, b = pos[adj.row], pos[adj.col]
        diff = np.zeros(size + 2)
        np.add.at(diff, np.minimum(a, b) + 1, adj.data)
        np.add.at(diff, np.maximum(a, b) + 1, -adj.data)
        reg = den + alpha * np.cumsum(diff)[: size + 1]
    cand = np.arange(1, size)
    cand = cand[den[cand] > 0.5]
    if not cand.size:
        return None
    score = num[cand] / reg[cand]
    best = int(cand[np.argmax(score)])
    mask = np.zeros(size, dtype=bool)
    mask[order[best:]] = True
    energy = float(num[best] / den[best])
    return mask, energy


def _part_cut(part: _Part, alpha: float, cfg):
    if part.size < 2 or np.ptp(part.f) == 0:
        return None
    defl = part.constants()
    if defl.shape[1] >= part.size:
        return None
    lap = part.lap
    op_b = SpectralOperator(part.size, lambda x: part.c_apply(x) + alpha * (lap @ x), "B")
    res = smallest_generalized(part.csc(), op_b, defl, cfg or EigenConfig())
    found = _wavelet_sweep(res.eigenvectors[:, 0], part, alpha)
    if found is None or found[1] <= 0:
        return None
    return found


def best_wavelet_cut(tg: TemporalGraph, signal, alpha: float = 0.0,
                     params: MultiplexParams | None = None, cfg: EigenConfig | None = None):
    """Temporal cut of the signal with the largest (regularized) energy.

    Returns ``(TemporalCut, energy)``; for a signal without any separable
    structure (e.g. constant) it returns ``(None, 0.0)``.
    """
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    params = params or MultiplexParams(0.0)
    f = _values(signal, tg)
    size = tg.n * tg.m
    part = _Part(np.arange(size), tg.n, tg.m, f.T.ravel(), _signal_adjacency(tg, params))
    found = _part_cut(part, float(alpha), cfg)
    if found is None:
        return None, 0.0
    mask, energy = found
    return TemporalCut.from_flat(mask.astype(np.int64), tg.n, tg.m), energy


@dataclass
class PartitionNode:
    nodes: np.ndarray
    mean: float
    sse: float
    children: tuple = ()
    energy: float | None = None
    fallback: bool = False

    @property
    def is_leaf(self) -> bool:
        return not self.children


@dataclass
class PartitionTree:
    """Binary splits of the ``n m`` multiplex nodes; leaves hold the coefficients."""

    root: PartitionNode
    n: int
    m: int
    splits: list = field(default_factory=list)

    def leaves(self) -> list:
        out, stack = [], [self.root]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                out.append(node)
            else:
                stack.extend(reversed(node.children))
        return out

    @property
    def k(self) -> int:
        return len(self.leaves())

    @property
    def error(self) -> float:
        return float(sum(leaf.sse for leaf in self.leaves()))

    def labels(self) -> np.ndarray:
        flat = np.empty(self.n * self.m, dtype=np.int64)
        for i, leaf in enumerate(self.leaves()):
            flat[leaf.nodes] = i
        return flat.reshape(self.m, self.n).T

    def summary(self) -> dict:
        return {
            "k": self.k,
            "l2_error": self.error,
            "leaves": [
                {"size": int(leaf.nodes.size), "mean": leaf.mean, "sse": leaf.sse}
                for leaf in self.leaves()
            ],
            "fallback_splits": int(sum(s.fallback for s in self.splits)),
        }


def _node(nodes, flat) -> PartitionNode:
    vals = flat[nodes]
    mean = float(vals.mean())
    return PartitionNode(nodes, mean, float(((vals - mean) ** 2).sum()))


def _value_split(nodes, flat):
    """Threshold on sorted values with the largest drop in squared error."""
    vals = flat[nodes]
    order = np.lexsort((nodes, vals))
    v = vals[order]
    c1 = np.cumsum(v)
    c2 = np.cumsum(v * v)
    k = np.arange(1, v.size)
    left = c2[:-1] - c1[:-1] ** 2 / k
    rc1 = c1[-1] - c1[:-1]
    rc2 = c2[-1] - c2[:-1]
    right = rc2 - rc1 ** 2 / (v.size - k)
    best = int(np.argmin(left + right)) + 1
    mask = np.zeros(nodes.size, dtype=bool)
    mask[order[best:]] = True
    return mask


def compress(tg: TemporalGraph, signal, k: int, alpha: float = 0.0,
             params: MultiplexParams | None = None, cfg: EigenConfig | None = None) -> PartitionTree:
    """Represent the signal by ``k`` part means found by recursive wavelet cuts.

    Each round splits the leaf with the largest squared deviation from its
    mean.  If no wavelet cut with positive energy exists in that leaf, it is
    split at the value threshold that reduces the squared error most.  The
    recursion stops early once every leaf is constant.
    """
    size = tg.n * tg.m
    if not 1 <= k <= size:
        raise ValueError(f"k must be in [1, {size}]")
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    params = params or MultiplexParams(0.0)
    flat = _values(signal, tg).T.ravel()
    adj = _signal_adjacency(tg, params)
    root = _node(np.arange(size), flat)
    tree = PartitionTree(root, tg.n, tg.m)
    leaves = [root]
    while len(leaves) < k:
        idx = max(range(len(leaves)), key=lambda i: (leaves[i].sse, -i))
        target = leaves[idx]
        if target.sse <= 0 or target.nodes.size < 2:
            break
        part = _Part(target.nodes, tg.n, tg.m, flat, adj)
        found = _part_cut(part, float(alpha), cfg)
        fallback = found is None
        mask = _value_split(target.nodes, flat) if fallback else found[0]
        a = _node(target.nodes[~mask], flat)
        b = _node(target.nodes[mask], flat)
        target.children = (a, b)
        target.energy = None if fallback else found[1]
        target.fallback = fallback
        tree.splits.append(target)
        leaves[idx:idx + 1] = [a, b]
    return tree


def reconstruct(tree: PartitionTree) -> SignalSeries:
    flat = np.empty(tree.n * tree.m)
    for leaf in tree.leaves():
        flat[leaf.nodes] = leaf.mean
    return SignalSeries(flat.reshape(tree.m, tree.n).T)


def l2_error(signal, approx) -> float:
    """Sum of squared differences."""
    a, b = _values(signal), _values(approx)
    if a.shape != b.shape:
        raise ShapeMismatch("signals differ in shape")
    return float(((a - b) ** 2).sum())


def graph_fourier_basis(tg: TemporalGraph, params: MultiplexParams, k: int,
                        cfg: EigenConfig | None = None) -> np.ndarray:
    """Bottom ``k`` eigenvectors of the multiplex Laplacian, one per column."""
    size = tg.n * tg.m
    if not 1 <= k <= size:
        raise ValueError(f"k must be in [1, {size}]")
    lap = multiplex_laplacian_matrix(MultiplexView(tg, params))
    if size <= FOURIER_DENSE_CAP:
        return dense_sym_eig(lap.toarray()).eigenvectors[:, :k]
    op = SpectralOperator(size, lambda x: lap @ x, "L")
    return extreme_eigs(op, k, "smallest", cfg).eigenvectors


def graph_fourier_compress(tg: TemporalGraph, params: MultiplexParams, signal, k: int,
                           cfg: EigenConfig | None = None, basis: np.ndarray | None = None) -> SignalSeries:
    """Project the stacked signal onto the ``k`` smoothest multiplex modes.

    A precomputed ``basis`` with at least ``k`` columns may be passed so that
    a sweep over ``k`` uses nested subspaces.
    """
    f = _values(signal, tg).T.ravel()
    u = graph_fourier_basis(tg, params, k, cfg) if basis is None else basis[:, :k]
    rec = u @ (u.T @ f)
    return SignalSeries(rec.reshape(tg.m, tg.n).T)


def heat_signal(tg: TemporalGraph, f0=None, step: float = 1.0, start: int = 0) -> SignalSeries:
    """Diffuse ``f0`` through the snapshots: ``f_t = exp(-step L_t) f_{t-1}``.

    Without ``f0`` the initial signal is ``n`` at ``start`` and 0 elsewhere.
    """
    if not np.isfinite(step) or step < 0:
        raise ValueError("step must be a non-negative real")
    n = tg.n
    if f0 is None:
        if not 0 <= start < n:
            raise ValueError("start vertex out of range")
        prev = np.zeros(n)
        prev[start] = float(n)
    else:
        prev = np.asarray(f0, dtype=float).ravel()
        if prev.size != n:
            raise DimensionMismatch(f"f0 has {prev.size} entries, graph has {n} vertices")
        if not np.all(np.isfinite(prev)):
            raise ValueError("f0 must be finite")
    out = np.empty((n, tg.m))
    for t in range(tg.m):
        lap = tg.laplacian(t)
        if step == 0:
            cur = prev.copy()
        elif n <= HEAT_DENSE_CAP:
            w, v = sla.eigh(lap.toarray())
            cur = v @ (np.exp(-step * np.clip(w, 0.0, None)) * (v.T @ prev))
        else:
            cur = expm_multiply(-step * lap.tocsc(), prev)
        out[:, t] = cur
        prev = cur
    return SignalSeries(out)
