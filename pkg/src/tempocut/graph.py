"""Temporal graphs, their multiplex view, and matrix-free operators.

Every vector over the multiplex view has length ``n * m`` and is indexed as
``idx(v, t) = t * n + v``; reshaping such a vector to ``(m, n)`` gives one row
per snapshot.  All operators accept either a single vector ``(dim,)`` or a
block of column vectors ``(dim, k)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .exceptions import (
    DimensionMismatch,
    DuplicateEdge,
    NonPositiveWeight,
    SelfLoop,
    VertexOutOfRange,
)

__all__ = [
    "TemporalGraph",
    "MultiplexParams",
    "MultiplexView",
    "SpectralOperator",
    "validate",
    "node_index",
    "multiplex_adjacency_matrix",
    "multiplex_laplacian_matrix",
    "multiplex_laplacian",
    "c_operator",
    "degree_vector",
    "normalized_laplacian_matrix",
    "normalized_operator",
    "snapshot_laplacian",
    "snapshot_normalized_laplacian",
    "pseudo_inverse_sqrt",
]


def node_index(v: int, t: int, n: int) -> int:
    """Flat multiplex index of vertex ``v`` in snapshot ``t``."""
    return t * n + v


def _as_edge_arrays(edges) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if isinstance(edges, tuple) and len(edges) == 3 and all(
        isinstance(a, np.ndarray) for a in edges
    ):
        u, v, w = edges
    else:
        rows = list(edges)
        if rows:
            arr = np.asarray(rows, dtype=float)
            if arr.ndim != 2 or arr.shape[1] != 3:
                raise ValueError("edges must be (u, v, w) triples")
            u, v, w = arr[:, 0], arr[:, 1], arr[:, 2]
        else:
            u = v = w = np.empty(0)
    u = np.asarray(u)
    v = np.asarray(v)
    if u.size and (np.any(u != np.round(u)) or np.any(v != np.round(v))):
        raise ValueError("vertex ids must be integers")
    u = u.astype(np.int64)
    v = v.astype(np.int64)
    w = np.asarray(w, dtype=float)
    lo, hi = np.minimum(u, v), np.maximum(u, v)
    return lo, hi, w


class TemporalGraph:
    """``m`` weighted undirected snapshots over a fixed vertex set ``0..n-1``.

    ``snapshots`` is a sequence with one entry per snapshot; each entry is an
    iterable of ``(u, v, w)`` triples or a ``(u, v, w)`` tuple of arrays.
    Edges are stored once with ``u < v``.  The graph is validated on
    construction and its arrays are read-only afterwards.
    """

    def __init__(self, n: int, snapshots: Sequence, *, check: bool = True):
        self.n = int(n)
        edges = []
        for snap in snapshots:
            u, v, w = _as_edge_arrays(snap)
            for a in (u, v, w):
                a.setflags(write=False)
            edges.append((u, v, w))
        self._edges = tuple(edges)
        if check:
            validate(self)

    @property
    def m(self) -> int:
        return len(self._edges)

    @property
    def snapshots(self) -> tuple:
        return self._edges

    @property
    def shape(self) -> tuple[int, int]:
        return self.n, self.m

    def edges(self, t: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self._edges[t]

    def num_edges(self, t: int | None = None) -> int:
        if t is None:
            return int(sum(e[0].size for e in self._edges))
        return int(self._edges[t][0].size)

    def adjacency(self, t: int) -> sp.csr_matrix:
        return self._adjacency[t]

    def laplacian(self, t: int) -> sp.csr_matrix:
        return self._laplacian[t]

    def degrees(self, t: int) -> np.ndarray:
        return self._degrees[t]

    @cached_property
    def _adjacency(self) -> list:
        out = []
        for u, v, w in self._edges:
            a = sp.coo_matrix((w, (u, v)), shape=(self.n, self.n))
            out.append((a + a.T).tocsr())
        return out

    @cached_property
    def _degrees(self) -> list:
        return [np.asarray(a.sum(axis=1)).ravel() for a in self._adjacency]

    @cached_property
    def _laplacian(self) -> list:
        return [
            (sp.diags(d) - a).tocsr() for a, d in zip(self._adjacency, self._degrees)
        ]

    def union(self) -> "TemporalGraph":
        """Single-snapshot graph whose weights are summed over snapshots."""
        total = sum(self._adjacency, sp.csr_matrix((self.n, self.n)))
        upper = sp.triu(total, k=1).tocoo()
        return TemporalGraph(self.n, [(upper.row, upper.col, upper.data)])

    def snapshot(self, t: int) -> "TemporalGraph":
        return TemporalGraph(self.n, [self._edges[t]], check=False)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TemporalGraph):
            return NotImplemented
        if (self.n, self.m) != (other.n, other.m):
            return False
        for (u1, v1, w1), (u2, v2, w2) in zip(self._edges, other._edges):
            o1 = np.lexsort((v1, u1))
            o2 = np.lexsort((v2, u2))
            if not (
                np.array_equal(u1[o1], u2[o2])
                and np.array_equal(v1[o1], v2[o2])
                and np.array_equal(w1[o1], w2[o2])
            ):
                return False
        return True

    __hash__ = None

    def __repr__(self) -> str:
        return f"TemporalGraph(n={self.n}, m={self.m}, edges={self.num_edges()})"


def validate(tg: TemporalGraph) -> None:
    """Raise on the first edge that breaks a ``TemporalGraph`` invariant."""
    if tg.m < 1:
        raise ValueError("a temporal graph needs at least one snapshot")
    if tg.n < 1:
        raise ValueError("a temporal graph needs at least one vertex")
    n = tg.n
    for t, (u, v, w) in enumerate(tg.snapshots):
        if u.size == 0:
            continue
        bad_range = (u < 0) | (v >= n)
        bad_loop = u == v
        bad_weight = ~(np.isfinite(w) & (w > 0))
        key = u * n + v
        _, first = np.unique(key, return_index=True)
        dup = np.ones(key.size, dtype=bool)
        dup[first] = False
        bad = bad_range | bad_loop | bad_weight | dup
        if not bad.any():
            continue
        i = int(np.argmax(bad))
        edge = (int(u[i]), int(v[i]), float(w[i]))
        where = f"snapshot {t}, edge #{i} {edge}"
        if bad_range[i]:
            raise VertexOutOfRange(f"vertex out of range [0, {n}) at {where}", t, edge)
        if bad_loop[i]:
            raise SelfLoop(f"self-loop at {where}", t, edge)
        if bad_weight[i]:
            raise NonPositiveWeight(f"non-positive weight at {where}", t, edge)
        raise DuplicateEdge(f"duplicate edge at {where}", t, edge)


@dataclass(frozen=True)
class MultiplexParams:
    """Swap costs on the temporal edges ``(v_t, v_{t+1})``.

    ``swap_costs``, when given, has shape ``(n, m - 1)`` and overrides the
    uniform ``beta``.
    """

    beta: float = 1.0
    swap_costs: np.ndarray | None = None

    def __post_init__(self):
        if not np.isfinite(self.beta) or self.beta < 0:
            raise ValueError("beta must be a finite non-negative real")
        if self.swap_costs is not None:
            s = np.array(self.swap_costs, dtype=float)
            if s.ndim != 2:
                raise ValueError("swap_costs must be an n x (m-1) array")
            if not np.all(np.isfinite(s)) or np.any(s < 0):
                raise ValueError("swap costs must be finite and non-negative")
            s.setflags(write=False)
            object.__setattr__(self, "swap_costs", s)

    @property
    def uniform(self) -> bool:
        return self.swap_costs is None

    def max_swap(self) -> float:
        if self.swap_costs is None or self.swap_costs.size == 0:
            return float(self.beta)
        return float(self.swap_costs.max())

    def check(self, tg: TemporalGraph) -> None:
        if self.swap_costs is not None and self.swap_costs.shape != (tg.n, tg.m - 1):
            raise DimensionMismatch(
                f"swap_costs has shape {self.swap_costs.shape}, "
                f"expected {(tg.n, tg.m - 1)}"
            )

    def transition_weights(self, tg: TemporalGraph) -> np.ndarray:
        """Swap cost per transition and vertex, shape ``(m - 1, n)``."""
        self.check(tg)
        if self.swap_costs is None:
            return np.full((tg.m - 1, tg.n), float(self.beta))
        return np.asarray(self.swap_costs, dtype=float).T


@dataclass(frozen=True)
class MultiplexView:
    """The multiplex graph stacking the snapshots as layers."""

    base: TemporalGraph
    params: MultiplexParams = field(default_factory=MultiplexParams)

    def __post_init__(self):
        self.params.check(self.base)

    @property
    def dim(self) -> int:
        return self.base.n * self.base.m

    def idx(self, v: int, t: int) -> int:
        return node_index(v, t, self.base.n)


class SpectralOperator:
    """A symmetric linear map known only through its matvec."""

    symmetric = True

    def __init__(self, dim: int, matvec: Callable[[np.ndarray], np.ndarray], name: str = ""):
        if dim < 1:
            raise ValueError("operator dimension must be positive")
        self.dim = int(dim)
        self._matvec = matvec
        self.name = name

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[0] != self.dim:
            raise DimensionMismatch(f"expected leading dimension {self.dim}, got {x.shape}")
        return self._matvec(x)

    __call__ = matvec

    def __matmul__(self, x):
        return self.matvec(x)

    def to_dense(self) -> np.ndarray:
        """Assemble the matrix column by column; meant for small checks only."""
        return self.matvec(np.eye(self.dim))

    def __repr__(self) -> str:
        return f"SpectralOperator(dim={self.dim}, name={self.name!r})"

    @staticmethod
    def from_matrix(a, name: str = "") -> "SpectralOperator":
        return SpectralOperator(a.shape[0], lambda x: a @ x, name)

    @staticmethod
    def combine(terms: Iterable[tuple[float, "SpectralOperator"]], name: str = "") -> "SpectralOperator":
        """Linear combination ``sum(c * op)`` of operators of equal dimension."""
        terms = [(float(c), op) for c, op in terms]
        dim = terms[0][1].dim
        if any(op.dim != dim for _, op in terms):
            raise DimensionMismatch("operators in a combination must share a dimension")

        def mv(x):
            out = terms[0][0] * terms[0][1].matvec(x)
            for c, op in terms[1:]:
                out = out + c * op.matvec(x)
            return out

        return SpectralOperator(dim, mv, name)

    @staticmethod
    def compose(*ops: "SpectralOperator", name: str = "") -> "SpectralOperator":
        """``ops[0] @ ops[1] @ ...``; symmetric only when the product is."""
        dim = ops[0].dim
        if any(op.dim != dim for op in ops):
            raise DimensionMismatch("operators in a composition must share a dimension")

        def mv(x):
            for op in reversed(ops):
                x = op.matvec(x)
            return x

        return SpectralOperator(dim, mv, name)


def multiplex_adjacency_matrix(view: MultiplexView) -> sp.csr_matrix:
    """Sparse adjacency of the multiplex graph, intra-layer and temporal edges."""
    tg = view.base
    n, m = tg.n, tg.m
    rows, cols, vals = [], [], []
    for t, (u, v, w) in enumerate(tg.snapshots):
        rows.append(u + t * n)
        cols.append(v + t * n)
        vals.append(w)
    if m > 1:
        s = view.params.transition_weights(tg)
        layer = np.repeat(np.arange(m - 1), n)
        vert = np.tile(np.arange(n), m - 1)
        keep = s.ravel() > 0
        rows.append((layer * n + vert)[keep])
        cols.append(((layer + 1) * n + vert)[keep])
        vals.append(s.ravel()[keep])
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    w = np.concatenate(vals)
    a = sp.coo_matrix((w, (r, c)), shape=(n * m, n * m))
    return (a + a.T).tocsr()


def multiplex_laplacian_matrix(view: MultiplexView) -> sp.csr_matrix:
    a = multiplex_adjacency_matrix(view)
    d = np.asarray(a.sum(axis=1)).ravel()
    return (sp.diags(d) - a).tocsr()


def multiplex_laplacian(view: MultiplexView) -> SpectralOperator:
    """The Laplacian of the multiplex view as an implicit operator."""
    lap = multiplex_laplacian_matrix(view)
    return SpectralOperator(lap.shape[0], lambda x: lap @ x, "L")


def c_operator(n: int, m: int) -> SpectralOperator:
    """``I_m (x) (n I - 1 1^T)``: one complete-graph Laplacian per snapshot."""
    if n < 1 or m < 1:
        raise ValueError("n and m must be positive")

    def mv(x):
        blocks = x.reshape((m, n) + x.shape[1:])
        out = n * blocks - blocks.sum(axis=1, keepdims=True)
        return out.reshape(x.shape)

    return SpectralOperator(n * m, mv, "C")


def degree_vector(tg: TemporalGraph) -> np.ndarray:
    """Intra-layer weighted degree of every multiplex node."""
    return np.concatenate([tg.degrees(t) for t in range(tg.m)])


def pseudo_inverse_sqrt(d: np.ndarray) -> np.ndarray:
    """Entrywise ``d^{+1/2}``: zero where the degree vanishes."""
    d = np.asarray(d, dtype=float)
    out = np.zeros_like(d)
    pos = d > 0
    out[pos] = 1.0 / np.sqrt(d[pos])
    return out


def normalized_laplacian_matrix(tg: TemporalGraph, params: MultiplexParams) -> sp.csr_matrix:
    lap = multiplex_laplacian_matrix(MultiplexView(tg, params))
    s = sp.diags(pseudo_inverse_sqrt(degree_vector(tg)))
    return (s @ lap @ s).tocsr()


def normalized_operator(tg: TemporalGraph, params: MultiplexParams) -> SpectralOperator:
    """``D^{+1/2} L D^{+1/2}`` with ``D`` the intra-layer degree matrix."""
    mat = normalized_laplacian_matrix(tg, params)
    return SpectralOperator(mat.shape[0], lambda x: mat @ x, "N")


def snapshot_laplacian(tg: TemporalGraph, t: int) -> sp.csr_matrix:
    return tg.laplacian(t)


def snapshot_normalized_laplacian(tg: TemporalGraph, t: int) -> sp.csr_matrix:
    s = sp.diags(pseudo_inverse_sqrt(tg.degrees(t)))
    return (s @ tg.laplacian(t) @ s).tocsr()
