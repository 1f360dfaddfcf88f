"""Planted moving-partition generator on a grid.

Vertices occupy the first ``n`` cells (row-major) of a ``g x g`` grid,
``g = ceil(sqrt(n))``, and are joined to every other vertex within ``h``
hops.  In snapshot ``t`` a ``s x s`` sub-grid (``s = ceil(sqrt(k))``) whose
top-left corner sits ``t`` cells down the main diagonal (clamped to the
border) is the planted side.  Each vertex draws a potential
``pi = [planted] + N(0, eps)`` per snapshot, and an edge ``(u, v)`` weighs
``exp(|pi(u) - pi(v)|)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cuts import TemporalCut
from .exceptions import ConfigInvalid
from .graph import TemporalGraph

__all__ = ["SynthConfig", "generate", "grid_edges", "planted_mask"]

NEIGHBORHOODS = ("chebyshev", "manhattan")
WEIGHT_RULES = ("exp_abs", "exp_neg_abs")


@dataclass(frozen=True)
class SynthConfig:
    """``weight_rule="exp_neg_abs"`` uses ``exp(-|pi(u) - pi(v)|)`` instead.

    The default rule makes edges across the planted boundary heavier than the
    ones inside; the alternative makes them lighter.
    """

    n: int = 64
    k: int = 32
    h: int = 1
    eps: float = 0.0
    m: int = 4
    seed: int = 0
    neighborhood: str = "chebyshev"
    weight_rule: str = "exp_abs"

    def check(self) -> None:
        for name in ("n", "k", "h", "m", "seed"):
            val = getattr(self, name)
            if isinstance(val, bool) or not isinstance(val, (int, np.integer)):
                raise ConfigInvalid(f"{name} must be an integer")
        if self.n < 2:
            raise ConfigInvalid("n must be at least 2")
        if not 1 <= self.k < self.n:
            raise ConfigInvalid("k must satisfy 1 <= k < n")
        if math.isqrt(self.k - 1) + 1 > math.isqrt(self.n - 1) + 1:
            raise ConfigInvalid("planted sub-grid does not fit in the grid")
        if self.h < 1:
            raise ConfigInvalid("h must be at least 1")
        if not (np.isfinite(self.eps) and 0 <= self.eps <= 1):
            raise ConfigInvalid("eps must lie in [0, 1]")
        if self.m < 1:
            raise ConfigInvalid("m must be at least 1")
        if self.seed < 0:
            raise ConfigInvalid("seed must be non-negative")
        if self.neighborhood not in NEIGHBORHOODS:
            raise ConfigInvalid(f"neighborhood must be one of {NEIGHBORHOODS}")
        if self.weight_rule not in WEIGHT_RULES:
            raise ConfigInvalid(f"weight_rule must be one of {WEIGHT_RULES}")


def _ceil_sqrt(x: int) -> int:
    return math.isqrt(x - 1) + 1 if x > 0 else 0


def grid_edges(n: int, h: int, neighborhood: str = "chebyshev"):
    """Pairs ``u < v`` of grid vertices within ``h`` hops."""
    g = _ceil_sqrt(n)
    rows, cols = np.divmod(np.arange(n), g)
    us, vs = [], []
    for dr in range(0, h + 1):
        for dc in range(-h, h + 1):
            if dr == 0 and dc <= 0:
                continue
            if neighborhood == "manhattan" and dr + abs(dc) > h:
                continue
            r2, c2 = rows + dr, cols + dc
            ok = (c2 >= 0) & (c2 < g)
            v = r2 * g + c2
            ok &= v < n
            us.append(np.arange(n)[ok])
            vs.append(v[ok])
    u = np.concatenate(us)
    v = np.concatenate(vs)
    order = np.lexsort((v, u))
    return u[order], v[order]


def planted_mask(n: int, k: int, t: int) -> np.ndarray:
    g = _ceil_sqrt(n)
    s = _ceil_sqrt(k)
    corner = min(t, g - s)
    rows, cols = np.divmod(np.arange(n), g)
    return (rows >= corner) & (rows < corner + s) & (cols >= corner) & (cols < corner + s)


def generate(cfg: SynthConfig):
    """Return ``(TemporalGraph, ground_truth)``; planted vertices get label 1."""
    cfg.check()
    rng = np.random.default_rng(cfg.seed)
    u, v = grid_edges(cfg.n, cfg.h, cfg.neighborhood)
    sign = 1.0 if cfg.weight_rule == "exp_abs" else -1.0
    labels = np.zeros((cfg.n, cfg.m), dtype=np.int64)
    snaps = []
    for t in range(cfg.m):
        inside = planted_mask(cfg.n, cfg.k, t)
        labels[:, t] = inside
        noise = rng.normal(0.0, cfg.eps, cfg.n) if cfg.eps > 0 else np.zeros(cfg.n)
        pi = inside.astype(float) + noise
        w = np.exp(sign * np.abs(pi[u] - pi[v]))
        snaps.append((u.copy(), v.copy(), w))
    return TemporalGraph(cfg.n, snaps), TemporalCut(labels)
