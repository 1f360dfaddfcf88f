"""Divide-and-conquer approximation of the spectral temporal cut.

Each snapshot block ``M_t = K C_n - Lt_t`` is summarized by ``r`` of its
eigenpairs.  Projecting the full operator onto ``span(U_1 + ... + U_m)``
gives a small block-tridiagonal matrix ``Q`` of order ``r m`` whose top
eigenvector, lifted back through ``U``, is swept like the exact method's.
At ``r = n`` the projection is an orthogonal similarity and the two methods
coincide.

Sign convention: the temporal edges enter ``M = K C - L`` through ``-L``, so
the off-diagonal blocks of ``Q`` are ``+U_t^T S_t U_{t+1}`` (``S_t`` the swap
costs).  This is the sign for which ``U Q U^T`` equals the projected operator
and lifted eigenvectors stay eigenvectors.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .cuts import SPARSEST, _check_kind, shift_constant, sweep_round
from .eigen import EigenConfig, dense_sym_eig, extreme_eigs, sign_normalize
from .exceptions import RankMismatch
from .graph import (
    MultiplexParams,
    SpectralOperator,
    TemporalGraph,
    pseudo_inverse_sqrt,
    snapshot_normalized_laplacian,
)

__all__ = [
    "SnapshotSpectrum",
    "QMatrix",
    "default_rank",
    "worker_count",
    "snapshot_spectrum",
    "assemble_q",
    "lift",
    "compute_spectra",
    "fstc_cut",
    "fstc_error_bound",
]


@dataclass(frozen=True)
class SnapshotSpectrum:
    """``r`` eigenpairs of one snapshot block, eigenvalues descending.

    ``next_lam`` is the largest eigenvalue left out (``None`` when ``r = n``).
    ``scale`` is the per-vertex factor the temporal coupling is seen through:
    ones for the sparsest kind, ``d^{+1/2}`` for the normalized kind.
    """

    t: int
    U: np.ndarray
    lam: np.ndarray
    next_lam: float | None = None
    scale: np.ndarray | None = None

    @property
    def r(self) -> int:
        return self.U.shape[1]


@dataclass(frozen=True)
class QMatrix:
    matrix: np.ndarray
    r: int
    m: int

    def block(self, s: int, t: int) -> np.ndarray:
        r = self.r
        return self.matrix[s * r:(s + 1) * r, t * r:(t + 1) * r]


def default_rank(n: int) -> int:
    return min(n, 64)


def worker_count(tasks: int) -> int:
    """Thread count for the divide phase, capped by ``TEMPOCUT_THREADS``."""
    cap = os.environ.get("TEMPOCUT_THREADS")
    limit = os.cpu_count() or 1
    if cap:
        try:
            limit = max(1, int(cap))
        except ValueError:
            pass
    return max(1, min(limit, tasks))


def _inverse_operator(a, tau: float, rank_one: float = 0.0) -> SpectralOperator:
    """``(a + tau I + rank_one 1 1^T)^{-1}`` through a sparse LU of ``a + tau I``."""
    n = a.shape[0]
    lu = splu(sp.csc_matrix(a + tau * sp.identity(n)))
    if rank_one == 0.0:
        return SpectralOperator(n, lu.solve, "inv")
    z = lu.solve(np.ones(n))
    denom = 1.0 + rank_one * z.sum()

    def mv(x):
        y = lu.solve(x)
        coef = rank_one * y.sum(axis=0) / denom
        return y - (np.multiply.outer(z, coef) if y.ndim == 2 else z * coef)

    return SpectralOperator(n, mv, "inv")


def _bottom_pairs(a, want, cfg, defl=None, rank_one=0.0):
    """Smallest ``want`` eigenpairs of ``a + rank_one 1 1^T`` (``a`` sparse PSD).

    Lanczos runs on the shift-inverted operator, whose top eigenvalues are
    well separated even when the bottom of ``a`` is clustered; the returned
    eigenvalues are Rayleigh quotients of the original matrix.
    """
    n = a.shape[0]
    tau = 1e-3 * float(a.diagonal().sum()) / n
    tau = tau if tau > 0 else 1.0
    # wide blocks amortize the triangular solves; the inverted spectrum converges fast
    block = cfg.block_size or min(want, 16)
    res = extreme_eigs(_inverse_operator(a, tau, rank_one), want, "largest",
                       cfg.replace(deflation_basis=defl, block_size=block))
    vecs = res.eigenvectors
    av = a @ vecs
    if rank_one:
        av = av + rank_one * np.outer(np.ones(n), vecs.sum(axis=0))
    lam = np.einsum("ij,ij->j", vecs, av)
    order = np.argsort(lam, kind="stable")
    return vecs[:, order], lam[order]


def _sparsest_spectrum(tg, t, r, big_k, cfg, extra):
    n = tg.n
    const = np.full((n, 1), 1.0 / np.sqrt(n))
    want = min(r - 1 + extra, n - 1)
    if want > 0:
        vecs, lam_l = _bottom_pairs(tg.laplacian(t), want, cfg, const)
    else:
        vecs, lam_l = np.zeros((n, 0)), np.zeros(0)
    kept = r - 1
    u = np.hstack([vecs[:, :kept], const])
    lam = np.concatenate([big_k * n - lam_l[:kept], [0.0]])
    nxt = float(big_k * n - lam_l[kept]) if r < n else None
    return u, lam, nxt, np.ones(n)


def _normalized_spectrum(tg, t, r, big_k, cfg, extra):
    # the constant is not an eigenvector of the normalized block, so the
    # shift identity does not apply; M_t = K n I - (N_t + K 1 1^T) instead
    n = tg.n
    nlap = snapshot_normalized_laplacian(tg, t)

    def mv(x):
        s = x.sum(axis=0, keepdims=True)
        return big_k * (n * x - s) - nlap @ x

    op = SpectralOperator(n, mv, f"M_{t}")
    low = extreme_eigs(op, 1, "smallest", cfg)
    base = low.eigenvectors
    want = min(r - 1 + extra, n - 1)
    if want > 0:
        vecs, lam_b = _bottom_pairs(nlap, want, cfg, base, rank_one=big_k)
        lam_m = big_k * n - lam_b
    else:
        vecs, lam_m = np.zeros((n, 0)), np.zeros(0)
    kept = r - 1
    u = np.hstack([vecs[:, :kept], base])
    lam = np.concatenate([lam_m[:kept], low.eigenvalues])
    nxt = float(lam_m[kept]) if r < n else None
    return u, lam, nxt, pseudo_inverse_sqrt(tg.degrees(t))


def snapshot_spectrum(tg: TemporalGraph, t: int, r: int, K: float, kind: str = SPARSEST,
                      cfg: EigenConfig | None = None) -> SnapshotSpectrum:
    """Top ``r - 1`` eigenpairs of ``M_t = K C - Lt_t`` plus its bottom pair.

    For the sparsest kind these come from the bottom ``r`` Laplacian
    eigenpairs, mapping ``lam -> K n - lam`` and the constant vector to 0;
    ``M_t`` itself is never formed.
    """
    _check_kind(kind)
    if not 1 <= r <= tg.n:
        raise RankMismatch(f"rank {r} outside [1, {tg.n}]")
    cfg = cfg or EigenConfig()
    extra = 1 if r < tg.n else 0
    build = _sparsest_spectrum if kind == SPARSEST else _normalized_spectrum
    u, lam, nxt, scale = build(tg, t, r, float(K), cfg, extra)
    order = np.argsort(-lam, kind="stable")
    return SnapshotSpectrum(t, u[:, order], lam[order], nxt, scale)


def assemble_q(spectra, params: MultiplexParams) -> QMatrix:
    """Project the multiplex operator onto the snapshot eigenbases.

    Diagonal blocks are ``Lambda_t - U_t^T H_t U_t`` with ``H_t`` the temporal
    degree (``beta c_t I`` for uniform costs and the sparsest kind); the
    off-diagonal blocks are ``+U_t^T S_t U_{t+1}``.
    """
    spectra = list(spectra)
    if not spectra:
        raise RankMismatch("no snapshot spectra")
    r = spectra[0].r
    if any(s.r != r for s in spectra):
        raise RankMismatch("snapshot spectra have different ranks")
    m = len(spectra)
    n = spectra[0].U.shape[0]
    if params.swap_costs is not None:
        if params.swap_costs.shape != (n, m - 1):
            raise RankMismatch("swap costs do not match the spectra")
        s = np.asarray(params.swap_costs, dtype=float).T
    else:
        s = np.full((m - 1, n), float(params.beta))
    scales = [np.ones(n) if sp_.scale is None else sp_.scale for sp_ in spectra]
    q = np.zeros((r * m, r * m))
    for t, spec in enumerate(spectra):
        h = np.zeros(n)
        if t > 0:
            h += s[t - 1]
        if t < m - 1:
            h += s[t]
        h = h * scales[t] ** 2
        u = spec.U
        q[t * r:(t + 1) * r, t * r:(t + 1) * r] = np.diag(spec.lam) - u.T @ (h[:, None] * u)
        if t < m - 1:
            g = s[t] * scales[t] * scales[t + 1]
            off = u.T @ (g[:, None] * spectra[t + 1].U)
            q[t * r:(t + 1) * r, (t + 1) * r:(t + 2) * r] = off
            q[(t + 1) * r:(t + 2) * r, t * r:(t + 1) * r] = off.T
    q = 0.5 * (q + q.T)
    return QMatrix(q, r, m)


def lift(spectra, xq) -> np.ndarray:
    """Map a vector of ``Q``'s space back to the ``n m`` multiplex space."""
    r = spectra[0].r
    return np.concatenate([s.U @ xq[i * r:(i + 1) * r] for i, s in enumerate(spectra)])


def fstc_error_bound(spectra) -> float:
    """``2 max_t lam_{r+1}(M_t)``; zero when every snapshot is kept in full."""
    left = [s.next_lam for s in spectra if s.next_lam is not None]
    return 2.0 * max(left) if left else 0.0


def compute_spectra(tg: TemporalGraph, params: MultiplexParams, kind: str, r: int,
                    cfg: EigenConfig | None = None, workers: int | None = None):
    """Divide phase: one spectrum per snapshot, gathered in snapshot order."""
    cfg = cfg or EigenConfig()
    big_k = shift_constant(tg, params, kind)

    def one(t):
        return snapshot_spectrum(tg, t, r, big_k, kind, cfg.replace(seed=cfg.seed + t))

    workers = worker_count(tg.m) if workers is None else max(1, workers)
    if workers == 1:
        return [one(t) for t in range(tg.m)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, range(tg.m)))


def fstc_cut(tg: TemporalGraph, params: MultiplexParams, kind: str, r: int | None = None,
             cfg: EigenConfig | None = None, workers: int | None = None):
    """Approximate temporal cut from rank-``r`` snapshot spectra.

    Returns ``(cut, report, diagnostics)``.
    """
    _check_kind(kind)
    params.check(tg)
    r = default_rank(tg.n) if r is None else int(r)
    if not 1 <= r <= tg.n:
        raise RankMismatch(f"rank {r} outside [1, {tg.n}]")
    spectra = compute_spectra(tg, params, kind, r, cfg, workers)
    q = assemble_q(spectra, params)
    top = dense_sym_eig(q.matrix)
    xq = top.eigenvectors[:, -1]
    x = sign_normalize(lift(spectra, xq)[:, None])[:, 0]
    left = [s.next_lam for s in spectra if s.next_lam is not None]
    diag = {
        "rank": r,
        "lambda_q_max": float(top.eigenvalues[-1]),
        "lambda_r1_max": float(max(left)) if left else None,
        "error_bound": fstc_error_bound(spectra),
        "rank_too_small": r < 2,
        "shift": shift_constant(tg, params, kind),
    }
    cut, report = sweep_round(x, tg, params, kind)
    return cut, report, diag
