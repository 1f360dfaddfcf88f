"""Eigensolvers for implicit symmetric operators.

``extreme_eigs`` is a thick-restart block Lanczos iteration with full
reorthogonalization.  The basis ``V`` and its image ``W = A V`` are stored
explicitly, Ritz pairs come from the projected matrix ``V^T W`` and the basis
is expanded with the residuals of the unconverged wanted Ritz vectors; for a
block size of one this is exactly Lanczos with thick restarts.

Convergence is measured as ``||A y - theta y|| <= tol * scale`` where
``scale`` is the spread ``max theta - min theta`` of the current Ritz values.
That keeps the test shift invariant: ``K C - L`` and ``L`` restricted to the
same subspace converge after the same number of steps even though ``K`` may
be huge.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .exceptions import NotConverged, NotSymmetric
from .graph import SpectralOperator

__all__ = [
    "EigenConfig",
    "SpectrumResult",
    "extreme_eigs",
    "dense_sym_eig",
    "cg_solve",
    "smallest_generalized",
    "orthonormal_basis",
    "sign_normalize",
]

DENSE_CAP = 4096


@dataclass
class EigenConfig:
    tol: float = 1e-8
    max_iter: int = 5000
    seed: int = 0
    deflation_basis: np.ndarray | None = None
    block_size: int | None = None
    max_subspace: int | None = None

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")

    def replace(self, **kw) -> "EigenConfig":
        d = dict(self.__dict__)
        d.update(kw)
        return EigenConfig(**d)


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # one unit eigenvector per column
    residuals: np.ndarray
    iterations: int
    converged: bool

    def __len__(self):
        return len(self.eigenvalues)


def orthonormal_basis(vectors, dim: int, rtol: float = 1e-10) -> np.ndarray:
    """Orthonormal columns spanning ``vectors`` (``(dim,)`` or ``(dim, p)``)."""
    if vectors is None:
        return np.zeros((dim, 0))
    a = np.asarray(vectors, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.shape[0] != dim:
        raise ValueError(f"basis vectors must have length {dim}")
    if a.shape[1] == 0:
        return np.zeros((dim, 0))
    q, r, _ = sla.qr(a, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    rank = int(np.sum(diag > rtol * max(diag.max(), 1e-300)))
    return q[:, :rank]


def _project(x: np.ndarray, q: np.ndarray) -> np.ndarray:
    if q.shape[1] == 0:
        return x
    for _ in range(2):
        x = x - q @ (q.T @ x)
    return x


def sign_normalize(vecs: np.ndarray) -> np.ndarray:
    """Flip columns so their first non-negligible coordinate is positive."""
    vecs = np.array(vecs, dtype=float, copy=True)
    single = vecs.ndim == 1
    if single:
        vecs = vecs[:, None]
    for j in range(vecs.shape[1]):
        col = vecs[:, j]
        big = np.abs(col) > 1e-8 * max(np.abs(col).max(), 1e-300)
        if big.any() and col[np.argmax(big)] < 0:
            vecs[:, j] = -col
    return vecs[:, 0] if single else vecs


class _Space:
    """Search basis ``V`` and its images ``ops[i] V`` in preallocated buffers."""

    def __init__(self, ops, dim: int, cap: int):
        self.ops = ops
        self.k = 0
        self._v = np.empty((dim, cap))
        self._w = [np.empty((dim, cap)) for _ in ops]

    @property
    def v(self):
        return self._v[:, :self.k]

    @property
    def ws(self):
        return [w[:, :self.k] for w in self._w]

    def _reserve(self, size: int):
        cap = self._v.shape[1]
        if size <= cap:
            return
        cap = max(size, 2 * cap)
        self._v = np.hstack([self._v, np.empty((self._v.shape[0], cap - self._v.shape[1]))])
        self._w = [np.hstack([w, np.empty((w.shape[0], cap - w.shape[1]))]) for w in self._w]

    def add(self, block):
        g = block.shape[1]
        k = self.k
        self._reserve(k + g)
        self._v[:, k:k + g] = block
        for op, w in zip(self.ops, self._w):
            w[:, k:k + g] = op.matvec(block)
        self.k = k + g

    def restart(self, s):
        """Compress to the Ritz vectors ``V S`` and re-orthonormalize."""
        q, r = np.linalg.qr(self.v @ s)
        d = np.sign(np.diag(r))
        d[d == 0] = 1.0
        q = q * d
        r = r * d[:, None]
        imgs = [sla.solve_triangular(r, (w @ s).T, trans="T", lower=False).T for w in self.ws]
        nk = q.shape[1]
        self._v[:, :nk] = q
        for w, img in zip(self._w, imgs):
            w[:, :nk] = img
        self.k = nk


def _append(space: _Space, new, defl, rng, want) -> int:
    """Orthonormalize ``new`` against the deflation basis and ``V``; extend ``V``.

    Returns the number of vectors added.
    """
    v = space.v
    dim = v.shape[0]
    block = np.array(new[:, :want], dtype=float)
    norms = np.linalg.norm(block, axis=0)
    if block.shape[1] == want and np.all(norms > 0):
        # block classical Gram-Schmidt, twice, then QR inside the block
        for _ in range(2):
            block = _project(block, defl)
            if v.shape[1]:
                block = block - v @ (v.T @ block)
        q, r = np.linalg.qr(block)
        if np.all(np.abs(np.diag(r)) > 1e-8 * norms):
            q = _project(q, defl)
            if v.shape[1]:
                q = q - v @ (v.T @ q)
            q, _ = np.linalg.qr(q)
            space.add(q)
            return want
    accepted = []
    attempts = 0
    cols = [new[:, j] for j in range(new.shape[1])]
    while len(accepted) < want and attempts < 2 * want + 4:
        if cols:
            c = cols.pop(0)
        else:
            c = rng.uniform(-1.0, 1.0, dim)
            attempts += 1
        norm0 = np.linalg.norm(c)
        if norm0 == 0:
            continue
        basis = np.column_stack([v] + accepted) if accepted else v
        for _ in range(2):
            c = _project(c, defl)
            if basis.shape[1]:
                c = c - basis @ (basis.T @ c)
        nc = np.linalg.norm(c)
        if nc <= 1e-10 * norm0:
            continue
        accepted.append(c / nc)
    if accepted:
        space.add(np.column_stack(accepted))
    return len(accepted)


def _spread(theta) -> float:
    top = float(np.abs(theta).max()) if theta.size else 0.0
    return max(float(theta.max() - theta.min()) if theta.size else 0.0, 1e-12 * top, 1e-300)


def extreme_eigs(
    op: SpectralOperator,
    count: int,
    which: str = "largest",
    cfg: EigenConfig | None = None,
) -> SpectrumResult:
    """``count`` extreme eigenpairs of ``op`` orthogonal to ``cfg.deflation_basis``.

    Eigenvalues are returned in the request direction (descending for
    ``largest``, ascending for ``smallest``).
    """
    if which not in ("largest", "smallest"):
        raise ValueError("which must be 'largest' or 'smallest'")
    cfg = cfg or EigenConfig()
    dim = op.dim
    defl = orthonormal_basis(cfg.deflation_basis, dim)
    eff = dim - defl.shape[1]
    if count < 1 or count > eff:
        raise ValueError(f"count must be in [1, {eff}] for this operator and deflation")
    b = min(cfg.block_size or min(count, 8), eff)
    max_sub = cfg.max_subspace or max(3 * count + 2 * b, count + 30)
    max_sub = min(max(max_sub, count + b), eff)
    rng = np.random.default_rng(cfg.seed)

    space = _Space([op], dim, max_sub + b)
    _append(space, rng.uniform(-1.0, 1.0, (dim, b)), defl, rng, b)
    sign = -1.0 if which == "largest" else 1.0
    it = 0
    while True:
        v, (w,) = space.v, space.ws
        h = v.T @ w
        h = 0.5 * (h + h.T)
        theta, s = np.linalg.eigh(h)
        order = np.argsort(sign * theta, kind="stable")
        theta, s = theta[order], s[:, order]
        scale = _spread(theta)
        sw = s[:, :count]
        y = v @ sw
        # residual of the deflated operator P A P; the deflation basis need not be invariant
        r = _project(w @ sw - y * theta[:count], defl)
        res = np.linalg.norm(r, axis=0)
        conv = res <= cfg.tol * scale
        full = v.shape[1] >= eff
        if conv.all() or full:
            break
        if it >= cfg.max_iter:
            best = SpectrumResult(theta[:count], sign_normalize(y), res, it, False)
            raise NotConverged(
                f"extreme_eigs: {int((~conv).sum())} of {count} pairs unconverged "
                f"after {it} iterations (max residual {res.max():.3e})",
                best,
            )
        it += 1
        cand = r[:, ~conv][:, :b]
        grow = cand.shape[1]
        if v.shape[1] + grow > max_sub:
            # drop half the surplus at once so restarts stay infrequent
            nkeep = count + (max_sub - count) // 2
            space.restart(s[:, :nkeep])
        if _append(space, cand, defl, rng, grow) == 0:
            break
    y = sign_normalize(y / np.linalg.norm(y, axis=0))
    result = SpectrumResult(theta[:count].copy(), y, res, it, bool(conv.all() or full))
    if not result.converged:
        raise NotConverged("extreme_eigs: search space exhausted before convergence", result)
    return result


def dense_sym_eig(a, cap: int = DENSE_CAP) -> SpectrumResult:
    """Full ascending spectrum of a small dense symmetric matrix (LAPACK ``syevd``)."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    if a.shape[0] > cap:
        raise ValueError(f"dense eigensolver capped at dimension {cap}")
    scale = max(1.0, float(np.abs(a).max()))
    if np.abs(a - a.T).max() > 1e-10 * scale:
        raise NotSymmetric("matrix is not symmetric")
    vals, vecs = np.linalg.eigh(0.5 * (a + a.T))
    vecs = sign_normalize(vecs)
    res = np.linalg.norm(a @ vecs - vecs * vals, axis=0)
    return SpectrumResult(vals, vecs, res, 1, True)


def cg_solve(
    op: SpectralOperator,
    b: np.ndarray,
    deflation_basis=None,
    tol: float = 1e-10,
    max_iter: int | None = None,
) -> np.ndarray:
    """Conjugate gradients on the complement of the deflation basis.

    ``b`` is projected off the basis first; a right-hand side lying entirely
    in the basis therefore yields the zero solution.
    """
    dim = op.dim
    defl = orthonormal_basis(deflation_basis, dim)
    b = np.asarray(b, dtype=float)
    nb0 = np.linalg.norm(b)
    b = _project(b, defl)
    nb = np.linalg.norm(b)
    if nb0 == 0 or nb <= 1e-12 * nb0:
        return np.zeros(dim)
    x = np.zeros(dim)
    r = b.copy()
    p = r.copy()
    rs = r @ r
    limit = max_iter or 10 * dim
    for _ in range(limit):
        ap = _project(op.matvec(p), defl)
        pap = p @ ap
        if pap <= 0:
            raise NotConverged("cg_solve: operator is not positive definite on the subspace", x)
        alpha = rs / pap
        x += alpha * p
        r -= alpha * ap
        rs_new = r @ r
        if np.sqrt(rs_new) <= tol * nb:
            return _project(x, defl)
        p = r + (rs_new / rs) * p
        rs = rs_new
    raise NotConverged(f"cg_solve: no convergence in {limit} iterations", _project(x, defl))


def smallest_generalized(
    op_a: SpectralOperator,
    op_b: SpectralOperator,
    deflation_basis=None,
    cfg: EigenConfig | None = None,
    count: int = 1,
) -> SpectrumResult:
    """Smallest eigenpairs of ``A x = lam B x`` on the deflated subspace.

    Davidson-type iteration whose expansion vectors are ``B^{-1}`` applied to
    the current residuals (via ``cg_solve``), so the search space is the
    Krylov space of ``B^{-1} A``.
    """
    cfg = cfg or EigenConfig()
    dim = op_a.dim
    defl = orthonormal_basis(
        deflation_basis if deflation_basis is not None else cfg.deflation_basis, dim
    )
    eff = dim - defl.shape[1]
    if count < 1 or count > eff:
        raise ValueError(f"count must be in [1, {eff}]")
    max_sub = min(cfg.max_subspace or max(count + 30, 3 * count), eff)
    rng = np.random.default_rng(cfg.seed)

    ops = [op_a, op_b]
    space = _Space(ops, dim, max_sub + count)
    _append(space, rng.uniform(-1.0, 1.0, (dim, count)), defl, rng, count)
    it = 0
    while True:
        v, (wa, wb) = space.v, space.ws
        k = v.shape[1]
        ha = v.T @ wa
        hb = v.T @ wb
        ha = 0.5 * (ha + ha.T)
        hb = 0.5 * (hb + hb.T)
        theta, s = sla.eigh(ha, hb)
        sw = s[:, :count]
        y = v @ sw
        r = _project(wa @ sw - (wb @ sw) * theta[:count], defl)
        ny = np.linalg.norm(y, axis=0)
        res = np.linalg.norm(r, axis=0) / ny
        scale = max(1.0, float(np.abs(ha).max()), float(np.abs(hb).max()))
        conv = res <= cfg.tol * scale
        full = k >= eff
        if conv.all() or full:
            break
        if it >= cfg.max_iter:
            best = SpectrumResult(theta[:count], sign_normalize(y / ny), res, it, False)
            raise NotConverged("smallest_generalized: iteration budget exhausted", best)
        it += 1
        cand = np.column_stack(
            [cg_solve(op_b, r[:, j], defl, tol=1e-12) for j in np.flatnonzero(~conv)]
        )
        grow = cand.shape[1]
        if k + grow > max_sub:
            # drop half the surplus at once so restarts stay infrequent
            nkeep = count + (max_sub - count) // 2
            space.restart(s[:, :nkeep])
        if _append(space, cand, defl, rng, grow) == 0:
            break
    y = sign_normalize(y / ny)
    return SpectrumResult(theta[:count].copy(), y, res, it, bool(conv.all() or full))
