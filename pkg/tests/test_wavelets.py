import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import dense_c, random_graph
from tempocut.cuts import TemporalCut
from tempocut.exceptions import DegenerateCut, DimensionMismatch
from tempocut.graph import MultiplexParams, TemporalGraph
from tempocut.wavelets import (
    CSC_CONSTANT,
    SignalSeries,
    best_wavelet_cut,
    compress,
    csc_operator,
    dynamic_wavelet_energy,
    graph_fourier_compress,
    heat_signal,
    l2_error,
    reconstruct,
    static_wavelet_energy,
    theta,
)


def dense_s(f, cross=0.5):
    n, m = f.shape
    s = np.zeros((n * m, n * m))
    for t in range(m):
        for h in range(m):
            if abs(t - h) > 1:
                continue
            w = 1.0 if t == h else cross
            s[t * n:(t + 1) * n, h * n:(h + 1) * n] = w * (f[:, t][:, None] - f[:, h][None, :]) ** 2
    return s


def theta_loop(f, lab):
    n, m = f.shape
    out = []
    for t in range(m):
        a = sum(1 for v in range(n) if lab[v, t] == 1)
        inside = sum(f[v, t] for v in range(n) if lab[v, t] == 1)
        outside = sum(f[v, t] for v in range(n) if lab[v, t] != 1)
        out.append(a * outside - (n - a) * inside)
    return np.array(out)


def test_static_energy_examples():
    g = TemporalGraph(4, [[(0, 1, 1.0)]])
    cut = np.array([1, 1, 0, 0])
    assert static_wavelet_energy(g, np.full(4, 3.0), cut) == 0.0
    assert static_wavelet_energy(g, cut.astype(float), cut) == pytest.approx(4.0)
    with pytest.raises(DegenerateCut):
        static_wavelet_energy(g, np.ones(4), np.ones(4, dtype=int))


def test_static_energy_from_means(rng):
    n = 7
    f = rng.normal(size=n)
    lab = np.array([1, 0, 1, 1, 0, 0, 1])
    p = lab.sum()
    ref = p * (n - p) * (f[lab == 0].mean() - f[lab == 1].mean()) ** 2
    assert static_wavelet_energy(n, f, lab) == pytest.approx(ref, rel=1e-12)


def test_dynamic_energy(rng):
    tg = random_graph(rng, 6, 3)
    f = rng.normal(size=(6, 3))
    lab = rng.integers(0, 2, (6, 3))
    lab[0] = [0, 0, 0]
    lab[1] = [1, 1, 1]
    th = theta_loop(f, lab)
    assert np.allclose(theta(f, TemporalCut(lab)), th, atol=1e-12)
    num = (th ** 2).sum() + (th[:-1] * th[1:]).sum()
    den = sum(lab[:, t].sum() * (6 - lab[:, t].sum()) for t in range(3))
    assert dynamic_wavelet_energy(tg, f, TemporalCut(lab)) == pytest.approx(num / den, rel=1e-12)
    assert dynamic_wavelet_energy(tg, np.ones((6, 3)), TemporalCut(lab)) == 0.0


def test_dynamic_reduces_to_static(rng):
    tg = random_graph(rng, 6, 1)
    f = rng.normal(size=(6, 1))
    lab = np.array([[1], [0], [1], [0], [0], [1]])
    assert dynamic_wavelet_energy(tg, f, TemporalCut(lab)) == pytest.approx(
        static_wavelet_energy(tg, f[:, 0], lab[:, 0]), rel=1e-12)


def test_csc_matches_dense(rng):
    tg = random_graph(rng, 4, 2)
    f = rng.normal(size=(4, 2))
    c = dense_c(4, 2)
    ref = c @ dense_s(f) @ c
    assert np.allclose(csc_operator(tg, f).to_dense(), ref, atol=1e-10)
    op = csc_operator(tg, f)
    assert np.allclose(op.matvec(np.repeat([2.0, -1.0], 4)), 0, atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10 ** 6), n=st.integers(2, 7), m=st.integers(1, 4))
def test_csc_proportional_to_numerator(seed, n, m):
    rng = np.random.default_rng(seed)
    tg = random_graph(rng, n, m)
    f = rng.normal(size=(n, m))
    lab = rng.integers(0, 2, (n, m))
    x = TemporalCut(lab).indicator()
    th = theta(f, TemporalCut(lab))
    num = (th ** 2).sum() + (th[:-1] * th[1:]).sum()
    q = x @ csc_operator(tg, f).matvec(x)
    assert q == pytest.approx(CSC_CONSTANT * num, rel=1e-9, abs=1e-9 * (1 + abs(q)))


def _brute_best(tg, f):
    n, m = tg.n, tg.m
    best = -np.inf
    for bits in itertools.product([0, 1], repeat=n * m):
        lab = TemporalCut.from_flat(np.array(bits), n, m)
        try:
            best = max(best, dynamic_wavelet_energy(tg, f, lab))
        except DegenerateCut:
            pass
    return best


def test_best_cut_recovers_planted(rng):
    for _ in range(3):
        tg = random_graph(rng, 5, 2, connected=True)
        lab = np.zeros((5, 2), dtype=int)
        lab[rng.permutation(5)[:2], 0] = 1
        lab[rng.permutation(5)[:3], 1] = 1
        f = lab.astype(float)
        cut, energy = best_wavelet_cut(tg, f, alpha=0.0, params=MultiplexParams(0.0))
        assert energy == pytest.approx(_brute_best(tg, f), rel=1e-9)
        assert cut == TemporalCut(lab) or cut == TemporalCut(1 - lab)


def test_alpha_regularizes_cut_weight(rng):
    tg = random_graph(rng, 12, 2, connected=True, p=0.3)
    f = rng.normal(size=(12, 2))
    def weight(cut):
        return sum(float(w[cut.labels[u, t] != cut.labels[v, t]].sum())
                   for t in range(2) for u, v, w in [tg.edges(t)])
    c0, _ = best_wavelet_cut(tg, f, 0.0)
    c1, _ = best_wavelet_cut(tg, f, 1e4)
    assert weight(c1) <= weight(c0)


def test_constant_signal_has_no_cut():
    tg = random_graph(np.random.default_rng(0), 5, 2)
    assert best_wavelet_cut(tg, np.ones((5, 2))) == (None, 0.0)


def test_compress_examples(rng):
    tg = random_graph(rng, 6, 3, connected=True)
    f = rng.normal(size=(6, 3))
    t1 = compress(tg, f, 1)
    assert t1.k == 1
    assert np.allclose(reconstruct(t1).values, f.mean())
    assert t1.error == pytest.approx(((f - f.mean()) ** 2).sum())
    full = compress(tg, f, 18)
    assert np.allclose(reconstruct(full).values, f)
    assert l2_error(f, reconstruct(full)) == pytest.approx(0.0, abs=1e-20)


def test_compress_two_part_signal_exact(rng):
    tg = random_graph(rng, 8, 3, connected=True)
    f = np.zeros((8, 3))
    f[:3, 0] = f[2:6, 1] = f[5:, 2] = 4.0
    tree = compress(tg, f, 2, alpha=0.0)
    assert tree.error == pytest.approx(0.0, abs=1e-9)
    assert not tree.splits[0].fallback


def test_compress_tree_invariants(rng):
    tg = random_graph(rng, 7, 3, connected=True)
    f = rng.normal(size=(7, 3))
    tree = compress(tg, f, 6)
    leaves = tree.leaves()
    nodes = np.sort(np.concatenate([leaf.nodes for leaf in leaves]))
    assert np.array_equal(nodes, np.arange(21))
    flat = f.T.ravel()
    within = sum(((flat[leaf.nodes] - flat[leaf.nodes].mean()) ** 2).sum() for leaf in leaves)
    assert tree.error == pytest.approx(within, rel=1e-12)
    assert l2_error(f, reconstruct(tree)) == pytest.approx(within, rel=1e-12)
    for node in tree.splits:
        a, b = node.children
        assert np.array_equal(np.sort(np.concatenate([a.nodes, b.nodes])), np.sort(node.nodes))
    assert tree.labels().shape == (7, 3)
    assert tree.summary()["k"] == 6


def _smooth(tg, rng):
    return heat_signal(tg, rng.uniform(0, 10, tg.n), step=0.3).values


def test_error_monotone_in_k(rng):
    for _ in range(3):
        tg = random_graph(rng, 8, 3, connected=True)
        f = _smooth(tg, rng) + 0.1 * rng.normal(size=(8, 3))
        tree = compress(tg, f, 10)
        errs = [compress(tg, f, k).error for k in range(1, 11)]
        assert all(b <= a + 1e-12 for a, b in zip(errs, errs[1:]))
        assert errs[-1] == pytest.approx(tree.error)
        params = MultiplexParams(1.0)
        ferr = [l2_error(f, graph_fourier_compress(tg, params, f, k)) for k in range(1, 11)]
        assert all(b <= a + 1e-9 for a, b in zip(ferr, ferr[1:]))


def test_fourier_examples(rng):
    tg = random_graph(rng, 5, 2, connected=True)
    params = MultiplexParams(1.0)
    f = rng.normal(size=(5, 2))
    assert np.allclose(graph_fourier_compress(tg, params, f, 10).values, f, atol=1e-10)
    const = np.full((5, 2), 2.0)
    assert np.allclose(graph_fourier_compress(tg, params, const, 1).values, const, atol=1e-10)


def test_heat_signal(rng):
    tg = random_graph(rng, 9, 4, connected=True)
    sig = heat_signal(tg, start=2)
    assert isinstance(sig, SignalSeries)
    assert np.allclose(sig.values.sum(axis=0), 9.0, atol=1e-8)
    f0 = rng.normal(size=9)
    same = heat_signal(tg, f0, step=0.0).values
    assert np.allclose(same, f0[:, None])
    flat = heat_signal(tg, f0, step=200.0).values
    assert np.abs(flat[:, 0] - f0.mean()).max() < 1e-6
    with pytest.raises(DimensionMismatch):
        heat_signal(tg, np.ones(3))


def test_signal_series():
    s = SignalSeries(np.arange(6.0).reshape(3, 2))
    assert s.shape == (3, 2)
    assert np.array_equal(s.flat(), [0, 2, 4, 1, 3, 5])
    with pytest.raises(ValueError):
        SignalSeries(np.array([[np.nan]]))
