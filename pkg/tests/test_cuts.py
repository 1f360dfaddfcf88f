import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import dense_c, dense_degrees, dense_laplacian, dense_normalized, direct_score, random_graph
from tempocut.cuts import (
    CutReport,
    TemporalCut,
    clc_relax,
    kway_cut,
    normalized_temporal_sparsity,
    relaxation_bound,
    score_cut,
    shift_constant,
    stc_operator,
    stc_relax,
    sweep_round,
    temporal_sparsity,
)
from tempocut.datasets import drift_cuts, load_drift
from tempocut.eigen import dense_sym_eig
from tempocut.exceptions import DegenerateCut, NoFeasiblePrefix, ShapeMismatch
from tempocut.graph import MultiplexParams, TemporalGraph, c_operator
from tempocut.oracle import brute_force_optimal, partition_agreement


def test_fig3_values():
    tg, cuts = load_drift(), drift_cuts()
    one = MultiplexParams(1.0)
    r1 = temporal_sparsity(tg, cuts["I"], one)
    r2 = temporal_sparsity(tg, cuts["II"], one)
    assert (r1.cut_weight, r1.swaps, r1.denominator) == (5.0, 0.0, 32.0)
    assert (r2.cut_weight, r2.swaps, r2.denominator) == (3.0, 1.0, 31.0)
    assert r1.objective == 5 / 32 and r2.objective == 4 / 31
    two = MultiplexParams(2.0)
    assert temporal_sparsity(tg, cuts["I"], two).objective == 5 / 32
    assert temporal_sparsity(tg, cuts["II"], two).objective == 5 / 31


def test_beta_crossover():
    tg, cuts = load_drift(), drift_cuts()
    def obj(c, b):
        return temporal_sparsity(tg, cuts[c], MultiplexParams(b)).objective
    assert obj("II", 1.0) < obj("I", 1.0)
    assert obj("I", 2.0) < obj("II", 2.0)


def test_report_fields():
    tg = load_drift()
    rep = temporal_sparsity(tg, drift_cuts()["II"], MultiplexParams(1.0))
    assert isinstance(rep, CutReport)
    d = rep.as_dict()
    assert d["objective_kind"] == "sparsest" and d["beta"] == 1.0
    assert d["numerator"] / d["denominator"] == d["objective"]


def test_degenerate_cut():
    tg = load_drift()
    with pytest.raises(DegenerateCut):
        temporal_sparsity(tg, TemporalCut(np.ones((8, 2), dtype=int)), MultiplexParams(1.0))
    iso = TemporalGraph(3, [[(0, 1, 1.0)]])
    with pytest.raises(DegenerateCut):
        normalized_temporal_sparsity(iso, TemporalCut(np.array([[0], [0], [1]])), MultiplexParams(1.0))
    with pytest.raises(ShapeMismatch):
        temporal_sparsity(tg, TemporalCut(np.zeros((8, 3), dtype=int)), MultiplexParams(1.0))


def test_normalized_single_edge():
    tg = TemporalGraph(2, [[(0, 1, 2.5)]])
    rep = normalized_temporal_sparsity(tg, TemporalCut(np.array([[0], [1]])), MultiplexParams(1.0))
    assert rep.objective == pytest.approx(1 / 2.5, abs=1e-15)


def test_temporal_cut_type():
    cut = drift_cuts()["II"]
    assert cut.shape == (8, 2)
    assert np.array_equal(TemporalCut.from_flat(cut.flat(), 8, 2).labels, cut.labels)
    assert cut.flipped() != cut
    assert np.array_equal(cut.indicator()[:8], [1, 1, 1, 1, -1, -1, -1, -1])
    with pytest.raises(ValueError):
        TemporalCut(np.array([[0, 2]]))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10 ** 6), n=st.integers(2, 6), m=st.integers(1, 3),
       beta=st.floats(0, 3), uniform=st.booleans())
def test_scoring_matches_direct_and_quadratic_forms(seed, n, m, beta, uniform):
    rng = np.random.default_rng(seed)
    tg = random_graph(rng, n, m, connected=True, wmax=3.0)
    swap = np.full((m - 1, n), beta) if uniform else rng.uniform(0, 2, (m - 1, n))
    params = MultiplexParams(beta) if uniform else MultiplexParams(beta, swap.T)
    labels = rng.integers(0, 2, (n, m))
    cut = TemporalCut(labels)
    x = cut.indicator()
    lap = dense_laplacian(tg, swap)
    for kind in ("sparsest", "normalized"):
        ref = direct_score(tg, labels, swap, kind)
        if not np.isfinite(ref):
            with pytest.raises(DegenerateCut):
                score_cut(tg, cut, params, kind)
            continue
        got = score_cut(tg, cut, params, kind).objective
        assert got == pytest.approx(ref, rel=1e-12)
        if kind == "sparsest":
            assert got == pytest.approx((x @ lap @ x) / (x @ dense_c(n, m) @ x), rel=1e-12)
        # normalized denominator as a quadratic form in D^{1/2} C D^{1/2} on the
        # indicator scaled by D^{1/2}: only the cross-volume form is exact
        d = dense_degrees(tg)
        if kind == "normalized":
            blocks = np.zeros((n * m, n * m))
            for t in range(m):
                dt = d[t * n:(t + 1) * n]
                blocks[t * n:(t + 1) * n, t * n:(t + 1) * n] = dt.sum() * np.diag(dt) - np.outer(dt, dt)
            assert got == pytest.approx((x @ lap @ x) / (x @ blocks @ x), rel=1e-12)
        flipped = score_cut(tg, cut.flipped(), params, kind).objective
        assert flipped == pytest.approx(got, rel=1e-12)


def test_shift_constant_examples():
    tg = TemporalGraph(3, [[(0, 1, 1.0), (1, 2, 1.0)]])
    assert shift_constant(tg, MultiplexParams(1.0), "sparsest") == 15.0
    assert shift_constant(tg, MultiplexParams(1.0), "normalized") == 12.0
    heavy = TemporalGraph(4, [[(0, 1, 100.0)]])
    big_k = shift_constant(heavy, MultiplexParams(1.0), "sparsest")
    assert big_k == 3 * (200 + 2) and big_k > 3 * (4 + 2)
    op, _ = stc_operator(heavy, MultiplexParams(1.0), "sparsest")
    res = dense_sym_eig(op.to_dense())
    x = res.eigenvectors[:, -1]
    assert (x @ c_operator(4, 1).matvec(x)) / (x @ x) == pytest.approx(4.0, rel=1e-12)


def test_vertex_count_constant_for_sparse_unit_graphs(rng):
    tg = random_graph(rng, 12, 2, p=0.1, unit=True)
    d = [tg.degrees(t) for t in range(2)]
    if max((dt[u] + dt[v]).max() for dt, (u, v, _) in zip(d, [tg.edges(0), tg.edges(1)]) if u.size) <= 12:
        assert shift_constant(tg, MultiplexParams(0.5), "sparsest") == 3 * (12 + 1.0)


def test_stc_two_vertices():
    tg = TemporalGraph(2, [[(0, 1, 1.0)]])
    x, _ = stc_relax(tg, MultiplexParams(1.0), "sparsest")
    assert np.allclose(x, np.array([1, -1]) / np.sqrt(2), atol=1e-8)
    x2, _ = clc_relax(tg, MultiplexParams(1.0), "sparsest")
    a, _ = sweep_round(x, tg, MultiplexParams(1.0), "sparsest")
    b, _ = sweep_round(x2, tg, MultiplexParams(1.0), "sparsest")
    assert partition_agreement(a, b) == 1.0


@pytest.mark.parametrize("kind", ["sparsest", "normalized"])
def test_stc_eigenvalue_and_c_ratio_vs_dense(rng, kind):
    for _ in range(4):
        tg = random_graph(rng, 6, 3, connected=True, wmax=2.0)
        params = MultiplexParams(float(rng.choice([0.5, 1.0, 2.0])))
        x, lam = stc_relax(tg, params, kind)
        big_k = shift_constant(tg, params, kind)
        swap = np.full((2, 6), params.beta)
        lt = dense_laplacian(tg, swap) if kind == "sparsest" else dense_normalized(tg, swap)
        vals, vecs = np.linalg.eigh(big_k * dense_c(6, 3) - lt)
        assert lam == pytest.approx(vals[-1], rel=1e-9)
        assert abs(x @ vecs[:, -1]) == pytest.approx(1.0, abs=1e-8)
        ratio = (x @ c_operator(6, 3).matvec(x)) / (x @ x)
        if kind == "sparsest":
            assert ratio == pytest.approx(6.0, rel=1e-6)
        else:
            # the normalized Laplacian does not commute with C, so the top
            # eigenvector keeps a small component on the per-snapshot constants
            assert 6.0 * (1 - 1e-4) <= ratio <= 6.0 + 1e-12


def test_drift_stc_sweep():
    tg = load_drift()
    x, _ = stc_relax(tg, MultiplexParams(1.0), "sparsest")
    cut, rep = sweep_round(x, tg, MultiplexParams(1.0), "sparsest")
    assert rep.objective <= 5 / 32
    assert rep.objective == pytest.approx(4 / 31, abs=1e-12)
    assert partition_agreement(cut, drift_cuts()["II"]) == 1.0


def test_stc_separates_components():
    snap = [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0), (3, 4, 1.0), (3, 5, 1.0), (4, 5, 1.0)]
    tg = TemporalGraph(6, [snap, snap])
    x, _ = stc_relax(tg, MultiplexParams(0.0), "sparsest")
    for t in range(2):
        xt = x[6 * t:6 * t + 6]
        # constant on each triangle, opposite values across them
        assert np.ptp(xt[:3]) < 1e-8 and np.ptp(xt[3:]) < 1e-8
        assert xt[0] == pytest.approx(-xt[3], abs=1e-8)
    assert np.abs(x).max() > 0.1
    _, rep = sweep_round(x, tg, MultiplexParams(0.0), "sparsest")
    assert rep.objective == 0.0


@pytest.mark.parametrize("kind", ["sparsest", "normalized"])
def test_clc_agrees_with_stc(rng, kind):
    for _ in range(6):
        tg = random_graph(rng, 4, 2, connected=True, wmax=2.0)
        params = MultiplexParams(1.0)
        a = sweep_round(stc_relax(tg, params, kind)[0], tg, params, kind)[1].objective
        b = sweep_round(clc_relax(tg, params, kind)[0], tg, params, kind)[1].objective
        assert a == pytest.approx(b, rel=1e-9, abs=1e-12)


def test_clc_null_on_constants():
    tg = load_drift()
    c = c_operator(8, 2)
    x = np.repeat([3.0, -1.0], 8)
    assert np.allclose(c.matvec(x), 0)


def test_sweep_rounds_indicator_exactly():
    tg = load_drift()
    cut = drift_cuts()["II"]
    got, rep = sweep_round(cut.indicator(), tg, MultiplexParams(1.0), "sparsest")
    assert got == cut
    assert rep.objective == 4 / 31


def test_sweep_constant_vector():
    with pytest.raises(NoFeasiblePrefix):
        sweep_round(np.ones(16), load_drift(), MultiplexParams(1.0), "sparsest")
    with pytest.raises(ShapeMismatch):
        sweep_round(np.ones(3), load_drift(), MultiplexParams(1.0), "sparsest")


def _brute_sweep(x, tg, params, kind):
    # every prefix of the (value, index) order, scored from scratch
    order = np.lexsort((np.arange(x.size), x))
    best = np.inf
    for p in range(1, x.size):
        flat = np.zeros(x.size, dtype=int)
        flat[order[p:]] = 1
        try:
            best = min(best, score_cut(tg, TemporalCut.from_flat(flat, tg.n, tg.m), params, kind).objective)
        except DegenerateCut:
            pass
    return best


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10 ** 6), n=st.integers(2, 6), m=st.integers(1, 3),
       kind=st.sampled_from(["sparsest", "normalized"]), ties=st.booleans())
def test_sweep_matches_prefix_enumeration_and_dominates_median(seed, n, m, kind, ties):
    rng = np.random.default_rng(seed)
    tg = random_graph(rng, n, m, wmax=2.0)
    swap = rng.uniform(0, 2, (m - 1, n))
    params = MultiplexParams(0.0, swap.T)
    x = rng.integers(0, 3, n * m).astype(float) if ties else rng.normal(size=n * m)
    ref = _brute_sweep(x, tg, params, kind)
    if not np.isfinite(ref) or np.ptp(x) == 0:
        with pytest.raises(NoFeasiblePrefix):
            sweep_round(x, tg, params, kind)
        return
    _, rep = sweep_round(x, tg, params, kind)
    assert rep.objective == pytest.approx(ref, rel=1e-12)
    flat = (x > np.median(x)).astype(int)
    try:
        med = score_cut(tg, TemporalCut.from_flat(flat, n, m), params, kind).objective
    except DegenerateCut:
        return
    assert rep.objective <= med + 1e-12


def test_relaxation_bound_drift():
    tg = load_drift()
    lb = relaxation_bound(tg, MultiplexParams(1.0), "sparsest")
    assert lb <= 4 / 31 + 1e-12


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10 ** 6), n=st.integers(2, 5), m=st.integers(1, 3),
       beta=st.sampled_from([0.5, 1.0, 2.0]))
def test_sparsest_relaxation_lower_bound(seed, n, m, beta):
    rng = np.random.default_rng(seed)
    tg = random_graph(rng, n, m, connected=True, wmax=2.0)
    params = MultiplexParams(beta)
    _, opt = brute_force_optimal(tg, params, "sparsest")
    assert relaxation_bound(tg, params, "sparsest") <= opt + 1e-9 * max(1.0, opt)


def test_kway_cliques():
    k = 3
    snap = []
    for c in range(k):
        base = 4 * c
        snap += [(base + i, base + j, 1.0) for i in range(4) for j in range(i + 1, 4)]
    tg = TemporalGraph(12, [snap])
    cut = kway_cut(tg, MultiplexParams(0.0), "sparsest", k, seed=0)
    lab = cut.labels[:, 0]
    assert cut.k == 3
    for c in range(k):
        assert len(set(lab[4 * c:4 * c + 4])) == 1
    assert len(set(lab)) == 3


def _two_blocks(rng, n=20, m=3):
    half = n // 2
    snaps = []
    for _ in range(m):
        edges = []
        for u in range(n):
            for v in range(u + 1, n):
                same = (u < half) == (v < half)
                if rng.random() < (0.8 if same else 0.05):
                    edges.append((u, v, 1.0))
        snaps.append(edges)
    return TemporalGraph(n, snaps)


def test_kway_deterministic_and_k2_agreement(rng):
    for _ in range(3):
        tg = _two_blocks(rng)
        params = MultiplexParams(1.0)
        a = kway_cut(tg, params, "sparsest", 2, seed=5)
        assert a == kway_cut(tg, params, "sparsest", 2, seed=5)
        swept, _ = sweep_round(stc_relax(tg, params, "sparsest")[0], tg, params, "sparsest")
        assert partition_agreement(a, swept) >= 0.9


def test_kway_range():
    with pytest.raises(ValueError):
        kway_cut(load_drift(), MultiplexParams(1.0), "sparsest", 1)
