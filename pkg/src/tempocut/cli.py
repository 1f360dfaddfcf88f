"""``tempocut`` command line interface.

Exit codes: 0 success, 2 bad arguments or input, 3 solver did not converge,
4 instance too large for exhaustive search.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .cuts import KINDS
from .datasets import load_drift
from .eigen import EigenConfig
from .estimators import METHODS, run_method
from .exceptions import NotConverged, TempocutError, TooLarge
from .formats import ensure_parent, format_graph, read_graph, read_signal, write_labels, write_signal
from .fstc import default_rank
from .graph import MultiplexParams, TemporalGraph
from .oracle import brute_force_optimal
from .synth import SynthConfig, generate
from .wavelets import best_wavelet_cut, compress, graph_fourier_basis, graph_fourier_compress, l2_error, reconstruct

SCHEMA_VERSION = "1.0"

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NOT_CONVERGED = 3
EXIT_TOO_LARGE = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


class _UsageError(Exception):
    pass


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        val = float(obj)
        return val if math.isfinite(val) else None
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _emit_json(payload: dict, path) -> None:
    payload = {"schema_version": SCHEMA_VERSION, **payload}
    text = json.dumps(_clean(payload), indent=2, ensure_ascii=False, allow_nan=False) + "\n"
    _emit_text(text, path)


def _emit_text(text: str, path) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    ensure_parent(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _labels_by_snapshot(labels) -> list:
    return np.asarray(labels).T.tolist()


def _params(args, tg: TemporalGraph) -> MultiplexParams:
    params = MultiplexParams(float(args.beta))
    params.check(tg)
    return params


def cmd_cut(args) -> int:
    tg = read_graph(args.input)
    params = _params(args, tg)
    rank = args.rank
    if args.method == "fstc" and rank is None:
        rank = default_rank(tg.n)
    start = time.perf_counter()
    cut, report, diag = run_method(tg, params, args.method, args.objective, rank, args.k,
                                   args.seed, EigenConfig(seed=args.seed))
    elapsed = time.perf_counter() - start
    out = {
        "command": "cut",
        "method": args.method,
        "objective_kind": args.objective,
        "parameters": {"beta": args.beta, "rank": rank, "k": args.k, "seed": args.seed},
        "n": tg.n,
        "m": tg.m,
        "labels": _labels_by_snapshot(cut.labels),
        "wall_time_s": elapsed,
    }
    if report is not None:
        out.update(report.as_dict())
    if args.method == "fstc":
        out["lambda_r1_max"] = diag.get("lambda_r1_max")
        out["error_bound"] = diag.get("error_bound")
        out["rank_too_small"] = diag.get("rank_too_small")
    elif diag:
        out["diagnostics"] = diag
    _emit_json(out, args.output)
    return EXIT_OK


def _load_signal(args, tg):
    return read_signal(args.signal, tg.n, tg.m)


def cmd_wavelet(args) -> int:
    tg = read_graph(args.input)
    params = _params(args, tg)
    f = _load_signal(args, tg)
    cut, energy = best_wavelet_cut(tg, f, args.alpha, params, EigenConfig(seed=args.seed))
    _emit_json({
        "command": "wavelet",
        "parameters": {"alpha": args.alpha, "beta": args.beta, "seed": args.seed},
        "n": tg.n,
        "m": tg.m,
        "labels": None if cut is None else _labels_by_snapshot(cut.labels),
        "energy": energy,
        "separable": cut is not None,
    }, args.output)
    return EXIT_OK


def _parse_curve(text: str):
    try:
        lo, hi = (int(p) for p in text.split(":"))
    except ValueError:
        raise _UsageError(f"--curve expects kmin:kmax, got {text!r}") from None
    if lo < 1 or hi < lo:
        raise _UsageError("--curve needs 1 <= kmin <= kmax")
    return lo, hi


def _wavelet_curve(tg, f, lo, hi, alpha, params, cfg):
    tree = compress(tg, f, hi, alpha, params, cfg)
    errors = [tree.root.sse]
    for node in tree.splits:
        a, b = node.children
        errors.append(errors[-1] - node.sse + a.sse + b.sse)
    return [(k, max(errors[min(k - 1, len(errors) - 1)], 0.0)) for k in range(lo, hi + 1)]


def _fourier_curve(tg, f, lo, hi, params):
    basis = graph_fourier_basis(tg, params, hi)
    return [(k, l2_error(f, graph_fourier_compress(tg, params, f, k, basis=basis)))
            for k in range(lo, hi + 1)]


def cmd_compress(args) -> int:
    tg = read_graph(args.input)
    params = _params(args, tg)
    f = _load_signal(args, tg)
    size = tg.n * tg.m
    cfg = EigenConfig(seed=args.seed)
    if args.curve:
        lo, hi = _parse_curve(args.curve)
        if hi > size:
            raise _UsageError(f"kmax must not exceed n*m = {size}")
        if args.method == "fourier":
            rows = _fourier_curve(tg, f, lo, hi, params)
        else:
            rows = _wavelet_curve(tg, f, lo, hi, args.alpha, params, cfg)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "error"])
        for k, err in rows:
            w.writerow([k, f"{err:.17g}"])
        _emit_text(buf.getvalue(), args.output)
        return EXIT_OK
    if args.k is None:
        raise _UsageError("compress needs --k or --curve")
    if not 1 <= args.k <= size:
        raise _UsageError(f"--k must be in [1, {size}]")
    out = {"command": "compress", "method": args.method, "n": tg.n, "m": tg.m,
           "parameters": {"k": args.k, "alpha": args.alpha, "beta": args.beta, "seed": args.seed}}
    if args.method == "fourier":
        rec = graph_fourier_compress(tg, params, f, args.k)
        out["l2_error"] = l2_error(f, rec)
    else:
        tree = compress(tg, f, args.k, args.alpha, params, cfg)
        rec = reconstruct(tree)
        out["tree"] = tree.summary()
        out["l2_error"] = l2_error(f, rec)
    if args.reconstruction:
        ensure_parent(args.reconstruction)
        write_signal(np.asarray(rec), args.reconstruction)
        out["reconstruction"] = str(args.reconstruction)
    _emit_json(out, args.output)
    return EXIT_OK


def cmd_synth(args) -> int:
    k = args.k if args.k is not None else args.n // 2
    cfg = SynthConfig(n=args.n, k=k, h=args.h, eps=args.eps, m=args.m, seed=args.seed,
                      neighborhood=args.neighborhood)
    tg, truth = generate(cfg)
    prefix = Path(args.out)
    graph_path = Path(f"{prefix}.graph.txt")
    label_path = Path(f"{prefix}.labels.txt")
    ensure_parent(graph_path)
    comment = (f"synthetic planted partition: n={cfg.n} k={cfg.k} h={cfg.h} eps={cfg.eps} "
               f"m={cfg.m} seed={cfg.seed} neighborhood={cfg.neighborhood}")
    with open(graph_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_graph(tg, comment))
    write_labels(truth.labels, label_path)
    _emit_json({"command": "synth", "graph": str(graph_path), "labels": str(label_path),
                "n": tg.n, "m": tg.m, "edges": tg.num_edges()}, None)
    return EXIT_OK


def cmd_oracle(args) -> int:
    tg = read_graph(args.input)
    params = _params(args, tg)
    cut, obj = brute_force_optimal(tg, params, args.objective)
    _emit_json({"command": "oracle", "objective_kind": args.objective, "beta": args.beta,
                "n": tg.n, "m": tg.m, "optimum": obj,
                "labels": _labels_by_snapshot(cut.labels)}, args.output)
    return EXIT_OK


BENCH_BETAS = (0.25, 0.5, 1.0, 2.0, 4.0)
PERF_SIZES = ((100, 4), (250, 8), (500, 8), (1000, 8))


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def cmd_bench(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if args.suite == "quality":
        tg = load_drift()
        for kind in KINDS:
            rows = []
            for method in METHODS:
                for beta in BENCH_BETAS:
                    params = MultiplexParams(beta)
                    _, report, _ = run_method(tg, params, method, kind, rank=tg.n)
                    rows.append([method, beta, f"{report.objective:.17g}"])
            path = out_dir / f"quality_{kind}.csv"
            _write_csv(path, ["method", "beta", "objective"], rows)
            written.append(str(path))
    else:
        rows = []
        for n, m in PERF_SIZES:
            tg, _ = generate(SynthConfig(n=n, k=n // 2, h=1, eps=0.2, m=m, seed=args.seed))
            params = MultiplexParams(1.0)
            for method, rank in (("stc", None), ("fstc", min(32, n))):
                start = time.perf_counter()
                run_method(tg, params, method, "sparsest", rank=rank, seed=args.seed)
                rows.append([method, n, m, f"{time.perf_counter() - start:.6f}"])
        path = out_dir / "perf.csv"
        _write_csv(path, ["method", "n", "m", "seconds"], rows)
        written.append(str(path))
    _emit_json({"command": "bench", "suite": args.suite, "files": written}, None)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tempocut", description="Sparsest and normalized cuts on temporal graphs.")
    p.add_argument("--version", action="version", version=f"tempocut {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    c = sub.add_parser("cut", aliases=["solve", "baseline"], help="compute a temporal cut")
    c.add_argument("--input", required=True)
    c.add_argument("--method", choices=METHODS, default="stc")
    c.add_argument("--objective", choices=KINDS, default="sparsest")
    c.add_argument("--beta", type=float, required=True)
    c.add_argument("--rank", type=int)
    c.add_argument("--k", type=int, default=2)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--output")
    c.set_defaults(func=cmd_cut)

    w = sub.add_parser("wavelet", help="best dynamic wavelet cut of a signal")
    w.add_argument("--input", required=True)
    w.add_argument("--signal", required=True)
    w.add_argument("--alpha", type=float, default=0.0)
    w.add_argument("--beta", type=float, default=0.0)
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--output")
    w.set_defaults(func=cmd_wavelet)

    z = sub.add_parser("compress", help="compress a dynamic signal")
    z.add_argument("--input", required=True)
    z.add_argument("--signal", required=True)
    z.add_argument("--k", type=int)
    z.add_argument("--alpha", type=float, default=0.0)
    z.add_argument("--beta", type=float, default=0.0)
    z.add_argument("--method", choices=("wavelet", "fourier"), default="wavelet")
    z.add_argument("--curve", help="kmin:kmax, emit k,error CSV rows")
    z.add_argument("--reconstruction", help="write the reconstructed signal CSV here")
    z.add_argument("--seed", type=int, default=0)
    z.add_argument("--output")
    z.set_defaults(func=cmd_compress)

    s = sub.add_parser("synth", help="generate a planted moving-partition graph")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int)
    s.add_argument("--h", type=int, default=1)
    s.add_argument("--eps", type=float, default=0.0)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--neighborhood", choices=("chebyshev", "manhattan"), default="chebyshev")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    o = sub.add_parser("oracle", help="exact optimum by enumeration (n*m <= 22)")
    o.add_argument("--input", required=True)
    o.add_argument("--beta", type=float, required=True)
    o.add_argument("--objective", choices=KINDS, default="sparsest")
    o.add_argument("--output")
    o.set_defaults(func=cmd_oracle)

    b = sub.add_parser("bench", help="run the quality or timing suite")
    b.add_argument("--suite", choices=("quality", "perf"), required=True)
    b.add_argument("--out", required=True)
    b.add_argument("--seed", type=int, default=0)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INPUT
    except NotConverged as exc:
        print(f"tempocut: not converged: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except TooLarge as exc:
        print(f"tempocut: too large: {exc}", file=sys.stderr)
        return EXIT_TOO_LARGE
    except (TempocutError, ValueError, OSError) as exc:
        print(f"tempocut: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
