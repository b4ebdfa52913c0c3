"""Command-line interface.

Subcommands: fit, predict, eval, sweep, bench.  Machine-readable JSON
records go to stdout, one object per line; human-readable progress goes to
stderr.  Exit codes: 0 success, 1 runtime failure (bad data, bad config),
2 usage errors (argparse).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import replace

import numpy as np
from threadpoolctl import threadpool_limits

from . import io as model_io
from .core import Dataset, SolverConfig, ViewCollection
from .datagen import gaussian_blobs
from .metrics import evaluate
from .multi_view import fit_multi_view
from .oos import build_predictor, predict as oos_predict
from .single_view import fit_single_view

BENCH_EPS_TOL = 1e-300  # positive but never triggers: bench runs a fixed iteration count


def _emit(record: dict) -> None:
    print(json.dumps(record), flush=True)


def _say(text: str) -> None:
    print(text, file=sys.stderr, flush=True)


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int, required=True, help="number of clusters (>= 2)")
    p.add_argument("--m", type=int, required=True, help="number of anchors (k <= m <= n)")
    p.add_argument("--alpha", type=float, default=1.0, help="affinity ridge weight")
    p.add_argument("--beta", type=float, default=1.0, help="connectivity penalty weight")
    p.add_argument("--gamma", type=float, default=-1.0,
                   help="view-weight exponent (< 0, multi-view only)")
    p.add_argument("--tol", type=float, default=1e-6,
                   help="relative objective-change stopping threshold")
    p.add_argument("--max-iter", type=int, default=50, help="outer iteration cap")
    p.add_argument("--qp-tol", type=float, default=1e-8, help="row QP KKT tolerance")
    p.add_argument("--kmeans-max-iter", type=int, default=300,
                   help="Lloyd iteration cap for anchors and labels")
    p.add_argument("--seed", type=int, default=0, help="master random seed")


def _config_from_args(args) -> SolverConfig:
    return SolverConfig(
        k=args.k, m=args.m, alpha=args.alpha, beta=args.beta, gamma=args.gamma,
        tol=args.tol, max_iter=args.max_iter, qp_tol=args.qp_tol,
        kmeans_max_iter=args.kmeans_max_iter, seed=args.seed,
    )


def _fit_any(data, config: SolverConfig):
    start = time.perf_counter()

    def report(state):
        _emit({"record": "iteration", "iteration": state.iteration,
               "objective": state.objective,
               "elapsed": time.perf_counter() - start})

    if isinstance(data, ViewCollection):
        return fit_multi_view(data, config, progress=report)
    return fit_single_view(data, config, progress=report)


def _labels_of(data):
    return data.labels if isinstance(data, (Dataset, ViewCollection)) else None


def cmd_fit(args) -> int:
    fmt = "multi-view-manifest" if args.multiview else args.format
    data = model_io.ingest(args.input, fmt)
    config = _config_from_args(args)
    start = time.perf_counter()
    model = _fit_any(data, config)
    elapsed = time.perf_counter() - start
    trace = model.objective_trace
    converged = len(trace) < config.max_iter or (
        len(trace) >= 2
        and abs(trace[-2] - trace[-1]) < config.tol * max(abs(trace[-2]), 1e-12)
    )
    _emit({
        "record": "fit",
        "n": model.n, "m": model.m, "k": config.k,
        "views": model.view_count,
        "iterations": len(trace),
        "final_objective": float(trace[-1]),
        "converged": bool(converged),
        "view_weights": [float(v) for v in model.view_weights],
        "seconds": elapsed,
    })
    labels = _labels_of(data)
    if labels is not None:
        scores = evaluate(labels, model.sample_labels)
        model = replace(model, metrics=scores)
        _emit({"record": "metrics", "split": "train", **scores})
        _say(f"train metrics: acc={scores['acc']:.4f} nmi={scores['nmi']:.4f} "
             f"purity={scores['purity']:.4f}")
    if args.out:
        model_io.save_model(model, args.out)
        _say(f"model archive written to {args.out}")
    if args.labels_out:
        np.savetxt(args.labels_out, model.sample_labels, fmt="%d")
        _say(f"sample labels written to {args.labels_out}")
    _say(f"fit finished in {len(trace)} iterations "
         f"({elapsed:.2f}s), objective {trace[-1]:.6g}")
    return 0


def cmd_predict(args) -> int:
    model = model_io.load_model(args.model)
    data = model_io.ingest(args.input, args.format)
    pred = build_predictor(model, k_neighbors=args.knn)
    points = list(ds.features for ds in data.views) if isinstance(data, ViewCollection) \
        else data.features
    labels = oos_predict(pred, points)
    _emit({"record": "predict", "n": int(labels.shape[0]), "knn": args.knn})
    truth = _labels_of(data)
    if truth is not None:
        scores = evaluate(truth, labels)
        _emit({"record": "metrics", "split": "holdout", **scores})
        _say(f"holdout metrics: acc={scores['acc']:.4f} nmi={scores['nmi']:.4f} "
             f"purity={scores['purity']:.4f}")
    if args.baseline_data:
        base = _baseline_1nn_train(model, args.baseline_data, points)
        _emit({"record": "baseline", "method": "1nn-train",
               "n": int(base.shape[0])})
        if truth is not None:
            scores = evaluate(truth, base)
            _emit({"record": "metrics", "split": "holdout-baseline", **scores})
            _say(f"1nn-train baseline: acc={scores['acc']:.4f} "
                 f"nmi={scores['nmi']:.4f} purity={scores['purity']:.4f}")
    if args.out:
        np.savetxt(args.out, labels, fmt="%d")
        _say(f"labels written to {args.out}")
    else:
        for v in labels:
            print(int(v))
    return 0


def _baseline_1nn_train(model, train_path, points) -> np.ndarray:
    """Comparison path: 1NN over all in-sample points (not the anchors).

    The training CSV must be the fit's input in its original row order; each
    new point takes the model label of its nearest training sample.
    """
    if isinstance(points, list):
        raise ValueError("the 1nn-train baseline supports single-view data only")
    train = model_io.load_dense_csv(train_path)
    if train.n != model.n:
        raise ValueError(
            f"baseline data has {train.n} rows but the model was fit on {model.n}"
        )
    tx = train.features.data
    px = points.data
    if px.shape[1] != tx.shape[1]:
        raise ValueError(
            f"baseline data has {tx.shape[1]} features, new points have {px.shape[1]}"
        )
    d2 = (
        np.sum(px * px, axis=1)[:, None]
        - 2.0 * px @ tx.T
        + np.sum(tx * tx, axis=1)[None, :]
    )
    return model.sample_labels[np.argmin(d2, axis=1)]


def _read_label_column(path) -> np.ndarray:
    arr = model_io._parse_numeric_csv(path)
    if arr.shape[1] != 1:
        raise model_io.ParseError(f"{path}: expected a single label column")
    col = arr[:, 0]
    if not np.all(col == np.round(col)):
        raise model_io.ParseError(f"{path}: labels must be integers")
    return col.astype(np.int64)


def cmd_eval(args) -> int:
    true_labels = _read_label_column(args.true)
    pred_labels = _read_label_column(args.pred)
    scores = evaluate(true_labels, pred_labels)
    _emit({"record": "metrics", "split": "eval", **scores})
    _say(f"acc={scores['acc']:.4f} nmi={scores['nmi']:.4f} purity={scores['purity']:.4f}")
    return 0


def _parse_grid(text: str, cast, flag: str):
    try:
        values = [cast(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise ValueError(f"{flag}: could not parse {text!r} as a comma-separated list")
    if not values:
        raise ValueError(f"{flag}: empty grid")
    return values


def cmd_sweep(args) -> int:
    data = model_io.ingest(args.input, args.format)
    if _labels_of(data) is None:
        raise ValueError("sweep requires labeled input (labels drive the metrics)")
    labels = _labels_of(data)
    m_grid = _parse_grid(args.m_grid, int, "--m-grid")
    alpha_grid = _parse_grid(args.alpha_grid, float, "--alpha-grid")
    beta_grid = _parse_grid(args.beta_grid, float, "--beta-grid")
    rows = []
    for m in m_grid:
        for alpha in alpha_grid:
            for beta in beta_grid:
                for rep in range(args.repeats):
                    seed = args.seed + rep
                    config = SolverConfig(
                        k=args.k, m=m, alpha=alpha, beta=beta, gamma=args.gamma,
                        tol=args.tol, max_iter=args.max_iter, seed=seed,
                    )
                    start = time.perf_counter()
                    model = (fit_multi_view(data, config)
                             if isinstance(data, ViewCollection)
                             else fit_single_view(data, config))
                    secs = time.perf_counter() - start
                    scores = evaluate(labels, model.sample_labels)
                    row = {
                        "m": m, "alpha": alpha, "beta": beta,
                        "repeat": rep, "seed": seed,
                        "acc": scores["acc"], "nmi": scores["nmi"],
                        "purity": scores["purity"],
                        "iterations": len(model.objective_trace),
                        "seconds": secs,
                    }
                    rows.append(row)
                    _emit({"record": "sweep-run", **row})
    by_config = {}
    for row in rows:
        key = (row["m"], row["alpha"], row["beta"])
        by_config.setdefault(key, []).append(row)
    for key in by_config:
        group = by_config[key]
        summary = {"record": "sweep-summary",
                   "m": key[0], "alpha": key[1], "beta": key[2],
                   "repeats": len(group)}
        for metric in ("acc", "nmi", "purity"):
            vals = np.array([g[metric] for g in group])
            summary[f"mean_{metric}"] = float(vals.mean())
            summary[f"std_{metric}"] = float(vals.std())
        _emit(summary)
    mean_acc = {k: float(np.mean([g["acc"] for g in v])) for k, v in by_config.items()}
    best_key = max(by_config, key=lambda kk: (mean_acc[kk], kk))
    _emit({
        "record": "sweep-best",
        "m": best_key[0], "alpha": best_key[1], "beta": best_key[2],
        "mean_acc": mean_acc[best_key],
        "repeats": args.repeats,
    })
    if args.out:
        cols = ["m", "alpha", "beta", "repeat", "seed", "acc", "nmi",
                "purity", "iterations", "seconds"]
        with open(args.out, "w") as fh:
            fh.write(",".join(cols) + "\n")
            for row in rows:
                fh.write(",".join(repr(row[c]) if isinstance(row[c], float)
                                  else str(row[c]) for c in cols) + "\n")
        _say(f"sweep table written to {args.out}")
    _say(f"best config by mean acc: m={best_key[0]} alpha={best_key[1]} "
         f"beta={best_key[2]} (mean acc {mean_acc[best_key]:.4f})")
    return 0


def cmd_bench(args) -> int:
    n_grid = _parse_grid(args.n_grid, int, "--n-grid")
    if sorted(n_grid) != n_grid:
        raise ValueError("--n-grid must be ascending")

    def run(n: int) -> float:
        data = gaussian_blobs(n, args.d, args.k, separation=10.0, seed=args.seed)
        config = SolverConfig(
            k=args.k, m=args.m, alpha=args.alpha, beta=args.beta,
            tol=BENCH_EPS_TOL, max_iter=args.iters, seed=args.seed,
        )
        start = time.perf_counter()
        fit_single_view(data, config)
        return time.perf_counter() - start

    warm_n = max(args.k, args.m, min(500, n_grid[0]))
    run(warm_n)  # warm-up: page in BLAS threads and code paths, untimed
    results = []
    for n in n_grid:
        secs = run(n)
        results.append((n, secs))
        _emit({"record": "bench", "n": n, "iterations": args.iters, "seconds": secs,
               "seconds_per_iteration": secs / args.iters})
        _say(f"n={n}: {secs:.3f}s for {args.iters} iterations")
    for (n0, s0), (n1, s1) in zip(results, results[1:]):
        ratio = s1 / s0 if s0 > 0 else float("inf")
        _emit({"record": "bench-ratio", "n_from": n0, "n_to": n1, "ratio": ratio})
        _say(f"scaling {n0} -> {n1}: x{ratio:.2f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="anchorclust",
        description="Anchor-graph subspace clustering: fit, predict, eval, sweep, bench.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit a clustering model")
    p_fit.add_argument("--input", required=True, help="input data file")
    p_fit.add_argument("--format", choices=model_io.INGEST_FORMATS, default="dense-csv")
    p_fit.add_argument("--multiview", action="store_true",
                       help="treat --input as a multi-view manifest")
    _add_config_flags(p_fit)
    p_fit.add_argument("--out", help="directory for the model archive")
    p_fit.add_argument("--labels-out", help="write sample labels to this CSV")
    p_fit.set_defaults(func=cmd_fit)

    p_pred = sub.add_parser("predict", help="label new points with a fitted model")
    p_pred.add_argument("--model", required=True, help="model archive directory")
    p_pred.add_argument("--input", required=True, help="new points file")
    p_pred.add_argument("--format", choices=model_io.INGEST_FORMATS, default="dense-csv")
    p_pred.add_argument("--knn", type=int, default=1, choices=(1, 3),
                        help="anchors voting per point")
    p_pred.add_argument("--baseline-data",
                        help="training CSV for the 1NN-over-in-sample comparison")
    p_pred.add_argument("--out", help="write predicted labels to this CSV")
    p_pred.set_defaults(func=cmd_predict)

    p_eval = sub.add_parser("eval", help="score predicted labels against truth")
    p_eval.add_argument("--true", required=True, help="single-column CSV of true labels")
    p_eval.add_argument("--pred", required=True, help="single-column CSV of predicted labels")
    p_eval.set_defaults(func=cmd_eval)

    p_sweep = sub.add_parser("sweep", help="grid-search alpha/beta/m with repeats")
    p_sweep.add_argument("--input", required=True)
    p_sweep.add_argument("--format", choices=model_io.INGEST_FORMATS, default="labeled-csv")
    p_sweep.add_argument("--k", type=int, required=True)
    p_sweep.add_argument("--m-grid", required=True, help="comma-separated anchor counts")
    p_sweep.add_argument("--alpha-grid", required=True, help="comma-separated alphas")
    p_sweep.add_argument("--beta-grid", required=True, help="comma-separated betas")
    p_sweep.add_argument("--gamma", type=float, default=-1.0)
    p_sweep.add_argument("--tol", type=float, default=1e-6)
    p_sweep.add_argument("--max-iter", type=int, default=50)
    p_sweep.add_argument("--repeats", type=int, default=1)
    p_sweep.add_argument("--seed", type=int, default=0)
    p_sweep.add_argument("--out", help="write the full result table to this CSV")
    p_sweep.set_defaults(func=cmd_sweep)

    p_bench = sub.add_parser("bench", help="timing on synthetic data of growing n")
    p_bench.add_argument("--n-grid", required=True, help="ascending sample counts")
    p_bench.add_argument("--d", type=int, default=10)
    p_bench.add_argument("--k", type=int, default=3)
    p_bench.add_argument("--m", type=int, default=50)
    p_bench.add_argument("--iters", type=int, default=5,
                         help="fixed outer iterations per run")
    p_bench.add_argument("--alpha", type=float, default=1.0)
    p_bench.add_argument("--beta", type=float, default=1.0)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.set_defaults(func=cmd_bench)

    for p in (p_fit, p_pred, p_eval, p_sweep, p_bench):
        p.add_argument("--threads", type=int, default=None,
                       help="cap BLAS threads (results are identical at any cap)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.threads is not None:
            if args.threads < 1:
                raise ValueError("--threads must be >= 1")
            with threadpool_limits(limits=args.threads):
                return args.func(args)
        return args.func(args)
    except (ValueError, RuntimeError, OSError) as e:
        _say(f"error: {e}")
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
