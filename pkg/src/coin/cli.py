"""Command line entry point: detect, interpret, generate, evaluate.

Exit codes: 0 success, 2 input error, 3 config error, 4 runtime failure.
Machine output goes to files, a short human summary to stdout.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time

import numpy as np

from .config import Config, load_config
from .data import load_dataset, read_id_file, save_dataset, write_id_file
from .detection import detect_knn_distance
from .engine import PriorKnowledge, interpret_all
from .exceptions import CoinError, ConfigError, DataError
from .experiments import (
    SyntheticSpec,
    attribute_prf,
    cal_faithfulness,
    cal_ranking,
    coin_faithfulness,
    coin_ranking,
    envelope_violations,
    generate_synthetic,
    load_truth,
    run_beta_sweep,
    save_truth,
    summarize_sweep,
    trend_ok,
)
from .report import build_report, load_report, predictions_from_report, write_report

EXIT_OK, EXIT_INPUT, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3, 4

log = logging.getLogger("coin")


class InputError(Exception):
    """Bad or missing input file; maps to exit code 2."""


def _config(args) -> Config:
    config = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        config = config.replace(master_seed=args.seed)
    return config


def _threads(args) -> int:
    return args.threads if args.threads else (os.cpu_count() or 1)


def _write_json(obj, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(obj, indent=2, allow_nan=False) + "\n")


# --- commands ----------------------------------------------------------------

def cmd_detect(args) -> int:
    dataset = load_dataset(args.data)
    try:
        result = detect_knn_distance(dataset, args.k, args.fraction)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    write_id_file(result.outlier_ids, args.out)
    print(f"flagged {len(result.outlier_ids)} of {dataset.n} instances -> {args.out}")
    return EXIT_OK


def cmd_interpret(args) -> int:
    config = _config(args)
    dataset = load_dataset(args.data)
    outliers = read_id_file(args.outliers, dataset)
    try:
        prior = PriorKnowledge.from_config(config, dataset.m)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    start = time.perf_counter()
    results = interpret_all(dataset, outliers, prior, config, config.master_seed, threads=_threads(args))
    elapsed = time.perf_counter() - start
    timings = {"interpret_seconds": elapsed} if args.timings else None
    report = build_report(results, config, config.master_seed, args.data, args.outliers, timings)
    write_report(report, args.out)
    failed = sum("failed" in r.flags for r in results)
    print(f"interpreted {len(results)} outliers ({failed} failed) in {elapsed:.2f} s -> {args.out}")
    for r in results:
        names = ", ".join(name for _, name, _ in r.abnormal_attributes) or "-"
        print(f"  {r.outlier_id}: d={r.outlierness:.3f} attributes=[{names}]"
              + (f" flags={','.join(r.flags)}" if r.flags else ""))
    if results and failed == len(results):
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_generate(args) -> int:
    spec = SyntheticSpec(args.spec, seed=args.seed)
    dataset, truth = generate_synthetic(spec)
    problems = envelope_violations(dataset, truth)
    if problems:
        raise CoinError(f"generator produced {len(problems)} envelope violations: {problems[0]}")
    save_dataset(dataset, args.out_data)
    save_truth(truth, args.out_truth)
    print(f"{spec.variant}: {dataset.n} x {dataset.m} -> {args.out_data}, truth for "
          f"{len(truth.planted)} outliers -> {args.out_truth}")
    return EXIT_OK


def _evaluate_faithfulness(args, dataset, truth, config):
    if args.predictions:
        try:
            report = load_report(args.predictions)
            predicted = predictions_from_report(report, dataset)
        except (OSError, ValueError, KeyError) as exc:
            raise InputError(f"cannot read predictions {args.predictions}: {exc}") from exc
        predicted = {oid: predicted.get(oid, set()) for oid in truth.planted}
        p, r, f = attribute_prf(predicted, truth.planted)
        source = str(args.predictions)
    else:
        (p, r, f), _ = coin_faithfulness(dataset, truth, config, threads=_threads(args))
        source = "coin"
    print(f"faithfulness ({source}): precision={p:.4f} recall={r:.4f} f1={f:.4f}")
    _write_json({"mode": "faithfulness", "source": source, "precision": p, "recall": r, "f1": f,
                 "config": config.to_dict()}, args.out)


def _evaluate_ranking(args, dataset, truth, config):
    rows = []
    for s in range(args.repeats):
        auc, _, _ = coin_ranking(dataset, truth, config, seed=s, threads=_threads(args))
        rows.append({"seed": s, "auc": auc})
        print(f"  seed {s}: auc={auc:.4f}")
    mean = float(np.mean([r["auc"] for r in rows]))
    print(f"ranking: mean auc={mean:.4f} over {len(rows)} seeds")
    _write_json({"mode": "ranking", "per_seed": rows, "auc_mean": mean, "config": config.to_dict()}, args.out)


def _evaluate_beta_sweep(args, dataset, truth, config):
    per_seed, removed = run_beta_sweep(dataset, truth, tuple(args.betas), config, range(args.repeats),
                                       threads=_threads(args))
    summary = summarize_sweep(per_seed)
    ok = [trend_ok([a for _, a in run]) for run in per_seed]
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["beta", "auc_mean", "auc_q25", "auc_q75"])
        for b, mean, q25, q75 in summary:
            writer.writerow([repr(b), repr(mean), repr(q25), repr(q75)])
        fh.write(f"# trend non-increasing (<=1 inversion of <=0.02) per seed: "
                 f"{' '.join('ok' if x else 'VIOLATED' for x in ok)}\n")
        fh.write(f"# block-removed auc per seed: {' '.join(repr(r) for r in removed)}\n")
    for b, mean, q25, q75 in summary:
        print(f"  beta={b:g}: auc={mean:.4f} [{q25:.4f}, {q75:.4f}]")
    print(f"trend ok on {sum(ok)}/{len(ok)} seeds -> {args.out}")


def _evaluate_cal_compare(args, dataset, truth, config):
    (p, r, f), _ = coin_faithfulness(dataset, truth, config, threads=_threads(args))
    cp, cr, cf = cal_faithfulness(dataset, truth, config)
    coin_auc, _, _ = coin_ranking(dataset, truth, config, seed=0, threads=_threads(args))
    cal_auc = cal_ranking(dataset, truth, config, seed=0)
    out = {
        "mode": "cal-compare",
        "coin": {"precision": p, "recall": r, "f1": f, "auc": coin_auc},
        "cal": {"precision": cp, "recall": cr, "f1": cf, "auc": cal_auc},
        "config": config.to_dict(),
    }
    print(f"coin: P={p:.4f} R={r:.4f} F1={f:.4f} AUC={coin_auc:.4f}")
    print(f"cal:  P={cp:.4f} R={cr:.4f} F1={cf:.4f} AUC={cal_auc:.4f}")
    _write_json(out, args.out)


EVALUATORS = {
    "faithfulness": _evaluate_faithfulness,
    "ranking": _evaluate_ranking,
    "beta-sweep": _evaluate_beta_sweep,
    "cal-compare": _evaluate_cal_compare,
}


def cmd_evaluate(args) -> int:
    config = _config(args)
    dataset = load_dataset(args.data)
    try:
        truth = load_truth(args.truth, dataset)
    except OSError as exc:
        raise InputError(f"cannot read truth file {args.truth}: {exc}") from exc
    except ValueError as exc:
        raise InputError(f"truth file {args.truth} is malformed: {exc}") from exc
    EVALUATORS[args.mode](args, dataset, truth, config)
    return EXIT_OK


# --- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coin", description="Contextual outlier interpretation")
    parser.add_argument("-v", "--verbose", action="store_true", help="log per-outlier warnings to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="flag outliers by k-NN distance")
    p.add_argument("--data", required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--fraction", type=float, default=0.05)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("interpret", help="interpret listed outliers")
    p.add_argument("--data", required=True)
    p.add_argument("--outliers", required=True, help="file with one outlier id per line")
    p.add_argument("--config", help="JSON config; COIN_SEED and --seed override master_seed")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int, help="worker threads (default: CPU count)")
    p.add_argument("--timings", action="store_true", help="record wall-clock timings in the report")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_interpret)

    p = sub.add_parser("generate", help="write a synthetic benchmark and its ground truth")
    p.add_argument("--spec", required=True, type=str.lower, choices=["syn1", "syn2"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-data", required=True)
    p.add_argument("--out-truth", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("evaluate", help="run an evaluation protocol against ground truth")
    p.add_argument("--mode", required=True, choices=sorted(EVALUATORS))
    p.add_argument("--data", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--predictions", help="faithfulness only: score an existing report instead of running")
    p.add_argument("--repeats", type=int, default=5, help="ranking and beta-sweep: number of seeds")
    p.add_argument("--betas", type=float, nargs="+", default=[0, 0.5, 1, 1.5, 2])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, InputError, FileNotFoundError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (CoinError, ValueError, ArithmeticError) as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
