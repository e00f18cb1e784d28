"""Experiment harness: multi-trial training runs, lambda search, tables.

One experiment trains a model for several trials on a single dataset split
(shared across trials and regularization modes so comparisons are paired),
scores validation and test edges, and reports each metric as per-trial
values plus mean and standard error, in percent.  Results land in a CSV and
an aligned text table.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, replace

import numpy as np

from .ctm import build_ctm_table, load_ctm_table, save_ctm_table
from .data import parse_edge_list, split, to_graph_data
from .errors import BdmRegError
from .linkpred import TrainConfig, train
from .regularizer import RegConfig

_METRICS = ("val_auc", "val_ap", "test_auc", "test_ap")


@dataclass
class ExperimentConfig:
    """Settings for one experiment (one dataset, model, and reg mode)."""

    dataset: str
    model: str = "gae"
    reg_mode: str = "none"
    lam: float = 0.0
    lambda_scale: float = 1.0
    trials: int = 10
    epochs: int = 1000
    m: int = 1
    block_size: int = 4
    ctm_table: str | None = None
    split_seed: int = 0
    trial_seed_base: int = 0
    out: str | None = None
    learning_rate: float = 0.01


@dataclass
class ResultRow:
    """Aggregate of one metric over an experiment's trials, in percent."""

    dataset: str
    model: str
    reg_mode: str
    metric: str
    values: list
    mean: float
    se: float


def _aggregate(values) -> tuple[float, float]:
    arr = np.asarray(values, dtype=np.float64)
    mean = float(arr.mean())
    if arr.size < 2:
        return mean, 0.0
    return mean, float(arr.std(ddof=1) / math.sqrt(arr.size))


def _load_table(cfg: ExperimentConfig):
    if cfg.reg_mode in ("kol", "cw"):
        if cfg.ctm_table is None:
            raise ValueError(
                f"reg mode {cfg.reg_mode!r} needs --ctm-table "
                "(cw derives its constant from the table average)"
            )
        return load_ctm_table(cfg.ctm_table)
    if cfg.ctm_table is not None:
        return load_ctm_table(cfg.ctm_table)
    return None


def _run_trials(cfg: ExperimentConfig, split_data, table):
    """Per-trial results; dict of metric -> list of percent values."""
    data = to_graph_data(split_data)
    cw = table.average() if cfg.reg_mode == "cw" else None
    lam = cfg.lam * cfg.lambda_scale if cfg.reg_mode != "none" else 0.0
    reg = RegConfig(lam=lam, m=cfg.m, mode=cfg.reg_mode, cw_constant=cw)
    collected = {metric: [] for metric in _METRICS}
    for trial in range(cfg.trials):
        train_cfg = TrainConfig(
            model=cfg.model, epochs=cfg.epochs, trials=cfg.trials,
            learning_rate=cfg.learning_rate, reg=reg,
            block_size=cfg.block_size, seed=cfg.trial_seed_base + trial,
        )
        result = train(data, train_cfg, split_data, table)
        collected["val_auc"].append(100.0 * result.val_auc)
        collected["val_ap"].append(100.0 * result.val_ap)
        collected["test_auc"].append(100.0 * result.test_auc)
        collected["test_ap"].append(100.0 * result.test_ap)
    return collected


def run_experiment(cfg: ExperimentConfig):
    """Run all trials and aggregate; writes the CSV when cfg.out is set.

    Returns one ResultRow per metric (validation and test, AUC and AP).
    The split depends only on the dataset and split seed, so runs that vary
    the model or reg mode compare on identical data.
    """
    edge_list = parse_edge_list(cfg.dataset)
    split_data = split(edge_list, cfg.split_seed)
    table = _load_table(cfg)
    collected = _run_trials(cfg, split_data, table)
    rows = []
    for metric in _METRICS:
        mean, se = _aggregate(collected[metric])
        rows.append(ResultRow(
            dataset=cfg.dataset, model=cfg.model, reg_mode=cfg.reg_mode,
            metric=metric, values=collected[metric], mean=mean, se=se,
        ))
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(emit_table(rows)[1])
    return rows


def lambda_search(cfg: ExperimentConfig, direction_factor: float = 2.0,
                  max_rounds: int = 8, objective=None) -> float:
    """Proportional-increment search for the regularization strength.

    Starts at 1/N^2 (N = node count) and repeatedly moves to a neighboring
    lambda (current times or divided by ``direction_factor``) while the best
    neighbor improves mean validation AUC by more than one pooled standard
    error.  ``objective`` maps lambda to (mean, se) and defaults to running
    the experiment's trials at that lambda.
    """
    if direction_factor <= 1:
        raise ValueError("direction factor must be > 1")
    if max_rounds < 1:
        raise ValueError("max_rounds must be >= 1")

    if objective is None:
        edge_list = parse_edge_list(cfg.dataset)
        split_data = split(edge_list, cfg.split_seed)
        table = _load_table(cfg)
        n = edge_list.node_count

        def objective(lam):
            collected = _run_trials(replace(cfg, lam=lam), split_data, table)
            return _aggregate(collected["val_auc"])
    else:
        n = parse_edge_list(cfg.dataset).node_count

    cache: dict = {}

    def evaluate(lam):
        if lam not in cache:
            cache[lam] = objective(lam)
        return cache[lam]

    current = 1.0 / n**2
    for _ in range(max_rounds):
        mean_cur, se_cur = evaluate(current)
        neighbors = [current * direction_factor, current / direction_factor]
        means = [evaluate(lam)[0] for lam in neighbors]
        best = int(np.argmax(means))
        mean_best, se_best = evaluate(neighbors[best])
        pooled = math.sqrt(se_cur**2 + se_best**2)
        if mean_best - mean_cur > pooled:
            current = neighbors[best]
        else:
            break
    return current


def emit_table(rows) -> tuple[str, str]:
    """Render rows as an aligned text table and a CSV string.

    The text table shows ``mean +- se`` to two decimals; the CSV carries one
    line per trial (trial and value filled) plus one aggregate line per
    metric (mean and se filled), all values full precision.
    """
    headers = ["dataset", "model", "reg", "metric", "mean ± se"]
    cells = [
        [row.dataset, row.model, row.reg_mode, row.metric,
         f"{row.mean:.2f} ± {row.se:.2f}"]
        for row in rows
    ]
    widths = [
        max(len(h), *(len(c[k]) for c in cells)) if cells else len(h)
        for k, h in enumerate(headers)
    ]
    lines = [
        "  ".join(h.ljust(widths[k]) for k, h in enumerate(headers)).rstrip()
    ]
    for c in cells:
        lines.append(
            "  ".join(val.ljust(widths[k]) for k, val in enumerate(c)).rstrip()
        )
    text = "\n".join(lines) + "\n"

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["dataset", "model", "reg_mode", "metric", "trial", "value",
         "mean", "se"]
    )
    for row in rows:
        for trial, value in enumerate(row.values):
            writer.writerow([
                row.dataset, row.model, row.reg_mode, row.metric,
                trial, repr(float(value)), "", "",
            ])
        writer.writerow([
            row.dataset, row.model, row.reg_mode, row.metric,
            "", "", repr(float(row.mean)), repr(float(row.se)),
        ])
    return text, buf.getvalue()


# ---------------------------------------------------------------------------
# Command line


_CONFIG_KEYS = {
    "dataset": str, "model": str, "reg": str, "lambda": float,
    "lambda_scale": float, "trials": int, "epochs": int, "m": int,
    "block_size": int, "ctm_table": str, "split_seed": int, "seed": int,
    "out": str, "learning_rate": float,
}


def _experiment_config(args) -> ExperimentConfig:
    """Merge CLI flags over JSON config over defaults."""
    merged: dict = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            loaded = json.load(fh)
        unknown = set(loaded) - set(_CONFIG_KEYS)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        merged.update(loaded)
    for key in _CONFIG_KEYS:
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            merged[key] = flag_value
    if "dataset" not in merged:
        raise ValueError("a dataset path is required (--dataset or config)")
    return ExperimentConfig(
        dataset=merged["dataset"],
        model=merged.get("model", "gae"),
        reg_mode=merged.get("reg", "none"),
        lam=float(merged.get("lambda", 0.0)),
        lambda_scale=float(merged.get("lambda_scale", 1.0)),
        trials=int(merged.get("trials", 10)),
        epochs=int(merged.get("epochs", 1000)),
        m=int(merged.get("m", 1)),
        block_size=int(merged.get("block_size", 4)),
        ctm_table=merged.get("ctm_table"),
        split_seed=int(merged.get("split_seed", 0)),
        trial_seed_base=int(merged.get("seed", 0)),
        out=merged.get("out"),
        learning_rate=float(merged.get("learning_rate", 0.01)),
    )


def _add_experiment_flags(parser):
    parser.add_argument("--dataset", help="edge list file")
    parser.add_argument("--model", choices=["gae", "vgae"])
    parser.add_argument("--reg", choices=["none", "kol", "cw"],
                        help="regularization mode")
    parser.add_argument("--lambda", dest="lambda", type=float,
                        help="regularization strength")
    parser.add_argument("--lambda-scale", dest="lambda_scale", type=float,
                        help="multiplier applied to --lambda")
    parser.add_argument("--trials", type=int)
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--m", type=int, help="gradient samples per epoch")
    parser.add_argument("--block-size", dest="block_size", type=int)
    parser.add_argument("--ctm-table", dest="ctm_table",
                        help="complexity table file")
    parser.add_argument("--split-seed", dest="split_seed", type=int)
    parser.add_argument("--seed", type=int, help="trial seed base")
    parser.add_argument("--out", help="CSV output path")
    parser.add_argument("--learning-rate", dest="learning_rate", type=float)
    parser.add_argument("--config", help="JSON config file (flags override)")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="bdmreg",
        description="Complexity-regularized link prediction experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="train and evaluate one experiment")
    _add_experiment_flags(run_p)

    search_p = sub.add_parser(
        "search-lambda", help="search the regularization strength"
    )
    _add_experiment_flags(search_p)
    search_p.add_argument("--factor", type=float, default=2.0)
    search_p.add_argument("--max-rounds", dest="max_rounds", type=int,
                          default=8)

    build_p = sub.add_parser(
        "build-ctm", help="enumerate a machine class and save its table"
    )
    build_p.add_argument("--n", type=int, required=True,
                         help="number of machine states")
    build_p.add_argument("--dimension", type=int, choices=[1, 2], default=1)
    build_p.add_argument("--step-limit", dest="step_limit", type=int)
    build_p.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            cfg = _experiment_config(args)
            rows = run_experiment(cfg)
            sys.stdout.write(emit_table(rows)[0])
        elif args.command == "search-lambda":
            cfg = _experiment_config(args)
            lam = lambda_search(cfg, direction_factor=args.factor,
                                max_rounds=args.max_rounds)
            sys.stdout.write(f"lambda {lam:.6g}\n")
        else:
            table = build_ctm_table(args.n, args.step_limit, args.dimension)
            save_ctm_table(table, args.out)
            sys.stdout.write(
                f"wrote {len(table)} entries to {args.out}\n"
            )
    except (BdmRegError, ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
