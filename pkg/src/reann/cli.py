"""Command-line interface.

Verbs:
  run       full pipeline from a config (or a bundled dataset name)
  train     phases 1-2 only, writes a network checkpoint and epoch log
  extract   phases 3-4 from a checkpoint, writes a rule file
  evaluate  a rule file against a dataset
  report    render a stored report

Exit codes: 0 success, 1 usage/config error, 2 pipeline-stage failure,
3 accuracy check failed in `evaluate`.
"""
from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from .clusterer import ClusteringFailed, discretize_network
from .dataset import DatasetError, discretize_inputs
from .network import Network, NetworkError, accuracy
from .pipeline import (ExperimentConfig, PipelineError, extract_rule_set,
                       prepare_data, render_report, rule_generalization_loop,
                       run_reann, run_single, serialize_report)
from .rex import RuleSet, evaluate_rules
from .trainer import constructive_train, prune
from .network import NetworkConfig


def _config_from_args(args) -> ExperimentConfig:
    if args.config:
        cfg = ExperimentConfig.load(args.config)
    elif args.dataset:
        cfg = ExperimentConfig(dataset=args.dataset)
    else:
        raise ValueError("either --config or --dataset is required")
    if args.dataset:
        cfg.dataset = args.dataset
    if args.seed is not None:
        cfg.base_seed = args.seed
        cfg.seeds = None
    if args.runs is not None:
        cfg.runs = args.runs
        cfg.seeds = None
    return cfg


def _write(path, text):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_run(args) -> int:
    cfg = _config_from_args(args)
    t0 = time.monotonic()
    report = run_reann(cfg)
    print(f"pipeline finished in {time.monotonic() - t0:.1f}s", file=sys.stderr)
    if args.format == "structured":
        _write(args.out, serialize_report(report))
    else:
        _write(args.out, render_report(report, "text"))
    return 0


def cmd_train(args) -> int:
    cfg = _config_from_args(args)
    train, test, schema = prepare_data(cfg)
    seed = cfg.run_seeds()[0]
    x, y = train.normalized_matrix, train.class_indices
    net_cfg = NetworkConfig(
        input_count=schema.attribute_count, hidden_count=1,
        output_count=schema.class_count, learning_rate=cfg.learning_rate,
        weight_init_range=tuple(cfg.weight_init_range),
        weight_decay=cfg.weight_decay, seed=seed)
    net, trace = constructive_train(net_cfg, cfg.constructive, x, y)
    net, trace = prune(net, cfg.prune, x, y, trace)
    out = args.out or f"{cfg.dataset}-seed{seed}.net.json"
    net.save(out)
    with open(out + ".epochs.txt", "w") as fh:
        for s in trace.epoch_log:
            fh.write(f"{s.epoch_index}\t{s.mean_squared_error:.6f}"
                     f"\t{s.training_accuracy:.6f}\n")
    print(f"checkpoint: {out}")
    print(f"epoch log: {out}.epochs.txt")
    print(f"training accuracy: {accuracy(net, x, y):.4f}")
    return 0


def cmd_extract(args) -> int:
    cfg = _config_from_args(args)
    train, test, schema = prepare_data(cfg)
    net = Network.load(args.checkpoint)
    x, y = train.normalized_matrix, train.class_indices
    required = cfg.clustering.required_accuracy
    if required is None:
        required = accuracy(net, x, y)
    dn = discretize_network(net, x, y, required,
                            schedule=cfg.clustering.schedule(),
                            constant_tolerance=cfg.clustering.constant_tolerance)
    view = discretize_inputs(train, cfg.rex.bins_per_attribute)
    rs, table, _ = extract_rule_set(net, dn, train, view, cfg.rex)
    rs = rule_generalization_loop(rs, table, cfg.rex)
    _write(args.out, json.dumps(rs.to_dict(), sort_keys=True, indent=1))
    return 0


def cmd_evaluate(args) -> int:
    cfg = _config_from_args(args)
    train, test, schema = prepare_data(cfg)
    with open(args.rules) as fh:
        rs = RuleSet.from_dict(json.load(fh))
    view = discretize_inputs(train, cfg.rex.bins_per_attribute)
    metrics = evaluate_rules(rs, view.codes, train.class_indices,
                             view.code_pattern(test, schema), test.class_indices)
    print(json.dumps(metrics.to_dict(), sort_keys=True, indent=1))
    if args.min_accuracy is not None and metrics.accuracy_test < args.min_accuracy:
        print(f"accuracy check failed: {metrics.accuracy_test:.4f} < "
              f"{args.min_accuracy}", file=sys.stderr)
        return 3
    return 0


def cmd_report(args) -> int:
    with open(args.report) as fh:
        report = json.load(fh)
    _write(args.out, render_report(report, args.format))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="reann",
                                description="train, prune, cluster and "
                                            "extract symbolic rules")
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp, dataset=True):
        if dataset:
            sp.add_argument("--dataset", help="bundled dataset name or data file path")
            sp.add_argument("--config", help="experiment config file (JSON)")
            sp.add_argument("--seed", type=int)
            sp.add_argument("--runs", type=int)
        sp.add_argument("--out", help="output path (default: stdout)")

    sp = sub.add_parser("run", help="full pipeline")
    common(sp)
    sp.add_argument("--format", choices=("text", "structured"), default="text")
    sp.set_defaults(fn=cmd_run)

    sp = sub.add_parser("train", help="phases 1-2, write checkpoint")
    common(sp)
    sp.set_defaults(fn=cmd_train)

    sp = sub.add_parser("extract", help="phases 3-4 from a checkpoint")
    common(sp)
    sp.add_argument("--checkpoint", required=True)
    sp.set_defaults(fn=cmd_extract)

    sp = sub.add_parser("evaluate", help="rules file vs dataset")
    common(sp)
    sp.add_argument("--rules", required=True)
    sp.add_argument("--min-accuracy", type=float, default=None)
    sp.set_defaults(fn=cmd_evaluate)

    sp = sub.add_parser("report", help="render a stored report")
    common(sp, dataset=False)
    sp.add_argument("--report", required=True)
    sp.add_argument("--format", choices=("text", "structured"), default="text")
    sp.set_defaults(fn=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (DatasetError, NetworkError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ClusteringFailed, PipelineError, RuntimeError) as exc:
        print(f"pipeline failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
