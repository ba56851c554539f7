"""Command-line front end: generate -> label -> featurize -> train -> evaluate
-> schedule -> report.

Every subcommand prints the configuration it resolved, seeds all randomness
from --seed, and writes outputs atomically. Exit codes: 0 success, 1 usage
error, 2 data/schema error, 3 internal failure.
"""

import argparse
import os
import sys
from dataclasses import replace

from ._util import GnnflowError, write_text_atomic
from . import features as feat_mod
from . import gbm, oracle, scheduler, selector, synth
from .graphs import load_edge_list, save_edge_list

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _echo_config(name: str, **kv):
    pairs = " ".join(f"{k}={v}" for k, v in kv.items())
    print(f"[gnnflow {name}] {pairs}")


def _read_text(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _load_accel(path) -> oracle.AcceleratorParams:
    if path is None:
        return oracle.AcceleratorParams()
    return oracle.read_accel_config(_read_text(path))


def _load_graph_dir(path: str) -> list:
    if not os.path.isdir(path):
        raise GnnflowError(f"graph directory not found: {path}")
    names = sorted(n for n in os.listdir(path) if n.endswith(".txt"))
    if not names:
        raise GnnflowError(f"no .txt graph files in {path}")
    graphs = []
    for name in names:
        with open(os.path.join(path, name), "rb") as fh:
            graphs.append((name[:-4], load_edge_list(fh)))
    return graphs


def _parse_split(text: str) -> gbm.SplitSpec:
    parts = text.split(",")
    if len(parts) != 3:
        raise ValueError("--split expects three comma-separated fractions")
    a, b, c = (float(x) for x in parts)
    return gbm.SplitSpec(train_frac=a, val_frac=b, test_frac=c)


def _bank_out_path(out: str) -> str:
    if out.endswith("/") or os.path.isdir(out):
        return os.path.join(out, "bank.json")
    return out


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _cmd_gen_graphs(args) -> int:
    weights = tuple(float(x) for x in args.mix.split(","))
    spec = synth.SyntheticSpec(
        count=args.count,
        node_range=(args.nodes_min, args.nodes_max),
        weights=weights,
        seed=args.seed,
    )
    _echo_config("gen-graphs", count=spec.count, nodes=f"{args.nodes_min}..{args.nodes_max}",
                 mix=args.mix, seed=args.seed, out=args.out)
    graphs = synth.generate_synthetic(spec)
    width = max(4, len(str(max(spec.count - 1, 0))))
    os.makedirs(args.out, exist_ok=True)
    manifest = ["graph_id,file,nodes,edges"]
    for i, g in enumerate(graphs):
        gid = f"g{i:0{width}d}"
        fname = f"{gid}.txt"
        write_text_atomic(os.path.join(args.out, fname), save_edge_list(g))
        manifest.append(f"{gid},{fname},{g.node_count},{g.edge_count}")
    write_text_atomic(os.path.join(args.out, "graphs.csv"), "\n".join(manifest) + "\n")
    print(f"wrote {len(graphs)} graphs to {args.out}")
    return EXIT_OK


def _cmd_label(args) -> int:
    accel = _load_accel(args.accel)
    dims = oracle.WorkloadDims(input_features=args.f_dim, output_features=args.g_dim)
    _echo_config("label", graphs=args.graphs, f_dim=args.f_dim, g_dim=args.g_dim,
                 pe_count=accel.pe_count, out=args.out)
    graphs = _load_graph_dir(args.graphs)
    records = oracle.label_dataset(graphs, dims, accel)
    write_text_atomic(args.out, oracle.labels_to_csv(records))
    print(f"wrote {len(records)} labels to {args.out}")
    return EXIT_OK


def _cmd_featurize(args) -> int:
    accel = _load_accel(args.accel)
    dims = oracle.WorkloadDims(input_features=args.f_dim, output_features=args.g_dim)
    _echo_config("featurize", graphs=args.graphs, variant=args.variant,
                 f_dim=args.f_dim, g_dim=args.g_dim, out=args.out)
    graphs = _load_graph_dir(args.graphs)
    table = feat_mod.build_feature_table(graphs, dims, accel, args.variant)
    write_text_atomic(args.out, feat_mod.features_to_csv(table))
    print(f"wrote {len(table.ids)} feature rows to {args.out}")
    return EXIT_OK


def _cmd_train(args) -> int:
    accel = _load_accel(args.accel)
    dims = oracle.WorkloadDims(input_features=args.f_dim, output_features=args.g_dim)
    params = gbm.TrainParams(
        tree_count=args.trees,
        learning_rate=args.learning_rate,
        max_depth=args.max_depth,
        min_leaf_samples=args.min_leaf,
        log_target=args.log,
        seed=args.seed,
    )
    split = replace(_parse_split(args.split), seed=args.seed)
    _echo_config("train", labels=args.labels, variant=args.variant, log=args.log,
                 trees=args.trees, lr=args.learning_rate, depth=args.max_depth,
                 min_leaf=args.min_leaf, split=args.split, seed=args.seed)
    labels = oracle.labels_from_csv(_read_text(args.labels))
    if args.features:
        table = feat_mod.features_from_csv(_read_text(args.features))
        if table.variant != args.variant:
            raise GnnflowError(
                f"feature file holds variant {table.variant!r}, requested {args.variant!r}"
            )
    else:
        if not args.graphs:
            raise _UsageError("train needs --features or --graphs")
        graphs = _load_graph_dir(args.graphs)
        table = feat_mod.build_feature_table(graphs, dims, accel, args.variant)
    bank, report = gbm.train_bank(table, labels, params, split)
    out = _bank_out_path(args.out)
    write_text_atomic(out, gbm.save_bank(bank))
    print(f"validation MAPE pooled: {report.pooled_mape:.3f}%")
    print(f"wrote model bank to {out}")
    return EXIT_OK


def _test_partition(graphs, split: gbm.SplitSpec):
    ids = sorted(gid for gid, _ in graphs)
    _, _, test_pos = gbm.split_dataset(len(ids), split)
    test_ids = {ids[i] for i in test_pos}
    return [(gid, g) for gid, g in graphs if gid in test_ids]


def _cmd_evaluate(args) -> int:
    accel = _load_accel(args.accel)
    dims = oracle.WorkloadDims(input_features=args.f_dim, output_features=args.g_dim)
    split = replace(_parse_split(args.split), seed=args.seed)
    bank_paths = args.banks.split(",")
    _echo_config("evaluate", banks=args.banks, graphs=args.graphs, labels=args.labels,
                 split=args.split, seed=args.seed, dataset=args.dataset_name, out=args.out)
    graphs = _load_graph_dir(args.graphs)
    labels = oracle.labels_from_csv(_read_text(args.labels))
    test_graphs = _test_partition(graphs, split)
    if not test_graphs:
        raise GnnflowError("test partition is empty; adjust --split")
    test_ids = {gid for gid, _ in test_graphs}
    test_labels = [r for r in labels if r.graph_id in test_ids]

    eval_rows = []
    ablation_rows = []
    for path in bank_paths:
        bank = gbm.load_bank(_read_text(path))
        report = selector.evaluate_bank(bank, test_graphs, test_labels, dims, accel)
        label = gbm.variant_label(bank.schema.variant, bank.models[0].log_target)
        eval_rows.append((args.dataset_name, report))
        ablation_rows.append((args.dataset_name, label, report))
        print(f"{path}: variant={label} MAPE={report.mape_percent:.3f}% "
              f"top1={report.top1_percent:.2f}% top3={report.top3_percent:.2f}%")
    write_text_atomic(args.out, selector.eval_to_csv(eval_rows))
    print(f"wrote evaluation to {args.out}")
    if args.ablation_out or len(bank_paths) > 1:
        ablation_path = args.ablation_out or os.path.splitext(args.out)[0] + "_ablation.csv"
        write_text_atomic(ablation_path, selector.ablation_to_csv(ablation_rows))
        print(f"wrote ablation to {ablation_path}")
    return EXIT_OK


def _scenario_cells(args, strategies):
    if args.tiling == "scenario1":
        cells = scheduler.scenario_one_cells()
    elif args.tiling == "scenario2":
        cells = scheduler.scenario_two_cells()
    else:
        return tuple((s, args.tiling) for s in strategies)
    if strategies != list(scheduler.STRATEGIES):
        cells = tuple(c for c in cells if c[0] in strategies)
    return cells


def _cmd_schedule(args) -> int:
    accel = _load_accel(args.accel)
    dims = oracle.WorkloadDims(input_features=args.f_dim, output_features=args.g_dim)
    strategies = list(scheduler.STRATEGIES) if args.strategy == "all" else args.strategy.split(",")
    for s in strategies:
        if s not in scheduler.STRATEGIES:
            raise _UsageError(f"unknown strategy {s!r}")
    cells = _scenario_cells(args, strategies)
    _echo_config("schedule", graphs=args.graphs, labels=args.labels, bank=args.bank,
                 strategy=",".join(strategies), tiling=args.tiling,
                 utilization=args.utilization, runs=args.runs, seed=args.seed, out=args.out)
    graphs = _load_graph_dir(args.graphs)
    labels = oracle.labels_from_csv(_read_text(args.labels))
    truth = selector.truth_table(labels)
    jobs = tuple(scheduler.make_jobs(graphs))
    units = tuple(
        scheduler.AcceleratorUnit(unit_id=i, inter_phase=phase, params=accel)
        for i, phase in enumerate(oracle.INTER_PHASES)
    )
    predictions = None
    if any(s == "sjf-predicted" or p == "predicted" for s, p in cells):
        if not args.bank:
            raise _UsageError("the requested cells need --bank for predictions")
        bank = gbm.load_bank(_read_text(args.bank))
        predictions = selector.prediction_table(bank, graphs, dims, accel)
    scn = scheduler.Scenario(
        jobs=jobs,
        units=units,
        truth=truth,
        predictions=predictions,
        cells=cells,
        arrival=scheduler.ArrivalSpec(
            pareto_shape=args.pareto_shape,
            target_utilization=args.utilization,
            seed=args.seed,
        ),
        inference_penalty_cycles=args.inference_penalty,
    )
    rows = scheduler.compare_strategies(scn, runs=args.runs, base_seed=args.seed)
    write_text_atomic(args.out, scheduler.report_to_csv(rows))
    print(f"wrote schedule report ({len(rows)} rows) to {args.out}")
    if args.trace_out:
        os.makedirs(args.trace_out, exist_ok=True)
        arrivals = scheduler.generate_arrivals(
            jobs, truth, units, replace(scn.arrival, seed=args.seed))
        for strategy, policy in cells:
            trace = scheduler.run_schedule(
                jobs, arrivals, units, strategy, policy, truth, predictions,
                seed=args.seed, inference_penalty_cycles=args.inference_penalty)
            name = f"{strategy}_{policy}_run0.csv"
            write_text_atomic(os.path.join(args.trace_out, name), scheduler.trace_to_csv(trace))
        print(f"wrote run-0 traces to {args.trace_out}")
    return EXIT_OK


def _cmd_report(args) -> int:
    _echo_config("report", eval=args.eval, schedule=args.schedule, out=args.out)
    lines = ["gnnflow summary", "================"]
    if args.eval:
        lines.append("")
        lines.append(f"selection quality ({os.path.basename(args.eval)}):")
        for row in _read_text(args.eval).splitlines():
            lines.append("  " + row)
    if args.schedule:
        rows = scheduler.report_from_csv(_read_text(args.schedule))
        lines.append("")
        lines.append(f"scheduling ({os.path.basename(args.schedule)}):")
        for r in rows:
            speed = "" if r.speedup_completion is None else f" speedup_completion={r.speedup_completion:.3f}x"
            lines.append(
                f"  {r.strategy:>14s}/{r.tiling_policy:<9s} completion={r.mean_completion:.1f}"
                f" turnaround={r.mean_turnaround:.1f} execution={r.mean_execution:.1f}{speed}"
            )
    if not args.eval and not args.schedule:
        raise _UsageError("report needs --eval and/or --schedule")
    write_text_atomic(args.out, "\n".join(lines) + "\n")
    print(f"wrote summary to {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_dims_accel(p):
    p.add_argument("--f-dim", type=int, default=32, help="input feature width F")
    p.add_argument("--g-dim", type=int, default=32, help="output feature width G")
    p.add_argument("--accel", default=None, help="accelerator config file (key = value lines)")


def build_parser() -> _Parser:
    parser = _Parser(prog="gnnflow", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-graphs", help="generate a synthetic graph dataset")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--nodes-min", type=int, default=20)
    p.add_argument("--nodes-max", type=int, default=400)
    p.add_argument("--mix", default="0.334,0.333,0.333",
                   help="family weights: uniform,pref-attach,small-world")
    p.set_defaults(func=_cmd_gen_graphs)

    p = sub.add_parser("label", help="label graphs with the analytical latency oracle")
    p.add_argument("--graphs", required=True, help="graph directory")
    p.add_argument("--out", required=True, help="label CSV path")
    _add_dims_accel(p)
    p.set_defaults(func=_cmd_label)

    p = sub.add_parser("featurize", help="extract model input features")
    p.add_argument("--graphs", required=True)
    p.add_argument("--out", required=True, help="feature CSV path")
    p.add_argument("--variant", choices=feat_mod.VARIANTS, default=feat_mod.VARIANT_COMPOSITE)
    _add_dims_accel(p)
    p.set_defaults(func=_cmd_featurize)

    p = sub.add_parser("train", help="train the 24-model predictor bank")
    p.add_argument("--labels", required=True)
    p.add_argument("--graphs", default=None, help="graph directory (features computed on the fly)")
    p.add_argument("--features", default=None, help="precomputed feature CSV")
    p.add_argument("--out", required=True, help="bank path (file or directory)")
    p.add_argument("--variant", choices=feat_mod.VARIANTS, default=feat_mod.VARIANT_COMPOSITE)
    log_group = p.add_mutually_exclusive_group()
    log_group.add_argument("--log", dest="log", action="store_true", default=True,
                           help="fit ln(1+cycles) (default)")
    log_group.add_argument("--no-log", dest="log", action="store_false")
    p.add_argument("--trees", type=int, default=300)
    p.add_argument("--learning-rate", type=float, default=0.1)
    p.add_argument("--max-depth", type=int, default=6)
    p.add_argument("--min-leaf", type=int, default=5)
    p.add_argument("--split", default="0.7,0.15,0.15")
    p.add_argument("--seed", type=int, default=0)
    _add_dims_accel(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("evaluate", help="evaluate banks on the test partition")
    p.add_argument("--banks", required=True, help="comma-separated bank files")
    p.add_argument("--graphs", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--out", required=True, help="selection-metrics CSV path")
    p.add_argument("--ablation-out", default=None, help="per-variant ablation CSV path")
    p.add_argument("--dataset-name", default="test")
    p.add_argument("--split", default="0.7,0.15,0.15")
    p.add_argument("--seed", type=int, default=0)
    _add_dims_accel(p)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("schedule", help="simulate online scheduling strategies")
    p.add_argument("--graphs", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--bank", default=None)
    p.add_argument("--strategy", default="all",
                   help="'all' or comma-separated strategy names")
    p.add_argument("--tiling", default="scenario1",
                   choices=list(scheduler.TILING_POLICIES) + ["scenario1", "scenario2"])
    p.add_argument("--utilization", type=float, default=0.85)
    p.add_argument("--pareto-shape", type=float, default=2.0)
    p.add_argument("--runs", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--inference-penalty", type=int, default=0,
                   help="cycles charged per sjf-predicted dispatch (default off)")
    p.add_argument("--out", required=True, help="report CSV path")
    p.add_argument("--trace-out", default=None, help="directory for run-0 trace CSVs")
    _add_dims_accel(p)
    p.set_defaults(func=_cmd_schedule)

    p = sub.add_parser("report", help="summarize evaluation and scheduling CSVs")
    p.add_argument("--eval", default=None)
    p.add_argument("--schedule", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"gnnflow: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"gnnflow: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GnnflowError, OSError) as exc:
        print(f"gnnflow: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        print(f"gnnflow: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
