"""Per-graph dataflow ranking and the evaluation metrics around it.

A prediction table maps graph_id -> 24 predicted latencies (one per config);
a truth table holds the oracle's cycles in the same layout. All metrics
operate on those tables, with convenience wrappers that build them from a
predictor bank.
"""

from dataclasses import dataclass

import numpy as np

from ._util import CoverageError, SchemaError, fmt_num
from .features import build_feature_table, extract_features
from .gbm import PredictorBank, predict, predict_batch
from .oracle import CONFIG_COUNT, AcceleratorParams, WorkloadDims, resolve_tiling
from .oracle import config_from_index


@dataclass(frozen=True)
class RankedConfigs:
    """All 24 configs ordered by predicted latency (ties: config index)."""

    graph_id: str
    entries: tuple  # of (config_index, predicted_cycles), ascending

    def best(self) -> int:
        return self.entries[0][0]


@dataclass(frozen=True)
class EvalReport:
    mape_percent: float
    top1_percent: float
    top3_percent: float
    improvement_over_random_percent: float
    improvement_over_best_fixed_percent: float
    degradation_over_optimal_percent: float
    per_config_mape: tuple  # 24 entries


def truth_table(labels) -> dict:
    """graph_id -> int64 array of 24 oracle latencies; errors on gaps."""
    by_graph = {}
    for r in labels:
        row = by_graph.setdefault(r.graph_id, np.full(CONFIG_COUNT, -1, dtype=np.int64))
        row[r.config_index] = r.cycles
    for gid, row in by_graph.items():
        missing = np.nonzero(row < 0)[0]
        if missing.size:
            raise CoverageError(f"graph {gid!r} has no label for config {int(missing[0])}")
    return by_graph


def predictions_for_graph(bank: PredictorBank, g, dims: WorkloadDims, accel: AcceleratorParams) -> np.ndarray:
    """24 predicted latencies for one graph."""
    preds = np.empty(CONFIG_COUNT)
    for idx in range(CONFIG_COUNT):
        cfg = config_from_index(idx)
        t = resolve_tiling(cfg.scheme, g, dims, accel)
        fv = extract_features(g, dims, t, bank.schema.variant)
        preds[idx] = predict(bank.models[idx], fv.as_array())
    return preds


def prediction_table(bank: PredictorBank, graphs, dims: WorkloadDims, accel: AcceleratorParams) -> dict:
    """graph_id -> 24 predicted latencies for a set of (graph_id, Graph) pairs."""
    table = build_feature_table(graphs, dims, accel, bank.schema.variant)
    ids = np.asarray([gid for gid, _ in table.ids])
    cfgs = np.asarray([cfg for _, cfg in table.ids])
    out = {gid: np.empty(CONFIG_COUNT) for gid, _ in graphs}
    for idx in range(CONFIG_COUNT):
        rows = np.nonzero(cfgs == idx)[0]
        preds = predict_batch(bank.models[idx], table.matrix[rows])
        for gid, p in zip(ids[rows], preds):
            out[gid][idx] = p
    return out


def rank_configs(bank: PredictorBank, g, dims: WorkloadDims, accel: AcceleratorParams,
                 graph_id: str = "") -> RankedConfigs:
    """Rank the 24 configs for one graph by predicted latency."""
    preds = predictions_for_graph(bank, g, dims, accel)
    order = np.lexsort((np.arange(CONFIG_COUNT), preds))
    entries = tuple((int(i), float(preds[i])) for i in order)
    return RankedConfigs(graph_id=graph_id, entries=entries)


def mape(preds, truths) -> float:
    """Mean absolute percentage error: 100 * mean(|pred - truth| / truth)."""
    p = np.asarray(preds, dtype=np.float64)
    t = np.asarray(truths, dtype=np.float64)
    if p.shape != t.shape or p.ndim != 1 or p.size == 0:
        raise ValueError("preds and truths must be equal-length non-empty vectors")
    if (t < 1).any():
        raise ValueError("truths must be >= 1")
    return float(100.0 * np.mean(np.abs(p - t) / t))


def _check_tables(preds: dict, truths: dict):
    if not preds:
        raise ValueError("empty prediction table")
    missing = set(preds) - set(truths)
    if missing:
        raise CoverageError(f"no labels for graph {sorted(missing)[0]!r}")
    for gid, row in preds.items():
        if np.asarray(row).shape != (CONFIG_COUNT,):
            raise SchemaError(f"prediction row for {gid!r} must have {CONFIG_COUNT} entries")


def topk_accuracy(preds: dict, truths: dict, k: int) -> float:
    """Share of graphs whose predicted-best config is among the k true best."""
    _check_tables(preds, truths)
    if not 1 <= k <= CONFIG_COUNT:
        raise ValueError("k must be in [1, 24]")
    hits = 0
    for gid in sorted(preds):
        pred_best = int(np.argmin(preds[gid]))
        true_row = truths[gid]
        topk = np.lexsort((np.arange(CONFIG_COUNT), true_row))[:k]
        hits += int(pred_best in topk)
    return 100.0 * hits / len(preds)


def pooled_mape(preds: dict, truths: dict) -> float:
    _check_tables(preds, truths)
    p = np.concatenate([preds[g] for g in sorted(preds)])
    t = np.concatenate([truths[g] for g in sorted(preds)])
    return mape(p, t)


def per_config_mape(preds: dict, truths: dict) -> tuple:
    _check_tables(preds, truths)
    p = np.stack([preds[g] for g in sorted(preds)])
    t = np.stack([truths[g] for g in sorted(preds)]).astype(np.float64)
    return tuple(float(x) for x in 100.0 * np.mean(np.abs(p - t) / t, axis=0))


def strategy_comparison(preds: dict, truths: dict) -> EvalReport:
    """Model-selected latency vs the random / best-fixed / optimal baselines.

    The random baseline is the expectation of a uniform config pick; all
    means are unweighted over graphs.
    """
    _check_tables(preds, truths)
    gids = sorted(preds)
    pred_rows = np.stack([preds[g] for g in gids])
    true_rows = np.stack([truths[g] for g in gids]).astype(np.float64)

    chosen = np.argmin(pred_rows, axis=1)
    model_mean = float(np.mean(true_rows[np.arange(len(gids)), chosen]))
    random_mean = float(np.mean(true_rows))
    best_fixed_mean = float(np.min(np.mean(true_rows, axis=0)))
    optimal_mean = float(np.mean(np.min(true_rows, axis=1)))

    return EvalReport(
        mape_percent=pooled_mape(preds, truths),
        top1_percent=topk_accuracy(preds, truths, 1),
        top3_percent=topk_accuracy(preds, truths, 3),
        improvement_over_random_percent=100.0 * (random_mean - model_mean) / random_mean,
        improvement_over_best_fixed_percent=100.0 * (best_fixed_mean - model_mean) / best_fixed_mean,
        degradation_over_optimal_percent=100.0 * (model_mean - optimal_mean) / optimal_mean,
        per_config_mape=per_config_mape(preds, truths),
    )


def evaluate_bank(bank: PredictorBank, graphs, labels, dims: WorkloadDims,
                  accel: AcceleratorParams) -> EvalReport:
    """Build tables from a bank and labeled graphs, then compare strategies."""
    preds = prediction_table(bank, graphs, dims, accel)
    truths = truth_table(labels)
    truths = {gid: truths[gid] for gid in preds}
    return strategy_comparison(preds, truths)


# ---------------------------------------------------------------------------
# CSV emission
# ---------------------------------------------------------------------------

EVAL_CSV_HEADER = (
    "dataset,mape_percent,top1_percent,top3_percent,"
    "improvement_over_random_percent,improvement_over_best_fixed_percent,"
    "degradation_over_optimal_percent"
)

ABLATION_CSV_HEADER = "dataset,model,mape_percent,degradation_over_optimal_percent"


def eval_to_csv(rows) -> str:
    """rows: sequence of (dataset_name, EvalReport)."""
    lines = [EVAL_CSV_HEADER]
    for name, r in rows:
        lines.append(
            ",".join(
                [
                    name,
                    fmt_num(r.mape_percent),
                    fmt_num(r.top1_percent),
                    fmt_num(r.top3_percent),
                    fmt_num(r.improvement_over_random_percent),
                    fmt_num(r.improvement_over_best_fixed_percent),
                    fmt_num(r.degradation_over_optimal_percent),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def ablation_to_csv(rows) -> str:
    """rows: sequence of (dataset_name, model_label, EvalReport)."""
    lines = [ABLATION_CSV_HEADER]
    for name, label, r in rows:
        lines.append(
            ",".join(
                [name, label, fmt_num(r.mape_percent), fmt_num(r.degradation_over_optimal_percent)]
            )
        )
    return "\n".join(lines) + "\n"
