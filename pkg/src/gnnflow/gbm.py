"""From-scratch gradient-boosted regression trees and the 24-model bank.

Squared-loss boosting with exact greedy splits (see ``_kernels``). Targets
can be fit in log space (ln(1+y)) to tame the latency magnitude spread;
predictions invert the transform and clamp at one cycle. Training is fully
deterministic: no subsampling, stable sorts, fixed tie-breaks.
"""

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from ._util import CoverageError, FormatError, SchemaError
from .features import FeatureTable, columns_for
from .oracle import CONFIG_COUNT

BANK_FORMAT = "gnnflow-bank"
BANK_VERSION = 1


@dataclass(frozen=True)
class TrainParams:
    """Boosting hyperparameters. The seed is recorded for provenance; the
    fitting procedure itself is deterministic."""

    tree_count: int = 300
    learning_rate: float = 0.1
    max_depth: int = 6
    min_leaf_samples: int = 5
    log_target: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.tree_count < 1:
            raise ValueError("tree_count must be >= 1")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError("learning_rate must be in (0, 1]")
        if not 1 <= self.max_depth <= 24:
            raise ValueError("max_depth must be in [1, 24]")
        if self.min_leaf_samples < 1:
            raise ValueError("min_leaf_samples must be >= 1")


@dataclass(frozen=True)
class SplitSpec:
    """Graph-level train/validation/test split fractions."""

    train_frac: float = 0.7
    val_frac: float = 0.15
    test_frac: float = 0.15
    seed: int = 0

    def __post_init__(self):
        fracs = (self.train_frac, self.val_frac, self.test_frac)
        if any(f <= 0 for f in fracs):
            raise ValueError("split fractions must be positive")
        if abs(sum(fracs) - 1.0) > 1e-9:
            raise ValueError("split fractions must sum to 1")


@dataclass(frozen=True)
class FeatureSchema:
    variant: str
    columns: tuple


@dataclass(frozen=True)
class Tree:
    """Flat binary tree; preorder node ids, feature == -1 marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    value: np.ndarray
    left: np.ndarray
    right: np.ndarray


@dataclass(frozen=True)
class GbmModel:
    base_prediction: float
    trees: tuple
    learning_rate: float
    log_target: bool
    schema: FeatureSchema


@dataclass(frozen=True)
class PredictorBank:
    """One model per dataflow config, all sharing a feature schema."""

    models: tuple
    schema: FeatureSchema

    def __post_init__(self):
        if len(self.models) != CONFIG_COUNT:
            raise ValueError(f"bank needs exactly {CONFIG_COUNT} models")
        for m in self.models:
            if m.schema != self.schema:
                raise ValueError("bank models disagree on feature schema")


@dataclass(frozen=True)
class ValidationReport:
    per_config_mape: tuple  # 24 validation MAPE percentages
    pooled_mape: float


def split_dataset(n: int, spec: SplitSpec):
    """Seeded shuffle partition; floor-sized val/test, remainder to train."""
    if n < 3:
        raise ValueError("need at least 3 items to split")
    val_n = int(n * spec.val_frac)
    test_n = int(n * spec.test_frac)
    train_n = n - val_n - test_n
    perm = np.random.default_rng(spec.seed).permutation(n)
    train = np.sort(perm[:train_n])
    val = np.sort(perm[train_n : train_n + val_n])
    test = np.sort(perm[train_n + val_n :])
    return train, val, test


def _transform(y: np.ndarray, log_target: bool) -> np.ndarray:
    return np.log1p(y) if log_target else y.astype(np.float64)


def train_gbm(rows: np.ndarray, targets, params: TrainParams, schema: FeatureSchema) -> GbmModel:
    """Fit one boosted ensemble on (rows -> cycles)."""
    x = np.ascontiguousarray(rows, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise ValueError("rows and targets must align")
    if x.shape[1] != len(schema.columns):
        raise SchemaError(
            f"feature matrix has {x.shape[1]} columns, schema expects {len(schema.columns)}"
        )
    if x.shape[0] < 2 * params.min_leaf_samples:
        raise ValueError(
            f"need at least {2 * params.min_leaf_samples} rows, got {x.shape[0]}"
        )
    if not np.isfinite(x).all():
        raise ValueError("non-finite feature value")
    if not np.isfinite(y).all() or (y < 0).any():
        raise ValueError("targets must be finite and non-negative")

    t = _transform(y, params.log_target)
    base = float(np.mean(t))
    sorted_idx = np.stack(
        [np.argsort(x[:, j], kind="stable") for j in range(x.shape[1])]
    ).astype(np.int64)

    pred = np.full(x.shape[0], base)
    trees = []
    for _ in range(params.tree_count):
        resid = t - pred
        arrays = _kernels.build_tree(x, sorted_idx, resid, params.max_depth, params.min_leaf_samples)
        tree = Tree(*arrays)
        trees.append(tree)
        pred = pred + params.learning_rate * _apply_tree(tree, x)
    return GbmModel(
        base_prediction=base,
        trees=tuple(trees),
        learning_rate=params.learning_rate,
        log_target=params.log_target,
        schema=schema,
    )


def _apply_tree(tree: Tree, x: np.ndarray) -> np.ndarray:
    n = x.shape[0]
    node = np.zeros(n, dtype=np.int64)
    rows = np.arange(n)
    while True:
        f = tree.feature[node]
        active = f >= 0
        if not active.any():
            return tree.value[node]
        go_left = x[rows, np.where(active, f, 0)] <= tree.threshold[node]
        nxt = np.where(go_left, tree.left[node], tree.right[node])
        node = np.where(active, nxt, node)


def predict_transformed(model: GbmModel, x: np.ndarray, tree_count=None) -> np.ndarray:
    """Raw ensemble output in transformed (possibly log) space."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != len(model.schema.columns):
        raise SchemaError(
            f"expected {len(model.schema.columns)} feature columns, got {x.shape[1] if x.ndim == 2 else 'non-matrix'}"
        )
    out = np.full(x.shape[0], model.base_prediction)
    trees = model.trees if tree_count is None else model.trees[:tree_count]
    for tree in trees:
        out = out + model.learning_rate * _apply_tree(tree, x)
    return out


def predict_batch(model: GbmModel, x: np.ndarray) -> np.ndarray:
    """Predicted cycles (>= 1) for a batch of feature rows."""
    raw = predict_transformed(model, x)
    if model.log_target:
        raw = np.expm1(raw)
    return np.maximum(raw, 1.0)


def predict(model: GbmModel, features) -> float:
    """Predicted cycles for a single feature vector."""
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 1:
        raise SchemaError("predict expects a single feature vector")
    return float(predict_batch(model, x.reshape(1, -1))[0])


def transformed_rmse_curve(model: GbmModel, rows: np.ndarray, targets) -> np.ndarray:
    """Training-space RMSE after each boosting round (diagnostics/tests)."""
    x = np.ascontiguousarray(rows, dtype=np.float64)
    t = _transform(np.asarray(targets, dtype=np.float64), model.log_target)
    pred = np.full(x.shape[0], model.base_prediction)
    curve = []
    for tree in model.trees:
        pred = pred + model.learning_rate * _apply_tree(tree, x)
        curve.append(float(np.sqrt(np.mean((t - pred) ** 2))))
    return np.asarray(curve)


# ---------------------------------------------------------------------------
# Bank training
# ---------------------------------------------------------------------------


def _mape_percent(preds: np.ndarray, truths: np.ndarray) -> float:
    if len(truths) == 0:  # tiny datasets can floor the val partition to zero
        return float("nan")
    return float(100.0 * np.mean(np.abs(preds - truths) / truths))


def train_bank(table: FeatureTable, labels, params: TrainParams, split: SplitSpec):
    """Train the 24 per-config models on the train partition of a graph split.

    Splitting is by graph id, so all 24 rows of one graph land in the same
    partition. Returns (bank, validation report).
    """
    schema = FeatureSchema(variant=table.variant, columns=columns_for(table.variant))
    label_map = {(r.graph_id, r.config_index): r.cycles for r in labels}
    row_map = {key: i for i, key in enumerate(table.ids)}
    graph_ids = sorted({gid for gid, _ in table.ids})
    for gid in graph_ids:
        for cfg in range(CONFIG_COUNT):
            if (gid, cfg) not in label_map:
                raise CoverageError(f"graph {gid!r} has no label for config {cfg}")
            if (gid, cfg) not in row_map:
                raise CoverageError(f"graph {gid!r} has no features for config {cfg}")

    train_pos, val_pos, _ = split_dataset(len(graph_ids), split)
    train_gids = [graph_ids[i] for i in train_pos]
    val_gids = [graph_ids[i] for i in val_pos]

    models = []
    val_mapes = []
    ape_all = []
    for cfg in range(CONFIG_COUNT):
        rows_tr = [row_map[(gid, cfg)] for gid in train_gids]
        x_tr = table.matrix[rows_tr]
        y_tr = np.asarray([label_map[(gid, cfg)] for gid in train_gids], dtype=np.float64)
        model = train_gbm(x_tr, y_tr, params, schema)
        models.append(model)

        rows_va = [row_map[(gid, cfg)] for gid in val_gids]
        y_va = np.asarray([label_map[(gid, cfg)] for gid in val_gids], dtype=np.float64)
        preds = predict_batch(model, table.matrix[rows_va])
        val_mapes.append(_mape_percent(preds, y_va))
        ape_all.append(np.abs(preds - y_va) / y_va)

    pooled_ape = np.concatenate(ape_all)
    pooled = float(100.0 * np.mean(pooled_ape)) if pooled_ape.size else float("nan")
    bank = PredictorBank(models=tuple(models), schema=schema)
    return bank, ValidationReport(per_config_mape=tuple(val_mapes), pooled_mape=pooled)


# ---------------------------------------------------------------------------
# Serialization: structured text (JSON), versioned
# ---------------------------------------------------------------------------


def _tree_to_flat(tree: Tree) -> list:
    flat = []
    for i in range(len(tree.feature)):
        f = int(tree.feature[i])
        if f >= 0:
            flat.append([f, float(tree.threshold[i])])
        else:
            flat.append([-1, float(tree.value[i])])
    return flat


def _tree_from_flat(flat, n_columns: int) -> Tree:
    count = len(flat)
    if count < 1:
        raise FormatError("empty tree encoding")
    feature = np.full(count, -1, dtype=np.int64)
    threshold = np.zeros(count, dtype=np.float64)
    value = np.zeros(count, dtype=np.float64)
    left = np.full(count, -1, dtype=np.int64)
    right = np.full(count, -1, dtype=np.int64)

    def parse(pos):
        if pos >= count:
            raise FormatError("truncated tree encoding")
        f, x = flat[pos]
        f = int(f)
        x = float(x)
        if not math.isfinite(x):
            raise FormatError("non-finite tree node value")
        if f < 0:
            value[pos] = x
            return pos + 1
        if f >= n_columns:
            raise FormatError(f"tree references feature {f} outside the schema")
        feature[pos] = f
        threshold[pos] = x
        left[pos] = pos + 1
        after_left = parse(pos + 1)
        right[pos] = after_left
        return parse(after_left)

    end = parse(0)
    if end != count:
        raise FormatError("trailing nodes in tree encoding")
    return Tree(feature=feature, threshold=threshold, value=value, left=left, right=right)


def save_bank(bank: PredictorBank) -> str:
    doc = {
        "format": BANK_FORMAT,
        "version": BANK_VERSION,
        "feature_schema": {
            "variant": bank.schema.variant,
            "columns": list(bank.schema.columns),
        },
        "models": [
            {
                "config_index": i,
                "base": float(m.base_prediction),
                "learning_rate": float(m.learning_rate),
                "log_target": bool(m.log_target),
                "trees": [_tree_to_flat(t) for t in m.trees],
            }
            for i, m in enumerate(bank.models)
        ],
    }
    return json.dumps(doc, separators=(",", ":")) + "\n"


def load_bank(text: str) -> PredictorBank:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"malformed bank file: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != BANK_FORMAT:
        raise FormatError("not a gnnflow model bank")
    if doc.get("version") != BANK_VERSION:
        raise FormatError(f"unsupported bank version {doc.get('version')!r}")
    try:
        schema = FeatureSchema(
            variant=doc["feature_schema"]["variant"],
            columns=tuple(doc["feature_schema"]["columns"]),
        )
        if schema.columns != columns_for(schema.variant):
            raise FormatError("schema columns disagree with the variant")
        entries = doc["models"]
        if len(entries) != CONFIG_COUNT:
            raise FormatError(f"bank must contain {CONFIG_COUNT} models")
        models = []
        for i, entry in enumerate(entries):
            if entry["config_index"] != i:
                raise FormatError("bank models out of order")
            trees = tuple(_tree_from_flat(t, len(schema.columns)) for t in entry["trees"])
            models.append(
                GbmModel(
                    base_prediction=float(entry["base"]),
                    trees=trees,
                    learning_rate=float(entry["learning_rate"]),
                    log_target=bool(entry["log_target"]),
                    schema=schema,
                )
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed bank file: {exc}") from None
    return PredictorBank(models=tuple(models), schema=schema)


def variant_label(variant: str, log_target: bool) -> str:
    """Human-readable ablation label, e.g. 'base+features+log'."""
    return variant + ("+log" if log_target else "")


def params_for_variant(variant_name: str, base: TrainParams = TrainParams()):
    """Map an ablation label to (feature variant, TrainParams)."""
    from .features import VARIANT_BASE, VARIANT_COMPOSITE

    mapping = {
        "base": (VARIANT_BASE, False),
        "base+features": (VARIANT_COMPOSITE, False),
        "base+log": (VARIANT_BASE, True),
        "base+features+log": (VARIANT_COMPOSITE, True),
    }
    if variant_name not in mapping:
        raise ValueError(f"unknown ablation variant {variant_name!r}")
    variant, log = mapping[variant_name]
    return variant, replace(base, log_target=log)
