"""Model input features for one (graph, dataflow config) pair.

The base block is structural: sizes, resolved tile factors, density,
clustering, and degree quantiles. The composite block adds closed-form
operation/cycle estimators (s1..s6) that give the regressor a head start on
the latency scale.
"""

from dataclasses import dataclass

import numpy as np

from ._util import ParseError
from .graphs import Graph, clustering_coefficient, degree_stats, density
from .oracle import (
    AcceleratorParams,
    DataflowConfig,
    ResolvedTiling,
    WorkloadDims,
    config_from_index,
    enumerate_configs,
    resolve_tiling,
)

VARIANT_BASE = "base"
VARIANT_COMPOSITE = "base+features"
VARIANTS = (VARIANT_BASE, VARIANT_COMPOSITE)

BASE_COLUMNS = (
    "nodes",
    "edges",
    "t_va",
    "t_fa",
    "t_n",
    "t_vc",
    "t_gc",
    "t_fc",
    "density",
    "clustering",
    "q1",
    "q2",
    "q3",
    "q4",
    "q5",
    "q6",
    "q7",
)
COMPOSITE_COLUMNS = ("s1", "s2", "s3", "s4", "s5", "s6")


def columns_for(variant: str) -> tuple:
    if variant == VARIANT_BASE:
        return BASE_COLUMNS
    if variant == VARIANT_COMPOSITE:
        return BASE_COLUMNS + COMPOSITE_COLUMNS
    raise ValueError(f"unknown feature variant {variant!r}")


@dataclass(frozen=True)
class FeatureVector:
    """One row of model input; composite fields are None for the base variant."""

    nodes: int
    edges: int
    t_va: int
    t_fa: int
    t_n: int
    t_vc: int
    t_gc: int
    t_fc: int
    density: float
    clustering: float
    quantiles: tuple
    s1: float = None
    s2: float = None
    s3: float = None
    s4: float = None
    s5: float = None
    s6: float = None

    @property
    def variant(self) -> str:
        return VARIANT_BASE if self.s1 is None else VARIANT_COMPOSITE

    def as_array(self) -> np.ndarray:
        base = [
            self.nodes,
            self.edges,
            self.t_va,
            self.t_fa,
            self.t_n,
            self.t_vc,
            self.t_gc,
            self.t_fc,
            self.density,
            self.clustering,
            *self.quantiles,
        ]
        if self.variant == VARIANT_COMPOSITE:
            base += [self.s1, self.s2, self.s3, self.s4, self.s5, self.s6]
        return np.asarray(base, dtype=np.float64)


def _composites(g: Graph, dims: WorkloadDims, t: ResolvedTiling, mean_degree: float) -> tuple:
    v = g.node_count
    f = dims.input_features
    gg = dims.output_features
    s1 = v * f * (gg + mean_degree)
    s2 = (v * f * gg) / (t.t_vc * t.t_fc * t.t_gc)
    s3 = (v * f * mean_degree) / (t.t_n * t.t_fa)
    s4 = s1 + s3
    deg = g.degrees[g.degrees > 0].astype(np.float64)
    s5 = float((deg * f / (np.minimum(deg, t.t_n) * t.t_fa)).sum())
    s6 = s3 + s5 / t.t_va
    return s1, s2, s3, s4, s5, s6


def extract_features(g: Graph, dims: WorkloadDims, t: ResolvedTiling, variant: str = VARIANT_COMPOSITE) -> FeatureVector:
    """Feature vector for a graph under a resolved tiling."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown feature variant {variant!r}")
    stats = degree_stats(g)
    common = dict(
        nodes=g.node_count,
        edges=g.edge_count,
        t_va=t.t_va,
        t_fa=t.t_fa,
        t_n=t.t_n,
        t_vc=t.t_vc,
        t_gc=t.t_gc,
        t_fc=t.t_fc,
        density=density(g),
        clustering=clustering_coefficient(g),
        quantiles=stats.quantiles,
    )
    if variant == VARIANT_BASE:
        return FeatureVector(**common)
    s1, s2, s3, s4, s5, s6 = _composites(g, dims, t, stats.mean_degree)
    return FeatureVector(**common, s1=s1, s2=s2, s3=s3, s4=s4, s5=s5, s6=s6)


def feature_matrix(graphs, dims: WorkloadDims, cfg: DataflowConfig, accel: AcceleratorParams,
                   variant: str = VARIANT_COMPOSITE) -> np.ndarray:
    """One feature row per graph for a single config, in input order."""
    if not graphs:
        raise ValueError("feature_matrix needs at least one graph")
    rows = [
        extract_features(g, dims, resolve_tiling(cfg.scheme, g, dims, accel), variant).as_array()
        for g in graphs
    ]
    return np.stack(rows)


@dataclass(frozen=True)
class FeatureTable:
    """Feature rows for every (graph, config) pair, (graph_id, config)-ordered."""

    ids: tuple  # of (graph_id, config_index)
    matrix: np.ndarray
    variant: str

    @property
    def columns(self) -> tuple:
        return columns_for(self.variant)


def build_feature_table(graphs, dims: WorkloadDims, accel: AcceleratorParams,
                        variant: str = VARIANT_COMPOSITE) -> FeatureTable:
    """Rows for all 24 configs of every graph.

    Per-graph metrics (density, clustering, quantiles) are computed once and
    shared across that graph's 24 rows.
    """
    if not graphs:
        raise ValueError("build_feature_table needs at least one graph")
    configs = enumerate_configs()
    ids = []
    rows = []
    for graph_id, g in sorted(graphs, key=lambda item: item[0]):
        stats = degree_stats(g)
        dens = density(g)
        clus = clustering_coefficient(g)
        degrees = g.degrees
        positive = degrees[degrees > 0].astype(np.float64)
        v, e = g.node_count, g.edge_count
        f, gg = dims.input_features, dims.output_features
        for cfg in configs:
            t = resolve_tiling(cfg.scheme, g, dims, accel)
            row = [v, e, t.t_va, t.t_fa, t.t_n, t.t_vc, t.t_gc, t.t_fc, dens, clus, *stats.quantiles]
            if variant == VARIANT_COMPOSITE:
                s1 = v * f * (gg + stats.mean_degree)
                s2 = (v * f * gg) / (t.t_vc * t.t_fc * t.t_gc)
                s3 = (v * f * stats.mean_degree) / (t.t_n * t.t_fa)
                s5 = float((positive * f / (np.minimum(positive, t.t_n) * t.t_fa)).sum())
                row += [s1, s2, s3, s1 + s3, s5, s3 + s5 / t.t_va]
            ids.append((graph_id, cfg.config_index))
            rows.append(row)
    return FeatureTable(ids=tuple(ids), matrix=np.asarray(rows, dtype=np.float64), variant=variant)


# ---------------------------------------------------------------------------
# CSV format
# ---------------------------------------------------------------------------


def features_to_csv(table: FeatureTable) -> str:
    from ._util import fmt_num

    header = "graph_id,config_index," + ",".join(table.columns)
    lines = [header]
    for (graph_id, cfg_idx), row in zip(table.ids, table.matrix):
        cells = [graph_id, str(cfg_idx)]
        cells += [fmt_num(float(x)) for x in row]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def features_from_csv(text: str) -> FeatureTable:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParseError("empty feature CSV")
    header = lines[0].split(",")
    if header[:2] != ["graph_id", "config_index"]:
        raise ParseError("bad feature CSV header")
    cols = tuple(header[2:])
    if cols == BASE_COLUMNS:
        variant = VARIANT_BASE
    elif cols == BASE_COLUMNS + COMPOSITE_COLUMNS:
        variant = VARIANT_COMPOSITE
    else:
        raise ParseError("feature CSV columns match no known variant")
    ids = []
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != len(header):
            raise ParseError(f"line {lineno}: expected {len(header)} columns")
        try:
            idx = int(parts[1])
            row = [float(x) for x in parts[2:]]
        except ValueError:
            raise ParseError(f"line {lineno}: non-numeric field") from None
        config_from_index(idx)
        ids.append((parts[0], idx))
        rows.append(row)
    return FeatureTable(ids=tuple(ids), matrix=np.asarray(rows, dtype=np.float64), variant=variant)
