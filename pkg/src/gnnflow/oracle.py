"""Analytical cycle-cost oracle for one GNN layer on a spatial accelerator.

A layer is two phases: neighbor aggregation (sparse, degree-dependent) and
feature combination (dense matmul). Eight tiling schemes fix the per-phase
spatial unrolls; three inter-phase modes compose the phases:

* ``seq`` runs the phases back to back, paying a DRAM round trip when the
  intermediate V x F matrix overflows the global buffer;
* ``sp``  interleaves them over node groups through the on-chip buffer;
* ``pp``  partitions the PEs and pipelines the phases, taking the best
  makespan over a fixed set of PE splits.

All arithmetic is integer; results are exact and platform-independent.
"""

from dataclasses import dataclass

import numpy as np

from ._util import ParseError, fmt_num
from .graphs import Graph

SCHEMES = ("a", "b", "c", "d", "e", "f", "g", "h")
INTER_PHASES = ("seq", "sp", "pp")
CONFIG_COUNT = len(SCHEMES) * len(INTER_PHASES)

# pp candidate PE splits: k/8 of the array for the aggregation stage
_PP_SPLIT_EIGHTHS = range(1, 8)


@dataclass(frozen=True)
class AcceleratorParams:
    """Hardware knobs of one accelerator."""

    pe_count: int = 512
    register_file_bytes_per_pe: int = 64  # recorded; not used by the cost laws
    global_buffer_bytes: int = 524288
    dram_words_per_cycle: int = 16
    bytes_per_word: int = 4

    def __post_init__(self):
        for name in ("pe_count", "register_file_bytes_per_pe", "global_buffer_bytes",
                     "dram_words_per_cycle", "bytes_per_word"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class WorkloadDims:
    """Input/output feature widths of the layer."""

    input_features: int = 32
    output_features: int = 32

    def __post_init__(self):
        if self.input_features < 1 or self.output_features < 1:
            raise ValueError("feature dimensions must be >= 1")


@dataclass(frozen=True)
class ResolvedTiling:
    """Concrete tile sizes for both phases after resolving a scheme."""

    t_va: int
    t_fa: int
    t_n: int
    t_vc: int
    t_gc: int
    t_fc: int

    def __post_init__(self):
        for name in ("t_va", "t_fa", "t_n", "t_vc", "t_gc", "t_fc"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


@dataclass(frozen=True)
class DataflowConfig:
    """One of the 24 (tiling scheme, inter-phase mode) points."""

    scheme: str
    inter_phase: str

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.inter_phase not in INTER_PHASES:
            raise ValueError(f"unknown inter-phase dataflow {self.inter_phase!r}")

    @property
    def config_index(self) -> int:
        return 3 * SCHEMES.index(self.scheme) + INTER_PHASES.index(self.inter_phase)


@dataclass(frozen=True)
class LatencyRecord:
    """Ground-truth label: oracle cycles for one (graph, config) pair."""

    graph_id: str
    config_index: int
    cycles: int


def enumerate_configs() -> list:
    """All 24 configs in canonical order: scheme-major, then seq/sp/pp."""
    return [DataflowConfig(s, p) for s in SCHEMES for p in INTER_PHASES]


def config_from_index(index: int) -> DataflowConfig:
    if not 0 <= index < CONFIG_COUNT:
        raise ValueError(f"config index {index} out of range")
    return DataflowConfig(SCHEMES[index // 3], INTER_PHASES[index % 3])


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def _clamp(x: int, lo: int, hi: int) -> int:
    return min(max(x, lo), hi)


def _scheme_factors(scheme: str, v: int, f: int, pe: int) -> tuple:
    """Fixed factors (t_fa, t_n, t_gc, t_fc) of one scheme row."""
    half_f = max(f // 2, 1)
    if scheme == "a":
        return min(pe, f), 1, 1, min(pe, f)
    if scheme == "b":
        return min(2, f), half_f, 1, min(2, f)
    if scheme == "c":
        return min(8, f), half_f, 1, min(8, f)
    if scheme == "d":
        return 1, 1, 1, 1
    if scheme == "e":
        return min(18, f), half_f, 1, min(18, f)
    if scheme == "f":
        return 1, min(18, v), 1, 1
    if scheme == "g":
        return min(18, f), 1, 1, min(85, f)
    if scheme == "h":
        return 1, min(18, v), 1, min(85, f)
    raise ValueError(f"unknown scheme {scheme!r}")


def _resolve(scheme: str, v: int, f: int, pe: int) -> ResolvedTiling:
    t_fa, t_n, t_gc, t_fc = _scheme_factors(scheme, v, f, pe)
    t_va = _clamp(pe // (t_fa * t_n), 1, v)
    t_vc = _clamp(pe // (t_gc * t_fc), 1, v)
    return ResolvedTiling(t_va=t_va, t_fa=t_fa, t_n=t_n, t_vc=t_vc, t_gc=t_gc, t_fc=t_fc)


def resolve_tiling(scheme: str, g: Graph, dims: WorkloadDims, accel: AcceleratorParams) -> ResolvedTiling:
    """Resolve a scheme's tile sizes against a graph and the PE budget.

    The node-dimension tiles soak up the remaining PEs:
    t_va = clamp(pe / (t_fa * t_n), 1, V) and likewise for t_vc.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    return _resolve(scheme, g.node_count, dims.input_features, accel.pe_count)


# ---------------------------------------------------------------------------
# Cycle-cost laws
# ---------------------------------------------------------------------------


def _group_costs(degrees: np.ndarray, f: int, t: ResolvedTiling) -> np.ndarray:
    """Aggregation cost per consecutive node group of size t_va.

    A node costs ceil(max(N_v, 1) / t_n) * ceil(F / t_fa) cycles; a group of
    spatially unrolled nodes is paced by its slowest member.
    """
    per_node = np.maximum(degrees, 1)
    per_node = -(-per_node // t.t_n) * _ceil_div(f, t.t_fa)
    v = len(per_node)
    groups = _ceil_div(v, t.t_va)
    padded = np.zeros(groups * t.t_va, dtype=np.int64)
    padded[:v] = per_node
    return padded.reshape(groups, t.t_va).max(axis=1)


def aggregation_cycles(g: Graph, dims: WorkloadDims, t: ResolvedTiling) -> int:
    """Total aggregation-phase cycles: sum of per-group maxima."""
    return int(_group_costs(g.degrees, dims.input_features, t).sum())


def combination_cycles(v_count: int, dims: WorkloadDims, t: ResolvedTiling) -> int:
    """Dense-phase cycles: ceil(V/t_vc) * ceil(F/t_fc) * ceil(G/t_gc)."""
    if v_count < 1:
        raise ValueError("v_count must be >= 1")
    return (
        _ceil_div(v_count, t.t_vc)
        * _ceil_div(dims.input_features, t.t_fc)
        * _ceil_div(dims.output_features, t.t_gc)
    )


def _dram_penalty(v: int, dims: WorkloadDims, accel: AcceleratorParams) -> int:
    words = v * dims.input_features
    if words * accel.bytes_per_word > accel.global_buffer_bytes:
        return 2 * _ceil_div(words, accel.dram_words_per_cycle)
    return 0


def _group_sizes(v: int, t_va: int) -> np.ndarray:
    groups = _ceil_div(v, t_va)
    sizes = np.full(groups, t_va, dtype=np.int64)
    sizes[-1] = v - t_va * (groups - 1)
    return sizes


def pipeline_makespan(agg_costs, comb_costs) -> int:
    """Two-stage pipeline makespan with unlimited inter-stage buffering.

    Stage two handles group g only after stage one finished it, so the
    makespan is max over k of (sum of agg costs up to k + sum of comb costs
    from k on).
    """
    a = np.asarray(agg_costs, dtype=np.int64)
    c = np.asarray(comb_costs, dtype=np.int64)
    if a.shape != c.shape or a.ndim != 1 or len(a) == 0:
        raise ValueError("need equal-length non-empty cost sequences")
    prefix_a = np.cumsum(a)
    suffix_c = np.cumsum(c[::-1])[::-1]
    return int((prefix_a + suffix_c).max())


def _seq_cycles(g: Graph, dims: WorkloadDims, t: ResolvedTiling, accel: AcceleratorParams) -> int:
    return (
        aggregation_cycles(g, dims, t)
        + combination_cycles(g.node_count, dims, t)
        + _dram_penalty(g.node_count, dims, accel)
    )


def _sp_cycles(g: Graph, dims: WorkloadDims, t: ResolvedTiling) -> int:
    agg = _group_costs(g.degrees, dims.input_features, t)
    sizes = _group_sizes(g.node_count, t.t_va)
    comb = (
        -(-sizes // t.t_vc)
        * _ceil_div(dims.input_features, t.t_fc)
        * _ceil_div(dims.output_features, t.t_gc)
    )
    return int((agg + comb).sum())


def _pp_cycles(g: Graph, dims: WorkloadDims, scheme: str, accel: AcceleratorParams) -> int:
    v, f = g.node_count, dims.input_features
    best = None
    for k in _PP_SPLIT_EIGHTHS:
        budget_a = accel.pe_count * k // 8
        budget_c = accel.pe_count - budget_a
        if budget_a < 1 or budget_c < 1:
            continue
        ta = _resolve(scheme, v, f, budget_a)
        tc = _resolve(scheme, v, f, budget_c)
        if ta.t_fa * ta.t_n > budget_a or tc.t_gc * tc.t_fc > budget_c:
            continue  # fixed unroll factors alone exceed this stage's PEs
        agg = _group_costs(g.degrees, f, ta)
        sizes = _group_sizes(v, ta.t_va)
        comb = (
            -(-sizes // tc.t_vc)
            * _ceil_div(f, tc.t_fc)
            * _ceil_div(dims.output_features, tc.t_gc)
        )
        span = pipeline_makespan(agg, comb)
        if best is None or span < best:
            best = span
    if best is None:
        return _seq_cycles(g, dims, _resolve(scheme, v, f, accel.pe_count), accel)
    return best


def simulate_latency(g: Graph, dims: WorkloadDims, cfg: DataflowConfig, accel: AcceleratorParams) -> int:
    """Oracle cycles for executing one layer on ``g`` under ``cfg``."""
    t = _resolve(cfg.scheme, g.node_count, dims.input_features, accel.pe_count)
    if cfg.inter_phase == "seq":
        return _seq_cycles(g, dims, t, accel)
    if cfg.inter_phase == "sp":
        return _sp_cycles(g, dims, t)
    return _pp_cycles(g, dims, cfg.scheme, accel)


def label_dataset(graphs, dims: WorkloadDims, accel: AcceleratorParams) -> list:
    """Label every (graph, config) pair; emitted in (graph_id, config_index) order.

    ``graphs`` is a sequence of (graph_id, Graph) pairs.
    """
    if not graphs:
        raise ValueError("label_dataset needs at least one graph")
    records = []
    configs = enumerate_configs()
    for graph_id, g in sorted(graphs, key=lambda item: item[0]):
        for cfg in configs:
            cycles = simulate_latency(g, dims, cfg, accel)
            records.append(LatencyRecord(graph_id=graph_id, config_index=cfg.config_index, cycles=cycles))
    return records


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------

LABEL_CSV_HEADER = "graph_id,config_index,scheme,inter_phase,cycles"

_ACCEL_KEYS = {
    "pe_count",
    "register_file_bytes_per_pe",
    "global_buffer_bytes",
    "dram_words_per_cycle",
    "bytes_per_word",
}


def labels_to_csv(records) -> str:
    lines = [LABEL_CSV_HEADER]
    for r in records:
        cfg = config_from_index(r.config_index)
        lines.append(f"{r.graph_id},{r.config_index},{cfg.scheme},{cfg.inter_phase},{fmt_num(r.cycles)}")
    return "\n".join(lines) + "\n"


def labels_from_csv(text: str) -> list:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != LABEL_CSV_HEADER:
        raise ParseError("bad label CSV header")
    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 5:
            raise ParseError(f"line {lineno}: expected 5 columns")
        try:
            idx = int(parts[1])
            cycles = int(parts[4])
        except ValueError:
            raise ParseError(f"line {lineno}: non-integer field") from None
        cfg = config_from_index(idx)
        if (cfg.scheme, cfg.inter_phase) != (parts[2], parts[3]):
            raise ParseError(f"line {lineno}: config columns disagree with index {idx}")
        if cycles < 1:
            raise ParseError(f"line {lineno}: cycles must be >= 1")
        records.append(LatencyRecord(graph_id=parts[0], config_index=idx, cycles=cycles))
    return records


def read_accel_config(text: str) -> AcceleratorParams:
    """Parse ``key = value`` lines (# comments allowed) into AcceleratorParams."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            parts = line.split()
            if len(parts) != 2:
                raise ParseError(f"line {lineno}: expected 'key = value'")
            key, value = parts
        key, value = key.strip(), value.strip()
        if key not in _ACCEL_KEYS:
            raise ParseError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = int(value)
        except ValueError:
            raise ParseError(f"line {lineno}: non-integer value for {key!r}") from None
    return AcceleratorParams(**values)
