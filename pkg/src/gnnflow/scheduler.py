"""Deterministic discrete-event simulation of online job scheduling.

Jobs (graphs) arrive over time and queue for a set of heterogeneous
accelerators, one inter-phase dataflow each. At every dispatch the strategy
orders the queue (per unit, since job length depends on the unit's dataflow)
and the tiling policy picks one of the 8 schemes. Execution time is always
the oracle latency of the dispatched (graph, dataflow, scheme) triple.

Event ordering is fixed: completions before arrivals at equal times, units
scanned by ascending id, job ties broken by (release, job_id). One run is
fully reproducible from its seed.
"""

import heapq
from dataclasses import dataclass, replace

import numpy as np

from ._util import CoverageError, ParseError, fmt_num
from .oracle import CONFIG_COUNT, INTER_PHASES, SCHEMES, AcceleratorParams

STRATEGIES = ("random", "fcfs", "lifo", "sjf-nodes", "sjf-edges", "sjf-truth", "sjf-predicted")
TILING_POLICIES = ("random", "oracle", "predicted")

BASELINE_STRATEGIES = ("random", "fcfs", "lifo", "sjf-nodes", "sjf-edges")


@dataclass(frozen=True)
class Job:
    job_id: int
    graph_id: str
    release_time: float
    node_count: int
    edge_count: int


@dataclass(frozen=True)
class AcceleratorUnit:
    unit_id: int
    inter_phase: str
    params: AcceleratorParams

    def __post_init__(self):
        if self.inter_phase not in INTER_PHASES:
            raise ValueError(f"unknown inter-phase dataflow {self.inter_phase!r}")


@dataclass(frozen=True)
class ArrivalSpec:
    """Pareto inter-arrival process calibrated to a target utilization."""

    pareto_shape: float = 2.0
    target_utilization: float = 0.85
    seed: int = 0

    def __post_init__(self):
        if self.pareto_shape <= 1.0:
            raise ValueError("pareto_shape must exceed 1 (finite mean)")
        if not 0.0 < self.target_utilization < 1.0:
            raise ValueError("target_utilization must be in (0, 1)")


@dataclass(frozen=True)
class TraceRecord:
    job_id: int
    graph_id: str
    release: float
    start: float
    finish: float
    unit_id: int
    scheme: str
    exec_cycles: int
    predicted_cycles: float = None


@dataclass(frozen=True)
class ScheduleTrace:
    strategy: str
    tiling_policy: str
    seed: int
    records: tuple


@dataclass(frozen=True)
class SchedMetrics:
    mean_completion: float
    mean_turnaround: float
    mean_execution: float


def unit_scheme_cycles(truth_row: np.ndarray, inter_phase: str) -> np.ndarray:
    """The 8 per-scheme latencies of one graph on one inter-phase dataflow."""
    return truth_row[INTER_PHASES.index(inter_phase)::3]


def make_jobs(graphs) -> list:
    """One job per (graph_id, Graph) pair; ids follow sorted graph ids."""
    jobs = []
    for i, (gid, g) in enumerate(sorted(graphs, key=lambda item: item[0])):
        jobs.append(Job(job_id=i, graph_id=gid, release_time=0.0,
                        node_count=g.node_count, edge_count=g.edge_count))
    return jobs


def generate_arrivals(jobs, truth: dict, units, spec: ArrivalSpec) -> np.ndarray:
    """Pareto release times targeting ``spec.target_utilization``.

    The mean gap m solves m = s_mean / (|units| * U) where s_mean is the mean
    over jobs of the best latency over all (unit, scheme) pairs; the Pareto
    scale is x_m = m * (alpha - 1) / alpha so the gap mean equals m.
    """
    if not jobs or not units:
        raise ValueError("need jobs and units")
    if spec.pareto_shape <= 1.0:
        raise ValueError("pareto_shape must exceed 1")
    best = []
    for job in jobs:
        row = truth.get(job.graph_id)
        if row is None:
            raise CoverageError(f"no labels for graph {job.graph_id!r}")
        best.append(min(unit_scheme_cycles(row, u.inter_phase).min() for u in units))
    s_mean = float(np.mean(best))
    m = s_mean / (len(units) * spec.target_utilization)
    x_m = m * (spec.pareto_shape - 1.0) / spec.pareto_shape
    rng = np.random.default_rng(spec.seed)
    gaps = x_m * (1.0 + rng.pareto(spec.pareto_shape, size=len(jobs)))
    return np.cumsum(gaps)


def job_key(strategy: str, job: Job, unit: AcceleratorUnit, truth: dict = None,
            predictions: dict = None) -> float:
    """Ordering key for one (job, unit) pair; lower runs first."""
    if strategy == "fcfs":
        return job.release_time
    if strategy == "lifo":
        return -job.release_time
    if strategy == "sjf-nodes":
        return float(job.node_count)
    if strategy == "sjf-edges":
        return float(job.edge_count)
    if strategy == "sjf-truth":
        if truth is None or job.graph_id not in truth:
            raise CoverageError(f"no oracle latencies for graph {job.graph_id!r}")
        return float(unit_scheme_cycles(truth[job.graph_id], unit.inter_phase).min())
    if strategy == "sjf-predicted":
        if predictions is None or job.graph_id not in predictions:
            raise ValueError(f"sjf-predicted needs predictions for graph {job.graph_id!r}")
        return float(unit_scheme_cycles(np.asarray(predictions[job.graph_id]), unit.inter_phase).min())
    if strategy == "random":
        raise ValueError("random keys are drawn per decision inside run_schedule")
    raise ValueError(f"unknown strategy {strategy!r}")


def run_schedule(jobs, releases, units, strategy: str, tiling_policy: str,
                 truth: dict, predictions: dict = None, seed: int = 0,
                 inference_penalty_cycles: int = 0) -> ScheduleTrace:
    """Simulate one run; returns the per-job trace sorted by job id.

    ``inference_penalty_cycles`` optionally charges a fixed predictor-
    inference delay to each dispatch of the sjf-predicted strategy (off by
    default: the predictor is assumed to run off the critical path).
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    if tiling_policy not in TILING_POLICIES:
        raise ValueError(f"unknown tiling policy {tiling_policy!r}")
    if len(jobs) != len(releases):
        raise ValueError("jobs and releases must align")
    needs_preds = strategy == "sjf-predicted" or tiling_policy == "predicted"
    if needs_preds and predictions is None:
        raise ValueError(f"{strategy}/{tiling_policy} requires a prediction table")

    jobs = [replace(job, release_time=float(r)) for job, r in zip(jobs, releases)]
    for job in jobs:
        if job.graph_id not in truth:
            raise CoverageError(f"no oracle latencies for graph {job.graph_id!r}")

    srank = STRATEGIES.index(strategy)
    prank = TILING_POLICIES.index(tiling_policy)
    rng_order = np.random.default_rng([seed, srank, prank, 0])
    rng_tiling = np.random.default_rng([seed, srank, prank, 1])

    arrivals = sorted(range(len(jobs)), key=lambda i: (jobs[i].release_time, jobs[i].job_id))
    ptr = 0
    queue = []  # job indices, unordered; keys decide
    completions = []  # heap of (finish, unit_id)
    busy = {u.unit_id: False for u in units}
    units_sorted = sorted(units, key=lambda u: u.unit_id)
    records = []
    done = 0
    now = 0.0

    def dispatch(unit):
        nonlocal queue
        cand = sorted(queue, key=lambda i: (jobs[i].release_time, jobs[i].job_id))
        if strategy == "random":
            draws = rng_order.random(len(cand))
            keys = {i: float(d) for i, d in zip(cand, draws)}
        else:
            keys = {i: job_key(strategy, jobs[i], unit, truth, predictions) for i in cand}
        pick = min(cand, key=lambda i: (keys[i], jobs[i].release_time, jobs[i].job_id))
        queue.remove(pick)
        job = jobs[pick]
        true_row = truth[job.graph_id]
        true_schemes = unit_scheme_cycles(true_row, unit.inter_phase)
        predicted = None
        if tiling_policy == "oracle":
            scheme_idx = int(np.argmin(true_schemes))
        elif tiling_policy == "predicted":
            pred_schemes = unit_scheme_cycles(np.asarray(predictions[job.graph_id]), unit.inter_phase)
            scheme_idx = int(np.argmin(pred_schemes))
            predicted = float(pred_schemes[scheme_idx])
        else:
            scheme_idx = int(rng_tiling.integers(len(SCHEMES)))
        exec_cycles = int(true_schemes[scheme_idx])
        start = now
        if inference_penalty_cycles and strategy == "sjf-predicted":
            start += inference_penalty_cycles
        finish = start + exec_cycles
        records.append(TraceRecord(
            job_id=job.job_id, graph_id=job.graph_id, release=job.release_time,
            start=start, finish=finish, unit_id=unit.unit_id,
            scheme=SCHEMES[scheme_idx], exec_cycles=exec_cycles,
            predicted_cycles=predicted,
        ))
        busy[unit.unit_id] = True
        heapq.heappush(completions, (finish, unit.unit_id))

    while done < len(jobs):
        next_completion = completions[0][0] if completions else np.inf
        next_arrival = jobs[arrivals[ptr]].release_time if ptr < len(arrivals) else np.inf
        now = min(next_completion, next_arrival)
        # completions first at equal times, ascending unit id via the heap
        while completions and completions[0][0] == now:
            _, uid = heapq.heappop(completions)
            busy[uid] = False
            done += 1
        while ptr < len(arrivals) and jobs[arrivals[ptr]].release_time == now:
            queue.append(arrivals[ptr])
            ptr += 1
        for unit in units_sorted:
            if queue and not busy[unit.unit_id]:
                dispatch(unit)

    records.sort(key=lambda r: r.job_id)
    return ScheduleTrace(strategy=strategy, tiling_policy=tiling_policy, seed=seed,
                         records=tuple(records))


def metrics(trace: ScheduleTrace) -> SchedMetrics:
    if not trace.records:
        raise ValueError("empty trace")
    finish = np.asarray([r.finish for r in trace.records])
    release = np.asarray([r.release for r in trace.records])
    start = np.asarray([r.start for r in trace.records])
    return SchedMetrics(
        mean_completion=float(np.mean(finish)),
        mean_turnaround=float(np.mean(finish - release)),
        mean_execution=float(np.mean(finish - start)),
    )


# ---------------------------------------------------------------------------
# Scenario comparison
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Scenario:
    jobs: tuple
    units: tuple
    truth: dict
    predictions: dict
    cells: tuple  # of (strategy, tiling_policy)
    arrival: ArrivalSpec
    inference_penalty_cycles: int = 0


def scenario_one_cells() -> tuple:
    """Baselines pick tilings at random; sjf-truth gets the oracle tiling."""
    cells = [(s, "random") for s in BASELINE_STRATEGIES]
    cells.append(("sjf-truth", "oracle"))
    cells.append(("sjf-predicted", "predicted"))
    return tuple(cells)


def scenario_two_cells() -> tuple:
    """Every baseline (and sjf-truth) gets the oracle tiling."""
    cells = [(s, "oracle") for s in BASELINE_STRATEGIES]
    cells.append(("sjf-truth", "oracle"))
    cells.append(("sjf-predicted", "predicted"))
    return tuple(cells)


@dataclass(frozen=True)
class StrategyRow:
    strategy: str
    tiling_policy: str
    mean_completion: float
    mean_turnaround: float
    mean_execution: float
    norm_completion: float
    norm_turnaround: float
    norm_execution: float
    speedup_completion: float = None
    speedup_turnaround: float = None
    speedup_execution: float = None


def compare_strategies(scenario: Scenario, runs: int, base_seed: int) -> list:
    """Mean metrics per cell over ``runs`` seeds, with shared arrivals per run.

    Normalized columns divide by the per-metric maximum across cells;
    speedup columns divide each cell by the sjf-predicted cell (when present).
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    sums = {cell: np.zeros(3) for cell in scenario.cells}
    for r in range(runs):
        seed = base_seed + r
        arrivals = generate_arrivals(
            scenario.jobs, scenario.truth, scenario.units,
            replace(scenario.arrival, seed=seed),
        )
        for cell in scenario.cells:
            strategy, policy = cell
            trace = run_schedule(
                scenario.jobs, arrivals, scenario.units, strategy, policy,
                scenario.truth, scenario.predictions, seed=seed,
                inference_penalty_cycles=scenario.inference_penalty_cycles,
            )
            m = metrics(trace)
            sums[cell] += (m.mean_completion, m.mean_turnaround, m.mean_execution)

    means = {cell: sums[cell] / runs for cell in scenario.cells}
    max_per_metric = np.max(np.stack(list(means.values())), axis=0)
    ours = next((c for c in scenario.cells if c[0] == "sjf-predicted"), None)
    rows = []
    for cell in scenario.cells:
        mc, mt, me = means[cell]
        nc, nt, ne = means[cell] / max_per_metric
        speedups = (None, None, None)
        if ours is not None:
            speedups = tuple(means[cell] / means[ours])
        rows.append(StrategyRow(
            strategy=cell[0], tiling_policy=cell[1],
            mean_completion=float(mc), mean_turnaround=float(mt), mean_execution=float(me),
            norm_completion=float(nc), norm_turnaround=float(nt), norm_execution=float(ne),
            speedup_completion=None if speedups[0] is None else float(speedups[0]),
            speedup_turnaround=None if speedups[1] is None else float(speedups[1]),
            speedup_execution=None if speedups[2] is None else float(speedups[2]),
        ))
    return rows


# ---------------------------------------------------------------------------
# CSV formats
# ---------------------------------------------------------------------------

TRACE_CSV_HEADER = "job_id,graph_id,release,start,finish,unit_id,scheme,exec_cycles,predicted_cycles"

REPORT_CSV_HEADER = (
    "strategy,tiling_policy,mean_completion,mean_turnaround,mean_execution,"
    "norm_completion,norm_turnaround,norm_execution,"
    "speedup_completion,speedup_turnaround,speedup_execution"
)


def trace_to_csv(trace: ScheduleTrace) -> str:
    lines = [TRACE_CSV_HEADER]
    for r in trace.records:
        pred = "" if r.predicted_cycles is None else fmt_num(r.predicted_cycles)
        lines.append(
            f"{r.job_id},{r.graph_id},{fmt_num(r.release)},{fmt_num(r.start)},"
            f"{fmt_num(r.finish)},{r.unit_id},{r.scheme},{r.exec_cycles},{pred}"
        )
    return "\n".join(lines) + "\n"


def report_to_csv(rows) -> str:
    lines = [REPORT_CSV_HEADER]
    for r in rows:
        cells = [
            r.strategy,
            r.tiling_policy,
            fmt_num(r.mean_completion),
            fmt_num(r.mean_turnaround),
            fmt_num(r.mean_execution),
            fmt_num(r.norm_completion),
            fmt_num(r.norm_turnaround),
            fmt_num(r.norm_execution),
            "" if r.speedup_completion is None else fmt_num(r.speedup_completion),
            "" if r.speedup_turnaround is None else fmt_num(r.speedup_turnaround),
            "" if r.speedup_execution is None else fmt_num(r.speedup_execution),
        ]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def report_from_csv(text: str) -> list:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != REPORT_CSV_HEADER:
        raise ParseError("bad schedule report header")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 11:
            raise ParseError(f"line {lineno}: expected 11 columns")
        try:
            nums = [float(x) for x in parts[2:8]]
            speedups = [None if x == "" else float(x) for x in parts[8:]]
        except ValueError:
            raise ParseError(f"line {lineno}: non-numeric field") from None
        rows.append(StrategyRow(parts[0], parts[1], *nums, *speedups))
    return rows
