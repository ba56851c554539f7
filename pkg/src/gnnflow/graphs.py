"""Undirected graphs in CSR form plus the structural metrics used as model inputs.

Graphs are canonical: symmetrized, deduplicated, self-loop free, neighbor
lists sorted ascending. All metrics here depend only on the canonical CSR
arrays, so two graphs with identical edge sets always produce identical
numbers.
"""

import io
import re
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ._util import FormatError, ParseError

_NODES_DIRECTIVE = re.compile(rb"^#\s*nodes\s+(\d+)\s*$")


@dataclass(frozen=True)
class DegreeStats:
    """Degree summary: mean, extremes, and 7 max-normalized quantiles."""

    mean_degree: float
    max_degree: int
    min_degree: int
    quantiles: tuple  # 7 values in [0, 1], non-decreasing


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected graph in compressed sparse row form.

    ``row_offsets`` has length V+1; ``neighbor_ids`` stores both directions
    of every edge, so its length is 2E and ``row_offsets[V] == 2E``.
    """

    row_offsets: np.ndarray
    neighbor_ids: np.ndarray

    def __post_init__(self):
        self.row_offsets.setflags(write=False)
        self.neighbor_ids.setflags(write=False)

    @property
    def node_count(self) -> int:
        return len(self.row_offsets) - 1

    @property
    def edge_count(self) -> int:
        return len(self.neighbor_ids) // 2

    @cached_property
    def degrees(self) -> np.ndarray:
        d = np.diff(self.row_offsets)
        d.setflags(write=False)
        return d

    def neighbors(self, v: int) -> np.ndarray:
        return self.neighbor_ids[self.row_offsets[v] : self.row_offsets[v + 1]]

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return np.array_equal(self.row_offsets, other.row_offsets) and np.array_equal(
            self.neighbor_ids, other.neighbor_ids
        )

    @staticmethod
    def from_edges(edges, node_count=None) -> "Graph":
        """Build a canonical graph from raw (u, v) pairs.

        Self-loops are dropped, duplicates merged, and both directions
        stored. ``node_count`` defaults to max id + 1 (so trailing ids
        without edges are preserved only when passed explicitly).
        """
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if e.size and e.min() < 0:
            raise ValueError("node ids must be non-negative")
        implied = int(e.max()) + 1 if e.size else 0
        v_count = implied if node_count is None else int(node_count)
        if v_count < implied:
            raise ValueError(f"node_count {v_count} smaller than max id {implied - 1}")
        if v_count < 1:
            raise ValueError("graph must have at least one node")

        keep = e[:, 0] != e[:, 1]
        e = e[keep]
        if e.size:
            lo = np.minimum(e[:, 0], e[:, 1])
            hi = np.maximum(e[:, 0], e[:, 1])
            und = np.unique(np.stack([lo, hi], axis=1), axis=0)
            src = np.concatenate([und[:, 0], und[:, 1]])
            dst = np.concatenate([und[:, 1], und[:, 0]])
            order = np.lexsort((dst, src))
            src, dst = src[order], dst[order]
        else:
            src = dst = np.empty(0, dtype=np.int64)

        offsets = np.zeros(v_count + 1, dtype=np.int64)
        if src.size:
            offsets[1:] = np.cumsum(np.bincount(src, minlength=v_count))
        return Graph(row_offsets=offsets, neighbor_ids=dst)

    def undirected_edges(self) -> np.ndarray:
        """(E, 2) array of edges as (min, max) pairs in lexicographic order."""
        v = np.repeat(np.arange(self.node_count, dtype=np.int64), np.diff(self.row_offsets))
        w = self.neighbor_ids
        mask = v < w
        return np.stack([v[mask], w[mask]], axis=1)


# ---------------------------------------------------------------------------
# Loading and saving
# ---------------------------------------------------------------------------


def _as_bytes(source) -> bytes:
    if isinstance(source, bytes):
        return source
    if isinstance(source, str):
        return source.encode("utf-8")
    if isinstance(source, io.IOBase) or hasattr(source, "read"):
        data = source.read()
        return data if isinstance(data, bytes) else data.encode("utf-8")
    raise TypeError(f"unsupported source type {type(source)!r}")


def load_edge_list(source) -> Graph:
    """Parse whitespace-separated "u v" lines into a canonical Graph.

    Lines starting with ``#`` are comments. The canonical emitter writes a
    ``# nodes N`` directive comment; when present it fixes the node count so
    trailing isolated nodes survive a save/load round trip. Plain files get
    V = max id + 1.
    """
    data = _as_bytes(source)
    edges = []
    declared_nodes = None
    saw_content = False
    for lineno, raw in enumerate(data.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith(b"#"):
            m = _NODES_DIRECTIVE.match(line)
            if m:
                declared_nodes = int(m.group(1))
                saw_content = True
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"line {lineno}: expected two integers, got {len(parts)} tokens")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"line {lineno}: non-integer token") from None
        if u < 0 or v < 0:
            raise ParseError(f"line {lineno}: negative node id")
        edges.append((u, v))
        saw_content = True
    if not saw_content:
        raise ParseError("empty edge list")
    return Graph.from_edges(edges, node_count=declared_nodes)


def save_edge_list(g: Graph) -> str:
    """Canonical text form: node-count directive, then (min, max)-sorted edges."""
    lines = [f"# nodes {g.node_count}"]
    for u, v in g.undirected_edges():
        lines.append(f"{u} {v}")
    return "\n".join(lines) + "\n"


def load_matrix_market(source) -> Graph:
    """Extract the adjacency pattern from a Matrix Market coordinate file.

    Supports pattern/real/integer fields with general or symmetric symmetry
    on square matrices; everything else is rejected.
    """
    data = _as_bytes(source)
    lines = data.splitlines()
    if not lines:
        raise FormatError("empty file")
    header = lines[0].split()
    if len(header) != 5 or header[0].lower() != b"%%matrixmarket":
        raise FormatError("missing MatrixMarket header")
    obj, fmt, field, symmetry = (tok.lower() for tok in header[1:])
    if obj != b"matrix":
        raise FormatError(f"unsupported object {obj.decode()!r}")
    if fmt != b"coordinate":
        raise FormatError(f"unsupported format {fmt.decode()!r} (only coordinate)")
    if field not in (b"pattern", b"real", b"integer"):
        raise FormatError(f"unsupported field {field.decode()!r}")
    if symmetry not in (b"general", b"symmetric"):
        raise FormatError(f"unsupported symmetry {symmetry.decode()!r}")

    body = [ln for ln in lines[1:] if ln.strip() and not ln.lstrip().startswith(b"%")]
    if not body:
        raise FormatError("missing size line")
    size_tokens = body[0].split()
    if len(size_tokens) != 3:
        raise FormatError("size line must be 'rows cols nnz'")
    try:
        rows, cols, nnz = (int(t) for t in size_tokens)
    except ValueError:
        raise FormatError("non-integer size line") from None
    if rows != cols:
        raise FormatError(f"adjacency matrix must be square, got {rows}x{cols}")
    if len(body) - 1 != nnz:
        raise FormatError(f"expected {nnz} entries, found {len(body) - 1}")

    want = 2 if field == b"pattern" else 3
    edges = []
    for k, raw in enumerate(body[1:], start=1):
        parts = raw.split()
        if len(parts) != want:
            raise ParseError(f"entry {k}: expected {want} tokens")
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"entry {k}: non-integer coordinate") from None
        if not (1 <= i <= rows and 1 <= j <= cols):
            raise FormatError(f"entry {k}: coordinate ({i}, {j}) outside {rows}x{cols}")
        edges.append((i - 1, j - 1))
    return Graph.from_edges(edges, node_count=rows)


# ---------------------------------------------------------------------------
# Structural metrics
# ---------------------------------------------------------------------------

_QUANTILE_COUNT = 7


def degree_stats(g: Graph) -> DegreeStats:
    """Mean degree plus 7 nearest-rank quantiles normalized by the max degree.

    Quantile probabilities are k/6 for k = 0..6 (endpoints included, so the
    minimum and maximum degree are always covered); the nearest-rank index
    ceil(k*V/6) is computed in integer arithmetic and clamped to [1, V].
    """
    v = g.node_count
    if v < 1:
        raise ValueError("degree_stats requires at least one node")
    mean = (2 * g.edge_count) / v
    sorted_deg = np.sort(g.degrees)
    max_deg = int(sorted_deg[-1])
    min_deg = int(sorted_deg[0])
    if max_deg == 0:
        quantiles = (0.0,) * _QUANTILE_COUNT
    else:
        qs = []
        for k in range(_QUANTILE_COUNT):
            rank = -(-k * v // 6)  # ceil(k*V/6) without float error
            rank = min(max(rank, 1), v)
            qs.append(int(sorted_deg[rank - 1]) / max_deg)
        quantiles = tuple(qs)
    return DegreeStats(mean_degree=mean, max_degree=max_deg, min_degree=min_deg, quantiles=quantiles)


def density(g: Graph) -> float:
    """Edge density E / V^2 (undirected edges counted once)."""
    v = g.node_count
    if v < 1:
        raise ValueError("density requires at least one node")
    return g.edge_count / (v * v)


_DENSE_CLUSTERING_LIMIT = 2048


def clustering_coefficient(g: Graph) -> float:
    """Average local clustering coefficient.

    Nodes with degree < 2 contribute 0; the denominator is V. Small graphs
    use an exact dense triangle count (integer-valued float matmul), large
    ones a sorted-neighbor merge; both count the same triangles.
    """
    v = g.node_count
    deg = g.degrees
    eligible = deg >= 2
    if not eligible.any():
        return 0.0
    if v <= _DENSE_CLUSTERING_LIMIT:
        adj = np.zeros((v, v), dtype=np.float64)
        src = np.repeat(np.arange(v, dtype=np.int64), deg)
        adj[src, g.neighbor_ids] = 1.0
        # diag(A^3)[v] = 2 * (edges among neighbors of v); exact: all
        # intermediate values are integers far below 2^53.
        links2 = ((adj @ adj) * adj).sum(axis=1)
    else:
        links2 = np.zeros(v)
        rows = [g.neighbors(u) for u in range(v)]
        for u in np.nonzero(eligible)[0]:
            mine = rows[u]
            links2[u] = sum(
                np.searchsorted(rows[w], mine, side="right").sum()
                - np.searchsorted(rows[w], mine, side="left").sum()
                for w in mine
            )
    d = deg[eligible].astype(np.float64)
    local = links2[eligible] / (d * (d - 1.0))
    # cumsum accumulates sequentially, so the result matches a plain
    # node-by-node summation bit for bit
    return float(np.cumsum(local)[-1] / v)
