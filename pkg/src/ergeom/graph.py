"""Immutable undirected simple graphs in CSR form, plus BFS machinery."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from . import _kernels
from .exceptions import DuplicateEdge, GraphError, OutOfRangeVertex, SelfLoop, Unreachable

#: distance value for vertices a BFS never reached; use ``BfsResult.distance``
#: for checked access
UNREACHABLE = -1


def _frozen(a, dtype=np.int64):
    a = np.ascontiguousarray(a, dtype=dtype)
    a.setflags(write=False)
    return a


class Graph:
    """Undirected simple graph on vertices ``0..n-1``.

    Adjacency is stored as CSR arrays (``indptr``, ``indices``) with each
    neighbour list sorted ascending; both arrays are read-only. Build one with
    :func:`build_graph` rather than calling the constructor directly.
    """

    __slots__ = ("_n", "_indptr", "_indices")

    def __init__(self, n, indptr, indices):
        object.__setattr__(self, "_n", int(n))
        object.__setattr__(self, "_indptr", _frozen(indptr))
        object.__setattr__(self, "_indices", _frozen(indices))

    def __setattr__(self, name, value):
        raise AttributeError("Graph is immutable")

    @property
    def n(self) -> int:
        return self._n

    @property
    def indptr(self) -> np.ndarray:
        return self._indptr

    @property
    def indices(self) -> np.ndarray:
        return self._indices

    @property
    def edge_count(self) -> int:
        return len(self._indices) // 2

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self._indptr)

    def degree(self, v: int) -> int:
        self._check_vertex(v)
        return int(self._indptr[v + 1] - self._indptr[v])

    def neighbors(self, v: int) -> np.ndarray:
        self._check_vertex(v)
        return self._indices[self._indptr[v]:self._indptr[v + 1]]

    def volume(self, vertices=None) -> int:
        """Sum of degrees over ``vertices`` (all vertices when omitted)."""
        if vertices is None:
            return len(self._indices)
        return int(self.degrees[np.asarray(list(vertices), dtype=np.int64)].sum())

    def edges(self) -> np.ndarray:
        """Edge array of shape (m, 2) with ``u < v``, sorted lexicographically."""
        rows = np.repeat(np.arange(self._n), self.degrees)
        keep = rows < self._indices
        return np.column_stack([rows[keep], self._indices[keep]])

    def adjacency_matrix(self) -> sp.csr_matrix:
        data = np.ones(len(self._indices))
        return sp.csr_matrix((data, self._indices, self._indptr), shape=(self._n, self._n))

    def validate(self) -> None:
        """Re-check the canonical-form invariants; raise ``GraphError`` on failure."""
        n, indptr, indices = self._n, self._indptr, self._indices
        if len(indptr) != n + 1 or indptr[0] != 0 or indptr[-1] != len(indices):
            raise GraphError("malformed indptr")
        if np.any(np.diff(indptr) < 0):
            raise GraphError("indptr not monotone")
        if len(indices) and (indices.min() < 0 or indices.max() >= n):
            raise OutOfRangeVertex("neighbour index out of range")
        rows = np.repeat(np.arange(n), self.degrees)
        if np.any(rows == indices):
            raise SelfLoop("self-loop present")
        # strictly increasing within each row: sorted and duplicate-free
        same_row = rows[1:] == rows[:-1]
        if np.any(indices[1:][same_row] <= indices[:-1][same_row]):
            raise DuplicateEdge("neighbour lists not strictly ascending")
        fwd = rows * n + indices
        rev = indices * n + rows
        if not np.array_equal(np.sort(fwd), np.sort(rev)):
            raise GraphError("adjacency is not symmetric")

    def _check_vertex(self, v):
        if not 0 <= v < self._n:
            raise OutOfRangeVertex(f"vertex {v} not in [0, {self._n})")

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (self._n == other._n and np.array_equal(self._indptr, other._indptr)
                and np.array_equal(self._indices, other._indices))

    def __hash__(self):
        return hash((self._n, self._indptr.tobytes(), self._indices.tobytes()))

    def __repr__(self):
        return f"Graph(n={self._n}, edges={self.edge_count})"


def build_graph(n: int, edges) -> Graph:
    """Canonical graph from an edge list; pairs may come in either orientation.

    Raises OutOfRangeVertex, SelfLoop or DuplicateEdge rather than repairing
    the input.
    """
    n = int(n)
    if n < 0:
        raise GraphError(f"vertex count must be nonnegative, got {n}")
    e = np.asarray(edges, dtype=np.int64)
    if e.size == 0:
        return Graph(n, np.zeros(n + 1, dtype=np.int64), np.empty(0, dtype=np.int64))
    e = e.reshape(-1, 2)
    bad = (e < 0) | (e >= n)
    if bad.any():
        i = int(np.argmax(bad.any(axis=1)))
        raise OutOfRangeVertex(f"edge {tuple(e[i])} has an endpoint outside [0, {n})")
    loops = e[:, 0] == e[:, 1]
    if loops.any():
        raise SelfLoop(f"self-loop at vertex {int(e[np.argmax(loops), 0])}")
    lo = e.min(axis=1)
    hi = e.max(axis=1)
    key = lo * n + hi
    order = np.argsort(key, kind="stable")
    dup = key[order][1:] == key[order][:-1]
    if dup.any():
        k = int(key[order][1:][dup][0])
        raise DuplicateEdge(f"edge ({k // n}, {k % n}) appears more than once")
    return _from_pairs(n, lo, hi)


def _from_pairs(n, u, v):
    """CSR from unique, loop-free pairs (no validation)."""
    rows = np.concatenate([u, v])
    cols = np.concatenate([v, u])
    order = np.lexsort((cols, rows))
    counts = np.bincount(rows, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return Graph(n, indptr, cols[order])


@dataclass(frozen=True)
class ComponentLabeling:
    label: np.ndarray
    sizes: np.ndarray
    giant_id: int

    @property
    def count(self) -> int:
        return len(self.sizes)

    def members(self, component_id: int) -> np.ndarray:
        return np.flatnonzero(self.label == component_id)

    def giant(self) -> np.ndarray:
        return self.members(self.giant_id)


def components(g: Graph) -> ComponentLabeling:
    """Connected components, numbered in order of their smallest vertex."""
    if g.n == 0:
        return ComponentLabeling(np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64), -1)
    _, raw = connected_components(g.adjacency_matrix(), directed=False)
    # relabel so component ids follow first appearance
    _, first = np.unique(raw, return_index=True)
    order = np.argsort(first)
    remap = np.empty_like(order)
    remap[order] = np.arange(len(order))
    label = remap[raw].astype(np.int64)
    sizes = np.bincount(label)
    return ComponentLabeling(label, sizes, int(np.argmax(sizes)))


def induced_subgraph(g: Graph, vertices) -> tuple[Graph, dict[int, int]]:
    """Subgraph on ``vertices`` relabelled to ``0..k-1`` in ascending old order.

    Returns the graph and the old -> new vertex map.
    """
    verts = np.unique(np.asarray(list(vertices), dtype=np.int64))
    if len(verts) and (verts[0] < 0 or verts[-1] >= g.n):
        raise OutOfRangeVertex(f"vertex set leaves [0, {g.n})")
    new_id = np.full(g.n, -1, dtype=np.int64)
    new_id[verts] = np.arange(len(verts))
    e = g.edges()
    if len(e):
        keep = (new_id[e[:, 0]] >= 0) & (new_id[e[:, 1]] >= 0)
        e = new_id[e[keep]]
    sub = _from_pairs(len(verts), e[:, 0], e[:, 1]) if len(e) else build_graph(len(verts), [])
    return sub, {int(old): i for i, old in enumerate(verts)}


def giant_component(g: Graph) -> tuple[Graph, np.ndarray]:
    """Largest component as a compact graph, with the original ids of its vertices."""
    labels = components(g)
    if labels.count == 0:
        return g, np.empty(0, dtype=np.int64)
    verts = labels.giant()
    sub, _ = induced_subgraph(g, verts)
    return sub, verts


@dataclass(frozen=True)
class BfsResult:
    """Hop distances and canonical parents from one source.

    ``dist`` holds :data:`UNREACHABLE` for vertices in other components and
    ``parent`` holds -1 for those and for the source. Prefer
    :meth:`distance`, which raises instead of returning the sentinel.
    """

    source: int
    dist: np.ndarray
    parent: np.ndarray

    def reachable(self, v: int) -> bool:
        return bool(self.dist[v] != UNREACHABLE)

    def distance(self, v: int) -> int:
        d = int(self.dist[v])
        if d == UNREACHABLE:
            raise Unreachable(f"vertex {v} is not reachable from {self.source}")
        return d


def bfs(g: Graph, source: int) -> BfsResult:
    g._check_vertex(source)
    dist, parent = _kernels.bfs_full(g.indptr, g.indices, int(source))
    dist.setflags(write=False)
    parent.setflags(write=False)
    return BfsResult(int(source), dist, parent)


def geodesic(g: Graph, a: int, b: int) -> np.ndarray:
    """Canonical shortest path a -> b: the lowest-index parent chain of a BFS from ``a``."""
    g._check_vertex(a)
    g._check_vertex(b)
    path = _kernels.geodesic(g.indptr, g.indices, int(a), int(b))
    if len(path) == 0:
        raise Unreachable(f"no path between {a} and {b}")
    return path


def write_edge_list(g: Graph, path) -> None:
    lines = [f"# n={g.n}"]
    lines += [f"{u} {v}" for u, v in g.edges()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_edge_list(path) -> Graph:
    n = None
    pairs = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("n="):
                n = int(body[2:])
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphError(f"{path}:{lineno}: expected 'u v', got {line!r}")
        pairs.append((int(parts[0]), int(parts[1])))
    if n is None:
        raise GraphError(f"{path}: missing '# n=<count>' header")
    return build_graph(n, pairs)
