"""Random and deterministic graph families.

Every random generator takes a ``seed`` accepted by
:func:`numpy.random.default_rng` (an int, a ``SeedSequence`` or a
``Generator``). Experiment code derives one independent stream per
realization with :func:`realization_seed`, so results never depend on the
order in which realizations are computed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np
from scipy.stats import poisson

from .exceptions import InvalidDegree, InvalidDimension, InvalidLaw, InvalidParams, InvalidProbability
from .graph import Graph, _from_pairs, build_graph

#: below this edge probability G(n, p) skips over absent pairs geometrically
SKIP_THRESHOLD = 0.1
DEFAULT_MAX_NODES = 10**6
POISSON_TAIL = 1e-12


def realization_seed(master_seed: int, realization_index: int, *stream) -> np.random.SeedSequence:
    """Independent stream for one realization, keyed on (master seed, index[, substream])."""
    return np.random.SeedSequence(int(master_seed), spawn_key=(int(realization_index), *map(int, stream)))


@dataclass(frozen=True)
class OffspringLaw:
    """Child-count distribution ``probs[i] = P(i children)``."""

    probs: tuple

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or len(p) == 0:
            raise InvalidLaw("offspring law needs a nonempty probability vector")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise InvalidLaw(f"negative or non-finite probability in {self.probs}")
        if abs(p.sum() - 1.0) > 1e-12:
            raise InvalidLaw(f"probabilities sum to {p.sum():.15g}, not 1")
        object.__setattr__(self, "probs", tuple(float(x) for x in p))

    @property
    def mean(self) -> float:
        return float(np.dot(np.arange(len(self.probs)), self.probs))

    @property
    def first_support(self) -> int:
        """Smallest child count with positive probability."""
        return int(np.flatnonzero(np.asarray(self.probs) > 0)[0])

    @classmethod
    def poisson(cls, d: float) -> "OffspringLaw":
        """Poisson(d), cut where the cumulative mass passes 1 - 1e-12, then renormalized."""
        if not d > 0:
            raise InvalidLaw(f"Poisson mean must be positive, got {d}")
        k_max = int(poisson.ppf(1.0 - POISSON_TAIL, d))
        pmf = poisson.pmf(np.arange(k_max + 1), d)
        return cls(tuple(pmf / pmf.sum()))


# -- G(n, p) -------------------------------------------------------------------

def _check_p(p):
    if not (0.0 <= p <= 1.0) or math.isnan(p):
        raise InvalidProbability(f"edge probability must lie in [0, 1], got {p}")


def _pair_from_index(k, n):
    """Invert the row-major enumeration (0,1), (0,2), ..., (0,n-1), (1,2), ... of pairs."""
    # number of pairs before row i is i*(2n - i - 1)/2
    k = np.asarray(k, dtype=np.int64)
    b = 2 * n - 1
    i = np.floor((b - np.sqrt(b * b - 8.0 * k)) / 2).astype(np.int64)
    start = i * (2 * n - i - 1) // 2
    # float rounding can be off by one near row boundaries
    over = start > k
    i[over] -= 1
    start = i * (2 * n - i - 1) // 2
    under = k - start >= n - 1 - i
    i[under] += 1
    start = i * (2 * n - i - 1) // 2
    j = k - start + i + 1
    return i, j


def gen_gnp(n: int, p: float, seed=None) -> Graph:
    """Erdos-Renyi G(n, p): each pair present independently with probability ``p``.

    For ``p < SKIP_THRESHOLD`` the gaps between present pairs in the row-major
    pair order are drawn as Geometric(p) variables, which has exactly the
    law of independent per-pair coin flips at O(n + edges) cost.
    """
    n = int(n)
    if n < 0:
        raise InvalidDimension(f"n must be nonnegative, got {n}")
    _check_p(p)
    rng = np.random.default_rng(seed)
    total = n * (n - 1) // 2
    if total == 0 or p == 0.0:
        return build_graph(n, [])
    if p >= SKIP_THRESHOLD:
        return gnp_naive(n, p, rng)
    chosen = []
    pos = -1
    batch = max(16, int(1.2 * total * p) + 64)
    while True:
        # a gap beyond the last pair ends the scan whatever its size; capping keeps cumsum from overflowing
        gaps = np.minimum(rng.geometric(p, size=batch), total + 1)
        idx = pos + np.cumsum(gaps)
        inside = idx < total
        chosen.append(idx[inside])
        if not inside.all():
            break
        pos = int(idx[-1])
    k = np.concatenate(chosen)
    u, v = _pair_from_index(k, n)
    return _from_pairs(n, u, v)


def gnp_naive(n: int, p: float, seed=None) -> Graph:
    """Reference G(n, p): one uniform draw per pair, in row-major pair order."""
    _check_p(p)
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(int(n), k=1)
    keep = rng.random(len(iu)) < p
    return _from_pairs(int(n), iu[keep].astype(np.int64), ju[keep].astype(np.int64))


# -- trees ---------------------------------------------------------------------

class GaltonWatsonTree(NamedTuple):
    graph: Graph
    truncated: bool
    depth: np.ndarray
    #: child count drawn for each vertex; -1 where no draw happened
    #: (vertices at max_depth, or cut off by the node cap)
    offspring: np.ndarray


def gen_galton_watson(law: OffspringLaw, max_depth: int, max_nodes: int = DEFAULT_MAX_NODES,
                      seed=None) -> GaltonWatsonTree:
    """Branching-process tree grown generation by generation from vertex 0.

    Children are numbered breadth-first. Growth stops after ``max_depth``
    generations, at extinction, or when adding a generation would exceed
    ``max_nodes``; in the last case the generation is filled parent by parent
    up to the cap and ``truncated`` is set.
    """
    if not isinstance(law, OffspringLaw):
        raise InvalidLaw("law must be an OffspringLaw")
    if max_depth < 0:
        raise InvalidDimension(f"max_depth must be >= 0, got {max_depth}")
    if max_nodes < 1:
        raise InvalidDimension(f"max_nodes must be >= 1, got {max_nodes}")
    rng = np.random.default_rng(seed)
    probs = np.asarray(law.probs)
    parents = []
    drawn = []  # per generation: child counts, -1 where not drawn
    frontier = np.zeros(1, dtype=np.int64)
    total = 1
    truncated = False
    for level in range(max_depth):
        kids = rng.choice(len(probs), size=len(frontier), p=probs).astype(np.int64)
        record = kids.copy()
        if total + kids.sum() > max_nodes:
            room = max_nodes - total
            csum = np.cumsum(kids)
            full = int(np.searchsorted(csum, room, side="right"))
            kids = kids.copy()
            if full < len(kids):
                kids[full] = room - (int(csum[full - 1]) if full else 0)
                kids[full + 1:] = 0
                # only parents whose whole brood fit count as drawn
                record[full:] = -1
            truncated = True
        drawn.append(record)
        count = int(kids.sum())
        if count == 0:
            break
        parents.append(np.repeat(frontier, kids))
        frontier = np.arange(total, total + count, dtype=np.int64)
        total += count
        if truncated:
            break
    offspring = np.full(total, -1, dtype=np.int64)
    depth = np.zeros(total, dtype=np.int64)
    start = 0
    for level, record in enumerate(drawn):
        offspring[start:start + len(record)] = record
        start += len(record)
    start = 1
    for level, par in enumerate(parents, 1):
        depth[start:start + len(par)] = level
        start += len(par)
    if total == 1:
        return GaltonWatsonTree(build_graph(1, []), truncated, depth, offspring)
    g = _from_pairs(total, np.concatenate(parents), np.arange(1, total, dtype=np.int64))
    return GaltonWatsonTree(g, truncated, depth, offspring)


def truncated_tree_size(d: int, depth: int) -> int:
    if d == 2:
        return 2 * depth + 1
    return 1 + d * ((d - 1) ** depth - 1) // (d - 2)


def gen_truncated_tree(d: int, depth: int) -> Graph:
    """Ball of radius ``depth`` around a vertex of the infinite d-regular tree."""
    if int(d) != d or d < 2:
        raise InvalidDegree(f"tree degree must be an integer >= 2, got {d}")
    if depth < 0:
        raise InvalidDimension(f"depth must be >= 0, got {depth}")
    d = int(d)
    parents = []
    frontier = np.zeros(1, dtype=np.int64)
    total = 1
    for level in range(depth):
        fan = d if level == 0 else d - 1
        par = np.repeat(frontier, fan)
        parents.append(par)
        frontier = np.arange(total, total + len(par), dtype=np.int64)
        total += len(par)
    if total == 1:
        return build_graph(1, [])
    par = np.concatenate(parents)
    return _from_pairs(total, par, np.arange(1, total, dtype=np.int64))


# -- deterministic fixtures ----------------------------------------------------

def gen_fixture(kind: str, *dims: int) -> Graph:
    """Deterministic test graphs: path(n), cycle(n), grid(rows, cols), star(leaves), complete(n)."""
    if any(int(x) != x or x < 1 for x in dims) or not dims:
        raise InvalidDimension(f"{kind} needs positive integer dimensions, got {dims}")
    dims = tuple(int(x) for x in dims)
    if kind == "path":
        (n,) = dims
        return build_graph(n, [(i, i + 1) for i in range(n - 1)])
    if kind == "cycle":
        (n,) = dims
        if n < 3:
            raise InvalidDimension(f"a cycle needs at least 3 vertices, got {n}")
        return build_graph(n, [(i, (i + 1) % n) for i in range(n)])
    if kind == "grid":
        rows, cols = dims
        idx = np.arange(rows * cols).reshape(rows, cols)
        horiz = np.column_stack([idx[:, :-1].ravel(), idx[:, 1:].ravel()])
        vert = np.column_stack([idx[:-1, :].ravel(), idx[1:, :].ravel()])
        return build_graph(rows * cols, np.concatenate([horiz, vert]))
    if kind == "star":
        (k,) = dims
        return build_graph(k + 1, [(0, i) for i in range(1, k + 1)])
    if kind == "complete":
        (n,) = dims
        iu, ju = np.triu_indices(n, k=1)
        return build_graph(n, np.column_stack([iu, ju]))
    raise InvalidDimension(f"unknown fixture kind {kind!r}")


# -- generation specs ------------------------------------------------------------

FAMILIES = ("gnp", "galton_watson", "truncated_tree", "path", "cycle", "grid", "star", "complete")


@dataclass(frozen=True)
class GenSpec:
    """One realization of a graph family, fully determined by its fields.

    For ``gnp`` give either ``p`` or ``d`` (then ``p = d / n``). For
    ``galton_watson`` the law defaults to Poisson(d). ``dims`` parametrizes
    the deterministic fixtures.
    """

    family: str
    n: int | None = None
    p: float | None = None
    d: float | None = None
    depth: int | None = None
    law: OffspringLaw | None = None
    dims: tuple = field(default=())
    max_nodes: int = DEFAULT_MAX_NODES
    seed: int = 0
    realization_index: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidParams(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.family == "gnp":
            if self.n is None or (self.p is None and self.d is None):
                raise InvalidParams("gnp needs n and one of p, d")
            _check_p(self.edge_probability)
        elif self.family == "truncated_tree":
            if self.d is None or self.depth is None:
                raise InvalidParams("truncated_tree needs d and depth")
            if self.d < 2:
                raise InvalidDegree(f"truncated tree degree must be >= 2, got {self.d}")
        elif self.family == "galton_watson":
            if self.law is None and self.d is None:
                raise InvalidParams("galton_watson needs a law or a Poisson mean d")
            if self.depth is None:
                raise InvalidParams("galton_watson needs depth")

    @property
    def edge_probability(self) -> float:
        if self.p is not None:
            return float(self.p)
        return min(1.0, float(self.d) / self.n) if self.n else 0.0

    @property
    def offspring_law(self) -> OffspringLaw:
        return self.law if self.law is not None else OffspringLaw.poisson(self.d)

    def key(self) -> tuple:
        """Everything except the realization identity; equal keys mean same distribution."""
        if self.family == "gnp":
            return ("gnp", self.n, self.edge_probability)
        return (self.family, self.n, self.p, self.d, self.depth, self.law, self.dims, self.max_nodes)

    def stream(self) -> np.random.SeedSequence:
        return realization_seed(self.seed, self.realization_index)

    def with_realization(self, index: int) -> "GenSpec":
        return replace(self, realization_index=int(index))

    def generate(self) -> Graph:
        fam = self.family
        if fam == "gnp":
            return gen_gnp(self.n, self.edge_probability, self.stream())
        if fam == "galton_watson":
            return gen_galton_watson(self.offspring_law, self.depth, self.max_nodes, self.stream()).graph
        if fam == "truncated_tree":
            return gen_truncated_tree(int(self.d), self.depth)
        dims = self.dims or ((self.n,) if self.n is not None else ())
        return gen_fixture(fam, *dims)

