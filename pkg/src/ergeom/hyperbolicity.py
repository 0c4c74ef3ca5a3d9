"""Geodesic triangles, their insize/thinness, and curvature profiles."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .exceptions import EmptyGraph, EmptyInput, InsufficientProfiles, InvalidParams, Unreachable
from .graph import Graph, geodesic

#: largest vertex count for which sampling precomputes an all-pairs table
TABLE_MAX_VERTICES = 8192
MODES = ("shortest_side", "longest_side")


@dataclass(frozen=True)
class TrianglePath:
    a: int
    b: int
    c: int
    ab: np.ndarray
    bc: np.ndarray
    ca: np.ndarray

    @property
    def sides(self) -> tuple[int, int, int]:
        return len(self.ab) - 1, len(self.bc) - 1, len(self.ca) - 1

    @property
    def degenerate(self) -> bool:
        return len({self.a, self.b, self.c}) < 3


@dataclass(frozen=True)
class DeltaStat:
    triangle: TrianglePath
    delta_minmax: int
    delta_thin: int
    witness: int


def triangle_paths(g: Graph, a: int, b: int, c: int) -> TrianglePath:
    """Canonical sides [AB], [BC], [CA] (each rooted at its first vertex)."""
    return TrianglePath(int(a), int(b), int(c), geodesic(g, a, b), geodesic(g, b, c), geodesic(g, c, a))


def _pack(t: TrianglePath):
    sides = (t.ab, t.bc, t.ca)
    width = max(len(s) for s in sides)
    paths = np.zeros((3, width), dtype=np.int64)
    for i, s in enumerate(sides):
        paths[i, :len(s)] = s
    return paths, np.array([len(s) for s in sides], dtype=np.int64)


def delta_stat(g: Graph, t: TrianglePath) -> DeltaStat:
    paths, lengths = _pack(t)
    insize, witness, thin = _kernels.triangle_deltas(g.indptr, g.indices, paths, lengths)
    if insize < 0:
        raise Unreachable("triangle sides lie in different components")
    return DeltaStat(t, int(insize), int(thin), int(witness))


def delta_minmax(g: Graph, t: TrianglePath) -> tuple[int, int]:
    """Insize min_D max_side d(D, side) and the smallest vertex attaining it."""
    s = delta_stat(g, t)
    return s.delta_minmax, s.witness


def delta_thin_min(g: Graph, t: TrianglePath) -> int:
    """Smallest delta for which every side lies in the delta-neighbourhood of the other two."""
    return delta_stat(g, t).delta_thin


@dataclass
class TriangleSample:
    """Columnar results for a batch of triangles drawn from one graph."""

    triples: np.ndarray
    sides: np.ndarray
    delta_minmax: np.ndarray
    delta_thin: np.ndarray
    witness: np.ndarray

    def __len__(self):
        return len(self.triples)

    @property
    def degenerate(self) -> np.ndarray:
        t = self.triples
        return (t[:, 0] == t[:, 1]) | (t[:, 1] == t[:, 2]) | (t[:, 0] == t[:, 2])

    def stat(self, g: Graph, i: int) -> DeltaStat:
        a, b, c = self.triples[i]
        return DeltaStat(triangle_paths(g, a, b, c), int(self.delta_minmax[i]),
                         int(self.delta_thin[i]), int(self.witness[i]))

    @classmethod
    def concat(cls, samples) -> "TriangleSample":
        samples = list(samples)
        return cls(*(np.concatenate([getattr(s, f) for s in samples]) for f in
                     ("triples", "sides", "delta_minmax", "delta_thin", "witness")))

    @classmethod
    def from_stats(cls, stats) -> "TriangleSample":
        stats = list(stats)
        return cls(
            np.array([[s.triangle.a, s.triangle.b, s.triangle.c] for s in stats], dtype=np.int64).reshape(-1, 3),
            np.array([s.triangle.sides for s in stats], dtype=np.int64).reshape(-1, 3),
            np.array([s.delta_minmax for s in stats], dtype=np.int64),
            np.array([s.delta_thin for s in stats], dtype=np.int64),
            np.array([s.witness for s in stats], dtype=np.int64),
        )


def distance_table(g: Graph) -> np.ndarray:
    return _kernels.all_pairs_distances(g.indptr, g.indices)


def evaluate_triples(g: Graph, triples, table=None) -> TriangleSample:
    triples = np.ascontiguousarray(triples, dtype=np.int64).reshape(-1, 3)
    if table is None and g.n <= TABLE_MAX_VERTICES and len(triples) > g.n // 8:
        table = distance_table(g)
    if table is not None:
        out = _kernels.triangle_batch_table(g.indptr, g.indices, table, triples)
    else:
        out = _kernels.triangle_batch(g.indptr, g.indices, triples)
    sides, insize, witness, thin = out
    sample = TriangleSample(triples, sides, insize, thin, witness)
    if len(sample) and sample.delta_minmax.min() < 0:
        raise Unreachable("sampled triangle spans more than one component")
    return sample


def sample_triangles(g: Graph, count: int, seed=None, table=None) -> TriangleSample:
    """Insize and thinness for ``count`` uniform i.i.d. vertex triples.

    Repeated vertices are allowed and kept; :func:`curvature_profile` drops
    them. ``g`` must be connected (pass the giant component).
    """
    if count < 1:
        raise InvalidParams(f"triangle count must be >= 1, got {count}")
    if g.n == 0:
        raise EmptyGraph("cannot sample triangles from an empty graph")
    rng = np.random.default_rng(seed)
    triples = rng.integers(0, g.n, size=(int(count), 3))
    return evaluate_triples(g, triples, table)


# -- profiles ------------------------------------------------------------------

def _grow(a, size):
    if len(a) >= size:
        return a
    return np.concatenate([a, np.zeros(size - len(a), dtype=a.dtype)])


@dataclass
class CurvatureProfile:
    """Per-side-length sums of the insize; index ``l`` of each array is the bin ``l``.

    Integer sums keep merging exact and order independent.
    """

    mode: str
    counts: np.ndarray
    sums: np.ndarray
    sumsq: np.ndarray
    n: int | None = None
    d: float | None = None
    realization_count: int = 1
    discarded: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def bins(self) -> np.ndarray:
        return np.flatnonzero(self.counts)

    @property
    def count(self) -> np.ndarray:
        return self.counts[self.bins]

    @property
    def mean_delta(self) -> np.ndarray:
        b = self.bins
        return self.sums[b] / self.counts[b]

    @property
    def std_error(self) -> np.ndarray:
        b = self.bins
        c = self.counts[b].astype(float)
        mean = self.sums[b] / c
        with np.errstate(invalid="ignore", divide="ignore"):
            var = (self.sumsq[b] - c * mean**2) / (c - 1)
            return np.sqrt(np.maximum(var, 0.0)) / np.sqrt(c)

    def pooled(self, bins) -> tuple[float, float, int]:
        """Mean, standard error and count of the insize over the triangles in ``bins``."""
        bins = np.asarray(bins, dtype=np.int64)
        c = int(self.counts[bins].sum())
        if c == 0:
            raise EmptyInput(f"no triangles in bins {bins.tolist()}")
        s = float(self.sums[bins].sum())
        q = float(self.sumsq[bins].sum())
        mean = s / c
        var = (q - c * mean**2) / (c - 1) if c > 1 else float("nan")
        return mean, float(np.sqrt(max(var, 0.0) / c)), c

    def merge(self, other: "CurvatureProfile") -> "CurvatureProfile":
        if other.mode != self.mode:
            raise InvalidParams(f"cannot merge {self.mode} and {other.mode} profiles")
        size = max(len(self.counts), len(other.counts))
        return CurvatureProfile(
            self.mode,
            _grow(self.counts, size) + _grow(other.counts, size),
            _grow(self.sums, size) + _grow(other.sums, size),
            _grow(self.sumsq, size) + _grow(other.sumsq, size),
            self.n if self.n == other.n else None,
            self.d if self.d == other.d else None,
            self.realization_count + other.realization_count,
            self.discarded + other.discarded,
        )


def curvature_profile(stats, mode: str = "shortest_side", n=None, d=None) -> CurvatureProfile:
    """Bin insize values by the shortest (or longest) side of each triangle.

    ``stats`` is a :class:`TriangleSample` or a sequence of :class:`DeltaStat`.
    Degenerate triangles (a repeated vertex) are counted in ``discarded``.
    """
    if mode not in MODES:
        raise InvalidParams(f"mode must be one of {MODES}, got {mode!r}")
    if not isinstance(stats, TriangleSample):
        stats = list(stats)
        if not stats:
            raise EmptyInput("no triangle statistics to profile")
        stats = TriangleSample.from_stats(stats)
    if len(stats) == 0:
        raise EmptyInput("no triangle statistics to profile")
    keep = ~stats.degenerate
    sides = stats.sides[keep]
    delta = stats.delta_minmax[keep]
    key = sides.min(axis=1) if mode == "shortest_side" else sides.max(axis=1)
    size = int(key.max()) + 1 if len(key) else 1
    return CurvatureProfile(
        mode,
        np.bincount(key, minlength=size).astype(np.int64),
        np.bincount(key, weights=delta, minlength=size).round().astype(np.int64),
        np.bincount(key, weights=delta.astype(np.float64) ** 2, minlength=size).round().astype(np.int64),
        n=n, d=d, discarded=int((~keep).sum()),
    )


def merge_profiles(profiles) -> CurvatureProfile:
    profiles = list(profiles)
    if not profiles:
        raise EmptyInput("no profiles to merge")
    out = profiles[0]
    for p in profiles[1:]:
        out = out.merge(p)
    return out


def plateau(profile: CurvatureProfile, top: int = 3, diameter: int | None = None):
    """Pooled mean insize over the ``top`` most populated bins at or beyond diameter/2.

    ``diameter`` defaults to the largest populated bin. Returns
    ``(mean, std_error, bins)``.
    """
    bins = profile.bins
    if len(bins) == 0:
        raise EmptyInput("empty profile")
    if diameter is None:
        diameter = int(bins.max())
    far = bins[bins >= diameter / 2]
    if len(far) == 0:
        far = bins
    order = np.argsort(-profile.counts[far], kind="stable")
    chosen = np.sort(far[order[:top]])
    mean, se, _ = profile.pooled(chosen)
    return mean, se, chosen


# -- rescaled collapse ---------------------------------------------------------

@dataclass
class CollapseResult:
    c1: float
    c2: float
    residual: float
    baseline_residual: float
    n_ref: int
    #: per profile: (n, shifted side lengths, shifted mean insize)
    curves: list


def _curve(profile, min_count, l_min):
    b = profile.bins
    keep = (profile.counts[b] >= min_count) & (b >= l_min)
    return b[keep].astype(float), (profile.sums[b] / profile.counts[b])[keep]


def rescale_collapse(profiles, c_max: float = 3.0, step: float = 0.01, min_count: int = 1,
                     l_min: int = 1, min_overlap: int = 3) -> CollapseResult:
    """Fit shifts ``delta - c1 ln(n/n_ref)`` against ``l - c2 ln(n/n_ref)``.

    Grid search over ``c1, c2 in [0, c_max]``. The residual is the mean squared
    vertical gap between every pair of shifted curves, each point of one
    curve compared with the linear interpolation of the other on their
    common support. A mean rather than a sum keeps a shift that merely
    shrinks the overlap from looking like a good fit; pairs with fewer than
    ``min_overlap`` common points make a grid point infeasible.
    """
    profiles = list(profiles)
    if len(profiles) < 2:
        raise InsufficientProfiles(f"need at least 2 profiles, got {len(profiles)}")
    if any(p.n is None for p in profiles):
        raise InvalidParams("every profile needs its graph size n")
    if any(p.mode != "shortest_side" for p in profiles):
        raise InvalidParams("collapse is defined for shortest-side profiles")
    n_ref = min(p.n for p in profiles)
    shifts = [float(np.log(p.n / n_ref)) for p in profiles]
    curves = [_curve(p, min_count, l_min) for p in profiles]
    grid = np.round(np.arange(0.0, c_max + step / 2, step), 10)

    # for fixed c2, each pair contributes sum (e - c1*ds)^2 over its overlap,
    # a quadratic in c1 evaluated on the whole c1 grid at once
    best = (np.inf, 0.0, 0.0)
    baseline = None
    for c2 in grid:
        s_e = np.zeros_like(grid)
        count = 0
        feasible = True
        for i in range(len(curves)):
            for j in range(len(curves)):
                if i == j:
                    continue
                xi, yi = curves[i]
                xj, yj = curves[j]
                if len(xi) < 2 or len(xj) == 0:
                    feasible = False
                    break
                # curve j's points, moved into curve i's unshifted coordinates
                x = xj - c2 * shifts[j] + c2 * shifts[i]
                inside = (x >= xi[0]) & (x <= xi[-1])
                if inside.sum() < min_overlap:
                    feasible = False
                    break
                e = yj[inside] - np.interp(x[inside], xi, yi)
                ds = shifts[j] - shifts[i]
                s_e += (e**2).sum() - 2 * grid * ds * e.sum() + grid**2 * ds**2 * inside.sum()
                count += int(inside.sum())
            if not feasible:
                break
        if not feasible:
            continue
        mse = s_e / count
        if c2 == 0.0:
            baseline = float(mse[0])
        k = int(np.argmin(mse))
        if mse[k] < best[0] - 1e-15:
            best = (float(mse[k]), float(grid[k]), float(c2))
    if not np.isfinite(best[0]):
        raise InsufficientProfiles("profiles do not overlap enough for any shift")
    _, c1, c2 = best
    out = []
    for p, s, (x, y) in zip(profiles, shifts, curves):
        out.append((p.n, x - c2 * s, y - c1 * s))
    return CollapseResult(c1, c2, best[0], baseline if baseline is not None else float("nan"), n_ref, out)
