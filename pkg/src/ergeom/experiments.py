"""Seeded realization sweeps shared by the command line and the acceptance suite.

Each realization is a pure function of (master seed, realization index), so
a worker pool only changes wall-clock time. Results are gathered in
realization order and merged with exact integer or order-fixed arithmetic.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np
from threadpoolctl import threadpool_limits

from . import asymptotics as asy
from .exceptions import EmptyInput, ErgeomError
from .generators import GenSpec, realization_seed
from .graph import giant_component
from .hyperbolicity import MODES, CurvatureProfile, curvature_profile, merge_profiles, sample_triangles
from .spectral import (DENSE_CAP, EXACT_CHEEGER_CAP, build_laplacian, cheeger_exact, cheeger_sandwich_check,
                       eigenvalues, lambda0)

#: substream of a realization's seed used for triangle sampling
TRIANGLE_STREAM = 1


def _single_thread():
    threadpool_limits(1)


def parallel_map(fn, items, workers: int = 1) -> list:
    """``list(map(fn, items))``, optionally on a process pool; order is preserved.

    BLAS runs single-threaded on both paths: threaded reductions could
    otherwise change the last bits of eigenvalues with the worker count.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        with threadpool_limits(1):
            return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items)), initializer=_single_thread) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def default_workers() -> int:
    return max(1, min(8, os.cpu_count() or 1))


# -- spectra -------------------------------------------------------------------------

def realization_spectrum(spec: GenSpec, dense_cap: int = DENSE_CAP) -> np.ndarray:
    g = spec.generate()
    if spec.family == "gnp":
        g, _ = giant_component(g)
    return eigenvalues(build_laplacian(g), dense_cap)


def spectra(spec: GenSpec, realizations: int, workers: int = 1, dense_cap: int = DENSE_CAP) -> list:
    specs = [spec.with_realization(r) for r in range(realizations)]
    return parallel_map(partial(realization_spectrum, dense_cap=dense_cap), specs, workers)


def realization_gap(spec: GenSpec, dense_cap: int = DENSE_CAP) -> float:
    g, _ = giant_component(spec.generate())
    return lambda0(g, dense_cap)


@dataclass
class GapRow:
    n: int
    median: float
    q1: float
    q3: float
    values: np.ndarray


def gap_scan(ns, d: float, realizations: int, seed: int, workers: int = 1, family: str = "gnp",
             dense_cap: int = DENSE_CAP) -> list[GapRow]:
    """Quartiles of lambda0 of the giant component over ``realizations`` seeds, per n.

    Fixture families (``path``, ``cycle``) are deterministic; one realization is used.
    """
    rows = []
    for n in ns:
        if family == "gnp":
            specs = [GenSpec("gnp", n=int(n), d=d, seed=seed, realization_index=r) for r in range(realizations)]
        else:
            specs = [GenSpec(family, n=int(n))]
        vals = np.array(parallel_map(partial(realization_gap, dense_cap=dense_cap), specs, workers))
        q1, med, q3 = np.percentile(vals, [25, 50, 75])
        rows.append(GapRow(int(n), float(med), float(q1), float(q3), vals))
    return rows


def trend_verdict(rows) -> str | None:
    """``decreasing`` if medians strictly decrease with n, ``not decreasing`` otherwise; None for one n."""
    if len(rows) < 2:
        return None
    med = [r.median for r in rows]
    return "decreasing" if all(b < a for a, b in zip(med, med[1:])) else "not decreasing"


# -- curvature -------------------------------------------------------------------------

def realization_profiles(spec: GenSpec, triangles: int, master_seed: int) -> dict:
    """Profiles of one realization in both modes, keyed by mode."""
    g = spec.generate()
    if spec.family == "gnp":
        g, _ = giant_component(g)
    stream = realization_seed(master_seed, spec.realization_index, TRIANGLE_STREAM)
    sample = sample_triangles(g, triangles, stream)
    out = {}
    for mode in MODES:
        prof = curvature_profile(sample, mode, n=spec.n, d=spec.d)
        prof.meta["giant_size"] = g.n
        out[mode] = prof
    return out


@dataclass
class CurvatureRun:
    n: int
    d: float
    per_realization: list = field(repr=False)

    def profile(self, mode: str = "shortest_side", realizations=None) -> CurvatureProfile:
        per = self.per_realization if realizations is None else [self.per_realization[r] for r in realizations]
        return merge_profiles(p[mode] for p in per)


def curvature_run(n: int, d: float, realizations: int, triangles: int, seed: int, workers: int = 1,
                  family: str = "gnp", depth: int | None = None) -> CurvatureRun:
    if family == "gnp":
        specs = [GenSpec("gnp", n=int(n), d=d, seed=seed, realization_index=r) for r in range(realizations)]
    elif family == "truncated_tree":
        specs = [GenSpec("truncated_tree", d=d, depth=depth, seed=seed, realization_index=r)
                 for r in range(realizations)]
    else:
        specs = [GenSpec(family, n=int(n), seed=seed, realization_index=r) for r in range(realizations)]
    per = parallel_map(partial(realization_profiles, triangles=triangles, master_seed=seed), specs, workers)
    return CurvatureRun(n, d, per)


def seed_bootstrap(values_a, values_b, draws: int = 10000, level: float = 0.95, seed: int = 0):
    """Percentile interval for mean(a) - mean(b), resampling realizations within each group.

    Nan entries (realizations with no triangle in the bin) are dropped.
    """
    a = np.asarray(values_a, dtype=float)
    b = np.asarray(values_b, dtype=float)
    a, b = a[~np.isnan(a)], b[~np.isnan(b)]
    if len(a) == 0 or len(b) == 0:
        raise EmptyInput("bootstrap needs at least one finite value per group")
    rng = np.random.default_rng(seed)
    ia = rng.integers(0, len(a), size=(draws, len(a)))
    ib = rng.integers(0, len(b), size=(draws, len(b)))
    diff = a[ia].mean(axis=1) - b[ib].mean(axis=1)
    tail = (1 - level) / 2
    return float(np.quantile(diff, tail)), float(np.quantile(diff, 1 - tail))


def bin_means_by_realization(run: CurvatureRun, mode: str, bins) -> np.ndarray:
    """Per-realization mean insize pooled over ``bins`` (nan where a realization has none)."""
    bins = np.asarray(bins)
    out = []
    for per in run.per_realization:
        p = per[mode]
        b = bins[bins < len(p.counts)]
        c = p.counts[b].sum()
        out.append(p.sums[b].sum() / c if c else np.nan)
    return np.array(out)


# -- Cheeger ----------------------------------------------------------------------------

def realization_sandwich(spec: GenSpec, exact_only: bool = False):
    g = spec.generate()
    if spec.family == "gnp":
        g, _ = giant_component(g)
    if exact_only and g.n > EXACT_CHEEGER_CAP:
        cheeger_exact(g)  # raises TooLargeForExact
    return g.n, cheeger_sandwich_check(g, raise_on_violation=False)


# -- theory -----------------------------------------------------------------------------

THEORY_COLUMNS = ("d", "Delta", "n", "q_log10", "rho", "rho_lower", "rho_upper", "rho_limit",
                  "p4_lower", "threshold_ok", "status")


def theory_row(d: float, Delta: int, n: int) -> dict:
    """One theory.csv row; errors are recorded in ``status`` rather than raised."""
    row = dict.fromkeys(THEORY_COLUMNS, "")
    row.update(d=d, Delta=Delta, n=n)
    try:
        b = asy.rho_and_bounds(asy.LoopParams(int(n), d, int(Delta)))
    except ErgeomError as exc:
        row["status"] = f"{type(exc).__name__}: {exc}"
        return row
    row.update(q_log10=b.log_q / math.log(10), rho=b.rho, rho_lower=b.rho_lower, rho_upper=b.rho_upper,
               rho_limit=b.rho_limit, p4_lower=b.p4_lower, threshold_ok=b.threshold_ok,
               status="ok" if (b.sandwich_ok or not b.threshold_ok) else "sandwich_violated")
    return row


def theory_grid(ds, Deltas, ns) -> list[dict]:
    return [theory_row(d, D, n) for d in ds for D in Deltas for n in ns]
