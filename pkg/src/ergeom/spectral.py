"""Normalized Laplacian spectra, spectral measures and Cheeger constants."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .exceptions import (ConvergenceFailure, DimensionTooLarge, Disconnected, EmptyMeasure,
                         InvalidParams, MixedSpecs, SandwichViolation, TooLargeForExact)
from .graph import Graph, components, giant_component

DENSE_CAP = 3000
EXACT_CHEEGER_CAP = 20
DEFAULT_BINS = 100
SPECTRUM_TOL = 1e-9


@dataclass(frozen=True)
class NormalizedLaplacian:
    matrix: sp.csr_matrix

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()


def build_laplacian(g: Graph) -> NormalizedLaplacian:
    """1 on the diagonal of non-isolated vertices, -1/sqrt(d_u d_v) across each edge."""
    deg = g.degrees.astype(float)
    inv_sqrt = np.zeros_like(deg)
    nz = deg > 0
    inv_sqrt[nz] = 1.0 / np.sqrt(deg[nz])
    rows = np.repeat(np.arange(g.n), g.degrees)
    off = sp.csr_matrix((-inv_sqrt[rows] * inv_sqrt[g.indices], g.indices, g.indptr), shape=(g.n, g.n))
    return NormalizedLaplacian(sp.csr_matrix(off + sp.diags(nz.astype(float))))


def eigenvalues(lap: NormalizedLaplacian, dense_cap: int = DENSE_CAP, vectors: bool = False):
    """All eigenvalues in ascending order (and orthonormal eigenvectors if asked).

    Raises DimensionTooLarge above ``dense_cap``; use :func:`extreme_eigenvalues`
    for the bottom of the spectrum of bigger graphs.
    """
    dim = lap.dimension
    if dim > dense_cap:
        raise DimensionTooLarge(f"dimension {dim} exceeds dense cap {dense_cap}; "
                                "use extreme_eigenvalues for the smallest eigenvalues")
    if dim == 0:
        return (np.empty(0), np.empty((0, 0))) if vectors else np.empty(0)
    a = lap.toarray()
    if not vectors:
        return np.linalg.eigvalsh(a)
    w, v = np.linalg.eigh(a)
    resid = np.linalg.norm(a @ v - v * w, axis=0)
    if resid.max() > 1e-9 * dim:
        raise ConvergenceFailure(f"eigenpair residual {resid.max():.3g} above tolerance", w, resid)
    return w, v


def extreme_eigenvalues(lap: NormalizedLaplacian, k: int, tol: float = 1e-10,
                        max_iter: int | None = None, seed=0, vectors: bool = False):
    """The ``k`` smallest eigenvalues by Lanczos with full reorthogonalization.

    A Ritz value is accepted once its residual norm ``|beta_m * s_m|`` is below
    ``tol``; since the matrix is symmetric that residual bounds the distance
    to a true eigenvalue. On an invariant-subspace breakdown the iteration
    restarts from a fresh vector orthogonal to the basis so far, which
    recovers repeated eigenvalues.
    """
    n = lap.dimension
    if not 1 <= k <= n:
        raise InvalidParams(f"k must lie in [1, {n}], got {k}")
    a = lap.matrix
    max_iter = n if max_iter is None else min(int(max_iter), n)
    rng = np.random.default_rng(seed)
    q_basis = np.zeros((n, max_iter))
    alpha = np.zeros(max_iter)
    beta = np.zeros(max_iter)
    q = rng.standard_normal(n)
    q /= np.linalg.norm(q)
    m = 0
    theta = s = None
    while m < max_iter:
        q_basis[:, m] = q
        w = a @ q
        alpha[m] = q @ w
        w -= q_basis[:, :m + 1] @ (q_basis[:, :m + 1].T @ w)
        w -= q_basis[:, :m + 1] @ (q_basis[:, :m + 1].T @ w)
        b = np.linalg.norm(w)
        m += 1
        if m >= k and (m % 10 == 0 or m == max_iter or b < 1e-12):
            theta, s = sla.eigh_tridiagonal(alpha[:m], beta[:m - 1])
            bounds = np.abs(b * s[-1, :k])
            if m == n or np.all(bounds <= tol):
                break
        if m == max_iter:
            break
        if b < 1e-12:
            # invariant subspace: continue from a new direction, decoupled in T
            beta[m - 1] = 0.0
            q = rng.standard_normal(n)
            for _ in range(2):
                q -= q_basis[:, :m] @ (q_basis[:, :m].T @ q)
            q /= np.linalg.norm(q)
        else:
            beta[m - 1] = b
            q = w / b
    if theta is None or len(theta) != m:
        theta, s = sla.eigh_tridiagonal(alpha[:m], beta[:m - 1])
    bounds = np.abs(b * s[-1, :k]) if m < n else np.zeros(k)
    if m < n and np.any(bounds > tol):
        raise ConvergenceFailure(f"Lanczos did not converge in {m} steps", theta[:k], bounds)
    if vectors:
        return theta[:k], q_basis[:, :m] @ s[:, :k]
    return theta[:k]


def _require_connected(g: Graph):
    if g.n < 2:
        raise InvalidParams("the spectral gap needs at least 2 vertices")
    if components(g).count != 1:
        raise Disconnected("graph is disconnected; pass its giant component")


def lambda0(g: Graph, dense_cap: int = DENSE_CAP) -> float:
    """Second-smallest normalized Laplacian eigenvalue of a connected graph."""
    _require_connected(g)
    lap = build_laplacian(g)
    if g.n <= dense_cap:
        return float(sla.eigh(lap.toarray(), eigvals_only=True, subset_by_index=[1, 1])[0])
    return float(extreme_eigenvalues(lap, 2)[1])


# -- spectral measures -----------------------------------------------------------

@dataclass(frozen=True)
class SpectralMeasure:
    """Discrete probability measure on [0, 2] given by weighted eigenvalues."""

    eigenvalues: np.ndarray
    weights: np.ndarray
    realization_count: int = 1

    def __post_init__(self):
        if len(self.weights) and abs(self.weights.sum() - 1.0) > 1e-9:
            raise EmptyMeasure(f"weights sum to {self.weights.sum()}, not 1")

    def __len__(self):
        return len(self.eigenvalues)

    def histogram(self, bins: int = DEFAULT_BINS):
        """Bin edges over [0, 2] and densities (mass / width); values are clamped into range."""
        edges = np.linspace(0.0, 2.0, bins + 1)
        mass, _ = np.histogram(np.clip(self.eigenvalues, 0.0, 2.0), bins=edges, weights=self.weights)
        return edges, mass / np.diff(edges)

    def cdf(self, x) -> np.ndarray:
        """Mass of eigenvalues <= x."""
        cum = np.concatenate([[0.0], np.cumsum(self.weights)])
        return cum[np.searchsorted(self.eigenvalues, x, side="right")]


def _measure_from(values, weights, realizations=1):
    order = np.lexsort((weights, values))
    return SpectralMeasure(np.asarray(values)[order], np.asarray(weights)[order], realizations)


def spectral_measure(g: Graph, dense_cap: int = DENSE_CAP) -> SpectralMeasure:
    """Uniform measure on the normalized Laplacian eigenvalues of ``g``."""
    if g.n == 0:
        return SpectralMeasure(np.empty(0), np.empty(0), 1)
    ev = eigenvalues(build_laplacian(g), dense_cap)
    return _measure_from(ev, np.full(len(ev), 1.0 / len(ev)))


def spectrum_for_spec(spec, dense_cap: int = DENSE_CAP, giant: bool | None = None) -> np.ndarray:
    """Eigenvalues of one realization; G(n, p) graphs are reduced to their giant component."""
    g = spec.generate()
    if giant is None:
        giant = spec.family == "gnp"
    if giant:
        g, _ = giant_component(g)
    return eigenvalues(build_laplacian(g), dense_cap)


def averaged_measure(specs, dense_cap: int = DENSE_CAP, mapper=map, spectra=None) -> SpectralMeasure:
    """Equal-weight mixture of the per-realization spectral measures.

    ``mapper`` lets callers plug in a parallel map; the result does not depend
    on evaluation order. Precomputed per-realization ``spectra`` may be passed
    instead of regenerating them.
    """
    specs = list(specs)
    if not specs:
        raise EmptyMeasure("no realizations")
    keys = {s.key() for s in specs}
    if len(keys) > 1:
        raise MixedSpecs(f"realizations come from different families/parameters: {sorted(map(str, keys))}")
    if spectra is None:
        from functools import partial
        spectra = list(mapper(partial(spectrum_for_spec, dense_cap=dense_cap), specs))
    r = len(spectra)
    values = np.concatenate(spectra)
    weights = np.concatenate([np.full(len(ev), 1.0 / (r * len(ev))) for ev in spectra])
    return _measure_from(values, weights, r)


def atom_mass(measure: SpectralMeasure, x: float, tol: float) -> float:
    if not tol > 0:
        raise InvalidParams(f"tol must be positive, got {tol}")
    ev = measure.eigenvalues
    lo = np.searchsorted(ev, x - tol, side="left")
    hi = np.searchsorted(ev, x + tol, side="right")
    return float(measure.weights[lo:hi].sum())


def same_measure(a: SpectralMeasure, b: SpectralMeasure, atol: float = 1e-12) -> bool:
    """True when the two CDFs agree at every atom of either measure."""
    pts = np.union1d(a.eigenvalues, b.eigenvalues)
    return bool(np.allclose(a.cdf(pts), b.cdf(pts), atol=atol, rtol=0))


# -- Cheeger constants -------------------------------------------------------------

@dataclass(frozen=True)
class CheegerResult:
    value: float
    certificate: np.ndarray
    exact: bool
    boundary_size: int
    volume: int


def cheeger_exact(g: Graph, chunk: int = 1 << 15) -> CheegerResult:
    """min |dS| / vol(S) over nonempty S with vol(S) <= vol(G)/2, by scanning all subsets."""
    n = g.n
    if n > EXACT_CHEEGER_CAP:
        raise TooLargeForExact(f"exhaustive Cheeger scan is limited to {EXACT_CHEEGER_CAP} vertices, got {n}")
    edges = g.edges()
    if len(edges) == 0:
        raise InvalidParams("Cheeger constant needs at least one edge")
    deg = g.degrees
    half = g.volume() / 2
    shifts = np.arange(n, dtype=np.int64)
    best_val, best_mask, best_b, best_v = np.inf, 0, 0, 0
    for start in range(1, 1 << n, chunk):
        masks = np.arange(start, min(start + chunk, 1 << n), dtype=np.int64)
        bits = ((masks[:, None] >> shifts) & 1).astype(np.int8)
        vol = bits @ deg
        bnd = (bits[:, edges[:, 0]] != bits[:, edges[:, 1]]).sum(axis=1)
        ok = (vol > 0) & (vol <= half)
        if not ok.any():
            continue
        ratio = np.where(ok, bnd / np.where(vol > 0, vol, 1), np.inf)
        i = int(np.argmin(ratio))
        if ratio[i] < best_val:
            best_val, best_mask, best_b, best_v = float(ratio[i]), int(masks[i]), int(bnd[i]), int(vol[i])
    cert = np.flatnonzero((best_mask >> shifts) & 1)
    return CheegerResult(best_val, cert, True, best_b, best_v)


def cheeger_sweep(g: Graph, dense_cap: int = DENSE_CAP) -> CheegerResult:
    """Best prefix cut of the vertices ordered by D^{-1/2} times the lambda0 eigenvector.

    A valid subset, so an upper bound on the Cheeger constant.
    """
    _require_connected(g)
    lap = build_laplacian(g)
    if g.n <= dense_cap:
        _, vecs = sla.eigh(lap.toarray(), subset_by_index=[0, 1])
        v = vecs[:, 1]
    else:
        _, vecs = extreme_eigenvalues(lap, 2, vectors=True)
        v = vecs[:, 1]
    deg = g.degrees
    order = np.argsort(v / np.sqrt(deg), kind="stable")
    total = g.volume()
    inside = np.zeros(g.n, dtype=bool)
    boundary = 0
    vol = 0
    best = (np.inf, 0, 0, 0)
    for i, u in enumerate(order[:-1]):
        nb = g.neighbors(u)
        boundary += deg[u] - 2 * int(inside[nb].sum())
        inside[u] = True
        vol += deg[u]
        ratio = boundary / min(vol, total - vol)
        if ratio < best[0]:
            best = (ratio, i + 1, boundary, vol)
    ratio, size, b, vol = best
    cert = np.sort(order[:size])
    if vol > total / 2:
        cert = np.setdiff1d(np.arange(g.n), cert)
        vol = total - vol
    return CheegerResult(float(ratio), cert, False, int(b), int(vol))


@dataclass(frozen=True)
class SandwichReport:
    h: float
    exact: bool
    lambda0: float
    left_bound: float
    right_bound: float
    left_ok: bool
    right_ok: bool

    @property
    def holds(self) -> bool:
        return self.left_ok and (self.right_ok or not self.exact)


def cheeger_sandwich_check(g: Graph, slack: float = 1e-10, raise_on_violation: bool = True) -> SandwichReport:
    """Check 2h >= lambda0 >= 1 - sqrt(1 - h^2).

    With the exact constant (n <= 20) both sides are checked. Otherwise the
    sweep value h_sweep >= h is used and only the left side is meaningful.
    """
    _require_connected(g)
    res = cheeger_exact(g) if g.n <= EXACT_CHEEGER_CAP else cheeger_sweep(g)
    lam = lambda0(g)
    h = res.value
    left = 2 * h
    right = 1 - math.sqrt(max(0.0, 1 - h * h))
    report = SandwichReport(h, res.exact, lam, left, right, left >= lam - slack,
                            lam >= right - slack if res.exact else True)
    if raise_on_violation and not report.holds:
        raise SandwichViolation(f"Cheeger sandwich failed: 2h={left:.12g}, lambda0={lam:.12g}, "
                                f"1-sqrt(1-h^2)={right:.12g}")
    return report
