"""McKay spectral density of the infinite d-regular tree (normalized Laplacian)."""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate

from .exceptions import EmptyMeasure, InvalidDegree, InvalidParams
from .spectral import DEFAULT_BINS, SpectralMeasure


def _check_d(d):
    if int(d) != d or d < 3:
        raise InvalidDegree(f"McKay density needs an integer degree >= 3, got {d}")
    return int(d)


def mckay_support(d: int) -> tuple[float, float]:
    """(1 - 2 sqrt(d-1)/d, 1 + 2 sqrt(d-1)/d); the lower end is the tree's spectral gap."""
    d = _check_d(d)
    r = 2.0 * math.sqrt(d - 1) / d
    return 1.0 - r, 1.0 + r


def mckay_pdf(d: int, x, normalized: bool = True):
    """McKay density in the normalized-Laplacian variable x.

    The literal expression sqrt(4(d-1) - d^2 (1-x)^2) / (2 pi d (1 - (1-x)^2))
    carries total mass 1/d; the probability density is d times it, which is
    what the adjacency-spectrum law gives after the change of variable
    t = d (1 - x). ``normalized=False`` returns the literal expression.
    """
    d = _check_d(d)
    x = np.asarray(x, dtype=float)
    lo, hi = mckay_support(d)
    y = 1.0 - x
    inside = (x > lo) & (x < hi)
    num = np.sqrt(np.where(inside, 4.0 * (d - 1) - d * d * y * y, 0.0))
    den = 2.0 * math.pi * (1.0 - y * y) * (1.0 if normalized else d)
    out = np.where(inside, num / np.where(inside, den, 1.0), 0.0)
    return out if out.ndim else float(out)


def _pdf_scalar(x, d):
    y = 1.0 - x
    rad = 4.0 * (d - 1) - d * d * y * y
    if rad <= 0.0:
        return 0.0
    return math.sqrt(rad) / (2.0 * math.pi * (1.0 - y * y))


def _quad(d, a, b):
    if b <= a:
        return 0.0
    val, _ = integrate.quad(_pdf_scalar, a, b, args=(d,), epsabs=1e-13, epsrel=1e-12, limit=200)
    return val


def mckay_cdf(d: int, x):
    """Mass of the McKay measure on (-inf, x], by adaptive quadrature (abs. error well below 1e-8).

    Array input is sorted and integrated piece by piece between consecutive
    points, split at 1 so no piece has more than one square-root endpoint.
    """
    d = _check_d(d)
    x = np.asarray(x, dtype=float)
    lo, hi = mckay_support(d)
    flat = np.clip(x.ravel(), lo, hi)
    knots, inverse = np.unique(flat, return_inverse=True)
    pts = np.union1d(knots, [lo, 1.0, hi])
    pieces = np.array([_quad(d, a, b) for a, b in zip(pts[:-1], pts[1:])])
    cum = np.concatenate([[0.0], np.cumsum(pieces)])
    vals = np.clip(cum[np.searchsorted(pts, knots)], 0.0, 1.0)
    out = vals[inverse].reshape(x.shape)
    return float(out) if out.ndim == 0 else out


def mckay_bin_masses(d: int, edges) -> np.ndarray:
    """McKay mass in each histogram bin ``[edges[i], edges[i+1])``."""
    return np.diff(mckay_cdf(d, np.asarray(edges, dtype=float)))


def mckay_table(d: int, grid) -> np.ndarray:
    """Rows (x, pdf, cdf) over ``grid`` for plotting overlays."""
    grid = np.asarray(grid, dtype=float)
    return np.column_stack([grid, mckay_pdf(d, grid), mckay_cdf(d, grid)])


def mckay_sample(d: int, size: int, seed=None, resolution: int = 20001) -> np.ndarray:
    """Inverse-CDF samples from a tabulated McKay CDF."""
    lo, hi = mckay_support(d)
    # cosine spacing puts nodes where the CDF bends near the square-root edges
    grid = 1.0 - (hi - 1.0) * np.cos(np.linspace(0.0, math.pi, resolution))
    cdf = np.maximum.accumulate(mckay_cdf(d, grid))
    u = np.random.default_rng(seed).random(size)
    return np.interp(u, cdf, grid)


def histogram_l1(h1, h2, edges, lo: float, hi: float) -> float:
    """Integral over [lo, hi] of |h1 - h2| for two piecewise-constant densities on ``edges``."""
    edges = np.asarray(edges, dtype=float)
    left = np.clip(edges[:-1], lo, hi)
    right = np.clip(edges[1:], lo, hi)
    return float(np.sum(np.abs(np.asarray(h1) - np.asarray(h2)) * (right - left)))


def bulk_distance(measure: SpectralMeasure, d: int, mode: str = "l1", bins: int = DEFAULT_BINS,
                  margin: float = 0.1) -> float:
    """Distance between an empirical spectral measure and the McKay measure of degree ``d``.

    ``ks``: largest gap between the two CDFs at eigenvalues inside the McKay
    support (both one-sided limits of the empirical CDF are checked).

    ``l1``: both measures are binned on the same ``bins``-bin grid over [0, 2]
    and the histogram densities compared in L1 over
    ``[lo + margin, hi - margin]``. The atom at 1 is not excised.
    """
    if len(measure) == 0:
        raise EmptyMeasure("empirical measure is empty")
    lo, hi = mckay_support(d)
    if mode == "ks":
        ev = measure.eigenvalues
        inside = (ev >= lo) & (ev <= hi)
        if not inside.any():
            return float(max(measure.cdf(lo), 1.0 - measure.cdf(hi)))
        pts = ev[inside]
        ref = mckay_cdf(d, pts)
        right = measure.cdf(pts)
        left = measure.cdf(np.nextafter(pts, -np.inf))
        return float(max(np.abs(right - ref).max(), np.abs(left - ref).max()))
    if mode == "l1":
        if not 0 <= margin < (hi - lo) / 2:
            raise InvalidParams(f"margin {margin} leaves no bulk inside ({lo}, {hi})")
        edges, dens = measure.histogram(bins)
        ref = mckay_bin_masses(d, edges) / np.diff(edges)
        return histogram_l1(dens, ref, edges, lo + margin, hi - margin)
    raise InvalidParams(f"mode must be 'ks' or 'l1', got {mode!r}")
