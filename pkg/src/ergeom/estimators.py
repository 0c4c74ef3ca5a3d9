"""scikit-learn style front ends: graphs in, spectral and curvature features out.

``X`` is always a sequence of graphs (anything :func:`check_graph` accepts).
Estimators hold only their constructor parameters until ``fit``; fitted
attributes end in an underscore.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .generators import realization_seed
from .graph import giant_component
from .hyperbolicity import MODES, curvature_profile, merge_profiles, sample_triangles
from .mckay import bulk_distance
from .spectral import DENSE_CAP, DEFAULT_BINS, _measure_from, build_laplacian, eigenvalues, lambda0
from .validation import check_choice, check_graphs, check_int, check_seed


def _reduce(g, giant):
    return giant_component(g)[0] if giant else g


class SpectralDensity(TransformerMixin, BaseEstimator):
    """Averaged normalized-Laplacian spectral measure of a collection of graphs.

    ``fit`` forms the equal-weight mixture of the per-graph eigenvalue
    distributions; ``transform`` returns each graph's histogram density on
    the ``bins``-bin grid over [0, 2].
    """

    def __init__(self, bins=DEFAULT_BINS, giant=True, dense_cap=DENSE_CAP):
        self.bins = bins
        self.giant = giant
        self.dense_cap = dense_cap

    def _spectra(self, X):
        return [eigenvalues(build_laplacian(_reduce(g, self.giant)), self.dense_cap) for g in check_graphs(X)]

    def fit(self, X, y=None):
        check_int("bins", self.bins, 1)
        check_int("dense_cap", self.dense_cap, 1)
        spectra = self._spectra(X)
        r = len(spectra)
        weights = np.concatenate([np.full(len(ev), 1.0 / (r * len(ev))) for ev in spectra])
        self.measure_ = _measure_from(np.concatenate(spectra), weights, r)
        self.bin_edges_, self.density_ = self.measure_.histogram(self.bins)
        self.n_graphs_ = r
        return self

    def transform(self, X):
        check_is_fitted(self, "measure_")
        rows = []
        for ev in self._spectra(X):
            mass, _ = np.histogram(np.clip(ev, 0.0, 2.0), bins=self.bin_edges_)
            rows.append(mass / len(ev) / np.diff(self.bin_edges_))
        return np.array(rows)

    def distance_to_mckay(self, d, mode="l1", margin=0.1):
        """:func:`bulk_distance` of the fitted measure from the McKay law of degree ``d``."""
        check_is_fitted(self, "measure_")
        return bulk_distance(self.measure_, d, mode=mode, bins=self.bins, margin=margin)


class SpectralGap(TransformerMixin, BaseEstimator):
    """One feature per graph: lambda0 of its giant component (or of the whole graph)."""

    def __init__(self, giant=True, dense_cap=DENSE_CAP):
        self.giant = giant
        self.dense_cap = dense_cap

    def fit(self, X=None, y=None):
        self.fitted_ = True
        return self

    def transform(self, X):
        check_is_fitted(self, "fitted_")
        return np.array([[lambda0(_reduce(g, self.giant), self.dense_cap)] for g in check_graphs(X)])


class CurvatureProfiler(TransformerMixin, BaseEstimator):
    """Insize curvature profile from uniformly sampled geodesic triangles.

    Graph ``i`` of a call gets the triangle stream
    ``realization_seed(random_state, i, 1)``, so a fit is reproducible and
    independent of how the graphs are batched. ``fit`` merges all graphs
    into ``profile_``; ``transform`` gives each graph's mean insize per side
    length ``0 .. n_bins_ - 1`` (nan where no triangle fell).
    """

    def __init__(self, triangles=10000, mode="shortest_side", giant=True, random_state=0):
        self.triangles = triangles
        self.mode = mode
        self.giant = giant
        self.random_state = random_state

    def _profiles(self, X):
        check_int("triangles", self.triangles, 1)
        check_choice("mode", self.mode, MODES)
        seed = check_seed(self.random_state)
        out = []
        for i, g in enumerate(check_graphs(X)):
            h = _reduce(g, self.giant)
            sample = sample_triangles(h, self.triangles, realization_seed(seed, i, 1))
            out.append(curvature_profile(sample, self.mode, n=g.n))
        return out

    def fit(self, X, y=None):
        profiles = self._profiles(X)
        self.profile_ = merge_profiles(profiles)
        self.n_bins_ = len(self.profile_.counts)
        return self

    def transform(self, X):
        check_is_fitted(self, "profile_")
        rows = np.full((0, self.n_bins_), np.nan)
        for p in self._profiles(X):
            row = np.full(self.n_bins_, np.nan)
            k = min(len(p.counts), self.n_bins_)
            c = p.counts[:k]
            with np.errstate(invalid="ignore", divide="ignore"):
                row[:k] = np.where(c > 0, p.sums[:k] / c, np.nan)
            rows = np.vstack([rows, row])
        return rows
