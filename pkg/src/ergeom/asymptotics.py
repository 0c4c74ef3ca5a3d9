"""Closed-form spectral gaps, giant-component size and loop-probability bounds.

Probabilities are carried in log space: the loop probability underflows a
double long before the graph sizes of interest.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from .exceptions import InvalidDegree, InvalidLaw, InvalidParams, SubcriticalDegree
from .generators import OffspringLaw


def regular_tree_gap(k: float) -> float:
    """Bottom of the normalized Laplacian spectrum of the infinite k-regular tree."""
    if not k >= 2:
        raise InvalidDegree(f"tree degree must be >= 2, got {k}")
    return 1.0 - 2.0 * math.sqrt(k - 1) / k


def branching_gap(law: OffspringLaw) -> float:
    """Spectral gap of the branching-process tree: 0 if k = 0, else 1 - 2 sqrt(k)/(k+1),
    where k is the smallest child count with positive probability."""
    if not isinstance(law, OffspringLaw):
        raise InvalidLaw("expected an OffspringLaw")
    k = law.first_support
    if k == 0:
        return 0.0
    return 1.0 - 2.0 * math.sqrt(k) / (k + 1)


def giant_fraction(d: float) -> float:
    """The root in (0, 1) of gamma = 1 - exp(-d gamma)."""
    if not d > 1:
        raise SubcriticalDegree(f"mean degree must exceed 1 for a giant component, got {d}")
    # (1 - e^{-d g})/g - 1 falls from d - 1 > 0 at 0+ to -e^{-d} at 1
    f = lambda g: -math.expm1(-d * g) / g - 1.0
    return brentq(f, 1e-300, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)


@dataclass(frozen=True)
class LoopParams:
    n: int
    d: float
    Delta: int

    def __post_init__(self):
        if int(self.n) != self.n or int(self.Delta) != self.Delta:
            raise InvalidParams(f"n and Delta must be integers, got n={self.n}, Delta={self.Delta}")
        if not self.n > self.Delta >= 3:
            raise InvalidParams(f"need n > Delta >= 3, got n={self.n}, Delta={self.Delta}")
        if not self.d > 1:
            raise SubcriticalDegree(f"need d > 1, got d={self.d}")
        if not self.d < self.n:
            raise InvalidParams(f"need p = d/n < 1, got d={self.d}, n={self.n}")

    @property
    def p(self) -> float:
        return self.d / self.n

    @property
    def delta(self) -> float:
        return self.Delta / 6


def delta_to_loop_length(delta: float) -> int:
    """Loop length ceil(6 delta), at least 3."""
    if delta < 0:
        raise InvalidParams(f"delta must be >= 0, got {delta}")
    return max(3, math.ceil(round(6 * delta, 9)))


class LoopProbability(NamedTuple):
    q: float
    log_q: float
    #: number of vertex pairs touching the loop's vertex set that must be absent
    absent_pairs: int


def absent_pair_count(n: int, Delta: int) -> int:
    """Pairs touching a fixed Delta-set, minus the Delta + 1 edges that must be present.

    Evaluated in both the direct and the simplified form; they must agree.
    """
    direct = n * (n - 1) // 2 - (n - Delta) * (n - Delta - 1) // 2 - (Delta + 1)
    twice_simplified = Delta * (2 * n - 3) - (Delta * Delta + 2)
    if twice_simplified % 2 or twice_simplified // 2 != direct:
        raise AssertionError(f"exponent forms disagree at n={n}, Delta={Delta}: "
                             f"{direct} vs {twice_simplified}/2")
    return direct


def loop_probability(params: LoopParams) -> LoopProbability:
    """Probability that a given Delta-set carries a cycle attached to the rest by exactly one edge.

    q = (Delta!/2) (n - Delta) p^(Delta+1) (1 - p)^E with E from :func:`absent_pair_count`.
    """
    n, Delta, p = params.n, params.Delta, params.p
    e = absent_pair_count(n, Delta)
    log_q = (math.lgamma(Delta + 1) - math.log(2) + math.log(n - Delta)
             + (Delta + 1) * math.log(p) + e * math.log1p(-p))
    return LoopProbability(math.exp(log_q), log_q, e)


def log_binom(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def rho_limit(d: float, Delta: float) -> float:
    """d^(Delta+1) e^(-d Delta), the large-n value stated for rho."""
    return math.exp((Delta + 1) * math.log(d) - d * Delta)


@dataclass(frozen=True)
class LoopBounds:
    q: float
    log_q: float
    rho: float
    rho_lower: float
    rho_upper: float
    rho_limit: float
    p4_lower: float
    #: overcount bound M q^2 with M = C(n - Delta, Delta), and q - M q^2
    p3_upper: float
    p2_lower: float
    threshold: float
    threshold_ok: bool

    @property
    def sandwich_ok(self) -> bool:
        return self.rho_lower <= self.rho <= self.rho_upper


def size_threshold(d: float, Delta: int) -> float:
    """n above which (1 - d/n)^(-(Delta+1)(Delta+2)/2) < 2."""
    return d / -math.expm1(-2.0 / ((Delta + 1) * (Delta + 2)) * math.log(2))


def rho_and_bounds(params: LoopParams) -> LoopBounds:
    """rho = C(n, Delta) q, its two-sided bound, the large-n value and the P4 lower bound."""
    n, d, Delta = params.n, params.d, params.Delta
    lp = loop_probability(params)
    log_rho = log_binom(n, Delta) + lp.log_q
    rho = math.exp(log_rho)
    # shared factor (1 - d/n)^(Delta n) (1 - d/n)^(-(Delta+1)(Delta+2)/2) d^(Delta+1)
    log_common = (Delta * n - (Delta + 1) * (Delta + 2) / 2) * math.log1p(-d / n) + (Delta + 1) * math.log(d)
    upper = math.exp(math.log((n - Delta) / (2 * n)) + log_common)
    lower = math.exp((Delta + 1) * math.log((n - Delta) / n) - math.log(2) + log_common)
    log_m = log_binom(n - Delta, Delta)
    p3 = math.exp(log_m + 2 * lp.log_q)
    thr = size_threshold(d, Delta)
    return LoopBounds(lp.q, lp.log_q, rho, lower, upper, rho_limit(d, Delta), rho - rho * rho,
                      p3, lp.q - p3, thr, n > thr)


def fat_triangle_lower_bound(d: float, delta: float) -> float:
    """rho_inf - rho_inf^2 with rho_inf = d^(Delta+1) e^(-d Delta), Delta = max(3, ceil(6 delta))."""
    if not d > 1:
        raise SubcriticalDegree(f"need d > 1, got {d}")
    Delta = delta_to_loop_length(delta)
    r = rho_limit(d, Delta)
    out = r - r * r
    if not out > 0:
        raise InvalidParams(f"lower bound {out} is not positive at d={d}, delta={delta}")
    return out


class BelowOneCheck(NamedTuple):
    below_one: bool
    value: float
    margin: float


def rho_below_one_check(d: float, Delta: float) -> BelowOneCheck:
    """Evaluate 2 e^(-d Delta) d^(Delta+1) and whether it is below 1."""
    if not (d > 1 and Delta > 1):
        raise InvalidParams(f"need d, Delta > 1, got d={d}, Delta={Delta}")
    v = 2.0 * rho_limit(d, Delta)
    return BelowOneCheck(v < 1.0, v, 1.0 - v)


# -- Monte Carlo check of the loop probability ------------------------------------

def _cycle_masks(Delta: int, pair_bit: dict) -> np.ndarray:
    """Bitmasks (over the internal pairs) of every Hamiltonian cycle on vertices 0..Delta-1."""
    masks = set()
    for perm in itertools.permutations(range(1, Delta)):
        if perm[0] > perm[-1]:
            continue
        order = (0, *perm)
        m = 0
        for i in range(Delta):
            a, b = order[i], order[(i + 1) % Delta]
            m |= 1 << pair_bit[(min(a, b), max(a, b))]
        masks.add(m)
    return np.array(sorted(masks), dtype=np.int64)


class MonteCarloEstimate(NamedTuple):
    estimate: float
    std_error: float
    hits: int
    samples: int


def loop_probability_mc(n: int, d: float, Delta: int, samples: int = 10**7, seed=0,
                        block: int = 10**6, stream=()) -> MonteCarloEstimate:
    """Frequency of the loop event on vertices 0..Delta-1 of G(n, d/n).

    Only the pairs touching the set are drawn (one uniform per pair, as
    G(n, p) does); the event is that the internal pairs form exactly one
    Hamiltonian cycle and exactly one external pair is present. Blocks use
    independent streams ``SeedSequence(seed, spawn_key=(*stream, block_index))``.
    """
    if Delta > 8:
        raise InvalidParams("Monte Carlo loop check supports Delta <= 8")
    LoopParams(n, d, Delta)
    p = d / n
    internal = list(itertools.combinations(range(Delta), 2))
    pair_bit = {pr: i for i, pr in enumerate(internal)}
    cycles = _cycle_masks(Delta, pair_bit)
    weights = (1 << np.arange(len(internal), dtype=np.int64))
    n_ext = Delta * (n - Delta)
    hits = 0
    done = 0
    index = 0
    while done < samples:
        size = min(block, samples - done)
        rng = np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(*map(int, stream), index)))
        inner = (rng.random((size, len(internal))) < p).astype(np.int64) @ weights
        outer = (rng.random((size, n_ext)) < p).sum(axis=1)
        hits += int(np.count_nonzero(np.isin(inner, cycles) & (outer == 1)))
        done += size
        index += 1
    est = hits / samples
    return MonteCarloEstimate(est, math.sqrt(max(est * (1 - est), 1e-300) / samples), hits, samples)
