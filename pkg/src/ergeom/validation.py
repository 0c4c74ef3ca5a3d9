"""Input checks shared by the estimators and the command line."""

from __future__ import annotations

import numbers

import numpy as np
import scipy.sparse as sp

from .exceptions import EmptyInput, GraphError, InvalidParams
from .graph import Graph, _from_pairs


def check_graph(g) -> Graph:
    """Coerce ``g`` to a :class:`Graph`.

    Accepts a Graph, a square symmetric 0/1 adjacency matrix (dense or
    scipy sparse) with an empty diagonal, or a networkx graph whose nodes
    are relabelled 0..n-1 in iteration order.
    """
    if isinstance(g, Graph):
        return g
    if hasattr(g, "nodes") and hasattr(g, "edges") and hasattr(g, "is_directed"):
        if g.is_directed():
            raise GraphError("directed graphs are not supported")
        index = {v: i for i, v in enumerate(g.nodes())}
        pairs = np.array([(index[a], index[b]) for a, b in g.edges()], dtype=np.int64).reshape(-1, 2)
        return _adjacency_to_graph(sp.coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])),
                                                 shape=(len(index), len(index))), symmetrize=True)
    if sp.issparse(g) or isinstance(g, np.ndarray):
        return _adjacency_to_graph(g)
    raise GraphError(f"cannot interpret {type(g).__name__} as a graph")


def _adjacency_to_graph(a, symmetrize=False) -> Graph:
    a = sp.coo_matrix(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise GraphError(f"adjacency matrix must be square, got shape {a.shape}")
    a.sum_duplicates()
    a.eliminate_zeros()
    if np.any(a.row == a.col):
        raise GraphError("adjacency matrix has a nonzero diagonal (self-loop)")
    if not symmetrize:
        if np.any(a.data != 1):
            raise GraphError("adjacency matrix entries must be 0 or 1")
        if (a != a.T).nnz:
            raise GraphError("adjacency matrix is not symmetric")
    upper = a.row < a.col
    u = np.where(upper, a.row, a.col)
    v = np.where(upper, a.col, a.row)
    pairs = np.unique(np.column_stack([u, v]), axis=0) if len(u) else np.empty((0, 2), np.int64)
    return _from_pairs(a.shape[0], pairs[:, 0], pairs[:, 1])


def check_graphs(graphs) -> list[Graph]:
    """A nonempty list of graphs; a single graph is wrapped."""
    if isinstance(graphs, Graph) or sp.issparse(graphs) or hasattr(graphs, "is_directed"):
        graphs = [graphs]
    elif isinstance(graphs, np.ndarray) and graphs.ndim == 2:
        graphs = [graphs]
    out = [check_graph(g) for g in graphs]
    if not out:
        raise EmptyInput("no graphs given")
    return out


def check_int(name, value, low=None, high=None) -> int:
    if isinstance(value, bool):
        raise InvalidParams(f"{name} must be an integer, got {value!r}")
    if not isinstance(value, numbers.Integral):
        if isinstance(value, numbers.Real) and np.isfinite(value) and float(value).is_integer():
            value = int(value)
        else:
            raise InvalidParams(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if low is not None and value < low:
        raise InvalidParams(f"{name} must be >= {low}, got {value}")
    if high is not None and value > high:
        raise InvalidParams(f"{name} must be <= {high}, got {value}")
    return value


def check_real(name, value, low=None, high=None, low_open=False) -> float:
    if isinstance(value, bool) or not isinstance(value, numbers.Real) or not np.isfinite(value):
        raise InvalidParams(f"{name} must be a finite number, got {value!r}")
    value = float(value)
    if low is not None and (value <= low if low_open else value < low):
        raise InvalidParams(f"{name} must be {'>' if low_open else '>='} {low}, got {value}")
    if high is not None and value > high:
        raise InvalidParams(f"{name} must be <= {high}, got {value}")
    return value


def check_choice(name, value, choices):
    if value not in choices:
        raise InvalidParams(f"{name} must be one of {tuple(choices)}, got {value!r}")
    return value


def check_seed(value) -> int:
    """Seeds are explicit nonnegative integers below 2**64."""
    return check_int("seed", value, 0, 2**64 - 1)
