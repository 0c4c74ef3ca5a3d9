"""Compiled BFS kernels on CSR adjacency (``indptr``, ``indices``).

All scratch arrays follow the same protocol: distance buffers hold -1 for
"not visited" on entry and are restored to -1 before a kernel returns, so a
single allocation can be reused across millions of triangles.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def bfs_full(indptr, indices, source):
    n = indptr.shape[0] - 1
    dist = np.full(n, -1, dtype=np.int64)
    parent = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    dist[source] = 0
    queue[0] = source
    head = 0
    tail = 1
    while head < tail:
        u = queue[head]
        head += 1
        for k in range(indptr[u], indptr[u + 1]):
            w = indices[k]
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                queue[tail] = w
                tail += 1
    # canonical parent: smallest-index neighbour one level closer to the source
    for i in range(tail):
        v = queue[i]
        if v == source:
            continue
        for k in range(indptr[v], indptr[v + 1]):
            w = indices[k]
            if dist[w] == dist[v] - 1:
                parent[v] = w
                break
    return dist, parent


@njit(cache=True)
def _bfs_until(indptr, indices, src, target, dist, queue):
    """BFS from ``src`` that stops once ``target`` is labelled.

    Every vertex closer to ``src`` than ``target`` is labelled by then, which
    is all the parent walk needs. Returns the number of labelled vertices
    (they sit in ``queue[:count]``).
    """
    dist[src] = 0
    queue[0] = src
    if src == target:
        return 1
    head = 0
    tail = 1
    while head < tail:
        u = queue[head]
        head += 1
        du = dist[u] + 1
        for k in range(indptr[u], indptr[u + 1]):
            w = indices[k]
            if dist[w] < 0:
                dist[w] = du
                queue[tail] = w
                tail += 1
                if w == target:
                    return tail
    return tail


@njit(cache=True)
def _walk_back(indptr, indices, dist, target, path):
    length = dist[target]
    v = target
    path[length] = v
    for level in range(length - 1, -1, -1):
        for k in range(indptr[v], indptr[v + 1]):
            w = indices[k]
            if dist[w] == level:
                v = w
                break
        path[level] = v
    return length + 1


@njit(cache=True)
def _geodesic_into(indptr, indices, a, b, dist, queue, path):
    """Write the canonical a->b geodesic into ``path``; return its node count or -1."""
    count = _bfs_until(indptr, indices, a, b, dist, queue)
    if dist[b] < 0:
        m = -1
    else:
        m = _walk_back(indptr, indices, dist, b, path)
    for i in range(count):
        dist[queue[i]] = -1
    return m


@njit(cache=True)
def geodesic(indptr, indices, a, b):
    n = indptr.shape[0] - 1
    dist = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    path = np.empty(n, dtype=np.int64)
    m = _geodesic_into(indptr, indices, a, b, dist, queue, path)
    if m < 0:
        return path[:0]
    return path[:m].copy()


@njit(cache=True)
def multi_source_distances(indptr, indices, sources):
    n = indptr.shape[0] - 1
    dist = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    tail = 0
    for s in sources:
        if dist[s] < 0:
            dist[s] = 0
            queue[tail] = s
            tail += 1
    head = 0
    while head < tail:
        u = queue[head]
        head += 1
        for k in range(indptr[u], indptr[u + 1]):
            w = indices[k]
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                queue[tail] = w
                tail += 1
    return dist


@njit(cache=True)
def _side_deltas(indptr, indices, paths, lengths, ds, queues, onpath, covered):
    """Insize and thinness of one geodesic triangle.

    ``paths[s, :lengths[s]]`` are the three sides. Three multi-source BFS
    fronts (one per side) advance in lockstep, one level at a time. The
    insize is the first radius r at which some vertex is within r of all
    three sides; the thinness is the largest level at which a side vertex is
    first reached by one of the other two fronts. Exploration stops as soon
    as both are known, so cost scales with the size of the explored
    neighbourhood rather than with the graph.

    Returns (insize, witness, thinness); the witness is the smallest vertex
    index attaining the insize.
    """
    heads = np.zeros(3, dtype=np.int64)
    tails = np.zeros(3, dtype=np.int64)
    remaining = 0
    for s in range(3):
        for i in range(lengths[s]):
            w = paths[s, i]
            onpath[s, w] = True
            remaining += 1
    thin = 0
    for s in range(3):
        for i in range(lengths[s]):
            w = paths[s, i]
            if ds[s, w] < 0:
                ds[s, w] = 0
                queues[s, tails[s]] = w
                tails[s] += 1
    # coverage of side vertices at level 0 (vertices shared between sides)
    for s in range(3):
        for i in range(lengths[s]):
            w = paths[s, i]
            if not covered[s, w]:
                for o in range(3):
                    if o != s and ds[o, w] == 0:
                        covered[s, w] = True
                        remaining -= 1
                        break

    insize = -1
    witness = -1
    for s in range(3):
        for i in range(tails[s]):
            w = queues[s, i]
            if ds[0, w] >= 0 and ds[1, w] >= 0 and ds[2, w] >= 0:
                if witness < 0 or w < witness:
                    witness = w
    if witness >= 0:
        insize = 0

    level = 0
    while insize < 0 or remaining > 0:
        starts = tails.copy()
        progressed = False
        for s in range(3):
            end = tails[s]
            while heads[s] < end:
                u = queues[s, heads[s]]
                heads[s] += 1
                for k in range(indptr[u], indptr[u + 1]):
                    w = indices[k]
                    if ds[s, w] < 0:
                        ds[s, w] = level + 1
                        queues[s, tails[s]] = w
                        tails[s] += 1
                        progressed = True
                        for o in range(3):
                            if o != s and onpath[o, w] and not covered[o, w]:
                                covered[o, w] = True
                                remaining -= 1
                                if level + 1 > thin:
                                    thin = level + 1
        level += 1
        if insize < 0:
            for s in range(3):
                for i in range(starts[s], tails[s]):
                    w = queues[s, i]
                    if ds[0, w] >= 0 and ds[1, w] >= 0 and ds[2, w] >= 0:
                        if witness < 0 or w < witness:
                            witness = w
            if witness >= 0:
                insize = level
        if not progressed:
            break

    for s in range(3):
        for i in range(tails[s]):
            ds[s, queues[s, i]] = -1
        for i in range(lengths[s]):
            w = paths[s, i]
            onpath[s, w] = False
            covered[s, w] = False
    return insize, witness, thin


@njit(cache=True)
def triangle_deltas(indptr, indices, paths, lengths):
    n = indptr.shape[0] - 1
    ds = np.full((3, n), -1, dtype=np.int64)
    queues = np.empty((3, n), dtype=np.int64)
    onpath = np.zeros((3, n), dtype=np.bool_)
    covered = np.zeros((3, n), dtype=np.bool_)
    return _side_deltas(indptr, indices, paths, lengths, ds, queues, onpath, covered)


@njit(cache=True)
def triangle_batch(indptr, indices, triples):
    """Sides, insize, witness and thinness for each row (A, B, C) of ``triples``.

    Geodesics follow the canonical rule: [AB] from a BFS rooted at A,
    [BC] rooted at B, [CA] rooted at C. A side of -1 marks an unreachable pair.
    """
    n = indptr.shape[0] - 1
    m = triples.shape[0]
    sides = np.empty((m, 3), dtype=np.int64)
    insize = np.empty(m, dtype=np.int64)
    witness = np.empty(m, dtype=np.int64)
    thin = np.empty(m, dtype=np.int64)

    dist = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    paths = np.empty((3, n), dtype=np.int64)
    lengths = np.empty(3, dtype=np.int64)
    ds = np.full((3, n), -1, dtype=np.int64)
    queues = np.empty((3, n), dtype=np.int64)
    onpath = np.zeros((3, n), dtype=np.bool_)
    covered = np.zeros((3, n), dtype=np.bool_)

    for t in range(m):
        ok = True
        for s in range(3):
            a = triples[t, s]
            b = triples[t, (s + 1) % 3]
            lengths[s] = _geodesic_into(indptr, indices, a, b, dist, queue, paths[s])
            if lengths[s] < 0:
                ok = False
            sides[t, s] = lengths[s] - 1 if lengths[s] > 0 else -1
        if not ok:
            insize[t] = -1
            witness[t] = -1
            thin[t] = -1
            continue
        r, wit, th = _side_deltas(indptr, indices, paths, lengths, ds, queues, onpath, covered)
        insize[t] = r
        witness[t] = wit
        thin[t] = th
    return sides, insize, witness, thin


# -- all-pairs variant ---------------------------------------------------------
# For graphs small enough to hold an n x n distance table, geodesics become
# parent walks over table rows and thinness a lookup between side vertices;
# only the insize still needs a (short, local) BFS.

@njit(cache=True)
def all_pairs_distances(indptr, indices):
    n = indptr.shape[0] - 1
    table = np.full((n, n), -1, dtype=np.int16)
    queue = np.empty(n, dtype=np.int64)
    for src in range(n):
        row = table[src]
        row[src] = 0
        queue[0] = src
        head = 0
        tail = 1
        while head < tail:
            u = queue[head]
            head += 1
            du = row[u] + 1
            for k in range(indptr[u], indptr[u + 1]):
                w = indices[k]
                if row[w] < 0:
                    row[w] = du
                    queue[tail] = w
                    tail += 1
    return table


@njit(cache=True)
def _walk_back_row(indptr, indices, row, target, path):
    length = row[target]
    v = target
    path[length] = v
    for level in range(length - 1, -1, -1):
        for k in range(indptr[v], indptr[v + 1]):
            w = indices[k]
            if row[w] == level:
                v = w
                break
        path[level] = v
    return length + 1


@njit(cache=True)
def _insize(indptr, indices, paths, lengths, ds, queues):
    heads = np.zeros(3, dtype=np.int64)
    tails = np.zeros(3, dtype=np.int64)
    for s in range(3):
        for i in range(lengths[s]):
            w = paths[s, i]
            if ds[s, w] < 0:
                ds[s, w] = 0
                queues[s, tails[s]] = w
                tails[s] += 1
    witness = -1
    for s in range(3):
        for i in range(tails[s]):
            w = queues[s, i]
            if ds[0, w] >= 0 and ds[1, w] >= 0 and ds[2, w] >= 0:
                if witness < 0 or w < witness:
                    witness = w
    level = 0
    while witness < 0:
        starts = tails.copy()
        progressed = False
        for s in range(3):
            end = tails[s]
            while heads[s] < end:
                u = queues[s, heads[s]]
                heads[s] += 1
                for k in range(indptr[u], indptr[u + 1]):
                    w = indices[k]
                    if ds[s, w] < 0:
                        ds[s, w] = level + 1
                        queues[s, tails[s]] = w
                        tails[s] += 1
                        progressed = True
        level += 1
        for s in range(3):
            for i in range(starts[s], tails[s]):
                w = queues[s, i]
                if ds[0, w] >= 0 and ds[1, w] >= 0 and ds[2, w] >= 0:
                    if witness < 0 or w < witness:
                        witness = w
        if not progressed:
            break
    for s in range(3):
        for i in range(tails[s]):
            ds[s, queues[s, i]] = -1
    if witness < 0:
        return -1, -1
    return level, witness


@njit(cache=True)
def _thinness(table, paths, lengths):
    thin = 0
    for s in range(3):
        o1 = (s + 1) % 3
        o2 = (s + 2) % 3
        for i in range(lengths[s]):
            u = paths[s, i]
            best = -1
            for j in range(lengths[o1]):
                x = table[u, paths[o1, j]]
                if best < 0 or x < best:
                    best = x
            for j in range(lengths[o2]):
                x = table[u, paths[o2, j]]
                if best < 0 or x < best:
                    best = x
            if best > thin:
                thin = best
    return thin


@njit(cache=True)
def triangle_batch_table(indptr, indices, table, triples):
    """Same outputs as :func:`triangle_batch`, using a precomputed distance table."""
    n = indptr.shape[0] - 1
    m = triples.shape[0]
    sides = np.empty((m, 3), dtype=np.int64)
    insize = np.empty(m, dtype=np.int64)
    witness = np.empty(m, dtype=np.int64)
    thin = np.empty(m, dtype=np.int64)
    paths = np.empty((3, n), dtype=np.int64)
    lengths = np.empty(3, dtype=np.int64)
    ds = np.full((3, n), -1, dtype=np.int64)
    queues = np.empty((3, n), dtype=np.int64)
    for t in range(m):
        ok = True
        for s in range(3):
            a = triples[t, s]
            b = triples[t, (s + 1) % 3]
            row = table[a]
            if row[b] < 0:
                ok = False
                sides[t, s] = -1
                lengths[s] = 0
            else:
                lengths[s] = _walk_back_row(indptr, indices, row, b, paths[s])
                sides[t, s] = lengths[s] - 1
        if not ok:
            insize[t] = -1
            witness[t] = -1
            thin[t] = -1
            continue
        r, wit = _insize(indptr, indices, paths, lengths, ds, queues)
        insize[t] = r
        witness[t] = wit
        thin[t] = _thinness(table, paths, lengths)
    return sides, insize, witness, thin
