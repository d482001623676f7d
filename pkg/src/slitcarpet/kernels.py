"""Hot numeric kernels with a compiled (numba) and a pure-Python/numpy backend.

The backend is chosen once at import time: set ``SLITCARPET_NO_NUMBA=1`` to
force the fallback path.  Both backends implement identical algorithms with
identical tie-breaking (heaps keyed by (distance, vertex id)), so results are
bit-for-bit equal; only speed differs.  ``benchmarks/bench_kernels.py``
compares the two.

Kernels:
  dijkstra_vertex   shortest paths where every vertex carries a cost
  dijkstra_edge     classic edge-weighted shortest paths
  min_relsep_pair   closest slit pair under relative distance (scaled integers)
  visibility_matrix exact segment-vs-slit visibility over integer coordinates
"""

from __future__ import annotations

import heapq
import os

import numpy as np

_FORCE_FALLBACK = os.environ.get("SLITCARPET_NO_NUMBA", "") not in ("", "0")

if not _FORCE_FALLBACK:
    try:
        from numba import njit

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a hard dependency
        NUMBA_ENABLED = False
else:
    NUMBA_ENABLED = False

if NUMBA_ENABLED:

    @njit(cache=True)
    def _dijkstra_vertex_nb(indptr, indices, vcost, sources):
        n = vcost.shape[0]
        dist = np.full(n, np.inf)
        parent = np.full(n, -1, np.int64)
        done = np.zeros(n, np.uint8)
        cap = 4096
        hkey = np.empty(cap)
        hid = np.empty(cap, np.int64)
        size = 0
        for si in range(sources.shape[0]):
            s = sources[si]
            d = vcost[s]
            if d < dist[s]:
                dist[s] = d
                if size >= cap:
                    cap *= 2
                    nk = np.empty(cap)
                    ni = np.empty(cap, np.int64)
                    nk[:size] = hkey[:size]
                    ni[:size] = hid[:size]
                    hkey, hid = nk, ni
                hkey[size] = d
                hid[size] = s
                k = size
                size += 1
                while k > 0:
                    p = (k - 1) >> 1
                    if hkey[k] < hkey[p] or (hkey[k] == hkey[p] and hid[k] < hid[p]):
                        hkey[k], hkey[p] = hkey[p], hkey[k]
                        hid[k], hid[p] = hid[p], hid[k]
                        k = p
                    else:
                        break
        while size > 0:
            dk = hkey[0]
            u = hid[0]
            size -= 1
            hkey[0] = hkey[size]
            hid[0] = hid[size]
            k = 0
            while True:
                l = 2 * k + 1
                r = l + 1
                m = k
                if l < size and (
                    hkey[l] < hkey[m] or (hkey[l] == hkey[m] and hid[l] < hid[m])
                ):
                    m = l
                if r < size and (
                    hkey[r] < hkey[m] or (hkey[r] == hkey[m] and hid[r] < hid[m])
                ):
                    m = r
                if m == k:
                    break
                hkey[k], hkey[m] = hkey[m], hkey[k]
                hid[k], hid[m] = hid[m], hid[k]
                k = m
            if done[u]:
                continue
            if dk > dist[u]:
                continue
            done[u] = 1
            for e in range(indptr[u], indptr[u + 1]):
                w = indices[e]
                if done[w]:
                    continue
                nd = dist[u] + vcost[w]
                if nd < dist[w]:
                    dist[w] = nd
                    parent[w] = u
                    if size >= cap:
                        cap *= 2
                        nk = np.empty(cap)
                        ni = np.empty(cap, np.int64)
                        nk[:size] = hkey[:size]
                        ni[:size] = hid[:size]
                        hkey, hid = nk, ni
                    hkey[size] = nd
                    hid[size] = w
                    k = size
                    size += 1
                    while k > 0:
                        p = (k - 1) >> 1
                        if hkey[k] < hkey[p] or (
                            hkey[k] == hkey[p] and hid[k] < hid[p]
                        ):
                            hkey[k], hkey[p] = hkey[p], hkey[k]
                            hid[k], hid[p] = hid[p], hid[k]
                            k = p
                        else:
                            break
        return dist, parent

    @njit(cache=True)
    def _dijkstra_edge_nb(indptr, indices, elen, sources, source_dist):
        n = indptr.shape[0] - 1
        dist = np.full(n, np.inf)
        parent = np.full(n, -1, np.int64)
        done = np.zeros(n, np.uint8)
        cap = 4096
        hkey = np.empty(cap)
        hid = np.empty(cap, np.int64)
        size = 0
        for si in range(sources.shape[0]):
            s = sources[si]
            d = source_dist[si]
            if d < dist[s]:
                dist[s] = d
                if size >= cap:
                    cap *= 2
                    nk = np.empty(cap)
                    ni = np.empty(cap, np.int64)
                    nk[:size] = hkey[:size]
                    ni[:size] = hid[:size]
                    hkey, hid = nk, ni
                hkey[size] = d
                hid[size] = s
                k = size
                size += 1
                while k > 0:
                    p = (k - 1) >> 1
                    if hkey[k] < hkey[p] or (hkey[k] == hkey[p] and hid[k] < hid[p]):
                        hkey[k], hkey[p] = hkey[p], hkey[k]
                        hid[k], hid[p] = hid[p], hid[k]
                        k = p
                    else:
                        break
        while size > 0:
            dk = hkey[0]
            u = hid[0]
            size -= 1
            hkey[0] = hkey[size]
            hid[0] = hid[size]
            k = 0
            while True:
                l = 2 * k + 1
                r = l + 1
                m = k
                if l < size and (
                    hkey[l] < hkey[m] or (hkey[l] == hkey[m] and hid[l] < hid[m])
                ):
                    m = l
                if r < size and (
                    hkey[r] < hkey[m] or (hkey[r] == hkey[m] and hid[r] < hid[m])
                ):
                    m = r
                if m == k:
                    break
                hkey[k], hkey[m] = hkey[m], hkey[k]
                hid[k], hid[m] = hid[m], hid[k]
                k = m
            if done[u]:
                continue
            if dk > dist[u]:
                continue
            done[u] = 1
            for e in range(indptr[u], indptr[u + 1]):
                w = indices[e]
                if done[w]:
                    continue
                nd = dist[u] + elen[e]
                if nd < dist[w]:
                    dist[w] = nd
                    parent[w] = u
                    if size >= cap:
                        cap *= 2
                        nk = np.empty(cap)
                        ni = np.empty(cap, np.int64)
                        nk[:size] = hkey[:size]
                        ni[:size] = hid[:size]
                        hkey, hid = nk, ni
                    hkey[size] = nd
                    hid[size] = w
                    k = size
                    size += 1
                    while k > 0:
                        p = (k - 1) >> 1
                        if hkey[k] < hkey[p] or (
                            hkey[k] == hkey[p] and hid[k] < hid[p]
                        ):
                            hkey[k], hkey[p] = hkey[p], hkey[k]
                            hid[k], hid[p] = hid[p], hid[k]
                            k = p
                        else:
                            break
        return dist, parent

    @njit(cache=True)
    def _min_relsep_pair_nb(xs, y0, y1):
        n = xs.shape[0]
        best_i = 0
        best_j = 1
        best_d2 = np.int64(-1)
        best_m2 = np.int64(1)
        for i in range(n):
            li = y1[i] - y0[i]
            for j in range(i + 1, n):
                lj = y1[j] - y0[j]
                dx = xs[i] - xs[j]
                if dx < 0:
                    dx = -dx
                gap = y0[i] if y0[i] > y0[j] else y0[j]
                hi = y1[i] if y1[i] < y1[j] else y1[j]
                dy = gap - hi
                if dy < 0:
                    dy = 0
                d2 = dx * dx + dy * dy
                m = li if li < lj else lj
                m2 = m * m
                # minimise d2/m2 with exact cross-multiplication
                if best_d2 < 0 or d2 * best_m2 < best_d2 * m2:
                    best_d2 = d2
                    best_m2 = m2
                    best_i = i
                    best_j = j
        return best_i, best_j

    @njit(cache=True)
    def _visibility_matrix_nb(px, py, side, slit_of, sx, slo, shi):
        n = px.shape[0]
        ns = sx.shape[0]
        vis = np.zeros((n, n), np.uint8)
        for a in range(n):
            for b in range(a + 1, n):
                ok = True
                # a sided point may not leave across its own slit line
                if side[a] == 1 and px[b] < px[a]:
                    ok = False
                elif side[a] == -1 and px[b] > px[a]:
                    ok = False
                if ok and side[b] == 1 and px[a] < px[b]:
                    ok = False
                elif ok and side[b] == -1 and px[a] > px[b]:
                    ok = False
                # opposite sides of one slit must route around a tip
                if (
                    ok
                    and slit_of[a] >= 0
                    and slit_of[a] == slit_of[b]
                    and side[a] != 0
                    and side[b] != 0
                    and side[a] != side[b]
                ):
                    ok = False
                if ok:
                    ax, ay = px[a], py[a]
                    bx, by = px[b], py[b]
                    for s in range(ns):
                        da = ax - sx[s]
                        db = bx - sx[s]
                        if (da > 0 and db > 0) or (da < 0 and db < 0):
                            continue
                        if da == 0 or db == 0:
                            continue
                        d = bx - ax
                        num = ay * d + (sx[s] - ax) * (by - ay)
                        if d > 0:
                            if slo[s] * d < num < shi[s] * d:
                                ok = False
                                break
                        else:
                            if shi[s] * d < num < slo[s] * d:
                                ok = False
                                break
                if ok:
                    vis[a, b] = 1
                    vis[b, a] = 1
        return vis


# ---------------------------------------------------------------------------
# pure-Python / numpy fallbacks (identical semantics)
# ---------------------------------------------------------------------------


def _dijkstra_vertex_py(indptr, indices, vcost, sources):
    n = vcost.shape[0]
    dist = np.full(n, np.inf)
    parent = np.full(n, -1, np.int64)
    done = np.zeros(n, np.uint8)
    heap: list = []
    for s in sources:
        s = int(s)
        d = float(vcost[s])
        if d < dist[s]:
            dist[s] = d
            heapq.heappush(heap, (d, s))
    while heap:
        dk, u = heapq.heappop(heap)
        if done[u] or dk > dist[u]:
            continue
        done[u] = 1
        du = dist[u]
        for e in range(indptr[u], indptr[u + 1]):
            w = int(indices[e])
            if done[w]:
                continue
            nd = du + vcost[w]
            if nd < dist[w]:
                dist[w] = nd
                parent[w] = u
                heapq.heappush(heap, (nd, w))
    return dist, parent


def _dijkstra_edge_py(indptr, indices, elen, sources, source_dist):
    n = indptr.shape[0] - 1
    dist = np.full(n, np.inf)
    parent = np.full(n, -1, np.int64)
    done = np.zeros(n, np.uint8)
    heap: list = []
    for si in range(len(sources)):
        s = int(sources[si])
        d = float(source_dist[si])
        if d < dist[s]:
            dist[s] = d
            heapq.heappush(heap, (d, s))
    while heap:
        dk, u = heapq.heappop(heap)
        if done[u] or dk > dist[u]:
            continue
        done[u] = 1
        du = dist[u]
        for e in range(indptr[u], indptr[u + 1]):
            w = int(indices[e])
            if done[w]:
                continue
            nd = du + elen[e]
            if nd < dist[w]:
                dist[w] = nd
                parent[w] = u
                heapq.heappush(heap, (nd, w))
    return dist, parent


def _min_relsep_pair_py(xs, y0, y1):
    # Vectorised float prefilter, then exact integer confirmation on the
    # near-minimal band; returns the lexicographically first exact minimiser,
    # matching the compiled backend's scan order.
    n = xs.shape[0]
    lens = y1 - y0
    ratios = []
    rows = []
    for i in range(n - 1):
        dx = np.abs(xs[i + 1 :] - xs[i])
        gap = np.maximum(y0[i + 1 :], y0[i]) - np.minimum(y1[i + 1 :], y1[i])
        np.maximum(gap, 0, out=gap)
        d2 = dx * dx + gap * gap
        m = np.minimum(lens[i + 1 :], lens[i])
        m2 = m * m
        ratios.append(d2 / m2)
        rows.append((d2, m2))
    fmin = min(float(r.min()) for r in ratios)
    band = fmin * (1.0 + 1e-9) + 1e-300
    best = None  # (d2, m2, i, j)
    for i in range(n - 1):
        r = ratios[i]
        idx = np.nonzero(r <= band)[0]
        d2, m2 = rows[i]
        for k in idx:
            cand = (int(d2[k]), int(m2[k]), i, i + 1 + int(k))
            if best is None or cand[0] * best[1] < best[0] * cand[1]:
                best = cand
    assert best is not None
    return best[2], best[3]


def _visibility_matrix_py(px, py, side, slit_of, sx, slo, shi):
    n = px.shape[0]
    vis = np.ones((n, n), np.uint8)
    np.fill_diagonal(vis, 0)
    pxc = px[:, None]
    pxr = px[None, :]
    # side rules (symmetric)
    bad = ((side == 1)[:, None] & (pxr < pxc)) | ((side == -1)[:, None] & (pxr > pxc))
    bad |= bad.T
    same = (slit_of[:, None] >= 0) & (slit_of[:, None] == slit_of[None, :])
    opposite = (side[:, None] * side[None, :]) == -1
    bad |= same & opposite
    vis[bad] = 0
    # transversal crossings, one slit at a time over all pairs
    ax = px[:, None].astype(np.int64)
    ay = py[:, None].astype(np.int64)
    bx = px[None, :].astype(np.int64)
    by = py[None, :].astype(np.int64)
    d = bx - ax
    dy = by - ay
    for s in range(sx.shape[0]):
        da = ax - sx[s]
        db = bx - sx[s]
        straddle = ((da > 0) & (db < 0)) | ((da < 0) & (db > 0))
        if not straddle.any():
            continue
        num = ay * d + (sx[s] - ax) * dy
        lo = slo[s] * d
        hi = shi[s] * d
        inside = np.where(
            d > 0, (lo < num) & (num < hi), (hi < num) & (num < lo)
        )
        vis[straddle & inside] = 0
    return vis


# ---------------------------------------------------------------------------
# public dispatch
# ---------------------------------------------------------------------------


def dijkstra_vertex(indptr, indices, vcost, sources):
    """Multi-source shortest paths where entering vertex w costs vcost[w].

    The cost of a path includes the cost of its first vertex.  Ties are broken
    toward smaller vertex ids, so results are deterministic (and identical
    across backends).  Returns (dist, parent).
    """
    sources = np.asarray(sources, dtype=np.int64)
    if NUMBA_ENABLED:
        return _dijkstra_vertex_nb(indptr, indices, vcost, sources)
    return _dijkstra_vertex_py(indptr, indices, vcost, sources)


def dijkstra_edge(indptr, indices, elen, sources, source_dist=None):
    """Multi-source edge-weighted shortest paths; returns (dist, parent)."""
    sources = np.asarray(sources, dtype=np.int64)
    if source_dist is None:
        source_dist = np.zeros(len(sources))
    else:
        source_dist = np.asarray(source_dist, dtype=np.float64)
    if NUMBA_ENABLED:
        return _dijkstra_edge_nb(indptr, indices, elen, sources, source_dist)
    return _dijkstra_edge_py(indptr, indices, elen, sources, source_dist)


def min_relsep_pair(xs, y0, y1):
    """Index pair (i, j) of vertical segments minimising dist/min-diameter.

    Coordinates must be integers (pre-scaled); comparisons cross-multiply, so
    inputs must stay below 2**15 to avoid overflow.  Exact.
    """
    if NUMBA_ENABLED:
        return _min_relsep_pair_nb(xs, y0, y1)
    return _min_relsep_pair_py(xs, y0, y1)


def visibility_matrix(px, py, side, slit_of, sx, slo, shi):
    """Symmetric 0/1 matrix of point pairs joinable by a straight segment.

    A pair is visible when the segment crosses no slit interior transversally
    and respects the side tags of its endpoints (a point tagged to one side of
    a slit cannot leave across that slit, and opposite sides of one slit are
    never mutually visible).  All tests are exact over integer coordinates.
    """
    if NUMBA_ENABLED:
        return _visibility_matrix_nb(px, py, side, slit_of, sx, slo, shi)
    return _visibility_matrix_py(px, py, side, slit_of, sx, slo, shi)
